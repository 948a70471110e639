"""Sweeps: expand a configuration into cells, evaluate them and collect the reports.

Cells are plain pydantic models so that they cross process boundaries; every
evaluation is a pure function of its cell, which keeps the sorted report list
identical for any number of workers.
"""

import csv
import logging
import random
import re
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from qbailey.config import settings
from qbailey.exceptions import InvalidParameters, QSeriesError
from qbailey.schemas import (
    VARIANTS,
    SeriesEnvelope,
    SigmaPolicy,
    SweepCell,
    SweepConfig,
    Target,
    VerificationReport,
    VerificationStatus,
)
from qbailey.services.bailey import (
    INF,
    BaileyPair,
    ConjugatePair,
    RhoParam,
    Seed,
    ShippedKernel,
    beta_from_alpha,
    seed_pair,
    shipped_conjugate_transform,
    transform_AB,
    transform_chain_q,
    transform_lattice,
    transform_lattice2,
    verify_bailey,
    verify_conjugate,
    verify_constructions,
)
from qbailey.services.hierarchy import (
    HierarchyParams,
    check_recurrences,
    hl_conjugate,
    telescopic_check,
    verify_gamma_delta,
    verify_hl_conjugate,
    verify_lemma33,
)
from qbailey.services.identities import (
    GGVariant,
    IdentityCell,
    ag_bressoud_sum,
    corollary_proof_sum_checks,
    gg_sum,
    thm44_lhs,
    verify_ag_bressoud,
    verify_corollary_pipeline,
    verify_gg,
    verify_hl_lemma,
    verify_thm44,
    verify_triple_product,
)
from qbailey.services.lattice import Partition, SigmaContext, partitions
from qbailey.services.series import LaurentSeries, Window
from qbailey.services.string_functions import (
    StringFunctionIndex,
    hecke_form,
    string_grid,
    verify_e55,
    verify_lattice_string,
    verify_string_symmetries,
)
from qbailey.services.verify import skipped

logger = logging.getLogger(__name__)

Handler = Callable[[SweepCell, Window], VerificationReport]

TRANSFORMS = {
    "ab": transform_AB,
    "lattice": transform_lattice,
    "chain": transform_chain_q,
    "lattice2": transform_lattice2,
}

HL_SEEDS = {
    "I": (Seed.I, 0),
    "II": (Seed.II, 0),
    "III0": (Seed.III, 0),
    "III1": (Seed.III, 1),
}

DEFAULT_AUDIT_L_MAX = 4


def target_denominator(target: Target, n: int = 1, variant: Optional[str] = None) -> int:
    """Exponent grid on which a target's windows are measured."""
    if target is Target.STRING_FUNCTIONS:
        return string_grid(n)
    if target is Target.COROLLARY:
        return 2 if variant == "aux" else 1
    if target in (Target.TELESCOPIC, Target.TRANSFORMS_AUDIT):
        return 1
    return 2 * n


def seed_for(name: str) -> BaileyPair:
    if name not in HL_SEEDS:
        raise InvalidParameters(f"Unknown seed pair {name!r}; use one of {list(HL_SEEDS)}")
    which, delta = HL_SEEDS[name]
    return seed_pair(which, delta)


# ------------------------------------------------------------------ expansion


def _lattice_key(n: int, ell: int, lam: List[int], sigma: int) -> str:
    return f"N={n}/ell={ell}/lambda={lam}/sigma={sigma}"


class _Expander:
    """Walks the grid of one configuration and emits its cells."""

    def __init__(self, config: SweepConfig):
        self.config = config

    def cell(self, key: str, n: int = 1, variant: Optional[str] = None, **params: Any) -> SweepCell:
        c = self.config
        denom = target_denominator(c.target, n, variant)
        if c.order_numerator is not None:
            numerator = c.order_numerator
        else:
            numerator = (c.order or 0) * denom
        return SweepCell(
            key=key,
            target=c.target,
            variant=variant,
            params=params,
            denom=denom,
            order_numerator=numerator,
            seed=params.get("seed"),
        )

    def variants(self) -> Sequence[str]:
        c = self.config
        if c.variant is not None:
            return (c.variant,)
        return VARIANTS.get(c.target, (None,))  # type: ignore[return-value]

    def partitions_for(self, n: int) -> List[Partition]:
        c = self.config
        if c.partitions is not None:
            found = []
            for parts in c.partitions:
                lam = Partition(parts)
                if all(p <= n - 1 for p in lam.parts):
                    found.append(lam)
            return found
        return partitions(c.max_weight, n - 1)

    def sigmas_for(self, n: int, ell: int, lam: Partition) -> List[int]:
        policy = self.config.sigma
        if policy is SigmaPolicy.ALL:
            return SigmaContext.sigmas(n, ell, lam)
        # an explicit sigma with the wrong parity is reported as skipped
        return [int(policy.value)]

    def lattice_grid(
        self, ells: Optional[Sequence[int]] = None
    ) -> Iterator[Tuple[int, int, List[int], int]]:
        c = self.config
        for n in c.N:
            for ell in ells if ells is not None else c.ell:
                for lam in self.partitions_for(n):
                    for sigma in self.sigmas_for(n, ell, lam):
                        yield n, ell, list(lam.parts), sigma

    def k_values(self, default: Sequence[int]) -> List[int]:
        return list(self.config.k) or list(default)

    def i_values(self, top: int) -> List[int]:
        if self.config.i is not None:
            return list(self.config.i)
        return list(range(1, top + 1))

    def bounds(self) -> List[int]:
        return list(self.config.M) or [3]

    # -------------------------------------------------------------- targets

    def conjugate_pair(self) -> Iterator[SweepCell]:
        tag = "corrupt/" if self.config.corrupt_delta else ""
        for n, ell, lam, sigma in self.lattice_grid():
            for M in self.bounds():
                for k in self.k_values([0]):
                    if k > M:
                        continue
                    key = f"conjugate-pair/{tag}{_lattice_key(n, ell, lam, sigma)}/M={M}/k={k}"
                    yield self.cell(
                        key, n, N=n, ell=ell, lam=lam, sigma=sigma, M=M, k=k,
                        corrupt=self.config.corrupt_delta,
                    )

    def gamma_delta(self) -> Iterator[SweepCell]:
        for n, ell, lam, sigma in self.lattice_grid():
            for M in self.bounds():
                key = f"gamma-delta-pair/{_lattice_key(n, ell, lam, sigma)}/M={M}"
                yield self.cell(key, n, N=n, ell=ell, lam=lam, sigma=sigma, M=M)

    def lemma33(self) -> Iterator[SweepCell]:
        for n, ell, lam, sigma in self.lattice_grid():
            for M in self.bounds():
                key = f"lemma33/{_lattice_key(n, ell, lam, sigma)}/M={M}"
                yield self.cell(key, n, N=n, ell=ell, lam=lam, sigma=sigma, M=M)

    def recurrences(self) -> Iterator[SweepCell]:
        for n, ell, lam, sigma in self.lattice_grid():
            for M in self.bounds():
                for L in range(M + 1):
                    for k in range(M - L + 1):
                        for side in ("f1", "f2"):
                            key = (
                                f"recurrences/{side}/{_lattice_key(n, ell, lam, sigma)}"
                                f"/M={M}/L={L}/k={k}"
                            )
                            yield self.cell(
                                key, n, N=n, ell=ell, lam=lam, sigma=sigma, M=M, L=L, k=k, side=side
                            )

    def telescopic(self) -> Iterator[SweepCell]:
        span = range(-self.config.span, self.config.span + 1)
        for variant in self.variants():
            for n in self.config.N:
                for A in product(span, repeat=n - 1):
                    for B in product(span, repeat=n - 1):
                        key = f"telescopic/{variant}/N={n}/A={list(A)}/B={list(B)}"
                        yield self.cell(key, n, variant, N=n, A=list(A), B=list(B))

    def hl_lemma(self) -> Iterator[SweepCell]:
        for variant in self.variants():
            ell = seed_for(variant).ell
            for n, _, lam, sigma in self.lattice_grid([ell]):
                key = f"hl-lemma/{variant}/N={n}/lambda={lam}/sigma={sigma}"
                yield self.cell(key, n, variant, N=n, lam=lam, sigma=sigma)

    def thm44(self) -> Iterator[SweepCell]:
        for n, _, lam, sigma in self.lattice_grid([0]):
            for delta in self.config.delta:
                for k in self.k_values([2, 3]):
                    for i in self.i_values(k):
                        key = f"thm44/N={n}/delta={delta}/k={k}/i={i}/lambda={lam}/sigma={sigma}"
                        yield self.cell(key, n, N=n, delta=delta, k=k, i=i, lam=lam, sigma=sigma)

    def corollary(self) -> Iterator[SweepCell]:
        c = self.config
        for variant in self.variants():
            if variant == "aux":
                for weight in range(0, c.max_weight + 1, 2):
                    for r1 in c.r1 or range(4):
                        key = f"corollary/aux/lambda={weight}/r1={r1}"
                        yield self.cell(key, 1, variant, weight=weight, r1=r1)
                continue
            for k in self.k_values([2, 3]):
                if variant in ("N2a", "N2b"):
                    top = k if variant == "N2a" else k - 1
                    for i in self.i_values(top):
                        yield self.cell(f"corollary/{variant}/k={k}/i={i}", 1, variant, k=k, i=i)
                    continue
                for delta in c.delta:
                    for i in self.i_values(k + delta - 1):
                        base = f"corollary/{variant}/k={k}/i={i}/delta={delta}"
                        if variant != "pipeline":
                            yield self.cell(base, 1, variant, k=k, i=i, delta=delta)
                            continue
                        for weight in range(0, c.max_weight + 1, 2):
                            yield self.cell(
                                f"{base}/lambda={weight}", 1, variant,
                                k=k, i=i, delta=delta, weight=weight,
                            )

    def string_functions(self) -> Iterator[SweepCell]:
        c = self.config
        for variant in self.variants():
            for n in c.N:
                if variant == "e55":
                    for name in HL_SEEDS:
                        ell = seed_for(name).ell
                        for ell_p in range(n):
                            for sigma in (0, 1):
                                if (ell + ell_p + sigma * n) % 2:
                                    continue
                                key = f"string-functions/e55/{name}/N={n}/l'={ell_p}/sigma={sigma}"
                                yield self.cell(
                                    key, n, variant, N=n, seed_name=name, ell_p=ell_p, sigma=sigma
                                )
                    continue
                ells = range(n + 1) if variant == "symmetry" else range(n)
                for ell in ells:
                    charges = c.m if c.m is not None else range(-ell, ell + 1, 2)
                    for m in charges:
                        if (ell - m) % 2 or (variant == "symmetry" and abs(m) > ell):
                            continue
                        key = f"string-functions/{variant}/N={n}/l={ell}/m={m}"
                        yield self.cell(key, n, variant, N=n, ell=ell, m=m)

    def transforms_audit(self) -> Iterator[SweepCell]:
        c = self.config
        cases = c.cases if c.cases is not None else settings.AUDIT_CASES
        seed = c.seed if c.seed is not None else settings.AUDIT_SEED
        for variant in self.variants():
            if variant == "chains":
                L_max = max(c.M) if c.M else DEFAULT_AUDIT_L_MAX
                for delta in c.delta:
                    for k in self.k_values([2, 3, 4]):
                        for i in self.i_values(k):
                            key = f"transforms-audit/chains/k={k}/i={i}/delta={delta}"
                            yield self.cell(key, 1, variant, k=k, i=i, delta=delta, L_max=L_max)
                continue
            for case in range(cases):
                key = f"transforms-audit/{variant}/seed={seed}/case={case:05d}"
                yield self.cell(key, 1, variant, case=case, seed=seed)

    def conjugate_transform(self) -> Iterator[SweepCell]:
        for variant in self.variants():
            for n, ell, lam, sigma in self.lattice_grid():
                for M in self.bounds():
                    key = f"conjugate-transform/{variant}/{_lattice_key(n, ell, lam, sigma)}/M={M}"
                    yield self.cell(key, n, variant, N=n, ell=ell, lam=lam, sigma=sigma, M=M)


EXPANDERS: Dict[Target, Callable[[_Expander], Iterator[SweepCell]]] = {
    Target.CONJUGATE_PAIR: _Expander.conjugate_pair,
    Target.GAMMA_DELTA: _Expander.gamma_delta,
    Target.LEMMA33: _Expander.lemma33,
    Target.RECURRENCES: _Expander.recurrences,
    Target.TELESCOPIC: _Expander.telescopic,
    Target.HL_LEMMA: _Expander.hl_lemma,
    Target.THM44: _Expander.thm44,
    Target.COROLLARY: _Expander.corollary,
    Target.STRING_FUNCTIONS: _Expander.string_functions,
    Target.TRANSFORMS_AUDIT: _Expander.transforms_audit,
    Target.CONJUGATE_TRANSFORM: _Expander.conjugate_transform,
}


def expand_cells(config: SweepConfig) -> List[SweepCell]:
    """All cells of a configuration, sorted by key."""
    cells = list(EXPANDERS[config.target](_Expander(config)))
    unique = {cell.key: cell for cell in cells}
    if len(unique) != len(cells):
        logger.debug(f"Dropped {len(cells) - len(unique)} duplicate cells")
    return [unique[key] for key in sorted(unique)]


# ----------------------------------------------------------------- handlers


def _params(cell: SweepCell) -> HierarchyParams:
    p = cell.params
    return HierarchyParams.of(p["M"], p["N"], p["ell"], p["lam"], p["sigma"])


def corrupted(cp: ConjugatePair) -> ConjugatePair:
    """Negative control: add 1 to the last entry of delta."""
    top = cp.delta_support

    def delta(L: int, w: Window) -> LaurentSeries:
        value = cp.delta(L, w)
        return value + w.one() if L == top else value

    return ConjugatePair(cp.ell, cp.gamma, delta, top, cp.gamma_support, f"{cp.name}+corrupt")


def _conjugate_pair(cell: SweepCell, w: Window) -> VerificationReport:
    params = _params(cell)
    k = cell.params["k"]
    if cell.params.get("corrupt"):
        return verify_conjugate(corrupted(hl_conjugate(params, k)), params.M - k, w)
    return verify_hl_conjugate(params, w, k)


def _gamma_delta(cell: SweepCell, w: Window) -> VerificationReport:
    return verify_gamma_delta(_params(cell), w)


def _lemma33(cell: SweepCell, w: Window) -> VerificationReport:
    params = _params(cell)
    return verify_lemma33(params.ctx, params.M, w)


def _recurrences(cell: SweepCell, w: Window) -> VerificationReport:
    p = cell.params
    params = _params(cell)
    return check_recurrences(p["side"], params.ctx, params.M, p["L"], p["k"], w)


def _telescopic(cell: SweepCell, w: Window) -> VerificationReport:
    p = cell.params
    return telescopic_check(p["N"], tuple(p["A"]), tuple(p["B"]), cell.variant or "rtele")


def _hl_lemma(cell: SweepCell, w: Window) -> VerificationReport:
    p = cell.params
    return verify_hl_lemma(seed_for(cell.variant or "I"), p["N"], p["lam"], p["sigma"], w)


def _identity_cell(p: dict) -> IdentityCell:
    return IdentityCell(p["N"], p["delta"], p["k"], p["i"], p["lam"], p["sigma"])


def _thm44(cell: SweepCell, w: Window) -> VerificationReport:
    return verify_thm44(_identity_cell(cell.params), w, via_pair=cell.params.get("via_pair", False))


def _corollary(cell: SweepCell, w: Window) -> VerificationReport:
    p = cell.params
    variant = cell.variant
    if variant == "N1":
        return verify_ag_bressoud(p["k"], p["i"], p["delta"], w)
    if variant in ("N2a", "N2b"):
        return verify_gg(p["k"], p["i"], GGVariant(variant), w)
    if variant == "pipeline":
        return verify_corollary_pipeline(p["k"], p["i"], p["delta"], p["weight"], w)
    if variant == "aux":
        return corollary_proof_sum_checks(p["weight"], p["r1"], w)
    if variant == "triple-product":
        return verify_triple_product(p["k"], p["i"], p["delta"], w)
    raise InvalidParameters(f"Unknown corollary variant {variant!r}")


def _string_functions(cell: SweepCell, w: Window) -> VerificationReport:
    p = cell.params
    if cell.variant == "symmetry":
        return verify_string_symmetries(p["N"], p["ell"], p["m"], w)
    if cell.variant == "lattice":
        return verify_lattice_string(p["N"], p["ell"], p["m"], w)
    bp = seed_for(p["seed_name"])
    return verify_e55(bp, p["N"], p["ell_p"], p["sigma"], w, string_form=True)


def random_rho(rng: random.Random, base: int) -> RhoParam:
    """Infinite half the time, otherwise ``q^c`` with ``c`` a half-integer off ``base + N``."""
    if rng.random() < 0.5:
        return INF
    while True:
        c = Fraction(rng.randint(-3, 7), 2)
        gap = base - c
        if gap.denominator != 1 or gap > 0:
            return RhoParam.finite(c)


def random_bailey_pair(rng: random.Random, ell: int, support: int, name: str) -> BaileyPair:
    """A pair with random Laurent-polynomial ``alpha`` supported on ``L <= support``."""
    alphas = {
        L: LaurentSeries([rng.randint(-3, 3) for _ in range(rng.randint(1, 4))], rng.randint(0, 3))
        for L in range(support + 1)
    }
    return beta_from_alpha(ell, lambda L, w: w.fit(alphas[L]), support, name)


def _transforms_audit(cell: SweepCell, w: Window) -> VerificationReport:
    p = cell.params
    if cell.variant == "chains":
        return verify_constructions(p["k"], p["i"], p["delta"], p["L_max"], w)
    variant = cell.variant or "ab"
    rng = random.Random(f"{p['seed']}:{variant}:{p['case']}")
    ell = rng.choice([1, 2]) if variant in ("lattice", "lattice2") else rng.choice([0, 1, 2])
    support = rng.randint(0, 3)
    base = ell if variant == "lattice" else ell + 1
    rho1, rho2 = random_rho(rng, base), random_rho(rng, base)
    bp = random_bailey_pair(rng, ell, support, f"random-{p['case']}")
    out = TRANSFORMS[variant](bp, rho1, rho2)
    report = verify_bailey(out, support + 2, w, cell.key)
    info = {"ell": ell, "support": support, "rho1": repr(rho1), "rho2": repr(rho2)}
    return report.model_copy(update={"seed": p["seed"], "info": info})


def _conjugate_transform(cell: SweepCell, w: Window) -> VerificationReport:
    params = _params(cell)
    cp = shipped_conjugate_transform(hl_conjugate(params), ShippedKernel(cell.variant or "ab"))
    return verify_conjugate(cp, params.M, w)


HANDLERS: Dict[Target, Handler] = {
    Target.CONJUGATE_PAIR: _conjugate_pair,
    Target.GAMMA_DELTA: _gamma_delta,
    Target.LEMMA33: _lemma33,
    Target.RECURRENCES: _recurrences,
    Target.TELESCOPIC: _telescopic,
    Target.HL_LEMMA: _hl_lemma,
    Target.THM44: _thm44,
    Target.COROLLARY: _corollary,
    Target.STRING_FUNCTIONS: _string_functions,
    Target.TRANSFORMS_AUDIT: _transforms_audit,
    Target.CONJUGATE_TRANSFORM: _conjugate_transform,
}


def cell_window(cell: SweepCell) -> Window:
    return Window(cell.denom, cell.order_numerator)


def evaluate_cell(cell: SweepCell) -> VerificationReport:
    """Evaluate one cell; engine errors become skipped or failing reports."""
    try:
        report = HANDLERS[cell.target](cell, cell_window(cell))
    except InvalidParameters as e:
        return skipped(cell.key, cell.target, str(e))
    except QSeriesError as e:
        logger.error(f"{cell.key}: {type(e).__name__}: {e}")
        return VerificationReport(
            key=cell.key,
            target=cell.target,
            status=VerificationStatus.FAIL,
            detail=f"{type(e).__name__}: {e}",
        )
    return report.model_copy(update={"key": cell.key})


def run_cells(cells: Sequence[SweepCell], workers: int = 1) -> List[VerificationReport]:
    """Evaluate cells, in a process pool when ``workers > 1``; reports come back sorted by key."""
    if workers > 1 and len(cells) > 1:
        chunk = max(1, len(cells) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(evaluate_cell, cells, chunksize=chunk))
    else:
        reports = [evaluate_cell(cell) for cell in cells]
    return sorted(reports, key=lambda r: r.key)


def run_sweep(config: SweepConfig, workers: Optional[int] = None) -> List[VerificationReport]:
    cells = expand_cells(config)
    workers = workers or config.workers or settings.WORKERS
    logger.info(f"Sweep {config.target.value}: {len(cells)} cells on {workers} worker(s)")
    reports = run_cells(cells, workers)
    counts = summarize(reports)
    logger.info(f"Sweep {config.target.value} finished: {counts}")
    return reports


def summarize(reports: Sequence[VerificationReport]) -> Dict[str, int]:
    counts = {status.value: 0 for status in VerificationStatus}
    for report in reports:
        counts[report.status.value] += 1
    return counts


def exit_status(reports: Sequence[VerificationReport], table_errors: int = 0) -> int:
    """0 when nothing failed or stayed unverified, 1 on any failure, otherwise 3.

    A coefficient table that could not be computed counts as a failure.
    """
    statuses = {r.status for r in reports}
    if VerificationStatus.FAIL in statuses or table_errors:
        return 1
    if VerificationStatus.UNVERIFIED in statuses:
        return 3
    return 0


# ------------------------------------------------------------------- output


def write_reports(
    reports: Sequence[VerificationReport], path: Path, omit_timings: bool = False
) -> Path:
    """Write one JSON report per line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    exclude = {"wall_time"} if omit_timings else None
    with path.open("w", encoding="utf-8") as f:
        for report in reports:
            f.write(report.model_dump_json(exclude=exclude) + "\n")
    logger.info(f"Wrote {len(reports)} reports to {path}")
    return path


def write_table(series: LaurentSeries, path: Path) -> Path:
    """Write ``exponent_num,denom,coefficient`` rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["exponent_num", "denom", "coefficient"])
        for row in SeriesEnvelope.from_series(series).rows():
            writer.writerow([row.exponent_num, row.denom, row.coefficient])
    return path


def table_for_cell(cell: SweepCell) -> Optional[LaurentSeries]:
    """The sum side of a cell, for targets that have one worth tabulating."""
    p = cell.params
    w = cell_window(cell)
    if cell.target is Target.THM44:
        return thm44_lhs(_identity_cell(p), w)
    if cell.target is Target.COROLLARY and cell.variant == "N1":
        return ag_bressoud_sum(p["k"], p["i"], p["delta"], w)
    if cell.target is Target.COROLLARY and cell.variant in ("N2a", "N2b"):
        return gg_sum(p["k"], p["i"], GGVariant(cell.variant), w)
    if cell.target is Target.STRING_FUNCTIONS and cell.variant == "symmetry":
        idx = StringFunctionIndex(p["N"], p["ell"], p["m"])
        return hecke_form(idx.n, idx.ell, idx.m, w)
    return None


def table_name(key: str) -> str:
    return re.sub(r"[^A-Za-z0-9=._-]+", "_", key).strip("_") + ".csv"


def write_tables(cells: Sequence[SweepCell], directory: Path) -> Tuple[int, int]:
    """Coefficient tables for every tabulable cell.

    Returns:
        The number of tables written and the number of cells whose table failed.
    """
    written = 0
    errors = 0
    for cell in cells:
        try:
            series = table_for_cell(cell)
            if series is None:
                continue
            write_table(series, directory / table_name(cell.key))
            written += 1
        except QSeriesError as e:
            logger.error(f"Table for {cell.key} failed: {e}")
            errors += 1
    logger.info(f"Wrote {written} tables to {directory} ({errors} errors)")
    return written, errors
