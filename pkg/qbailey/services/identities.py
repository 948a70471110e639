"""Identities built on the level-N conjugate pairs.

The M -> infinity pairing of a Bailey pair relative to ``a = q^ell`` with the level-N
conjugate pair gives

    1/(aq)_inf sum_L a^(L/N) q^(L^2/N) alpha_L eta_sum(L) = sum_L a^(L/N) q^(L^2/N) beta_L n_sum(L),

and feeding it the chained pairs relative to 1 gives a two-sided identity indexed by
``(N, delta, k, i, lambda, sigma)``. At ``N = 1`` and ``N = 2`` that identity
specializes to Rogers-Ramanujan type sum = product identities, which are computed here
from their sum and product sides independently.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from qbailey.exceptions import InvalidParameters
from qbailey.schemas import Target, VerificationReport
from qbailey.services.bailey import BaileyPair, chained_pair, constructions_for, descending_chains
from qbailey.services.lattice import (
    Partition,
    SigmaContext,
    delta_sum,
    eta_sum,
    quad_form,
    restricted_eta_sum,
)
from qbailey.services.qtools import (
    PochhammerSpec,
    ResidueCondition,
    euler,
    gauss_binom,
    inv_base_factorial,
    inv_euler,
    inv_qfac,
    inv_shifted,
    pochhammer,
    residue_product,
)
from qbailey.services.series import (
    Exponent,
    LaurentSeries,
    ValuationBound,
    Window,
    at_order,
    bilateral_sum,
    sum_terms,
)
from qbailey.services.verify import Check, run_checks

logger = logging.getLogger(__name__)


def _sign(j: int) -> int:
    return -1 if j % 2 else 1


def eta_floor(ctx: SigmaContext) -> Fraction:
    """Lower bound ``-e_lambda C^{-1} e_lambda / 4`` of ``x C^{-1}(x - e_lambda)`` over all ``x``."""
    return -quad_form(ctx.cartan, ctx.e_lam, ctx.cartan.zero()) / 4


def nonnegative_part(s: LaurentSeries) -> LaurentSeries:
    """The series with every coefficient replaced by its absolute value."""
    return LaurentSeries([abs(c) for c in s.coeffs], s.lo, s.denom, s.order)


def _lemma_bound(ctx: SigmaContext, bound: Optional[ValuationBound]) -> Optional[ValuationBound]:
    """Valuation bound of ``a^(L/N) q^(L^2/N) s_L`` times an eta or n sum, given one for ``s_L``."""
    if bound is None:
        return None
    n = ctx.n
    return ValuationBound(Fraction(1, n), Fraction(ctx.ell, n), eta_floor(ctx)) + bound


# ------------------------------------------------------ hierarchy lemma


def hl_lemma_lhs(
    bp: BaileyPair, n: int, lam: Sequence[int], sigma: int, window: Window
) -> LaurentSeries:
    """``1/(aq)_inf sum_L a^(L/N) q^(L^2/N) alpha_L`` times the restricted non-negative eta sum.

    Raises:
        InvalidParameters: if ``ell + |lambda| + sigma*N`` is odd or a part exceeds ``N-1``.
        NonTerminatingSum: if alpha has neither a support nor a valuation bound.
    """
    ctx = SigmaContext(n, bp.ell, Partition(lam), sigma)

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(2 * n)

        def term(L: int) -> LaurentSeries:
            a = bp.alpha(L, w)
            if a.is_zero:
                return a
            pref = w.monomial(1, Fraction(ctx.ell * L + L * L, n))
            return pref * a * restricted_eta_sum(ctx, L, w)

        total = sum_terms(term, w, 0, bp.support, _lemma_bound(ctx, bp.alpha_bound))
        return total * inv_shifted(ctx.ell + 1, None, w)

    return at_order(window, compute)


def hl_lemma_rhs(
    bp: BaileyPair, n: int, lam: Sequence[int], sigma: int, window: Window
) -> LaurentSeries:
    """``sum_L a^(L/N) q^(L^2/N) beta_L`` times the exact n-sum with Gaussian polynomials.

    Raises:
        NonTerminatingSum: if the pair gives no valuation bound for beta.
    """
    ctx = SigmaContext(n, bp.ell, Partition(lam), sigma)

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(2 * n)

        def term(L: int) -> LaurentSeries:
            body = delta_sum(ctx, L)
            if body.is_zero:
                return LaurentSeries((), 0, w.denom, None)
            b = bp.beta(L, w)
            return w.monomial(1, Fraction(ctx.ell * L + L * L, n)) * b * body

        return sum_terms(term, w, 0, None, _lemma_bound(ctx, bp.beta_bound(w)))

    return at_order(window, compute)


def verify_hl_lemma(
    bp: BaileyPair,
    n: int,
    lam: Sequence[int],
    sigma: int,
    window: Window,
    key: Optional[str] = None,
) -> VerificationReport:
    w = window.refine(2 * n)
    key = key or f"hl-lemma/{bp.name}/N={n}/lambda={list(lam)}/sigma={sigma}"

    def checks() -> Iterator[Check]:
        yield "lemma", hl_lemma_lhs(bp, n, lam, sigma, w), hl_lemma_rhs(bp, n, lam, sigma, w)

    return run_checks(key, Target.HL_LEMMA, checks, w)


# ------------------------------------------------------ two-sided identity


class IdentityCell:
    """One instance ``(N, delta, k, i, lambda, sigma)`` of the two-sided identity.

    The restricted sums are taken with ``ell = 0``. Any ``1 <= i <= k`` is accepted; the
    product forms at ``N = 1`` only cover ``i <= k + delta - 1``.
    """

    def __init__(self, n: int, delta: int, k: int, i: int, lam: Sequence[int] = (), sigma: int = 0):
        if delta not in (0, 1):
            raise InvalidParameters(f"delta must be 0 or 1, got {delta}")
        if k < 2:
            raise InvalidParameters(f"k must be at least 2, got {k}")
        if not 1 <= i <= k:
            raise InvalidParameters(f"i must satisfy 1 <= i <= k={k}, got {i}")
        self.ctx = SigmaContext(n, 0, Partition(lam), sigma)
        self.delta = delta
        self.k = k
        self.i = i

    @property
    def n(self) -> int:
        return self.ctx.n

    @property
    def denom(self) -> int:
        return 2 * self.ctx.n

    @property
    def theorem_range(self) -> bool:
        return 1 <= self.i <= self.k

    @property
    def corollary_range(self) -> bool:
        return 1 <= self.i <= self.k + self.delta - 1

    def info(self) -> Dict[str, Union[bool, int, str]]:
        return {
            "theorem_range": self.theorem_range,
            "corollary_range": self.corollary_range,
            "construction": constructions_for(self.k, self.i, self.delta)[0].value,
        }

    def key(self) -> str:
        c = self.ctx
        return (
            f"thm44/N={c.n}/delta={self.delta}/k={self.k}/i={self.i}"
            f"/lambda={list(c.lam.parts)}/sigma={c.sigma}"
        )

    def __repr__(self) -> str:
        return f"IdentityCell({self.key()})"


def thm44_lhs(cell: IdentityCell, window: Window) -> LaurentSeries:
    """``1/(q)_inf sum_(j in Z) (-1)^j q^(((2k+delta-2+2/N) j + 2k-2i+delta) j/2)`` times the eta sum at ``j``."""
    ctx = cell.ctx
    quad = Fraction(2 * cell.k + cell.delta - 2, 2) + Fraction(1, ctx.n)
    lin = Fraction(2 * cell.k - 2 * cell.i + cell.delta, 2)
    floor = eta_floor(ctx)

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(cell.denom)

        def term(j: int) -> LaurentSeries:
            body = eta_sum(ctx.cartan, ctx.e_lam, ctx.residue(j), w)
            return w.monomial(_sign(j), quad * j * j + lin * j) * body

        total = bilateral_sum(lambda j: quad * j * j + lin * j + floor, term, w)
        return total * inv_euler(w)

    return at_order(window, compute)


def thm44_rhs(cell: IdentityCell, window: Window) -> LaurentSeries:
    """Sum over ``r_1 >= ... >= r_(k-1) >= 0`` of ``q^(r_1^2/N + r_2^2 + ... + r_i + ... + r_(k-1))``
    over ``(q)_(r_1-r_2) ... (q^(2-delta); q^(2-delta))_(r_(k-1))`` times the n-sum at ``r_1``."""
    ctx = cell.ctx
    depth = cell.k - 1
    weights: List[Exponent] = [Fraction(1, ctx.n)] + [1] * (depth - 1)
    linears: List[Exponent] = [1 if j + 1 >= cell.i else 0 for j in range(depth)]
    floor = eta_floor(ctx)

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(cell.denom)
        total = w.zero()
        count = 0
        for chain, e in descending_chains(depth, w.q_order - floor, weights, linears):
            body = delta_sum(ctx, chain[0])
            if body.is_zero:
                continue
            term = w.monomial(1, e) * body
            for a, b in zip(chain, chain[1:]):
                term = term * inv_qfac(a - b, w)
            total = total + term * inv_base_factorial(chain[-1], 2 - cell.delta, w)
            count += 1
        logger.debug(f"{cell.key()}: {count} chains below {w}")
        return w.fit(total)

    return at_order(window, compute)


def verify_thm44(cell: IdentityCell, window: Window, via_pair: bool = False) -> VerificationReport:
    """Compare both sides; with ``via_pair`` also route them through the chained Bailey pair."""
    w = window.refine(cell.denom)

    def checks() -> Iterator[Check]:
        lhs = thm44_lhs(cell, w)
        rhs = thm44_rhs(cell, w)
        yield "identity", lhs, rhs
        if via_pair:
            bp = chained_pair(cell.k, cell.i, cell.delta)
            lam = cell.ctx.lam.parts
            yield "alpha-side", hl_lemma_lhs(bp, cell.n, lam, cell.ctx.sigma, w), lhs
            yield "beta-side", hl_lemma_rhs(bp, cell.n, lam, cell.ctx.sigma, w), rhs

    return run_checks(cell.key(), Target.THM44, checks, w, info=cell.info())


# ------------------------------------------------------------- N = 1


def _check_corollary_range(k: int, i: int, top: int) -> None:
    if k < 2:
        raise InvalidParameters(f"k must be at least 2, got {k}")
    if not 1 <= i <= top:
        raise InvalidParameters(f"i must satisfy 1 <= i <= {top} at k={k}, got {i}")


def ag_bressoud_sum(k: int, i: int, delta: int, window: Window) -> LaurentSeries:
    """``sum q^(N_1^2 + ... + N_(k-1)^2 + N_i + ... + N_(k-1)) / ((q)_n_1 ... (q^(2-delta); q^(2-delta))_n_(k-1))``.

    The sum runs over ``N_1 >= ... >= N_(k-1) >= 0`` with ``n_j = N_j - N_(j+1)``.
    """
    if delta not in (0, 1):
        raise InvalidParameters(f"delta must be 0 or 1, got {delta}")
    _check_corollary_range(k, i, k + delta - 1)
    depth = k - 1
    total = window.zero()
    for chain, e in descending_chains(
        depth, window.q_order, [1] * depth, [1 if j + 1 >= i else 0 for j in range(depth)]
    ):
        term = window.monomial(1, e)
        for a, b in zip(chain, chain[1:]):
            term = term * inv_qfac(a - b, window)
        total = total + term * inv_base_factorial(chain[-1], 2 - delta, window)
    return window.fit(total)


def ag_bressoud_product(k: int, i: int, delta: int, window: Window) -> LaurentSeries:
    """``prod (1 - q^j)^(-1)`` over ``j`` not congruent to ``0, ±i`` modulo ``2k + delta``."""
    if delta not in (0, 1):
        raise InvalidParameters(f"delta must be 0 or 1, got {delta}")
    _check_corollary_range(k, i, k + delta - 1)
    return residue_product(2 * k + delta, (0, i, -i), window)


def verify_ag_bressoud(k: int, i: int, delta: int, window: Window) -> VerificationReport:
    def checks() -> Iterator[Check]:
        s = ag_bressoud_sum(k, i, delta, window)
        yield "sum=product", s, ag_bressoud_product(k, i, delta, window)
        yield "positivity", s, nonnegative_part(s)

    key = f"corollary/N1/k={k}/i={i}/delta={delta}"
    return run_checks(key, Target.COROLLARY, checks, window)


# ------------------------------------------------------------- N = 2


class GGVariant(str, Enum):
    """The two N = 2 families: all denominators ``(q^2;q^2)``, or a last ``(q^4;q^4)``."""

    N2A = "N2a"
    N2B = "N2b"


def n2_sum(k: int, i: int, last_step: int, window: Window) -> LaurentSeries:
    """``sum q^(N_1^2 + 2N_2^2 + ... + 2N_i + ... + 2N_(k-1)) (-q;q^2)_N_1 / ((q^2;q^2)_n_1 ... (q^s;q^s)_n_(k-1))``."""
    depth = k - 1
    weights: List[Exponent] = [1] + [2] * (depth - 1)
    linears: List[Exponent] = [2 if j + 1 >= i else 0 for j in range(depth)]
    total = window.zero()
    for chain, e in descending_chains(depth, window.q_order, weights, linears):
        term = window.monomial(1, e) * pochhammer(PochhammerSpec(1, 2, chain[0], negated=True))
        for a, b in zip(chain, chain[1:]):
            term = term * inv_base_factorial(a - b, 2, window)
        total = total + term * inv_base_factorial(chain[-1], last_step, window)
    return window.fit(total)


def _check_gg(k: int, i: int, variant: GGVariant) -> GGVariant:
    variant = GGVariant(variant)
    _check_corollary_range(k, i, k if variant is GGVariant.N2A else k - 1)
    return variant


def gg_sum(k: int, i: int, variant: GGVariant, window: Window) -> LaurentSeries:
    variant = _check_gg(k, i, variant)
    return n2_sum(k, i, 2 if variant is GGVariant.N2A else 4, window)


def gg_product(k: int, i: int, variant: GGVariant, window: Window) -> LaurentSeries:
    """Residue products of the N = 2 families, with the ``(-q^(2k-1); q^(4k-2))_inf`` factor for N2b."""
    variant = _check_gg(k, i, variant)
    odd = (2 * i - 1, -(2 * i - 1))
    if variant is GGVariant.N2A:
        return residue_product(4, (2,), window, extra=(ResidueCondition(4 * k, (0, *odd)),))
    extra = (
        ResidueCondition(8 * k - 4, (0,)),
        ResidueCondition(4 * k - 2, (2 * k - 1, *odd)),
    )
    prefactor = pochhammer(PochhammerSpec(2 * k - 1, 4 * k - 2, None, negated=True), window)
    return window.fit(prefactor * residue_product(4, (2,), window, extra=extra))


def verify_gg(k: int, i: int, variant: GGVariant, window: Window) -> VerificationReport:
    variant = GGVariant(variant)

    def checks() -> Iterator[Check]:
        s = gg_sum(k, i, variant, window)
        yield "sum=product", s, gg_product(k, i, variant, window)
        yield "positivity", s, nonnegative_part(s)

    key = f"corollary/{variant.value}/k={k}/i={i}"
    return run_checks(key, Target.COROLLARY, checks, window)


def triple_product_form(k: int, i: int, delta: int, window: Window) -> LaurentSeries:
    """``1/(q)_inf prod_(n>=0) (1-q^(2+4n))(1-q^(2i-1+An))(1-q^(-2i+1+A(n+1)))(1-q^(A(n+1)))``, ``A = 4k+2delta-2``."""
    if delta not in (0, 1):
        raise InvalidParameters(f"delta must be 0 or 1, got {delta}")
    _check_corollary_range(k, i, k + delta - 1)
    A = 4 * k + 2 * delta - 2
    specs = [
        PochhammerSpec(2, 4),
        PochhammerSpec(2 * i - 1, A),
        PochhammerSpec(A - 2 * i + 1, A),
        PochhammerSpec(A, A),
    ]
    result = inv_euler(window)
    for spec in specs:
        result = result * pochhammer(spec, window)
    return window.fit(result)


def jacobi_sides(c: Exponent, window: Window) -> Tuple[LaurentSeries, LaurentSeries]:
    """Both sides of ``sum_j (-1)^j z^j q^(j(j-1)/2) = (z)_inf (q/z)_inf (q)_inf`` at ``z = q^c``, ``0 < c < 1``."""
    c = Fraction(c)
    if not 0 < c < 1:
        raise InvalidParameters(f"Need 0 < c < 1, got {c}")
    w = window.refine(c.denominator)

    def exponent(j: int) -> Fraction:
        return Fraction(j * (j - 1), 2) + c * j

    lhs = bilateral_sum(exponent, lambda j: w.monomial(_sign(j), exponent(j)), w)
    rhs = pochhammer(PochhammerSpec(c), w) * pochhammer(PochhammerSpec(1 - c), w) * euler(w)
    return lhs, w.fit(rhs)


def verify_jacobi(c: Exponent, window: Window) -> VerificationReport:
    def checks() -> Iterator[Check]:
        lhs, rhs = jacobi_sides(c, window)
        yield "triple-product", lhs, rhs

    return run_checks(f"corollary/jacobi/c={Fraction(c)}", Target.COROLLARY, checks, window)


def verify_triple_product(k: int, i: int, delta: int, window: Window) -> VerificationReport:
    """The N = 2 sum side, the triple-product intermediate and the residue product agree.

    The intermediate is also checked against the bilateral sum it comes from,
    ``sum_j (-1)^j q^((2i-1) j + A j(j-1)/2)``, at ``z = q^((2i-1)/A)`` in base ``q^A``.
    """
    A = 4 * k + 2 * delta - 2
    variant = GGVariant.N2A if delta == 1 else GGVariant.N2B

    def checks() -> Iterator[Check]:
        middle = triple_product_form(k, i, delta, window)
        yield "sum", n2_sum(k, i, 4 - 2 * delta, window), middle
        yield "product", middle, gg_product(k, i, variant, window)
        inner = Window.of(window.q_order / A, window.denom * A)
        lhs, rhs = jacobi_sides(Fraction(2 * i - 1, A), inner)
        yield "jacobi", lhs.substitute_power(A), rhs.substitute_power(A)

    key = f"corollary/triple-product/k={k}/i={i}/delta={delta}"
    return run_checks(key, Target.COROLLARY, checks, window)


def _aux_prefactor(weight: int) -> LaurentSeries:
    """``(-q^((1-|lambda|)/2))_(|lambda|/2)``, exact."""
    return pochhammer(PochhammerSpec(Fraction(1 - weight, 2), 1, weight // 2, negated=True))


def _check_weight(weight: int) -> None:
    if weight < 0 or weight % 2:
        raise InvalidParameters(f"|lambda| must be a non-negative even integer, got {weight}")


def corollary_proof_sum_checks(weight: int, r1: int, window: Window) -> VerificationReport:
    """The two q-binomial sums that collapse the sigma sum at N = 2.

    * ``sum_n q^(n(n-|lambda|)/2) [r_1+|lambda|/2 over n] = (-q^((1-|lambda|)/2))_(|lambda|/2) (-q^(1/2))_r_1``
    * ``sum_(eta>=0) q^(eta(eta-|lambda|)/2) / (q)_eta = (-q^((1-|lambda|)/2))_(|lambda|/2) (-q^(1/2))_inf``
    """
    _check_weight(weight)
    if r1 < 0:
        raise InvalidParameters(f"r1 must be non-negative, got {r1}")
    half = weight // 2
    top = r1 + half
    w = window.refine(2)
    # the finite identity is compared past its degree
    w = w.with_order(max(w.order, 3 * top * top + 2))
    pre = _aux_prefactor(weight)

    def finite_lhs() -> LaurentSeries:
        total = LaurentSeries((), 0, 2)
        for n in range(top + 1):
            total = total + w.monomial(1, Fraction(n * (n - weight), 2)) * gauss_binom(top, n)
        return total

    def infinite_lhs(v: Window) -> LaurentSeries:
        def term(eta: int) -> LaurentSeries:
            return v.monomial(1, Fraction(eta * (eta - weight), 2)) * inv_qfac(eta, v)

        return sum_terms(term, v, 0, None, ValuationBound(Fraction(1, 2), Fraction(-weight, 2)))

    def infinite_rhs(v: Window) -> LaurentSeries:
        return pre * pochhammer(PochhammerSpec(Fraction(1, 2), 1, None, negated=True), v)

    def checks() -> Iterator[Check]:
        yield "finite", finite_lhs(), pre * pochhammer(PochhammerSpec(Fraction(1, 2), 1, r1, negated=True))
        yield "infinite", at_order(w, infinite_lhs), at_order(w, infinite_rhs)

    key = f"corollary/aux/lambda={weight}/r1={r1}"
    return run_checks(key, Target.COROLLARY, checks, w)


def corollary_pipeline(
    k: int, i: int, delta: int, weight: int, window: Window
) -> Tuple[LaurentSeries, LaurentSeries]:
    """The right side of the two-sided identity at N = 2, summed over sigma and reduced.

    Returns ``(pipeline, sum side)`` where the pipeline divides by the auxiliary factor
    and substitutes ``q -> q^2``.
    """
    _check_weight(weight)
    _check_corollary_range(k, i, k + delta - 1)
    lam = (1,) * weight
    cells = [IdentityCell(2, delta, k, i, lam, sigma) for sigma in (0, 1)]
    pre = _aux_prefactor(weight)

    def compute(w: Window) -> LaurentSeries:
        both = thm44_rhs(cells[0], w) + thm44_rhs(cells[1], w)
        return w.fit(both * pre.invert(w.refine(pre.denom).order))

    half = at_order(Window.of(window.q_order / 2, 4 * window.denom), compute)
    return window.fit(half.substitute_power(2)), n2_sum(k, i, 4 - 2 * delta, window)


def verify_corollary_pipeline(
    k: int, i: int, delta: int, weight: int, window: Window
) -> VerificationReport:
    def checks() -> Iterator[Check]:
        pipeline, target = corollary_pipeline(k, i, delta, weight, window)
        yield "pipeline", pipeline, target

    key = f"corollary/pipeline/k={k}/i={i}/delta={delta}/lambda={weight}"
    return run_checks(key, Target.COROLLARY, checks, window)
