"""Command-line verbs: run a sweep config, evaluate a named series, audit the transforms."""

import argparse
import logging
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from qbailey import __version__
from qbailey.config import settings
from qbailey.exceptions import QSeriesError
from qbailey.schemas import EvalRequest, OutputFormat, SeriesEnvelope, SweepConfig, Target
from qbailey.services.hierarchy import HierarchyParams, hl_Delta, hl_Gamma
from qbailey.services.identities import (
    GGVariant,
    IdentityCell,
    ag_bressoud_product,
    ag_bressoud_sum,
    gg_product,
    gg_sum,
    thm44_lhs,
    thm44_rhs,
)
from qbailey.services.qtools import (
    Base,
    PochhammerSpec,
    gauss_binom,
    gauss_binom_primed,
    pochhammer,
    q_multinomial,
    residue_product,
)
from qbailey.services.series import LaurentSeries, Window
from qbailey.services.string_functions import StringFunctionIndex, string_function, string_grid
from qbailey.services.sweep import (
    exit_status,
    expand_cells,
    run_cells,
    summarize,
    write_reports,
    write_tables,
)

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2


class UsageError(Exception):
    """Raised for unreadable configs and malformed eval parameters."""


# ------------------------------------------------------------------- configs


def load_configs(path: Path) -> List[SweepConfig]:
    """Parse a TOML sweep file: one table, or several under ``[[sweep]]``.

    Raises:
        UsageError: with the line and column of a TOML error or the field path of a
            validation error.
    """
    try:
        with path.open("rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise UsageError(f"Cannot read {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise UsageError(f"{path}: {e}") from e
    tables = data["sweep"] if "sweep" in data else [data]
    if not isinstance(tables, list):
        raise UsageError(f"{path}: 'sweep' must be an array of tables")
    configs = []
    for index, table in enumerate(tables):
        try:
            configs.append(SweepConfig.model_validate(table))
        except ValidationError as e:
            fields = "; ".join(
                f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}"
                for err in e.errors()
            )
            raise UsageError(f"{path}: sweep #{index}: {fields}") from e
    return configs


def _run_configs(
    configs: Sequence[SweepConfig],
    workers: Optional[int],
    reports: Optional[str],
    tables: Optional[str],
    omit_timings: bool,
) -> int:
    all_reports = []
    table_errors = 0
    for config in configs:
        cells = expand_cells(config)
        count = workers or config.workers or settings.WORKERS
        logger.info(f"Sweep {config.target.value}: {len(cells)} cells on {count} worker(s)")
        all_reports.extend(run_cells(cells, count))
        table_dir = tables or config.tables
        if table_dir:
            _, errors = write_tables(cells, Path(table_dir))
            table_errors += errors
    all_reports.sort(key=lambda r: r.key)

    destination = reports or next((c.reports for c in configs if c.reports), None)
    if destination == "-":
        exclude = {"wall_time"} if omit_timings else None
        for report in all_reports:
            sys.stdout.write(report.model_dump_json(exclude=exclude) + "\n")
    else:
        path = Path(destination) if destination else settings.reports_file
        write_reports(all_reports, path, omit_timings)

    counts = summarize(all_reports)
    logger.info(f"{len(all_reports)} cells: {counts}")
    if table_errors:
        logger.error(f"{table_errors} coefficient table(s) could not be computed")
    return exit_status(all_reports, table_errors)


def cmd_run(args: argparse.Namespace) -> int:
    configs = load_configs(Path(args.config))
    return _run_configs(configs, args.workers, args.reports, args.tables, args.omit_timings)


def cmd_audit(args: argparse.Namespace) -> int:
    config = SweepConfig(
        target=Target.TRANSFORMS_AUDIT,
        cases=args.cases,
        seed=args.seed,
        order=args.order,
        k=[2, 3, 4],
    )
    return _run_configs([config], args.workers, args.reports, None, args.omit_timings)


# ---------------------------------------------------------------------- eval


class _Params:
    """Typed access to ``key=value`` pairs."""

    def __init__(self, raw: Dict[str, str]):
        self.raw = raw

    def _get(self, key: str, default: Optional[str]) -> str:
        if key in self.raw:
            return self.raw[key]
        if default is None:
            raise UsageError(f"Missing parameter {key!r}")
        return default

    def integer(self, key: str, default: Optional[int] = None) -> int:
        value = self._get(key, None if default is None else str(default))
        try:
            return int(value)
        except ValueError as e:
            raise UsageError(f"{key}={value!r} is not an integer") from e

    def fraction(self, key: str, default: Optional[str] = None) -> Fraction:
        value = self._get(key, default)
        try:
            return Fraction(value)
        except ValueError as e:
            raise UsageError(f"{key}={value!r} is not a rational number") from e

    def integers(self, key: str, default: str = "") -> Tuple[int, ...]:
        value = self._get(key, default).strip("[]() ")
        try:
            return tuple(int(x) for x in value.split(",") if x.strip())
        except ValueError as e:
            raise UsageError(f"{key}={value!r} is not a comma-separated list of integers") from e

    def text(self, key: str, default: Optional[str] = None) -> str:
        return self._get(key, default)


Evaluator = Callable[[_Params, Fraction], LaurentSeries]


def _hierarchy(p: _Params) -> HierarchyParams:
    return HierarchyParams.of(
        p.integer("M"),
        p.integer("N"),
        p.integer("ell", 0),
        p.integers("lambda"),
        p.integer("sigma", 0),
    )


def _hl_window(p: _Params, order: Fraction) -> Window:
    return Window.of(order, 2 * p.integer("N"))


def _pochhammer(p: _Params, order: Fraction) -> LaurentSeries:
    start = p.fraction("start")
    step = p.fraction("step", "1")
    length = p.text("length", "inf")
    spec = PochhammerSpec(
        start,
        step,
        None if length == "inf" else int(length),
        negated=p.text("negated", "false").lower() in ("1", "true", "yes"),
    )
    denom = lcm(start.denominator, step.denominator)
    return pochhammer(spec, Window.of(order, denom) if spec.is_infinite else None)


def _identity(p: _Params) -> IdentityCell:
    return IdentityCell(
        p.integer("N", 1),
        p.integer("delta", 1),
        p.integer("k"),
        p.integer("i"),
        p.integers("lambda"),
        p.integer("sigma", 0),
    )


def _string_function(p: _Params, order: Fraction) -> LaurentSeries:
    n = p.integer("N")
    idx = StringFunctionIndex(n, p.integer("l"), p.integer("m"))
    return string_function(idx, Window.of(order, string_grid(n)))


def _kid(p: _Params) -> Tuple[int, int, int]:
    return p.integer("k"), p.integer("i"), p.integer("delta")


def _gg(p: _Params) -> Tuple[int, int, GGVariant]:
    return p.integer("k"), p.integer("i"), GGVariant(p.text("variant", "N2a"))


def _thm44_window(p: _Params, order: Fraction) -> Window:
    return Window.of(order, 2 * p.integer("N", 1))


EVALUATORS: Dict[str, Evaluator] = {
    "gauss-binom": lambda p, o: gauss_binom(p.integer("top"), p.integer("bottom")),
    "gauss-binom-primed": lambda p, o: gauss_binom_primed(p.integer("top"), p.integer("bottom")),
    "q-multinomial": lambda p, o: q_multinomial(
        p.integer("k"), p.integers("v"), Base(p.text("base", "q"))
    ),
    "pochhammer": _pochhammer,
    "residue-product": lambda p, o: residue_product(
        p.integer("mod"), p.integers("exclude"), Window.of(o)
    ),
    "hl-delta": lambda p, o: hl_Delta(
        _hierarchy(p), p.integer("L"), p.integer("k", 0), _hl_window(p, o)
    ),
    "hl-gamma": lambda p, o: hl_Gamma(
        _hierarchy(p), p.integer("L"), p.integer("k", 0), _hl_window(p, o)
    ),
    "string-function": _string_function,
    "ag-bressoud-sum": lambda p, o: ag_bressoud_sum(*_kid(p), Window.of(o)),
    "ag-bressoud-product": lambda p, o: ag_bressoud_product(*_kid(p), Window.of(o)),
    "gg-sum": lambda p, o: gg_sum(*_gg(p), Window.of(o)),
    "gg-product": lambda p, o: gg_product(*_gg(p), Window.of(o)),
    "thm44-lhs": lambda p, o: thm44_lhs(_identity(p), _thm44_window(p, o)),
    "thm44-rhs": lambda p, o: thm44_rhs(_identity(p), _thm44_window(p, o)),
}


def parse_assignments(items: Sequence[str]) -> Dict[str, str]:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"Expected key=value, got {item!r}")
        params[key] = value
    return params


def evaluate(request: EvalRequest) -> LaurentSeries:
    """Evaluate a named series.

    Raises:
        UsageError: for an unknown name or malformed parameters.
        QSeriesError: for parameters the engine rejects.
    """
    evaluator = EVALUATORS.get(request.name)
    if evaluator is None:
        raise UsageError(f"Unknown series {request.name!r}; choose from {sorted(EVALUATORS)}")
    order = Fraction(request.order if request.order is not None else settings.DEFAULT_ORDER)
    try:
        return evaluator(_Params(request.params), order)
    except ValueError as e:
        if isinstance(e, QSeriesError):
            raise
        raise UsageError(str(e)) from e


def format_series(series: LaurentSeries, fmt: OutputFormat) -> str:
    envelope = SeriesEnvelope.from_series(series)
    if fmt is OutputFormat.JSON:
        return envelope.model_dump_json()
    lines = ["exponent_num,denom,coefficient"]
    lines += [f"{row.exponent_num},{row.denom},{row.coefficient}" for row in envelope.rows()]
    return "\n".join(lines)


def cmd_eval(args: argparse.Namespace) -> int:
    params = parse_assignments(args.params)
    order = params.pop("order", None)
    try:
        request = EvalRequest(
            name=args.name,
            params=params,
            order=None if order is None else int(order),
            format=args.format,
        )
    except (ValidationError, ValueError) as e:
        raise UsageError(f"Invalid eval request: {e}") from e
    series = evaluate(request)
    sys.stdout.write(format_series(series, request.format) + "\n")
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbailey",
        description="Exact q-series verification of higher-level conjugate Bailey pairs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the sweeps of a TOML config")
    run.add_argument("config", help="Path to a TOML sweep config")
    run.add_argument("--workers", type=int, default=None, help="Process-pool size")
    run.add_argument("--reports", default=None, help="JSON-lines report path, '-' for stdout")
    run.add_argument("--tables", default=None, help="Directory for coefficient tables")
    run.add_argument("--omit-timings", action="store_true", help="Drop wall times from reports")
    run.set_defaults(handler=cmd_run)

    ev = sub.add_parser("eval", help="Print the coefficients of a named series")
    ev.add_argument("name", help=f"One of: {', '.join(sorted(EVALUATORS))}")
    ev.add_argument("params", nargs="*", help="key=value parameters; order=O in powers of q")
    ev.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value
    )
    ev.set_defaults(handler=cmd_eval)

    audit = sub.add_parser("audit-transforms", help="Randomized audit of the Bailey transforms")
    audit.add_argument("--cases", type=int, default=settings.AUDIT_CASES)
    audit.add_argument("--seed", type=int, default=settings.AUDIT_SEED)
    audit.add_argument("--order", type=int, default=settings.DEFAULT_ORDER)
    audit.add_argument("--workers", type=int, default=None)
    audit.add_argument("--reports", default=None)
    audit.add_argument("--omit-timings", action="store_true")
    audit.set_defaults(handler=cmd_audit)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and dispatch; usage and config errors exit with status 2."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except QSeriesError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG
