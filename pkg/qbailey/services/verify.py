"""Window comparisons turned into verification reports."""

import logging
from time import perf_counter
from typing import Callable, Dict, Iterable, Optional, Tuple, Union

from qbailey.exceptions import EnumerationBoundUnverified, InvalidParameters, QSeriesError
from qbailey.schemas import Mismatch, Target, VerificationReport, VerificationStatus
from qbailey.services.series import LaurentSeries, SeriesComparison, Window, eq_up_to

logger = logging.getLogger(__name__)

Check = Tuple[str, LaurentSeries, LaurentSeries]
Info = Dict[str, Union[bool, int, str]]


def compare_on(lhs: LaurentSeries, rhs: LaurentSeries, window: Window) -> SeriesComparison:
    """Compare both sides strictly below the window's order."""
    return eq_up_to(lhs, rhs, window.order, window.denom)


def run_checks(
    key: str,
    target: Target,
    checks: Union[Iterable[Check], Callable[[], Iterable[Check]]],
    window: Optional[Window],
    info: Optional[Info] = None,
    seed: Optional[int] = None,
) -> VerificationReport:
    """Evaluate labelled ``(lhs, rhs)`` pairs lazily and stop at the first mismatch.

    A ``window`` of None compares exact series on their full support. Engine errors
    never escape: an unverified enumeration bound, invalid parameters and any other
    engine error map to their statuses.
    """
    start = perf_counter()
    done = 0
    status = VerificationStatus.PASS
    mismatch = None
    detail = None
    try:
        source = checks() if callable(checks) else checks
        for label, lhs, rhs in source:
            done += 1
            result = compare_on(lhs, rhs, window) if window is not None else eq_up_to(lhs, rhs)
            if not result:
                status = VerificationStatus.FAIL
                mismatch = Mismatch(
                    exponent_num=result.exponent,  # type: ignore[arg-type]
                    denom=result.denom,
                    lhs=result.lhs,  # type: ignore[arg-type]
                    rhs=result.rhs,  # type: ignore[arg-type]
                    label=label,
                )
                logger.warning(f"{key}: mismatch at {label}, q^({result.exponent}/{result.denom})")
                break
    except EnumerationBoundUnverified as e:
        status = VerificationStatus.UNVERIFIED
        detail = str(e)
        logger.warning(f"{key}: {detail}")
    except InvalidParameters as e:
        status = VerificationStatus.SKIPPED
        detail = str(e)
    except QSeriesError as e:
        status = VerificationStatus.FAIL
        detail = f"{type(e).__name__}: {e}"
        logger.warning(f"{key}: {detail}")
    return VerificationReport(
        key=key,
        target=target,
        status=status,
        order_numerator=None if window is None else window.order,
        denom=None if window is None else window.denom,
        checks=done,
        mismatch=mismatch,
        detail=detail,
        seed=seed,
        info=info or {},
        wall_time=round(perf_counter() - start, 6),
    )


def skipped(key: str, target: Target, reason: str, info: Optional[Info] = None) -> VerificationReport:
    return VerificationReport(
        key=key, target=target, status=VerificationStatus.SKIPPED, detail=reason, info=info or {}
    )
