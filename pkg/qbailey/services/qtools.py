"""q-analysis toolkit: shifted factorials, Gaussian polynomials and Euler-type products."""

import logging
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, List, Optional, Sequence, Tuple

from qbailey.config import settings
from qbailey.exceptions import NonTerminatingProduct
from qbailey.services.series import Exponent, LaurentSeries, Window

logger = logging.getLogger(__name__)


class Base(str, Enum):
    """Base of a q-multinomial."""

    Q = "q"
    INVERSE = "1/q"


class PochhammerSpec:
    """The shifted factorial ``(±q^start; q^step)_length``.

    A ``length`` of None stands for the infinite product. ``negated`` selects the
    argument ``-q^start``, giving factors ``(1 + q^(start + n*step))``.
    """

    def __init__(
        self,
        start: Exponent,
        step: Exponent = 1,
        length: Optional[int] = None,
        negated: bool = False,
    ):
        self.start = Fraction(start)
        self.step = Fraction(step)
        if self.step <= 0:
            raise ValueError(f"Pochhammer step must be positive, got {step}")
        self.length = length
        self.negated = negated

    @property
    def is_infinite(self) -> bool:
        return self.length is None

    def __repr__(self) -> str:
        sign = "-" if self.negated else ""
        n = "inf" if self.length is None else self.length
        return f"PochhammerSpec(({sign}q^{self.start}; q^{self.step})_{n})"


# ---------------------------------------------------------------- kernels


def _times_factors(exponents: Iterable[int], sign: int, limit: Optional[int]) -> List[int]:
    """Coefficients of prod (1 - sign*q^e) over positive grid exponents, below ``limit``."""
    c = [1]
    for e in exponents:
        top = len(c) + e if limit is None else min(len(c) + e, limit)
        if top > len(c):
            c.extend([0] * (top - len(c)))
        for i in range(len(c) - 1, e - 1, -1):
            if c[i - e]:
                c[i] -= sign * c[i - e]
    return c


def _divide_factors(c: List[int], exponents: Iterable[int]) -> List[int]:
    """Divide in place by prod (1 - q^e), keeping the current length."""
    for e in exponents:
        for i in range(e, len(c)):
            if c[i - e]:
                c[i] += c[i - e]
    return c


@lru_cache(maxsize=4096)
def _binomial_coeffs(top: int, bottom: int) -> Tuple[int, ...]:
    k = min(bottom, top - bottom)
    c = [1]
    for j in range(1, k + 1):
        c = _mul_one_minus(c, top - k + j)
        c = _exact_divide_one_minus(c, j)
    return tuple(c)


def _mul_one_minus(c: List[int], e: int) -> List[int]:
    out = c + [0] * e
    for i in range(len(c)):
        out[i + e] -= c[i]
    return out


def _exact_divide_one_minus(c: List[int], e: int) -> List[int]:
    n = len(c) - e
    b = [0] * n
    for i in range(n):
        b[i] = c[i] + (b[i - e] if i >= e else 0)
    return b


# ------------------------------------------------------------- operations


def pochhammer(spec: PochhammerSpec, window: Optional[Window] = None) -> LaurentSeries:
    """Evaluate ``prod_{n=0}^{length-1} (1 - a q^(start + n*step))`` with ``a = ±1``.

    Finite products are exact when no window is given. A negative length uses
    ``(a)_n = (a)_inf / (a q^n)_inf``, that is ``1 / prod_{j=1}^{|n|} (1 - a q^(start - j*step))``.

    Raises:
        NonTerminatingProduct: for an infinite product with ``start <= 0``.
    """
    denom = lcm(spec.start.denominator, spec.step.denominator)
    if window is not None:
        denom = lcm(denom, window.denom)
    order = None
    if window is not None:
        order = window.order * (denom // window.denom)
    elif spec.is_infinite:
        order = settings.DEFAULT_ORDER * denom
    sign = -1 if spec.negated else 1

    if spec.is_infinite:
        if spec.start <= 0:
            raise NonTerminatingProduct(f"{spec} has a factor that never leaves the window")
        first = int(spec.start * denom)
        step = int(spec.step * denom)
        exps = range(first, order, step) if order > first else range(0)  # type: ignore[operator]
        return LaurentSeries(_times_factors(exps, sign, order), 0, denom, order)

    n = spec.length
    if n < 0:  # type: ignore[operator]
        inner = PochhammerSpec(spec.start + n * spec.step, spec.step, -n, spec.negated)  # type: ignore[operator]
        w = window if window is not None else Window(denom, settings.DEFAULT_ORDER * denom)
        return pochhammer(inner, None).regrid(denom).invert(w.refine(denom).order)

    exps = [int((spec.start + j * spec.step) * denom) for j in range(n)]  # type: ignore[arg-type]
    if any(e == 0 for e in exps):
        if not spec.negated:
            return LaurentSeries((), 0, denom, None)
    shift = 0
    flips = 0
    positive = []
    zeros = 0
    for e in exps:
        if e > 0:
            positive.append(e)
        elif e < 0:
            # 1 - a q^e = -a q^e (1 - a q^(-e)) for a = ±1
            shift += e
            flips += 1
            positive.append(-e)
        else:
            zeros += 1
    limit = None if order is None else order - shift
    if limit is not None and limit <= 0:
        return LaurentSeries((), 0, denom, order)
    coeffs = _times_factors(positive, sign, limit)
    scale = (-sign) ** flips * 2**zeros
    result = LaurentSeries(coeffs, 0, denom, limit).shift(shift)
    return result.scale(scale) if scale != 1 else result


def gauss_binom(top: int, bottom: int) -> LaurentSeries:
    """Gaussian polynomial ``(q)_top / ((q)_bottom (q)_(top-bottom))``, zero off its support."""
    if bottom < 0 or top - bottom < 0:
        return LaurentSeries()
    return LaurentSeries(_binomial_coeffs(top, bottom))


def gauss_binom_primed(top: int, bottom: int) -> LaurentSeries:
    """Primed Gaussian polynomial ``(q^(n+1))_m / (q)_m`` with ``n = bottom``, ``m = top - bottom``.

    For ``n < 0`` and ``n + m < 0`` every factor has a negative exponent and the value
    is ``(-1)^m q^(mn + m(m+1)/2)`` times the ordinary ``[-n-1 over m]``.
    """
    n = bottom
    m = top - bottom
    if m < 0:
        return LaurentSeries()
    if n >= 0:
        return gauss_binom(top, bottom)
    if n + m >= 0:
        return LaurentSeries()
    base = gauss_binom(-n - 1, m)
    sign = -1 if m % 2 else 1
    return base.shift(m * n + m * (m + 1) // 2).scale(sign)


def q_multinomial(k: int, v: Sequence[int], base: Base = Base.Q) -> LaurentSeries:
    """The q-multinomial ``(q)_k / ((q)_v1 ... (q)_v(N-1) (q)_(k - sum v))``.

    At base ``1/q`` the polynomial is reflected: ``[k; v]_(1/q) = q^(-E) [k; v]_q``
    with ``E`` the degree ``sum_(i<j) w_i w_j`` of the parts ``w = (v, k - sum v)``.
    """
    rest = k - sum(v)
    if rest < 0 or any(x < 0 for x in v):
        return LaurentSeries()
    result = LaurentSeries((1,))
    remaining = k
    for x in v:
        result = result * gauss_binom(remaining, x)
        remaining -= x
    if Base(base) is Base.INVERSE:
        parts = list(v) + [rest]
        degree = sum(parts[a] * parts[b] for a in range(len(parts)) for b in range(a + 1, len(parts)))
        result = result.shift(-degree)
    return result


def limit_shifted_factorial(n: int) -> LaurentSeries:
    """``lim_{a -> inf} a^(-n) (a)_n = (-1)^n q^(n(n-1)/2)``."""
    if n < 0:
        raise ValueError(f"Length must be non-negative, got {n}")
    return LaurentSeries(((-1) ** n,), n * (n - 1) // 2)


class ResidueCondition:
    """Exclude every ``j`` with ``j mod modulus`` in ``residues``."""

    def __init__(self, modulus: int, residues: Iterable[int]):
        if modulus < 1:
            raise ValueError(f"Modulus must be positive, got {modulus}")
        self.modulus = modulus
        self.residues = frozenset(r % modulus for r in residues)

    def excludes(self, j: int) -> bool:
        return j % self.modulus in self.residues

    def __repr__(self) -> str:
        return f"ResidueCondition(mod {self.modulus} in {sorted(self.residues)})"


def residue_product(
    modulus: int,
    excluded: Iterable[int],
    window: Window,
    extra: Sequence[ResidueCondition] = (),
) -> LaurentSeries:
    """``prod_{j >= 1} (1 - q^j)^(-1)`` over every ``j`` no condition excludes.

    Args:
        modulus: modulus of the main condition
        excluded: residues excluded by the main condition (reduced here)
        window: truncation window
        extra: further conditions; a part is dropped if any condition excludes it
    """
    conditions = [ResidueCondition(modulus, excluded), *extra]
    top = -(-window.order // window.denom)
    parts = [j for j in range(1, top) if not any(c.excludes(j) for c in conditions)]
    coeffs = _divide_factors([1] + [0] * (top - 1), parts) if top > 0 else []
    logger.debug(f"Residue product over {len(parts)} parts below q^{top}")
    return window.fit(LaurentSeries(coeffs, 0, 1, max(top, 0)))


# ------------------------------------------------------- cached shorthands


@lru_cache(maxsize=4096)
def _shifted_cached(start: Fraction, n: int, denom: int, order: int) -> LaurentSeries:
    return pochhammer(PochhammerSpec(start, 1, n), Window(denom, order))


@lru_cache(maxsize=4096)
def _inv_shifted_cached(start: Fraction, n: int, denom: int, order: int) -> LaurentSeries:
    w = Window(denom, order)
    p = pochhammer(PochhammerSpec(start, 1, n), w)
    return p.invert(w.refine(p.denom).order)


def shifted(start: Exponent, n: int, window: Window) -> LaurentSeries:
    """``(q^start; q)_n`` on the window."""
    return _shifted_cached(Fraction(start), n, window.denom, window.order)


def inv_shifted(start: Exponent, n: Optional[int], window: Window) -> LaurentSeries:
    """``1 / (q^start; q)_n`` on the window; ``n=None`` gives the infinite product."""
    return _inv_shifted_cached(Fraction(start), n, window.denom, window.order)  # type: ignore[arg-type]


def qfac(n: int, window: Window) -> LaurentSeries:
    """``(q)_n``."""
    return shifted(1, n, window)


def inv_qfac(n: int, window: Window) -> LaurentSeries:
    """``1/(q)_n``, which vanishes for negative ``n``."""
    if n < 0:
        return LaurentSeries((), 0, window.denom, None)
    return inv_shifted(1, n, window)


def euler(window: Window) -> LaurentSeries:
    """``(q)_inf``."""
    return shifted(1, None, window)  # type: ignore[arg-type]


def inv_euler(window: Window) -> LaurentSeries:
    """``1/(q)_inf``, the partition generating function."""
    return inv_shifted(1, None, window)


def inv_base_factorial(n: int, step: int, window: Window) -> LaurentSeries:
    """``1/(q^step; q^step)_n`` (zero for negative ``n``)."""
    if n < 0:
        return LaurentSeries((), 0, window.denom, None)
    p = pochhammer(PochhammerSpec(step, step, n), window)
    return p.invert(window.refine(p.denom).order)
