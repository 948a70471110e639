"""Exact truncated Laurent series in a fractional power of q.

Every quantity in the engine is a :class:`LaurentSeries` on the exponent grid
``(1/denom)·Z``. Exponents are stored as integer numerators over ``denom`` and
coefficients are Python integers, so no rounding ever happens. A series either
is exact (``order is None``, all coefficients known) or is known strictly below
the exponent ``order/denom``.
"""

import logging
from fractions import Fraction
from math import gcd, lcm
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

from qbailey.config import settings
from qbailey.exceptions import NonTerminatingSum, NonUnitLeadingCoefficient, OrderExceeded

logger = logging.getLogger(__name__)

Exponent = Union[int, Fraction]


def _min_order(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _schoolbook(x: Sequence[int], y: Sequence[int], limit: int) -> List[int]:
    """Truncated Cauchy product of two coefficient lists, first ``limit`` entries."""
    out = [0] * limit
    ny = len(y)
    for i, xi in enumerate(x):
        if i >= limit:
            break
        if not xi:
            continue
        upto = min(ny, limit - i)
        if upto <= 0:
            continue
        out[i : i + upto] = [o + xi * yj for o, yj in zip(out[i : i + upto], y[:upto])]
    return out


def _add_lists(x: Sequence[int], y: Sequence[int]) -> List[int]:
    if len(x) < len(y):
        x, y = y, x
    out = list(x)
    for j, yj in enumerate(y):
        out[j] += yj
    return out


def _karatsuba(x: Sequence[int], y: Sequence[int]) -> List[int]:
    """Full product of two coefficient lists using the blocked kernel where it pays off."""
    nx, ny = len(x), len(y)
    if not nx or not ny:
        return []
    short, long_ = min(nx, ny), max(nx, ny)
    if short < settings.KARATSUBA_THRESHOLD or 2 * short <= long_:
        return _schoolbook(x, y, nx + ny - 1)
    m = long_ // 2
    x0, x1 = x[:m], x[m:]
    y0, y1 = y[:m], y[m:]
    z0 = _karatsuba(x0, y0)
    z2 = _karatsuba(x1, y1)
    z1 = _karatsuba(_add_lists(x0, x1), _add_lists(y0, y1))
    for j, c in enumerate(z0):
        z1[j] -= c
    for j, c in enumerate(z2):
        z1[j] -= c
    out = [0] * (nx + ny - 1)
    for j, c in enumerate(z0):
        out[j] += c
    for j, c in enumerate(z1):
        if c:
            out[j + m] += c
    for j, c in enumerate(z2):
        if c:
            out[j + 2 * m] += c
    return out


def _convolve(x: Sequence[int], y: Sequence[int], limit: int) -> List[int]:
    if limit <= 0:
        return []
    x = x[:limit]
    y = y[:limit]
    if min(len(x), len(y)) >= settings.KARATSUBA_THRESHOLD:
        return _karatsuba(x, y)[:limit]
    return _schoolbook(x, y, limit)


class LaurentSeries:
    """A truncated Laurent series ``sum coeffs[j] * q^((lo + j)/denom)``.

    Instances are immutable. Leading and trailing zeros are trimmed on
    construction; a series without coefficients is the zero series, and for a
    truncated zero series ``lo`` equals ``order``.
    """

    __slots__ = ("denom", "lo", "coeffs", "order")

    denom: int
    lo: int
    coeffs: Tuple[int, ...]
    order: Optional[int]

    def __init__(
        self,
        coeffs: Sequence[int] = (),
        lo: int = 0,
        denom: int = 1,
        order: Optional[int] = None,
    ):
        if denom < 1:
            raise ValueError(f"Exponent denominator must be positive, got {denom}")
        values = list(coeffs)
        if order is not None and len(values) > order - lo:
            values = values[: max(order - lo, 0)]
        start = 0
        while start < len(values) and values[start] == 0:
            start += 1
        end = len(values)
        while end > start and values[end - 1] == 0:
            end -= 1
        object.__setattr__(self, "denom", denom)
        object.__setattr__(self, "order", order)
        if start == end:
            object.__setattr__(self, "coeffs", ())
            object.__setattr__(self, "lo", order if order is not None else 0)
        else:
            object.__setattr__(self, "coeffs", tuple(values[start:end]))
            object.__setattr__(self, "lo", lo + start)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("LaurentSeries is immutable")

    # ------------------------------------------------------------------ basics

    @classmethod
    def from_terms(
        cls,
        terms: dict[int, int],
        denom: int = 1,
        order: Optional[int] = None,
    ) -> "LaurentSeries":
        """Build a series from a mapping of exponent numerators to coefficients."""
        live = {e: c for e, c in terms.items() if c and (order is None or e < order)}
        if not live:
            return cls((), 0, denom, order)
        lo = min(live)
        values = [0] * (max(live) - lo + 1)
        for e, c in live.items():
            values[e - lo] = c
        return cls(values, lo, denom, order)

    @property
    def is_exact(self) -> bool:
        return self.order is None

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def valuation(self) -> Optional[int]:
        """Numerator of the lowest exponent that may be non-zero (None for exact zero)."""
        if self.coeffs:
            return self.lo
        return self.order

    @property
    def degree(self) -> Optional[int]:
        """Numerator of the highest stored exponent."""
        if not self.coeffs:
            return None
        return self.lo + len(self.coeffs) - 1

    @property
    def q_valuation(self) -> Optional[Fraction]:
        v = self.valuation
        return None if v is None else Fraction(v, self.denom)

    @property
    def q_order(self) -> Optional[Fraction]:
        return None if self.order is None else Fraction(self.order, self.denom)

    def items(self) -> Iterator[Tuple[int, int]]:
        """Yield ``(exponent_numerator, coefficient)`` for every non-zero term."""
        for j, c in enumerate(self.coeffs):
            if c:
                yield self.lo + j, c

    def terms(self) -> List[Tuple[int, int]]:
        return list(self.items())

    # ------------------------------------------------------------------ grids

    def regrid(self, denom: int) -> "LaurentSeries":
        """Re-express the series on the grid ``(1/denom)·Z``.

        Raises:
            ValueError: if some exponent or the order is not representable.
        """
        if denom == self.denom:
            return self
        if denom % self.denom == 0:
            f = denom // self.denom
            values = [0] * ((len(self.coeffs) - 1) * f + 1) if self.coeffs else []
            for j, c in enumerate(self.coeffs):
                values[j * f] = c
            order = None if self.order is None else self.order * f
            lo = self.lo * f if self.coeffs else 0
            return LaurentSeries(values, lo, denom, order)
        if self.denom % denom == 0:
            f = self.denom // denom
            if self.order is not None and self.order % f:
                raise ValueError(f"Order {self.order}/{self.denom} is not on grid 1/{denom}")
            terms = {}
            for e, c in self.items():
                if e % f:
                    raise ValueError(f"Exponent {e}/{self.denom} is not on grid 1/{denom}")
                terms[e // f] = c
            order = None if self.order is None else self.order // f
            return LaurentSeries.from_terms(terms, denom, order)
        return self.regrid(lcm(self.denom, denom)).regrid(denom)

    def _unified(self, other: "LaurentSeries") -> Tuple["LaurentSeries", "LaurentSeries"]:
        if self.denom == other.denom:
            return self, other
        d = lcm(self.denom, other.denom)
        return self.regrid(d), other.regrid(d)

    def _coerce(self, other: Union["LaurentSeries", int]) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return other
        if isinstance(other, int):
            return LaurentSeries((other,), 0, self.denom)
        return NotImplemented

    # ------------------------------------------------------------- arithmetic

    def __add__(self, other: Union["LaurentSeries", int]) -> "LaurentSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._unified(other)
        order = _min_order(a.order, b.order)
        if not a.coeffs:
            return b.truncate(order)
        if not b.coeffs:
            return a.truncate(order)
        lo = min(a.lo, b.lo)
        hi = max(a.lo + len(a.coeffs), b.lo + len(b.coeffs))
        if order is not None:
            hi = min(hi, order)
        if hi <= lo:
            return LaurentSeries((), 0, a.denom, order)
        values = [0] * (hi - lo)
        for s in (a, b):
            off = s.lo - lo
            for j, c in enumerate(s.coeffs):
                if off + j >= len(values):
                    break
                values[off + j] += c
        return LaurentSeries(values, lo, a.denom, order)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries([-c for c in self.coeffs], self.lo, self.denom, self.order)

    def __sub__(self, other: Union["LaurentSeries", int]) -> "LaurentSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: int) -> "LaurentSeries":
        return (-self) + other

    def __mul__(self, other: Union["LaurentSeries", int]) -> "LaurentSeries":
        if isinstance(other, int):
            return self.scale(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        a, b = self._unified(other)
        if (a.is_exact and a.is_zero) or (b.is_exact and b.is_zero):
            return LaurentSeries((), 0, a.denom, None)
        va, vb = a.valuation, b.valuation
        order = None
        if a.order is not None:
            order = a.order + vb  # type: ignore[operator]
        if b.order is not None:
            order = _min_order(order, b.order + va)  # type: ignore[operator]
        if a.is_zero or b.is_zero:
            return LaurentSeries((), 0, a.denom, order)
        lo = a.lo + b.lo
        full = len(a.coeffs) + len(b.coeffs) - 1
        limit = full if order is None else min(full, order - lo)
        return LaurentSeries(_convolve(a.coeffs, b.coeffs, limit), lo, a.denom, order)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentSeries":
        if n < 0:
            return self.invert() ** (-n)
        result = LaurentSeries((1,), 0, self.denom)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: int) -> "LaurentSeries":
        """Multiply every coefficient by the integer ``c``."""
        return LaurentSeries([c * x for x in self.coeffs], self.lo, self.denom, self.order)

    def shift(self, e: int) -> "LaurentSeries":
        """Multiply by ``q^(e/denom)``."""
        order = None if self.order is None else self.order + e
        return LaurentSeries(self.coeffs, self.lo + e, self.denom, order)

    def truncate(self, order: Optional[int]) -> "LaurentSeries":
        """Forget everything at or above exponent numerator ``order``."""
        new = _min_order(self.order, order)
        if new == self.order:
            return self
        return LaurentSeries(self.coeffs, self.lo, self.denom, new)

    def invert(self, order: Optional[int] = None) -> "LaurentSeries":
        """Multiplicative inverse of a series whose lowest coefficient is a unit.

        Args:
            order: requested truncation numerator of the result; required in
                effect for exact inputs (falls back to ``DEFAULT_ORDER``).

        Raises:
            NonUnitLeadingCoefficient: if the lowest coefficient is not +1 or -1.
        """
        if not self.coeffs:
            raise NonUnitLeadingCoefficient("Cannot invert the zero series")
        u0 = self.coeffs[0]
        if u0 not in (1, -1):
            raise NonUnitLeadingCoefficient(
                f"Lowest coefficient {u0} at q^({self.lo}/{self.denom}) is not a unit"
            )
        target = order
        if self.order is not None:
            target = _min_order(target, self.order - 2 * self.lo)
        if target is None:
            target = settings.DEFAULT_ORDER * self.denom
        n_terms = target + self.lo
        if n_terms <= 0:
            return LaurentSeries((), 0, self.denom, target)
        tail = [(j, c) for j, c in enumerate(self.coeffs) if j and c and j < n_terms]
        b = [0] * n_terms
        b[0] = u0
        for n in range(1, n_terms):
            acc = 0
            for j, c in tail:
                if j > n:
                    break
                acc += c * b[n - j]
            b[n] = -u0 * acc
        return LaurentSeries(b, -self.lo, self.denom, target)

    def substitute_power(self, s: Exponent) -> "LaurentSeries":
        """Formal substitution ``q -> q^s`` for a positive rational ``s``."""
        s = Fraction(s)
        if s <= 0:
            raise ValueError(f"Substitution power must be positive, got {s}")
        p, r = s.numerator, s.denominator
        denom = self.denom * r
        g = denom
        for e, _ in self.items():
            g = gcd(g, e * p)
        if self.order is not None:
            g = gcd(g, self.order * p)
        terms = {e * p // g: c for e, c in self.items()}
        order = None if self.order is None else self.order * p // g
        return LaurentSeries.from_terms(terms, denom // g, order)

    def coeff_at(self, e: int) -> int:
        """Coefficient of ``q^(e/denom)``.

        Raises:
            OrderExceeded: if the exponent lies outside the known window.
        """
        if self.order is not None and e >= self.order:
            raise OrderExceeded(
                f"Coefficient of q^({e}/{self.denom}) requested, known below "
                f"q^({self.order}/{self.denom})"
            )
        j = e - self.lo
        if 0 <= j < len(self.coeffs):
            return self.coeffs[j]
        return 0

    # ------------------------------------------------------------- comparison

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = LaurentSeries((other,), 0, self.denom)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        a, b = self._unified(other)
        return a.order == b.order and a.coeffs == b.coeffs and (not a.coeffs or a.lo == b.lo)

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        parts = [f"{c}*q^({e}/{self.denom})" for e, c in self.items()]
        text = " + ".join(parts) if parts else "0"
        if self.order is not None:
            text += f" + O(q^({self.order}/{self.denom}))"
        return text

    def __repr__(self) -> str:
        return (
            f"LaurentSeries(lo={self.lo}, denom={self.denom}, order={self.order}, "
            f"coeffs={list(self.coeffs)})"
        )


class SeriesComparison:
    """Result of comparing two series on a window."""

    def __init__(
        self,
        equal: bool,
        denom: int,
        bound: Optional[int],
        exponent: Optional[int] = None,
        lhs: Optional[int] = None,
        rhs: Optional[int] = None,
    ):
        self.equal = equal
        self.denom = denom
        self.bound = bound
        self.exponent = exponent
        self.lhs = lhs
        self.rhs = rhs

    def __bool__(self) -> bool:
        return self.equal

    def __repr__(self) -> str:
        if self.equal:
            return f"SeriesComparison(equal=True, below=q^({self.bound}/{self.denom}))"
        return (
            f"SeriesComparison(equal=False, at=q^({self.exponent}/{self.denom}), "
            f"lhs={self.lhs}, rhs={self.rhs})"
        )


class ValuationBound:
    """Lower bound ``a2 L^2 + a1 L + a0`` on the q-valuation of entry ``L >= 0`` of a sequence.

    Bounds combine coefficient-wise: ``+`` bounds a product, :meth:`meet` bounds a sum
    of two entries. Only a bound with ``a2 >= 0`` can end an infinite sum.
    """

    __slots__ = ("a2", "a1", "a0")

    def __init__(self, a2: Exponent = 0, a1: Exponent = 0, a0: Exponent = 0):
        self.a2 = Fraction(a2)
        self.a1 = Fraction(a1)
        self.a0 = Fraction(a0)

    @classmethod
    def constant(cls, a0: Exponent) -> "ValuationBound":
        return cls(0, 0, a0)

    @property
    def is_convex(self) -> bool:
        return self.a2 >= 0

    def __call__(self, L: int) -> Fraction:
        return (self.a2 * L + self.a1) * L + self.a0

    def __add__(self, other: "ValuationBound") -> "ValuationBound":
        return ValuationBound(self.a2 + other.a2, self.a1 + other.a1, self.a0 + other.a0)

    def meet(self, other: "ValuationBound") -> "ValuationBound":
        """A bound below both, valid since ``L^2``, ``L`` and 1 are non-negative."""
        return ValuationBound(
            min(self.a2, other.a2), min(self.a1, other.a1), min(self.a0, other.a0)
        )

    def shift(self, k: int) -> "ValuationBound":
        """The bound ``L -> self(L - k)``, for sequences read at ``L - k``."""
        a2, a1, a0 = self.a2, self.a1, self.a0
        return ValuationBound(a2, a1 - 2 * a2 * k, (a2 * k - a1) * k + a0)

    def prefix_min(self) -> "ValuationBound":
        """A bound on ``min_(0 <= r <= L) self(r)``."""
        if self.a1 >= 0 and self.a2 >= 0:
            return ValuationBound.constant(self.a0)
        if self.a2 > 0:
            return ValuationBound.constant(self.a0 - self.a1 * self.a1 / (4 * self.a2))
        # concave or linear: the minimum sits at an end of [0, L]
        return self.meet(ValuationBound.constant(self.a0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValuationBound):
            return NotImplemented
        return (self.a2, self.a1, self.a0) == (other.a2, other.a1, other.a0)

    def __hash__(self) -> int:
        return hash((self.a2, self.a1, self.a0))

    def __repr__(self) -> str:
        return f"ValuationBound({self.a2} L^2 + {self.a1} L + {self.a0})"


class Window:
    """Truncation context: the exponent grid ``1/denom`` and the order numerator."""

    __slots__ = ("denom", "order")

    def __init__(self, denom: int, order: int):
        if denom < 1:
            raise ValueError(f"Exponent denominator must be positive, got {denom}")
        self.denom = denom
        self.order = order

    @classmethod
    def of(cls, q_order: Exponent, denom: int = 1) -> "Window":
        """Window known below ``q^q_order`` on grid ``1/denom``."""
        w = cls(denom, 0)
        return cls(denom, w.num(q_order))

    @property
    def q_order(self) -> Fraction:
        return Fraction(self.order, self.denom)

    def num(self, exponent: Exponent) -> int:
        """Grid numerator of a rational exponent.

        Raises:
            ValueError: if the exponent is not on this grid.
        """
        x = Fraction(exponent) * self.denom
        if x.denominator != 1:
            raise ValueError(f"Exponent {exponent} is not on grid 1/{self.denom}")
        return x.numerator

    def monomial(self, coeff: int, exponent: Exponent) -> LaurentSeries:
        """Exact series ``coeff * q^exponent`` on this grid."""
        return LaurentSeries((coeff,), self.num(exponent), self.denom)

    def one(self) -> LaurentSeries:
        return LaurentSeries((1,), 0, self.denom)

    def zero(self) -> LaurentSeries:
        """The zero series known on the whole window."""
        return LaurentSeries((), 0, self.denom, self.order)

    def widen(self, extra: int) -> "Window":
        return Window(self.denom, self.order + max(extra, 0))

    def with_order(self, order: int) -> "Window":
        return Window(self.denom, order)

    def refine(self, denom: int) -> "Window":
        """Same q-order on a finer grid."""
        if denom % self.denom:
            denom = lcm(denom, self.denom)
        return Window(denom, self.order * (denom // self.denom))

    def fit(self, s: LaurentSeries) -> LaurentSeries:
        """Bring a series onto this grid and truncate it to this window.

        A series with exponents off this grid stays on the common refinement.
        """
        try:
            return s.regrid(self.denom).truncate(self.order)
        except ValueError:
            w = self.refine(s.denom)
            return s.regrid(w.denom).truncate(w.order)

    def covers(self, s: LaurentSeries) -> bool:
        """True when the series is fully known on this window."""
        if s.order is None:
            return True
        return Fraction(s.order, s.denom) >= self.q_order

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Window):
            return NotImplemented
        return (self.denom, self.order) == (other.denom, other.order)

    def __hash__(self) -> int:
        return hash((self.denom, self.order))

    def __repr__(self) -> str:
        return f"Window(q^({self.order}/{self.denom}))"


# ---------------------------------------------------------------- operations


def monomial(c: int, e: int, denom: int = 1, order: Optional[int] = None) -> LaurentSeries:
    """The series ``c * q^(e/denom)``; exact unless an order is supplied."""
    if denom < 1:
        raise ValueError(f"Exponent denominator must be positive, got {denom}")
    return LaurentSeries((c,), e, denom, order)


def add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a + b


def mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a * b


def invert(a: LaurentSeries, order: Optional[int] = None) -> LaurentSeries:
    return a.invert(order)


def substitute_power(a: LaurentSeries, s: Exponent) -> LaurentSeries:
    return a.substitute_power(s)


def coeff_at(a: LaurentSeries, e: int) -> int:
    return a.coeff_at(e)


def eq_up_to(
    a: LaurentSeries,
    b: LaurentSeries,
    e: Optional[int] = None,
    denom: Optional[int] = None,
) -> SeriesComparison:
    """Compare two series on all exponents strictly below ``e/denom``.

    Args:
        a: left series
        b: right series
        e: exponent numerator of the bound; defaults to the smaller known order
        denom: grid of ``e``; defaults to the unified grid of both series

    Returns:
        SeriesComparison carrying the lowest differing exponent on failure.

    Raises:
        OrderExceeded: if the bound lies beyond either known window.
    """
    a, b = a._unified(b)
    d = a.denom
    known = _min_order(a.order, b.order)
    if e is None:
        if known is None:
            hi = max(a.lo + len(a.coeffs), b.lo + len(b.coeffs))
            bound = Fraction(hi, d)
        else:
            bound = Fraction(known, d)
    else:
        bound = Fraction(e, denom if denom is not None else d)
    if known is not None and bound > Fraction(known, d):
        raise OrderExceeded(f"Comparison up to q^{bound} exceeds known window q^({known}/{d})")
    limit = bound * d
    top = limit.numerator // limit.denominator
    if limit.denominator == 1:
        top -= 1
    starts = [s.lo for s in (a, b) if s.coeffs]
    start = min(starts) if starts else 0
    for x in range(start, top + 1):
        ca, cb = a.coeff_at(x), b.coeff_at(x)
        if ca != cb:
            return SeriesComparison(False, d, top + 1, x, ca, cb)
    return SeriesComparison(True, d, top + 1)


def compare(a: LaurentSeries, b: LaurentSeries) -> SeriesComparison:
    """Compare on the largest window both series know."""
    return eq_up_to(a, b)


def at_order(window: Window, compute: Callable[[Window], LaurentSeries]) -> LaurentSeries:
    """Run ``compute`` until its result covers ``window``, widening the internal order.

    Negative valuations of exact factors shrink the window of a product; the
    deficit is added to the internal order and the computation is repeated.

    Raises:
        OrderExceeded: if the window is still not covered after the allowed retries.
    """
    w = window
    for attempt in range(settings.MAX_PRECISION_RETRIES + 1):
        result = compute(w)
        if window.covers(result):
            return window.fit(result)
        reached = Fraction(result.order, result.denom)  # type: ignore[arg-type]
        deficit = (window.q_order - reached) * w.denom
        extra = -(-deficit.numerator // deficit.denominator)
        logger.debug(f"Widening {w} by {extra} after attempt {attempt + 1}")
        w = w.widen(extra)
    raise OrderExceeded(f"Could not reach {window} after {settings.MAX_PRECISION_RETRIES} retries")


def sum_series(items: Sequence[LaurentSeries], window: Window) -> LaurentSeries:
    """Sum a finite collection of series, truncated to the window."""
    total = window.zero()
    for s in items:
        total = total + s
    return window.fit(total)


def sum_terms(
    term: Callable[[int], LaurentSeries],
    window: Window,
    start: int = 0,
    stop: Optional[int] = None,
    exponent: Optional[Callable[[int], Fraction]] = None,
) -> LaurentSeries:
    """Sum ``term(n)`` for ``n = start, start+1, ...`` on the window.

    With ``stop`` the sum is finite. Otherwise ``exponent(n)`` must be a convex lower
    bound on the valuation of ``term(n)``; terms whose bound lies at or beyond the
    window are not computed, and the sum ends once ``SUM_TAIL_TERMS`` consecutive
    bounds lie beyond the window without decreasing.

    Raises:
        NonTerminatingSum: if an infinite sum has no bound, a non-convex quadratic
            bound, or does not reach such a tail within ``MAX_SUM_TERMS`` terms.
    """
    total = window.zero()
    if stop is not None:
        for n in range(start, stop + 1):
            total = total + term(n)
        return window.fit(total)
    if exponent is None:
        raise NonTerminatingSum(f"Infinite sum from n={start} on {window} has no valuation bound")
    if isinstance(exponent, ValuationBound) and not exponent.is_convex:
        raise NonTerminatingSum(f"{exponent} is not convex; the sum from n={start} cannot be cut")
    bound = window.q_order
    beyond = 0
    previous: Optional[Fraction] = None
    for n in range(start, start + settings.MAX_SUM_TERMS):
        e = Fraction(exponent(n))
        if e < bound:
            total = total + term(n)
            beyond = 0
        elif previous is not None and e >= previous:
            beyond += 1
            if beyond >= settings.SUM_TAIL_TERMS:
                return window.fit(total)
        else:
            beyond = 0
        previous = e
    raise NonTerminatingSum(
        f"Valuation bound did not leave {window} within {settings.MAX_SUM_TERMS} terms "
        f"starting at n={start}"
    )


def bilateral_sum(
    exponent: Callable[[int], Fraction],
    term: Callable[[int], LaurentSeries],
    window: Window,
) -> LaurentSeries:
    """Sum ``term(j)`` over all integers ``j``, split into ``j >= 0`` and ``j < 0``.

    ``exponent(j)`` must be a convex lower bound on the valuation of ``term(j)``. Each
    half stops once that bound has reached the window and no longer decreases.

    Raises:
        NonTerminatingSum: if a half does not stop within ``MAX_SUM_TERMS`` terms.
    """
    bound = window.q_order
    total = window.zero()
    for first, step in ((0, 1), (-1, -1)):
        previous: Optional[Fraction] = None
        j = first
        for _ in range(settings.MAX_SUM_TERMS):
            e = Fraction(exponent(j))
            if e >= bound and previous is not None and e >= previous:
                break
            if e < bound:
                total = total + term(j)
            previous = e
            j += step
        else:
            raise NonTerminatingSum(f"Bilateral sum does not reach {window} from j={first}")
    return window.fit(total)
