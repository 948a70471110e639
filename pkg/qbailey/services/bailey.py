"""Bailey pairs, conjugate Bailey pairs and the transformations between them.

A Bailey pair relative to ``a = q^ell`` satisfies

    beta_L = sum_{r=0}^{L} alpha_r / ((q)_(L-r) (aq)_(L+r)),

and a conjugate pair satisfies ``gamma_L = sum_{r>=L} delta_r / ((q)_(r-L) (aq)_(r+L))``.
Sequences are lazy: each entry is computed on demand for a truncation window and
cached per window.
"""

import logging
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from qbailey.exceptions import InvalidParameters, ModulusMismatch
from qbailey.schemas import Target, VerificationReport
from qbailey.services.qtools import (
    PochhammerSpec,
    inv_base_factorial,
    inv_qfac,
    inv_shifted,
    limit_shifted_factorial,
    pochhammer,
)
from qbailey.services.series import (
    Exponent,
    LaurentSeries,
    ValuationBound,
    Window,
    at_order,
    sum_terms,
)
from qbailey.services.verify import Check, run_checks

logger = logging.getLogger(__name__)

SeriesFn = Callable[[int, Window], LaurentSeries]
KernelFn = Callable[[int, int, Window], LaurentSeries]


def _exact_zero(window: Window) -> LaurentSeries:
    return LaurentSeries((), 0, window.denom, None)


class LazySequence:
    """A sequence ``L -> LaurentSeries`` evaluated on demand.

    Each entry keeps the widest window it was computed on, per exponent grid; a
    narrower request is answered by truncating that entry. Entries with negative
    index, or beyond ``support`` when one is given, are exact zeros.
    """

    def __init__(self, fn: SeriesFn, support: Optional[int] = None, name: str = "seq"):
        self._fn = fn
        self.support = support
        self.name = name
        self._cache: Dict[Tuple[int, int], LaurentSeries] = {}

    def __call__(self, L: int, window: Window) -> LaurentSeries:
        if L < 0 or (self.support is not None and L > self.support):
            return _exact_zero(window)
        key = (L, window.denom)
        cached = self._cache.get(key)
        if cached is not None and window.covers(cached):
            if cached.q_order is None or cached.q_order == window.q_order:
                return cached
            return window.fit(cached)
        value = self._fn(L, window)
        if cached is None or not _wider(cached, value):
            self._cache[key] = value
        return value

    def __repr__(self) -> str:
        return f"LazySequence({self.name}, support={self.support})"


def _wider(a: LaurentSeries, b: LaurentSeries) -> bool:
    """Whether ``a`` is known at least as far as ``b``."""
    if a.q_order is None:
        return True
    return b.q_order is not None and a.q_order >= b.q_order


def _lazy(fn: "SeriesFn | LazySequence", support: Optional[int], name: str) -> LazySequence:
    if isinstance(fn, LazySequence):
        return fn
    return LazySequence(fn, support, name)


class BaileyPair:
    """Sequences ``(alpha, beta)`` relative to ``a = q^ell``.

    ``support`` bounds ``alpha``: ``alpha_L = 0`` for ``L > support``. ``alpha_bound``,
    when given, bounds the valuation of ``alpha_L`` for every ``L`` and lets infinite
    sums over the pair stop.
    """

    def __init__(
        self,
        ell: int,
        alpha: "SeriesFn | LazySequence",
        beta: "SeriesFn | LazySequence",
        support: Optional[int] = None,
        name: str = "pair",
        alpha_bound: Optional[ValuationBound] = None,
    ):
        self.ell = ell
        self.support = support
        self.name = name
        self.alpha = _lazy(alpha, support, f"{name}.alpha")
        self.beta = _lazy(beta, None, f"{name}.beta")
        self.alpha_bound = alpha_bound
        self.construction: Optional[str] = None

    def beta_bound(self, window: Window) -> Optional[ValuationBound]:
        """A valuation bound for ``beta_L``, or None when neither bound nor support is known.

        ``1/(q)_n`` and ``1/(aq)_n`` have non-negative valuation, so ``beta_L`` is bounded
        by the least alpha bound over ``r <= L``.
        """
        if self.alpha_bound is not None:
            return self.alpha_bound.prefix_min()
        if self.support is None:
            return None
        lowest = window.q_order
        for r in range(self.support + 1):
            v = self.alpha(r, window).q_valuation
            if v is not None and v < lowest:
                lowest = v
        return ValuationBound.constant(lowest)

    def __repr__(self) -> str:
        return f"BaileyPair({self.name}, ell={self.ell}, support={self.support})"


class ConjugatePair:
    """Sequences ``(gamma, delta)`` relative to ``a = q^ell``.

    ``delta_support`` bounds ``delta`` (``delta_r = 0`` for ``r > M``); ``gamma_support``
    does the same for ``gamma`` when it is known. The optional valuation bounds play
    the part of the supports for infinite sums.
    """

    def __init__(
        self,
        ell: int,
        gamma: "SeriesFn | LazySequence",
        delta: "SeriesFn | LazySequence",
        delta_support: Optional[int] = None,
        gamma_support: Optional[int] = None,
        name: str = "conjugate",
        gamma_bound: Optional[ValuationBound] = None,
        delta_bound: Optional[ValuationBound] = None,
    ):
        self.ell = ell
        self.delta_support = delta_support
        self.gamma_support = gamma_support
        self.name = name
        self.gamma = _lazy(gamma, gamma_support, f"{name}.gamma")
        self.delta = _lazy(delta, delta_support, f"{name}.delta")
        self.gamma_bound = gamma_bound
        self.delta_bound = delta_bound

    def __repr__(self) -> str:
        return f"ConjugatePair({self.name}, ell={self.ell}, delta_support={self.delta_support})"


class RhoParam:
    """A transformation parameter: the monomial ``q^exponent`` or the limit ``rho -> inf``."""

    __slots__ = ("exponent",)

    def __init__(self, exponent: Optional[Exponent] = None):
        self.exponent = None if exponent is None else Fraction(exponent)

    @classmethod
    def finite(cls, exponent: Exponent) -> "RhoParam":
        return cls(exponent)

    @classmethod
    def infinity(cls) -> "RhoParam":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.exponent is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RhoParam):
            return NotImplemented
        return self.exponent == other.exponent

    def __hash__(self) -> int:
        return hash(self.exponent)

    def __repr__(self) -> str:
        return "RhoParam(inf)" if self.exponent is None else f"RhoParam(q^{self.exponent})"


INF = RhoParam.infinity()

Rhos = Tuple[RhoParam, RhoParam]


# ------------------------------------------------------------ rho kernels


def _rho_grid(rhos: Sequence[RhoParam]) -> int:
    d = 1
    for rho in rhos:
        if rho.exponent is not None:
            d = lcm(d, rho.exponent.denominator)
    return d


def _check_rhos(rhos: Sequence[RhoParam], base: int) -> None:
    """Reject finite parameters that would put ``(1 - q^0)`` into ``(q^base/rho)_n``."""
    for rho in rhos:
        if rho.exponent is None:
            continue
        gap = base - rho.exponent
        if gap.denominator == 1 and gap <= 0:
            raise InvalidParameters(
                f"{rho} makes (q^{base}/rho)_n vanish; choose an exponent off {base} + N"
            )


def _rho_factor(rhos: Sequence[RhoParam], r: int, w: Window) -> LaurentSeries:
    """``prod_rho (rho)_r rho^(-r)``, exact; an infinite rho gives ``(-1)^r q^(r(r-1)/2)``."""
    out = w.one()
    for rho in rhos:
        if rho.exponent is None:
            out = out * limit_shifted_factorial(r)
        else:
            out = out * pochhammer(PochhammerSpec(rho.exponent, 1, r)) * w.monomial(1, -rho.exponent * r)
    return out


def _inv_rho_denominators(rhos: Sequence[RhoParam], base: int, n: int, w: Window) -> LaurentSeries:
    """``1 / prod (q^base/rho)_n`` over the finite parameters."""
    out = w.one()
    for rho in rhos:
        if rho.exponent is not None:
            out = out * inv_shifted(base - rho.exponent, n, w)
    return out


def _ratio_pochhammer(rhos: Rhos, base: int, n: int) -> LaurentSeries:
    """``(q^base/(rho1 rho2))_n``, identically 1 when a parameter is infinite."""
    if n < 0:
        raise ValueError(f"Length must be non-negative, got {n}")
    if any(rho.exponent is None for rho in rhos):
        return LaurentSeries((1,))
    c = base - rhos[0].exponent - rhos[1].exponent  # type: ignore[operator]
    return pochhammer(PochhammerSpec(c, 1, n))


def bailey_weight(rhos: Rhos, base: int, L: int, w: Window) -> LaurentSeries:
    """``(rho1)_L (rho2)_L (q^base/rho1 rho2)^L / ((q^base/rho1)_L (q^base/rho2)_L)``."""
    return _rho_factor(rhos, L, w) * w.monomial(1, base * L) * _inv_rho_denominators(rhos, base, L, w)


def _rho_bound(rhos: Sequence[RhoParam], base: int) -> ValuationBound:
    """Valuation bound of :func:`bailey_weight` in ``L``.

    ``(q^c)_L q^(-cL)`` has valuation at least ``(min(0, c) - c) L``; the finite
    denominators only raise the valuation.
    """
    out = ValuationBound(0, base, 0)
    for rho in rhos:
        if rho.exponent is None:
            out = out + ValuationBound(Fraction(1, 2), Fraction(-1, 2), 0)
        else:
            out = out + ValuationBound(0, min(0, rho.exponent) - rho.exponent, 0)
    return out


def _ratio_floor(ell: int) -> ValuationBound:
    """Valuation bound of :func:`_lattice_ratio`."""
    return ValuationBound.constant(min(0, ell))


def _lattice_ratio(ell: int, n: int, w: Window) -> LaurentSeries:
    """``(a)_n / (aq)_n = (1 - q^ell) / (1 - q^(ell+n))`` for ``n >= 1``, and 1 at ``n = 0``."""
    if n == 0:
        return w.one()
    top = pochhammer(PochhammerSpec(ell, 1, 1))
    if top.is_zero:
        return top
    return top * inv_shifted(ell + n, 1, w)


def _beta_prime(bp: BaileyPair, rhos: Rhos, base: int, L: int, w: Window) -> LaurentSeries:
    """``sum_r (rho1)_r (rho2)_r (b/rho1 rho2)^r (b/rho1 rho2)_(L-r) beta_r / ((b/rho1)_L (b/rho2)_L (q)_(L-r))``."""

    def term(r: int) -> LaurentSeries:
        return (
            _rho_factor(rhos, r, w)
            * w.monomial(1, base * r)
            * _ratio_pochhammer(rhos, base, L - r)
            * inv_qfac(L - r, w)
            * bp.beta(r, w)
        )

    return _inv_rho_denominators(rhos, base, L, w) * sum_terms(term, w, 0, L)


# ------------------------------------------------------ defining relations


def beta_from_alpha(
    ell: int,
    alpha: "SeriesFn | LazySequence",
    support: Optional[int] = None,
    name: str = "pair",
    alpha_bound: Optional[ValuationBound] = None,
) -> BaileyPair:
    """The Bailey pair whose ``beta`` is computed from ``alpha`` by the defining relation."""
    alpha_seq = _lazy(alpha, support, f"{name}.alpha")

    def beta(L: int, window: Window) -> LaurentSeries:
        def compute(w: Window) -> LaurentSeries:
            return sum_terms(
                lambda r: alpha_seq(r, w) * inv_qfac(L - r, w) * inv_shifted(ell + 1, L + r, w),
                w,
                0,
                L if support is None else min(L, support),
            )

        return at_order(window, compute)

    return BaileyPair(ell, alpha_seq, beta, support, name, alpha_bound)


def conjugate_gamma(
    ell: int,
    delta: "SeriesFn | LazySequence",
    delta_support: Optional[int],
    L: int,
    window: Window,
    delta_bound: Optional[ValuationBound] = None,
) -> LaurentSeries:
    """``sum_{r>=L} delta_r / ((q)_(r-L) (aq)_(r+L))`` on the window.

    Raises:
        NonTerminatingSum: if ``delta`` has neither a support nor a convex valuation bound.
    """
    if delta_support is not None and L > delta_support:
        return _exact_zero(window)

    def compute(w: Window) -> LaurentSeries:
        return sum_terms(
            lambda r: delta(r, w) * inv_qfac(r - L, w) * inv_shifted(ell + 1, r + L, w),
            w,
            L,
            delta_support,
            exponent=delta_bound,
        )

    return at_order(window, compute)


def _floor_of(bound: Optional[ValuationBound]) -> Optional[ValuationBound]:
    """A constant below ``bound`` on all of ``L >= 0``, when ``bound`` is bounded below."""
    if bound is None or bound.a2 < 0 or (bound.a2 == 0 and bound.a1 < 0):
        return None
    return bound.prefix_min()


def gamma_from_delta(
    ell: int,
    delta: "SeriesFn | LazySequence",
    delta_support: Optional[int] = None,
    name: str = "conjugate",
    delta_bound: Optional[ValuationBound] = None,
) -> ConjugatePair:
    """The conjugate pair whose ``gamma`` is computed from ``delta``.

    The sum over ``r`` stops at ``delta_support``, or where ``delta_bound`` leaves the
    window; with neither, :class:`NonTerminatingSum` is raised when ``gamma`` is evaluated.
    """
    delta_seq = _lazy(delta, delta_support, f"{name}.delta")

    def gamma(L: int, window: Window) -> LaurentSeries:
        return conjugate_gamma(ell, delta_seq, delta_support, L, window, delta_bound)

    return ConjugatePair(
        ell,
        gamma,
        delta_seq,
        delta_support,
        delta_support,
        name,
        gamma_bound=_floor_of(delta_bound),
        delta_bound=delta_bound,
    )


def _product_bound(
    a: Optional[ValuationBound], b: Optional[ValuationBound]
) -> Optional[ValuationBound]:
    return None if a is None or b is None else a + b


def pairing_sum(
    bp: BaileyPair, cp: ConjugatePair, window: Window
) -> Tuple[LaurentSeries, LaurentSeries]:
    """Both sides of ``sum alpha_L gamma_L = sum beta_L delta_L``.

    Raises:
        ModulusMismatch: if the pairs are relative to different values of ``a``.
        NonTerminatingSum: if a side is infinite and its valuation bounds are unknown.
    """
    if bp.ell != cp.ell:
        raise ModulusMismatch(f"{bp} is relative to q^{bp.ell}, {cp} to q^{cp.ell}")
    stops = [s for s in (bp.support, cp.gamma_support) if s is not None]
    lhs_stop = min(stops) if stops else None

    def lhs(w: Window) -> LaurentSeries:
        bound = _product_bound(bp.alpha_bound, cp.gamma_bound)
        return sum_terms(lambda L: bp.alpha(L, w) * cp.gamma(L, w), w, 0, lhs_stop, bound)

    def rhs(w: Window) -> LaurentSeries:
        bound = None
        if cp.delta_support is None:
            bound = _product_bound(bp.beta_bound(w), cp.delta_bound)
        return sum_terms(lambda L: bp.beta(L, w) * cp.delta(L, w), w, 0, cp.delta_support, bound)

    return at_order(window, lhs), at_order(window, rhs)


def classical_conjugate(ell: int, rho1: RhoParam, rho2: RhoParam, M: int) -> ConjugatePair:
    """The two-parameter conjugate pair of Bailey's lemma at finite ``M``.

    Both parameters infinite give ``gamma_L = a^L q^(L^2) / ((q)_(M-L) (aq)_(M+L))`` and
    ``delta_L = a^L q^(L^2) / (q)_(M-L)``.
    """
    rhos = (rho1, rho2)
    base = ell + 1
    _check_rhos(rhos, base)
    grid = _rho_grid(rhos)

    def gamma(L: int, window: Window) -> LaurentSeries:
        def compute(w: Window) -> LaurentSeries:
            w = w.refine(grid)
            return bailey_weight(rhos, base, L, w) * inv_qfac(M - L, w) * inv_shifted(base, M + L, w)

        return at_order(window, compute)

    def delta(L: int, window: Window) -> LaurentSeries:
        def compute(w: Window) -> LaurentSeries:
            w = w.refine(grid)
            return (
                _rho_factor(rhos, L, w)
                * w.monomial(1, base * L)
                * _ratio_pochhammer(rhos, base, M - L)
                * _inv_rho_denominators(rhos, base, M, w)
                * inv_qfac(M - L, w)
            )

        return at_order(window, compute)

    return ConjugatePair(ell, gamma, delta, M, M, f"classical(M={M}, {rho1}, {rho2})")


# ------------------------------------------------------ valuation bounds


def _ab_bound(bp: BaileyPair, rhos: Rhos, base: int) -> Optional[ValuationBound]:
    if bp.alpha_bound is None:
        return None
    return _rho_bound(rhos, base) + bp.alpha_bound


def _lattice_bound(bp: BaileyPair, rhos: Rhos, base: int) -> Optional[ValuationBound]:
    """Bound of ``W(L) r(2L) alpha_L - W(L - base + ell) q^(ell+2L-2) r(2L-2) alpha_(L-1)``.

    ``base`` is ``ell`` for the first lattice transformation, whose second weight is
    taken at ``L``, and ``ell + 1`` for the second, where it is taken at ``L - 1``.
    """
    if bp.alpha_bound is None:
        return None
    ell = bp.ell
    weight = _rho_bound(rhos, base)
    step = ValuationBound(0, 2, ell - 2) + _ratio_floor(ell)
    head = weight + _ratio_floor(ell) + bp.alpha_bound
    if base == ell:
        tail = weight + step + bp.alpha_bound.shift(1)
    else:
        tail = (weight + bp.alpha_bound).shift(1) + step
    return head.meet(tail)


def _chain_bound(bp: BaileyPair, rhos: Rhos) -> Optional[ValuationBound]:
    """Bound of ``q^(ell L + L^2 + L) sum_(r<=L) c_r - q^(ell(L-1) + L^2 - L) sum_(r<L) c_r``."""
    if bp.alpha_bound is None:
        return None
    ell = bp.ell
    weight = _rho_bound(rhos, 0) + ValuationBound(-1, 1, 0)
    partial = (weight + bp.alpha_bound).prefix_min()
    upper = ValuationBound(1, ell + 1, 0) + partial
    return upper.meet(ValuationBound(1, ell - 1, -ell) + partial)


# -------------------------------------------------------- transformations


def transform_AB(bp: BaileyPair, rho1: RhoParam = INF, rho2: RhoParam = INF) -> BaileyPair:
    """Bailey's lemma: a new pair relative to the same ``a``."""
    rhos = (rho1, rho2)
    base = bp.ell + 1
    _check_rhos(rhos, base)
    grid = _rho_grid(rhos)

    def alpha(L: int, window: Window) -> LaurentSeries:
        def compute(w: Window) -> LaurentSeries:
            w = w.refine(grid)
            return bailey_weight(rhos, base, L, w) * bp.alpha(L, w)

        return at_order(window, compute)

    def beta(L: int, window: Window) -> LaurentSeries:
        return at_order(window, lambda w: _beta_prime(bp, rhos, base, L, w.refine(grid)))

    return BaileyPair(
        bp.ell, alpha, beta, bp.support, f"AB({bp.name})", _ab_bound(bp, rhos, base)
    )


def transform_lattice(bp: BaileyPair, rho1: RhoParam = INF, rho2: RhoParam = INF) -> BaileyPair:
    """First lattice transformation: a pair relative to ``a/q``, with ``alpha'_0 = alpha_0``."""
    rhos = (rho1, rho2)
    ell = bp.ell
    _check_rhos(rhos, ell)
    grid = _rho_grid(rhos)

    def alpha(L: int, window: Window) -> LaurentSeries:
        if L == 0:
            return bp.alpha(0, window)

        def compute(w: Window) -> LaurentSeries:
            w = w.refine(grid)
            inner = _lattice_ratio(ell, 2 * L, w) * bp.alpha(L, w) - (
                w.monomial(1, ell + 2 * L - 2) * _lattice_ratio(ell, 2 * L - 2, w) * bp.alpha(L - 1, w)
            )
            return bailey_weight(rhos, ell, L, w) * inner

        return at_order(window, compute)

    def beta(L: int, window: Window) -> LaurentSeries:
        return at_order(window, lambda w: _beta_prime(bp, rhos, ell, L, w.refine(grid)))

    support = None if bp.support is None else bp.support + 1
    return BaileyPair(
        ell - 1, alpha, beta, support, f"lattice({bp.name})", _lattice_bound(bp, rhos, ell)
    )


def transform_chain_q(bp: BaileyPair, rho1: RhoParam = INF, rho2: RhoParam = INF) -> BaileyPair:
    """The chain transformation with an extra ``q^L`` on ``beta``; same ``a``."""
    rhos = (rho1, rho2)
    ell = bp.ell
    base = ell + 1
    _check_rhos(rhos, base)
    grid = _rho_grid(rhos)

    def weight(r: int, w: Window) -> LaurentSeries:
        return _rho_factor(rhos, r, w) * w.monomial(1, (1 - r) * r) * _inv_rho_denominators(rhos, base, r, w)

    def alpha(L: int, window: Window) -> LaurentSeries:
        def compute(w: Window) -> LaurentSeries:
            w = w.refine(grid)
            partial = sum_terms(lambda r: weight(r, w) * bp.alpha(r, w), w, 0, L - 1) if L else w.zero()
            full = partial + weight(L, w) * bp.alpha(L, w)
            out = w.monomial(1, ell * L + L * (L + 1)) * full
            if L:
                out = out - w.monomial(1, ell * (L - 1) + L * (L - 1)) * partial
            return out

        return at_order(window, compute)

    def beta(L: int, window: Window) -> LaurentSeries:
        return at_order(window, lambda w: w.monomial(1, L) * _beta_prime(bp, rhos, base, L, w.refine(grid)))

    return BaileyPair(ell, alpha, beta, None, f"chain({bp.name})", _chain_bound(bp, rhos))


def transform_lattice2(bp: BaileyPair, rho1: RhoParam = INF, rho2: RhoParam = INF) -> BaileyPair:
    """Second lattice transformation: a pair relative to ``a/q``, with ``alpha'_0 = alpha_0``."""
    rhos = (rho1, rho2)
    ell = bp.ell
    base = ell + 1
    _check_rhos(rhos, base)
    grid = _rho_grid(rhos)

    def alpha(L: int, window: Window) -> LaurentSeries:
        if L == 0:
            return bp.alpha(0, window)

        def compute(w: Window) -> LaurentSeries:
            w = w.refine(grid)
            head = bailey_weight(rhos, base, L, w) * _lattice_ratio(ell, 2 * L, w) * bp.alpha(L, w)
            tail = (
                bailey_weight(rhos, base, L - 1, w)
                * w.monomial(1, ell + 2 * L - 2)
                * _lattice_ratio(ell, 2 * L - 2, w)
                * bp.alpha(L - 1, w)
            )
            return head - tail

        return at_order(window, compute)

    def beta(L: int, window: Window) -> LaurentSeries:
        return at_order(window, lambda w: _beta_prime(bp, rhos, base, L, w.refine(grid)))

    support = None if bp.support is None else bp.support + 1
    return BaileyPair(
        ell - 1, alpha, beta, support, f"lattice2({bp.name})", _lattice_bound(bp, rhos, base)
    )


# ------------------------------------------------------------------ seeds


class Seed(str, Enum):
    """Named seed pairs."""

    I = "I"  # noqa: E741
    II = "II"
    III = "III"


def _odd_sum(L: int) -> LaurentSeries:
    """``(q^2)_(2L) / (q)_(2L) = 1 + q + ... + q^(2L)``."""
    return LaurentSeries([1] * (2 * L + 1))


def seed_pair(which: Seed, delta: int = 0) -> BaileyPair:
    """One of the seed pairs; ``delta`` selects the variant of pair III."""
    which = Seed(which)
    if which is Seed.I:

        def alpha_i(L: int, window: Window) -> LaurentSeries:
            return _odd_sum(L).shift(L * (L - 1) // 2).scale((-1) ** L)

        def beta_i(L: int, window: Window) -> LaurentSeries:
            return window.one() if L == 0 else _exact_zero(window)

        bound = ValuationBound(Fraction(1, 2), Fraction(-1, 2))
        return BaileyPair(1, alpha_i, beta_i, None, "I", bound)

    if which is Seed.II:

        def alpha_ii(L: int, window: Window) -> LaurentSeries:
            return _odd_sum(L).shift(L * L).scale((-1) ** L)

        def beta_ii(L: int, window: Window) -> LaurentSeries:
            return inv_base_factorial(L, 2, window)

        return BaileyPair(1, alpha_ii, beta_ii, None, "II", ValuationBound(1))

    if delta not in (0, 1):
        raise InvalidParameters(f"delta must be 0 or 1, got {delta}")
    t = delta + 2

    def alpha_iii(L: int, window: Window) -> LaurentSeries:
        if L == 0:
            return window.one()
        body = LaurentSeries([1] + [0] * (t * L - 1) + [1])
        return body.shift(t * L * (L - 1) // 2).scale((-1) ** L)

    def beta_iii(L: int, window: Window) -> LaurentSeries:
        return window.monomial(1, L) * inv_base_factorial(L, 2 - delta, window)

    return BaileyPair(
        0, alpha_iii, beta_iii, None, f"III{delta}", ValuationBound(Fraction(t, 2), Fraction(-t, 2))
    )


# -------------------------------------------------------- chained pairs


class Construction(str, Enum):
    """How a chained pair relative to 1 is produced."""

    CHAIN = "chain"
    LATTICE2 = "lattice2"
    LATTICE = "lattice"
    CLOSED_FORM = "closed-form"


def _check_chain_params(k: int, i: int, delta: int) -> None:
    if k < 2:
        raise InvalidParameters(f"k must be at least 2, got {k}")
    if delta not in (0, 1):
        raise InvalidParameters(f"delta must be 0 or 1, got {delta}")
    if not 1 <= i <= k:
        raise InvalidParameters(f"i must satisfy 1 <= i <= k={k}, got {i}")


def constructions_for(k: int, i: int, delta: int) -> List[Construction]:
    """Every construction defined at ``(k, i, delta)``, preferred first."""
    _check_chain_params(k, i, delta)
    found = []
    if i == 1:
        found.append(Construction.CHAIN)
    if 2 <= i <= k + delta - 1:
        found.append(Construction.LATTICE2)
    if 3 <= i <= k:
        found.append(Construction.LATTICE)
    found.append(Construction.CLOSED_FORM)
    return found


def descending_chains(
    length: int,
    bound: Fraction,
    weights: Sequence[Exponent],
    linears: Sequence[Exponent],
    top: Optional[int] = None,
    base: Exponent = 0,
) -> Iterator[Tuple[Tuple[int, ...], Fraction]]:
    """Chains ``top >= r_1 >= ... >= r_length >= 0`` with ``base + sum w_j r_j^2 + c_j r_j < bound``.

    All weights and linear coefficients are non-negative, so partial exponents only
    grow and the search prunes on them. Yields ``(chain, exponent)``.
    """
    if top is None and length and not (weights[0] or linears[0]):
        raise ValueError("An unbounded first entry needs a growing exponent")

    def grow(pos: int, cap: Optional[int], acc: Fraction, prefix: Tuple[int, ...]) -> Iterator:
        if pos == length:
            yield prefix, acc
            return
        r = 0
        while cap is None or r <= cap:
            e = acc + weights[pos] * r * r + linears[pos] * r
            if e >= bound:
                break
            yield from grow(pos + 1, r, e, prefix + (r,))
            r += 1

    start = Fraction(base)
    if start < bound:
        yield from grow(0, top, start, ())


def closed_form_alpha(k: int, i: int, delta: int, L: int) -> LaurentSeries:
    """``alpha_L`` of the chained pair relative to 1 in closed form."""
    if L == 0:
        return LaurentSeries((1,))
    t = 2 * k - 2 * i + delta
    lead = ((2 * k + delta - 2) * L - 2 * k + 2 * i - delta) * L
    body = LaurentSeries([1] + [0] * (t * L - 1) + [1]) if t else LaurentSeries((2,))
    return body.shift(lead // 2).scale((-1) ** L)


def closed_form_beta(k: int, i: int, delta: int, L: int, window: Window) -> LaurentSeries:
    """``beta_L`` of the chained pair as a sum over ``L = r_1 >= r_2 >= ... >= r_(k-1) >= 0``."""
    depth = k - 2
    lin_first = 1 if i == 1 else 0
    weights = [1] * depth
    linears = [1 if j + 2 >= i else 0 for j in range(depth)]
    total = window.zero()
    for chain, e in descending_chains(
        depth, window.q_order, weights, linears, top=L, base=lin_first * L
    ):
        r = (L,) + chain
        term = window.monomial(1, e)
        for j in range(depth):
            term = term * inv_qfac(r[j] - r[j + 1], window)
        term = term * inv_base_factorial(r[-1], 2 - delta, window)
        total = total + term
    return window.fit(total)


def closed_form_pair(k: int, i: int, delta: int) -> BaileyPair:
    _check_chain_params(k, i, delta)
    pair = BaileyPair(
        0,
        lambda L, w: closed_form_alpha(k, i, delta, L),
        lambda L, w: closed_form_beta(k, i, delta, L, w),
        None,
        f"closed(k={k}, i={i}, delta={delta})",
        ValuationBound(Fraction(2 * k + delta - 2, 2), Fraction(2 * i - 2 * k - delta, 2)),
    )
    pair.construction = Construction.CLOSED_FORM.value
    return pair


def _repeat(bp: BaileyPair, transform: Callable[[BaileyPair], BaileyPair], times: int) -> BaileyPair:
    for _ in range(times):
        bp = transform(bp)
    return bp


def chained_pair(
    k: int, i: int, delta: int, construction: Optional[Construction] = None
) -> BaileyPair:
    """The Bailey pair relative to 1 indexed by ``(k, i, delta)``, built by composing transforms.

    Args:
        k: number of steps, at least 2
        i: 1 <= i <= k
        delta: 0 or 1
        construction: force a construction; defaults to the first defined one

    Raises:
        InvalidParameters: for parameters outside the ranges or an undefined construction.
    """
    options = constructions_for(k, i, delta)
    chosen = Construction(construction) if construction is not None else options[0]
    if chosen not in options:
        raise InvalidParameters(f"Construction {chosen.value} is not defined at k={k}, i={i}, delta={delta}")

    if chosen is Construction.CHAIN:
        bp = _repeat(seed_pair(Seed.III, delta), transform_chain_q, k - 2)
    elif chosen is Construction.LATTICE2:
        seed = seed_pair(Seed.I if delta == 1 else Seed.II)
        bp = _repeat(seed, transform_AB, k - i + delta - 1)
        bp = _repeat(transform_lattice2(bp), transform_AB, i - 2)
    elif chosen is Construction.LATTICE:
        seed = seed_pair(Seed.I if delta == 1 else Seed.II)
        bp = _repeat(seed, transform_AB, k - i + delta)
        bp = _repeat(transform_lattice(bp), transform_AB, i - 3)
    else:
        return closed_form_pair(k, i, delta)
    logger.debug(f"Chained pair k={k} i={i} delta={delta} via {chosen.value}")
    bp.name = f"{chosen.value}(k={k}, i={i}, delta={delta})"
    bp.construction = chosen.value
    return bp


# ------------------------------------------------ conjugate transformation


def conjugate_transform(
    cp: ConjugatePair,
    p_kernel: KernelFn,
    q_kernel: KernelFn,
    b_exp: int,
    p_band: Optional[int] = None,
    q_band: Optional[int] = None,
) -> ConjugatePair:
    """Transform a conjugate pair with the kernels of a Bailey-pair transformation.

    ``gamma'_L = sum_{k>=L} P(k, L) gamma_k`` and ``delta'_L = sum_{k>=L} Q(k, L) delta_k``.
    The kernels belong to a transformation from pairs relative to ``a/b`` to pairs
    relative to ``a``, with ``b = q^b_exp``; the result is relative to ``a/b``.
    A band ``p_band`` means ``P(k, L) = 0`` for ``k - L > p_band``.
    """
    ell = cp.ell - b_exp

    def _stop(L: int, band: Optional[int], support: Optional[int]) -> Optional[int]:
        stops = [s for s in (None if band is None else L + band, support) if s is not None]
        return min(stops) if stops else None

    def gamma(L: int, window: Window) -> LaurentSeries:
        stop = _stop(L, p_band, cp.gamma_support)
        return at_order(
            window, lambda w: sum_terms(lambda k: p_kernel(k, L, w) * cp.gamma(k, w), w, L, stop)
        )

    def delta(L: int, window: Window) -> LaurentSeries:
        stop = _stop(L, q_band, cp.delta_support)
        return at_order(
            window, lambda w: sum_terms(lambda k: q_kernel(k, L, w) * cp.delta(k, w), w, L, stop)
        )

    return ConjugatePair(ell, gamma, delta, cp.delta_support, None, f"transformed({cp.name})")


def identity_kernel(row: int, col: int, window: Window) -> LaurentSeries:
    return window.one() if row == col else _exact_zero(window)


def ab_kernels(ell: int) -> Tuple[KernelFn, KernelFn]:
    """Kernels of Bailey's lemma with both parameters infinite, for pairs relative to ``q^ell``."""

    def p(row: int, col: int, w: Window) -> LaurentSeries:
        return w.monomial(1, ell * row + row * row) if row == col else _exact_zero(w)

    def q(row: int, col: int, w: Window) -> LaurentSeries:
        return w.monomial(1, ell * col + col * col) * inv_qfac(row - col, w)

    return p, q


def chain_kernels(ell: int) -> Tuple[KernelFn, KernelFn]:
    """Kernels of the chain transformation with both parameters infinite."""

    def p(row: int, col: int, w: Window) -> LaurentSeries:
        if col > row:
            return _exact_zero(w)
        head = w.monomial(1, ell * row + row * (row + 1))
        if col == row:
            return head
        return head - w.monomial(1, ell * (row - 1) + row * (row - 1))

    def q(row: int, col: int, w: Window) -> LaurentSeries:
        return w.monomial(1, row + ell * col + col * col) * inv_qfac(row - col, w)

    return p, q


def lattice_kernels(ell: int) -> Tuple[KernelFn, KernelFn]:
    """Kernels of the first lattice transformation with both parameters infinite.

    ``ell`` is the modulus of the input Bailey pair; the transformation lowers it by one.
    """

    def p(row: int, col: int, w: Window) -> LaurentSeries:
        lead = w.monomial(1, ell * row + row * (row - 1))
        if row == col:
            return lead * _lattice_ratio(ell, 2 * row, w)
        if row == col + 1:
            return -(lead * w.monomial(1, ell + 2 * row - 2) * _lattice_ratio(ell, 2 * row - 2, w))
        return _exact_zero(w)

    def q(row: int, col: int, w: Window) -> LaurentSeries:
        return w.monomial(1, ell * col + col * col - col) * inv_qfac(row - col, w)

    return p, q


class ShippedKernel(str, Enum):
    """Conjugate transformations available by name."""

    AB = "ab"
    CHAIN = "chain"
    LATTICE = "lattice"


def shipped_conjugate_transform(cp: ConjugatePair, kernel: ShippedKernel) -> ConjugatePair:
    """Apply one of the infinite-parameter kernels to a conjugate pair.

    The Bailey side of the kernel is relative to ``a/b``: the same ``a`` for the
    Bailey and chain kernels and ``aq`` for the lattice kernel.
    """
    kernel = ShippedKernel(kernel)
    if kernel is ShippedKernel.AB:
        p, q = ab_kernels(cp.ell)
        return conjugate_transform(cp, p, q, 0, p_band=0)
    if kernel is ShippedKernel.CHAIN:
        p, q = chain_kernels(cp.ell)
        return conjugate_transform(cp, p, q, 0)
    p, q = lattice_kernels(cp.ell + 1)
    return conjugate_transform(cp, p, q, -1, p_band=1)


# ------------------------------------------------------------- audits


def bailey_residuals(bp: BaileyPair, L: int, window: Window) -> Tuple[LaurentSeries, LaurentSeries]:
    """``beta_L`` and the defining sum over ``alpha`` at ``L``."""
    stop = L if bp.support is None else min(L, bp.support)
    oracle = at_order(
        window,
        lambda w: sum_terms(
            lambda r: bp.alpha(r, w) * inv_qfac(L - r, w) * inv_shifted(bp.ell + 1, L + r, w), w, 0, stop
        ),
    )
    return bp.beta(L, window), oracle


def conjugate_residuals(cp: ConjugatePair, L: int, window: Window) -> Tuple[LaurentSeries, LaurentSeries]:
    """``gamma_L`` and the defining sum over ``delta`` at ``L``."""
    return cp.gamma(L, window), conjugate_gamma(cp.ell, cp.delta, cp.delta_support, L, window)


def verify_bailey(bp: BaileyPair, L_max: int, window: Window, key: Optional[str] = None) -> VerificationReport:
    """Check the defining relation of a Bailey pair for ``0 <= L <= L_max``."""

    def checks() -> Iterator[Check]:
        for L in range(L_max + 1):
            lhs, rhs = bailey_residuals(bp, L, window)
            yield f"L={L}", lhs, rhs

    return run_checks(key or f"bailey/{bp.name}", Target.TRANSFORMS_AUDIT, checks, window)


def verify_conjugate(
    cp: ConjugatePair, L_max: int, window: Window, key: Optional[str] = None
) -> VerificationReport:
    """Check the defining relation of a conjugate pair for ``0 <= L <= L_max``."""

    def checks() -> Iterator[Check]:
        for L in range(L_max + 1):
            lhs, rhs = conjugate_residuals(cp, L, window)
            yield f"L={L}", lhs, rhs

    return run_checks(key or f"conjugate/{cp.name}", Target.CONJUGATE_PAIR, checks, window)


def verify_constructions(k: int, i: int, delta: int, L_max: int, window: Window) -> VerificationReport:
    """Every transform composition defined at ``(k, i, delta)`` against the closed form.

    The closed form is audited against the defining relation first.
    """
    key = f"transforms-audit/chains/k={k}/i={i}/delta={delta}"

    def checks() -> Iterator[Check]:
        closed = closed_form_pair(k, i, delta)
        for L in range(L_max + 1):
            lhs, rhs = bailey_residuals(closed, L, window)
            yield f"closed-form L={L}", lhs, rhs
        for construction in constructions_for(k, i, delta):
            if construction is Construction.CLOSED_FORM:
                continue
            bp = chained_pair(k, i, delta, construction)
            for L in range(L_max + 1):
                yield f"{construction.value} alpha L={L}", bp.alpha(L, window), closed.alpha(L, window)
                yield f"{construction.value} beta L={L}", bp.beta(L, window), closed.beta(L, window)

    return run_checks(key, Target.TRANSFORMS_AUDIT, checks, window)
