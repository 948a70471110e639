"""The level-N hierarchy of (Gamma, Delta) pairs and its polynomial identities.

For ``a = q^ell``, a bound ``M`` and the data ``(N, lambda, sigma)``,

    Delta_(L,k) = a^(L/N) q^(L^2/N - kL) / (q)_(M-L) * sum_n q^(n C^{-1}(n - e_lambda)) prod [m_j+n_j over n_j]

and ``Gamma_(L,k)`` is the matching sum over ``(eta, i)`` with primed binomials. The two
are tied by ``Gamma_(L,k) = sum_(r=L+k)^M Delta_(r,k) / ((q)_(r-L-k) (aq)_(r+L))``.
"""

import logging
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Tuple

from qbailey.exceptions import InvalidParameters
from qbailey.schemas import Target, VerificationReport
from qbailey.services.bailey import ConjugatePair, conjugate_residuals
from qbailey.services.lattice import (
    IntVec,
    Partition,
    SigmaContext,
    delta_sum,
    enumerate_gamma_support,
    gamma_prefactor_exponent,
    i_linear_exponent,
    quad_form,
)
from qbailey.services.qtools import (
    Base,
    PochhammerSpec,
    gauss_binom,
    gauss_binom_primed,
    inv_qfac,
    inv_shifted,
    pochhammer,
    q_multinomial,
)
from qbailey.services.series import LaurentSeries, Window, at_order, sum_terms
from qbailey.services.verify import Check, run_checks

logger = logging.getLogger(__name__)


class HierarchyParams:
    """The bound ``M`` together with the lattice data ``(N, ell, lambda, sigma)``."""

    def __init__(self, M: int, ctx: SigmaContext):
        if M < 0:
            raise InvalidParameters(f"M must be non-negative, got {M}")
        self.M = M
        self.ctx = ctx

    @classmethod
    def of(cls, M: int, n: int, ell: int, lam: Sequence[int] = (), sigma: int = 0) -> "HierarchyParams":
        return cls(M, SigmaContext(n, ell, Partition(lam), sigma))

    @property
    def denom(self) -> int:
        """Exponent grid ``1/(2N)``."""
        return 2 * self.ctx.n

    def with_bound(self, M: int) -> "HierarchyParams":
        return HierarchyParams(M, self.ctx)

    def key(self) -> str:
        c = self.ctx
        return f"N={c.n}/ell={c.ell}/lambda={list(c.lam.parts)}/sigma={c.sigma}/M={self.M}"

    def __repr__(self) -> str:
        return f"HierarchyParams(M={self.M}, {self.ctx})"


def _exact_zero(window: Window) -> LaurentSeries:
    return LaurentSeries((), 0, window.denom, None)


def hl_Delta(params: HierarchyParams, L: int, k: int, window: Window) -> LaurentSeries:
    """``Delta_(L,k)``; zero outside ``L >= k >= 0``."""
    if not L >= k >= 0:
        return _exact_zero(window)
    ctx = params.ctx
    pref = Fraction(ctx.ell * L + L * L, ctx.n) - k * L
    body = delta_sum(ctx, L)
    if body.is_zero:
        return _exact_zero(window)

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(params.denom)
        return w.monomial(1, pref) * body * inv_qfac(params.M - L, w)

    return at_order(window, compute)


def gamma_sum(ctx: SigmaContext, M: int, L: int, k: int, window: Window) -> LaurentSeries:
    """The ``(eta, i)`` sum of ``Gamma_(L,k)`` without its prefactor, known below the window.

    Raises:
        EnumerationBoundUnverified: if the negative occupation numbers cannot be bounded.
    """
    w = window.refine(2 * ctx.n)
    total = w.zero()
    points = enumerate_gamma_support(ctx, M, L, k, w.q_order, include_prefactor=False)
    for p in points:
        e = i_linear_exponent(ctx, L, p.i) + quad_form(ctx.cartan, p.eta, ctx.e_lam)
        term = w.monomial(1, e) * q_multinomial(k, p.i, Base.INVERSE)
        for eta_j, mu_j in zip(p.eta, p.mu):
            term = term * gauss_binom_primed(mu_j + eta_j, eta_j)
        total = total + term
    logger.debug(f"Gamma sum {ctx} M={M} L={L} k={k}: {len(points)} support points")
    return w.fit(total)


def hl_Gamma(params: HierarchyParams, L: int, k: int, window: Window) -> LaurentSeries:
    """``Gamma_(L,k)``; zero for negative indices and for ``L + k > M``."""
    ctx = params.ctx
    M = params.M
    if L < 0 or k < 0 or L + k > M:
        return _exact_zero(window)
    pref = gamma_prefactor_exponent(ctx, L, k)

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(params.denom)
        inner = gamma_sum(ctx, M, L, k, w.with_order(w.order - w.num(pref)))
        return (
            w.monomial(1, pref)
            * inner
            * inv_qfac(M - L - k, w)
            * inv_shifted(ctx.ell + 1, L + M, w)
        )

    return at_order(window, compute)


def hl_conjugate(params: HierarchyParams, k: int = 0) -> ConjugatePair:
    """The conjugate pair ``gamma_L = Gamma_(L,k)``, ``delta_L = Delta_(L+k,k) / (aq)_k`` relative to ``aq^k``."""
    if k < 0:
        raise InvalidParameters(f"k must be non-negative, got {k}")
    ell = params.ctx.ell

    def gamma(L: int, window: Window) -> LaurentSeries:
        return hl_Gamma(params, L, k, window)

    def delta(L: int, window: Window) -> LaurentSeries:
        return at_order(
            window, lambda w: hl_Delta(params, L + k, k, w) * inv_shifted(ell + 1, k, w)
        )

    support = params.M - k
    return ConjugatePair(ell + k, gamma, delta, support, support, f"hl({params.key()}, k={k})")


class GammaDeltaPair:
    """Both families of the hierarchy at fixed parameters, as maps ``(L, k) -> series``."""

    def __init__(self, params: HierarchyParams):
        self.params = params
        self.ell = params.ctx.ell

    def Gamma(self, L: int, k: int, window: Window) -> LaurentSeries:
        return hl_Gamma(self.params, L, k, window)

    def Delta(self, L: int, k: int, window: Window) -> LaurentSeries:
        return hl_Delta(self.params, L, k, window)

    def relation(self, L: int, k: int, window: Window) -> LaurentSeries:
        """``sum_(r=L+k)^M Delta_(r,k) / ((q)_(r-L-k) (aq)_(r+L))``."""
        M = self.params.M
        return at_order(
            window,
            lambda w: sum_terms(
                lambda r: self.Delta(r, k, w) * inv_qfac(r - L - k, w) * inv_shifted(self.ell + 1, r + L, w),
                w,
                L + k,
                M,
            ),
        )

    def __repr__(self) -> str:
        return f"GammaDeltaPair({self.params})"


def verify_gamma_delta(params: HierarchyParams, window: Window) -> VerificationReport:
    """Check the defining relation for every ``0 <= L <= M`` and ``0 <= k <= M - L``."""
    pair = GammaDeltaPair(params)

    def checks() -> Iterator[Check]:
        for L in range(params.M + 1):
            for k in range(params.M - L + 1):
                yield f"L={L}, k={k}", pair.Gamma(L, k, window), pair.relation(L, k, window)

    return run_checks(f"gamma-delta/{params.key()}", Target.GAMMA_DELTA, checks, window)


def verify_hl_conjugate(params: HierarchyParams, window: Window, k: int = 0) -> VerificationReport:
    """Check the conjugate-pair relation of :func:`hl_conjugate` for every ``L <= M - k``."""
    cp = hl_conjugate(params, k)

    def checks() -> Iterator[Check]:
        for L in range(params.M - k + 1):
            lhs, rhs = conjugate_residuals(cp, L, window)
            yield f"L={L}", lhs, rhs

    return run_checks(f"conjugate-pair/{params.key()}/k={k}", Target.CONJUGATE_PAIR, checks, window)


# ------------------------------------------------------ polynomial identity


def _check_f_indices(M: int, L: int, k: int) -> None:
    if not (0 <= L <= M and 0 <= k <= M - L):
        raise InvalidParameters(f"Need 0 <= L <= M and 0 <= k <= M-L, got M={M}, L={L}, k={k}")


def f1(ctx: SigmaContext, M: int, L: int, k: int, window: Window) -> LaurentSeries:
    """Left side of the polynomial identity: the ``(eta, i)`` sum restricted by sigma at ``L``."""
    _check_f_indices(M, L, k)
    return gamma_sum(ctx, M, L, k, window)


def f2(ctx: SigmaContext, M: int, L: int, k: int, window: Window) -> LaurentSeries:
    """Right side: ``sum_(r=L+k)^M q^((r+L+ell)(r-L-Nk)/N) [M-L-k over M-r] (q^(ell+1+L+r))_(M-r) D(r)``.

    ``D(r)`` is the exact ``n``-sum of ``Delta_(r,k)``; every term is a Laurent polynomial.
    """
    _check_f_indices(M, L, k)
    w = window.refine(2 * ctx.n)
    total = w.zero()
    for r in range(L + k, M + 1):
        body = delta_sum(ctx, r)
        if body.is_zero:
            continue
        e = Fraction((r + L + ctx.ell) * (r - L - ctx.n * k), ctx.n)
        ratio = pochhammer(PochhammerSpec(ctx.ell + 1 + L + r, 1, M - r))
        total = total + w.monomial(1, e) * gauss_binom(M - L - k, M - r) * ratio * body
    return w.fit(total)


F_SIDES = {"f1": f1, "f2": f2}


def check_recurrences(
    side: str, ctx: SigmaContext, M: int, L: int, k: int, window: Window
) -> VerificationReport:
    """Check the recurrence or initial condition that applies at ``(M, L, k)``.

    * ``k < M - L``: ``f(M,L,k) = f(M-1,L,k) + q^(M+L+ell) (f(M,L,k+1) - f(M-1,L,k))``;
    * ``k = M - L >= 1``: ``f(M,L,k) = q^(-(2L+ell+1)(N-1)/N) f(M,L+1,k-1)``;
    * ``L = M``, ``k = 0``: ``f1(M,M,0) = f2(M,M,0)``.
    """
    if side not in F_SIDES:
        raise InvalidParameters(f"Unknown side {side!r}; use f1 or f2")
    f: Callable[..., LaurentSeries] = F_SIDES[side]
    key = f"recurrences/{side}/N={ctx.n}/ell={ctx.ell}/lambda={list(ctx.lam.parts)}/sigma={ctx.sigma}/M={M}/L={L}/k={k}"
    w = window.refine(2 * ctx.n)

    def checks() -> Iterator[Check]:
        _check_f_indices(M, L, k)
        if L == M and k == 0:
            yield "initial", f1(ctx, M, M, 0, w), f2(ctx, M, M, 0, w)
        elif k < M - L:
            lhs = f(ctx, M, L, k, w)
            lower = f(ctx, M - 1, L, k, w)
            step = w.monomial(1, M + L + ctx.ell) * (f(ctx, M, L, k + 1, w) - lower)
            yield "recursion", lhs, lower + step
        else:
            s = Fraction((2 * L + ctx.ell + 1) * (ctx.n - 1), ctx.n)
            wide = w.with_order(w.order + w.num(s))
            yield "boundary", f(ctx, M, L, k, w), w.monomial(1, -s) * f(ctx, M, L + 1, k - 1, wide)

    return run_checks(key, Target.RECURRENCES, checks, w)


def verify_lemma33(ctx: SigmaContext, M: int, window: Window) -> VerificationReport:
    """``f1 = f2`` for every ``0 <= L <= M`` and ``0 <= k <= M - L``."""
    w = window.refine(2 * ctx.n)

    def checks() -> Iterator[Check]:
        for L in range(M + 1):
            for k in range(M - L + 1):
                yield f"L={L}, k={k}", f1(ctx, M, L, k, w), f2(ctx, M, L, k, w)

    key = f"lemma33/N={ctx.n}/ell={ctx.ell}/lambda={list(ctx.lam.parts)}/sigma={ctx.sigma}/M={M}"
    return run_checks(key, Target.LEMMA33, checks, w)


# --------------------------------------------------- telescopic expansions


def _primed_product(tops: Sequence[int], bottoms: Sequence[int]) -> LaurentSeries:
    out = LaurentSeries((1,))
    for t, b in zip(tops, bottoms):
        out = out * gauss_binom_primed(t, b)
        if out.is_zero:
            break
    return out


def telescopic_sides(
    A: IntVec, B: IntVec, variant: str = "rtele"
) -> Tuple[LaurentSeries, LaurentSeries]:
    """Both sides of a telescopic expansion of ``prod_j [A_j+B_j over A_j]'``.

    ``rtele`` lowers the tops at ``j <= p``, ``btele`` at ``j >= p``.
    """
    if variant not in ("rtele", "btele"):
        raise InvalidParameters(f"Unknown variant {variant!r}; use rtele or btele")
    if len(A) != len(B):
        raise InvalidParameters("A and B must have the same length")
    n = len(A)
    lhs = _primed_product([a + b for a, b in zip(A, B)], A)
    rhs = _primed_product([a + b - 1 for a, b in zip(A, B)], A)
    for p in range(1, n + 1):
        lowered = [(j <= p) if variant == "rtele" else (j >= p) for j in range(1, n + 1)]
        tops = [a + b - int(c) for a, b, c in zip(A, B, lowered)]
        bottoms = [a - (1 if j == p else 0) for j, a in enumerate(A, start=1)]
        rhs = rhs + _primed_product(tops, bottoms).shift(B[p - 1])
    return lhs, rhs


def telescopic_check(n: int, A: IntVec, B: IntVec, variant: str = "rtele") -> VerificationReport:
    """Verify a telescopic expansion as an exact Laurent-polynomial identity."""
    if len(A) != n - 1 or len(B) != n - 1:
        raise InvalidParameters(f"A and B need N-1={n - 1} entries")
    key = f"telescopic/{variant}/N={n}/A={list(A)}/B={list(B)}"

    def checks() -> Iterator[Check]:
        lhs, rhs = telescopic_sides(A, B, variant)
        yield "expansion", lhs, rhs

    return run_checks(key, Target.TELESCOPIC, checks, None)
