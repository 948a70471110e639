"""A_{N-1} lattice structure: Cartan data, partitions, (m,n)- and (mu,eta)-systems.

All rational quantities are exact ``Fraction`` values. Rank-zero data (``N = 1``)
is represented by empty vectors and empty matrices, so no caller needs to special
case the unit level.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from qbailey.config import settings
from qbailey.exceptions import EnumerationBoundUnverified, InvalidParameters
from qbailey.services.qtools import gauss_binom, inv_qfac
from qbailey.services.series import LaurentSeries, Window

logger = logging.getLogger(__name__)

IntVec = Tuple[int, ...]
RatVec = Tuple[Fraction, ...]


class CartanData:
    """The A_{N-1} Cartan matrix and its exact inverse."""

    def __init__(self, n: int):
        if n < 1:
            raise InvalidParameters(f"Rank parameter N must be at least 1, got {n}")
        self.rank_param = n
        r = n - 1
        self.cartan: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(2 if j == k else -1 if abs(j - k) == 1 else 0 for k in range(r)) for j in range(r)
        )
        self.inv_cartan: Tuple[Tuple[Fraction, ...], ...] = tuple(
            tuple(
                Fraction(min(j, k) * (n - max(j, k)), n) for k in range(1, n)
            )
            for j in range(1, n)
        )

    @property
    def rank(self) -> int:
        return self.rank_param - 1

    def unit(self, j: int) -> IntVec:
        """Unit vector ``e_j`` with ``e_0 = e_N = 0``."""
        return tuple(1 if t == j else 0 for t in range(1, self.rank_param))

    def zero(self) -> IntVec:
        return (0,) * self.rank

    def apply_inverse(self, v: Sequence[int]) -> RatVec:
        """``C^{-1} v``."""
        return tuple(sum((row[k] * v[k] for k in range(self.rank)), Fraction(0)) for row in self.inv_cartan)

    def apply(self, v: Sequence[Fraction]) -> RatVec:
        """``C v``."""
        return tuple(sum((Fraction(row[k]) * v[k] for k in range(self.rank)), Fraction(0)) for row in self.cartan)

    def __repr__(self) -> str:
        return f"CartanData(N={self.rank_param})"


@lru_cache(maxsize=None)
def inv_cartan(n: int) -> CartanData:
    """Cartan data of A_{N-1}; entries of the inverse are ``j(N-k)/N`` for ``j <= k``."""
    return CartanData(n)


class Partition:
    """A partition, stored as a weakly decreasing tuple of positive parts."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[int] = ()):
        values = tuple(sorted((int(p) for p in parts), reverse=True))
        if any(p <= 0 for p in values):
            raise InvalidParameters(f"Partition parts must be positive, got {values}")
        self.parts = values

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def largest(self) -> int:
        return self.parts[0] if self.parts else 0

    def check_rank(self, n: int) -> None:
        if self.largest > n - 1:
            raise InvalidParameters(f"Partition {list(self.parts)} has a part exceeding N-1={n - 1}")

    def e_vector(self, n: int) -> IntVec:
        """``e_lambda = sum_i e_(lambda_i)`` for A_{N-1}."""
        self.check_rank(n)
        v = [0] * (n - 1)
        for p in self.parts:
            if 0 < p < n:
                v[p - 1] += 1
        return tuple(v)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        return f"Partition({list(self.parts)})"


def partitions(max_weight: int, max_part: int) -> List[Partition]:
    """All partitions with weight at most ``max_weight`` and parts at most ``max_part``."""
    found: List[Partition] = []

    def grow(prefix: List[int], remaining: int, cap: int) -> None:
        found.append(Partition(prefix))
        for p in range(min(cap, remaining), 0, -1):
            grow(prefix + [p], remaining - p, p)

    if max_part >= 1:
        grow([], max_weight, max_part)
    else:
        found.append(Partition())
    return sorted(found, key=lambda lam: (lam.weight, lam.parts))


class SigmaContext:
    """Parameters ``(N, ell, lambda, sigma)`` of a restricted lattice sum."""

    def __init__(self, n: int, ell: int, lam: Partition, sigma: int):
        if sigma not in (0, 1):
            raise InvalidParameters(f"sigma must be 0 or 1, got {sigma}")
        if ell < 0:
            raise InvalidParameters(f"ell must be non-negative, got {ell}")
        lam.check_rank(n)
        if (ell + lam.weight + sigma * n) % 2:
            raise InvalidParameters(
                f"ell + |lambda| + sigma*N = {ell}+{lam.weight}+{sigma}*{n} is odd"
            )
        self.n = n
        self.ell = ell
        self.lam = lam
        self.sigma = sigma
        self.cartan = inv_cartan(n)
        self.e_lam = lam.e_vector(n)

    @staticmethod
    def sigmas(n: int, ell: int, lam: Partition) -> List[int]:
        """The values of sigma satisfying the parity condition."""
        return [s for s in (0, 1) if (ell + lam.weight + s * n) % 2 == 0]

    def residue(self, L: int) -> int:
        """``2L + ell - |lambda| - sigma*N``, the numerator of the class condition at ``L``."""
        return 2 * L + self.ell - self.lam.weight - self.sigma * self.n

    @property
    def key(self) -> Tuple[int, int, Tuple[int, ...], int]:
        return (self.n, self.ell, self.lam.parts, self.sigma)

    def __repr__(self) -> str:
        return f"SigmaContext(N={self.n}, ell={self.ell}, lambda={list(self.lam.parts)}, sigma={self.sigma})"


class SupportPoint:
    """One term of a (mu,eta)-system sum together with its exact lowest exponent."""

    __slots__ = ("eta", "i", "mu", "min_exponent")

    def __init__(self, eta: IntVec, i: IntVec, mu: IntVec, min_exponent: Fraction):
        self.eta = eta
        self.i = i
        self.mu = mu
        self.min_exponent = min_exponent

    def __repr__(self) -> str:
        return f"SupportPoint(eta={self.eta}, i={self.i}, mu={self.mu}, min={self.min_exponent})"


# ------------------------------------------------------------- operations


def quad_form(cd: CartanData, x: Sequence[int], w: Sequence[int]) -> Fraction:
    """``x C^{-1} (x - w)``."""
    diff = [a - b for a, b in zip(x, w)]
    y = cd.apply_inverse(diff)
    return sum((xi * yi for xi, yi in zip(x, y)), Fraction(0))


def _as_ints(v: RatVec) -> Optional[IntVec]:
    if all(x.denominator == 1 for x in v):
        return tuple(int(x) for x in v)
    return None


def m_system(
    cd: CartanData, L: int, ell: int, lam: Partition, n: Sequence[int]
) -> Tuple[RatVec, bool]:
    """``m = C^{-1}((2L+ell) e_(N-1) + e_lambda - 2n)`` and whether it is integral."""
    e_lam = lam.e_vector(cd.rank_param)
    top = cd.unit(cd.rank_param - 1)
    v = [(2 * L + ell) * t + el - 2 * x for t, el, x in zip(top, e_lam, n)]
    m = cd.apply_inverse(v)
    return m, all(x.denominator == 1 for x in m)


def i_last(k: int, i: Sequence[int]) -> int:
    """``i_N = k - i_1 - ... - i_(N-1)``."""
    return k - sum(i)


def mu_system(
    cd: CartanData,
    M: int,
    L: int,
    k: int,
    ell: int,
    lam: Partition,
    i: Sequence[int],
    eta: Sequence[int],
) -> RatVec:
    """``mu = C^{-1}((M-L-k) e_1 + (M+L+ell) e_(N-1) + e_lambda - sum_j (i_j+i_(j+1)) e_j - 2 eta)``."""
    n = cd.rank_param
    e_lam = lam.e_vector(n)
    first = cd.unit(1)
    last = cd.unit(n - 1)
    full_i = list(i) + [i_last(k, i)]
    v = [
        (M - L - k) * first[j]
        + (M + L + ell) * last[j]
        + e_lam[j]
        - (full_i[j] + full_i[j + 1])
        - 2 * eta[j]
        for j in range(n - 1)
    ]
    return cd.apply_inverse(v)


def residue_admissible(cd: CartanData, residue: int, total: Sequence[int]) -> bool:
    """Whether ``residue/(2N) - (C^{-1} total)_1`` is an integer."""
    first = cd.apply_inverse(total)[0] if cd.rank else Fraction(0)
    return (Fraction(residue, 2 * cd.rank_param) - first).denominator == 1


def sigma_admissible(ctx: SigmaContext, L: int, total: Sequence[int]) -> bool:
    """Whether ``(L + (ell-|lambda|)/2)/N - (C^{-1} total)_1`` lies in ``Z + sigma/2``."""
    return residue_admissible(ctx.cartan, ctx.residue(L), total)


def enumerate_delta_support(ctx: SigmaContext, L: int) -> List[IntVec]:
    """All ``n >= 0`` with ``m >= 0`` and the sigma restriction at ``L``.

    The box bound ``n_k <= w_k / (2 C^{-1}_kk)`` with ``w = C^{-1}((2L+ell) e_(N-1) + e_lambda)``
    follows from ``m >= 0`` and the positivity of ``C^{-1}``.
    """
    cd = ctx.cartan
    if cd.rank == 0:
        return [()]
    top = cd.unit(ctx.n - 1)
    w = cd.apply_inverse([(2 * L + ctx.ell) * t + e for t, e in zip(top, ctx.e_lam)])
    if any(x < 0 for x in w):
        return []
    bounds = [int(w[j] / (2 * cd.inv_cartan[j][j])) for j in range(cd.rank)]
    found = []
    for n in product(*(range(b + 1) for b in bounds)):
        m, integral = m_system(cd, L, ctx.ell, ctx.lam, n)
        if integral and all(x >= 0 for x in m) and sigma_admissible(ctx, L, n):
            found.append(tuple(n))
    return sorted(found)


def negexp(n: int, m: int) -> int:
    """Lowest exponent of the primed binomial ``[m+n over n]'`` for ``m >= 0``."""
    if n >= 0 or n + m >= 0:
        return 0
    return m * n + m * (m + 1) // 2


def primed_support(eta: Sequence[int], mu: Sequence[int]) -> bool:
    """Whether the product of primed binomials ``[mu_j+eta_j over eta_j]'`` is non-zero."""
    return all(m >= 0 and (e >= 0 or e + m < 0) for e, m in zip(eta, mu))


def multinomial_parts(k: int, i: Sequence[int]) -> IntVec:
    return tuple(i) + (i_last(k, i),)


def multinomial_degree(parts: Sequence[int]) -> int:
    return sum(parts[a] * parts[b] for a in range(len(parts)) for b in range(a + 1, len(parts)))


def gamma_prefactor_exponent(ctx: SigmaContext, L: int, k: int) -> Fraction:
    """Exponent of ``a^(L/N+k) q^(L^2/N+kL)`` at ``a = q^ell``."""
    return ctx.ell * (Fraction(L, ctx.n) + k) + Fraction(L * L, ctx.n) + k * L


def i_vectors(k: int, rank: int) -> List[IntVec]:
    """All ``i >= 0`` of length ``rank`` with ``sum(i) <= k``."""
    if rank == 0:
        return [()] if k >= 0 else []
    return sorted(i for i in product(range(k + 1), repeat=rank) if sum(i) <= k)


def l1_shell(rank: int, s: int) -> Iterator[IntVec]:
    """Integer vectors of the given length with L1 norm exactly ``s``."""
    if rank == 0:
        if s == 0:
            yield ()
        return
    if rank == 1:
        yield (s,)
        if s:
            yield (-s,)
        return
    for head in range(-s, s + 1):
        for tail in l1_shell(rank - 1, s - abs(head)):
            yield (head,) + tail


def i_linear_exponent(ctx: SigmaContext, L: int, i: Sequence[int]) -> Fraction:
    """``-i C^{-1}(i + (2L+ell) e_1)``."""
    cd = ctx.cartan
    if cd.rank == 0:
        return Fraction(0)
    shifted = [x + (2 * L + ctx.ell) * u for x, u in zip(i, cd.unit(1))]
    return -sum((a * b for a, b in zip(i, cd.apply_inverse(shifted))), Fraction(0))


def i_term_exponent(ctx: SigmaContext, L: int, k: int, i: Sequence[int]) -> Fraction:
    """Lowest exponent of ``q^(-i C^{-1}(i + (2L+ell) e_1)) [k over i]_(1/q)``."""
    if ctx.cartan.rank == 0:
        return Fraction(0)
    return i_linear_exponent(ctx, L, i) - multinomial_degree(multinomial_parts(k, i))


def _boundary_negexp(n: int, m: Fraction) -> Fraction:
    """:func:`negexp` extended to rational ``m``."""
    if m.denominator == 1 and m >= 0:
        return Fraction(negexp(n, int(m)))
    if n >= 0 or m <= 0 or n + m >= 0:
        return Fraction(0)
    return m * n + m * (m + 1) / 2


def enumerate_gamma_support(
    ctx: SigmaContext,
    M: int,
    L: int,
    k: int,
    order: Fraction,
    include_prefactor: bool = True,
) -> List[SupportPoint]:
    """All ``(eta, i)`` of the Gamma sum whose term starts strictly below ``order``.

    Occupation numbers ``eta_j`` may be negative. The scan runs over L1 shells of
    ``eta``; it stops once ``max(ENUM_CERT_SHELLS, 2N+1)`` consecutive shells hold no
    term below ``order`` and the least exponent over each whole shell, taken before
    admissibility and support filters, grows with positive slope across them.

    Raises:
        EnumerationBoundUnverified: if no such tail is found within ``ENUM_SHELL_LIMIT``.
    """
    cd = ctx.cartan
    rank = cd.rank
    offset = gamma_prefactor_exponent(ctx, L, k) if include_prefactor else Fraction(0)
    tail_needed = max(settings.ENUM_CERT_SHELLS, 2 * ctx.n + 1)
    found: List[SupportPoint] = []
    for i in i_vectors(k, rank):
        base = offset + i_term_exponent(ctx, L, k, i)
        tail: List[Tuple[int, Optional[Fraction]]] = []
        # rank 0 has the single point eta = ()
        certified = rank == 0
        for s in range(settings.ENUM_SHELL_LIMIT + 1 if rank else 1):
            boundary_min: Optional[Fraction] = None
            live = False
            for eta in l1_shell(rank, s):
                mu_rat = mu_system(cd, M, L, k, ctx.ell, ctx.lam, i, eta)
                low = base + quad_form(cd, eta, ctx.e_lam)
                low += sum((_boundary_negexp(e, m) for e, m in zip(eta, mu_rat)), Fraction(0))
                if boundary_min is None or low < boundary_min:
                    boundary_min = low
                total = [a + b for a, b in zip(eta, i)]
                if not sigma_admissible(ctx, L, total):
                    continue
                mu = _as_ints(mu_rat)
                if mu is None or not primed_support(eta, mu):
                    continue
                if low < order:
                    found.append(SupportPoint(tuple(eta), tuple(i), mu, low))
                    live = True
            if live:
                tail = []
                continue
            tail.append((s, boundary_min))
            if len(tail) >= tail_needed and _tail_certified(tail[-tail_needed:]):
                certified = True
                break
        if not certified:
            raise EnumerationBoundUnverified(
                f"No certified bound for negative occupation numbers in {ctx} "
                f"at M={M}, L={L}, k={k}, i={i} within {settings.ENUM_SHELL_LIMIT} shells"
            )
    logger.debug(f"Gamma support {ctx} M={M} L={L} k={k}: {len(found)} terms")
    return sorted(found, key=lambda p: (p.i, p.eta))


def _tail_certified(tail: Sequence[Tuple[int, Optional[Fraction]]]) -> bool:
    """A run of dead shells certifies termination if their minima grow with positive slope.

    A shell without points gives nothing to fit, so it never certifies.
    """
    if len(tail) < 2 or any(m is None for _, m in tail):
        return False
    minima = [m for _, m in tail]
    if any(b < a for a, b in zip(minima, minima[1:])):
        return False
    (s0, m0), (s1, m1) = tail[0], tail[-1]
    return (m1 - m0) / (s1 - s0) > 0  # type: ignore[operator]


def enumerate_eta_nonneg(
    cd: CartanData, e_lam: Sequence[int], residue: int, order: Fraction
) -> List[Tuple[IntVec, Fraction]]:
    """All ``eta >= 0`` admissible for ``residue`` with ``eta C^{-1}(eta - e_lambda) < order``.

    Returns ``(eta, exponent)`` pairs. The bound per coordinate uses
    ``C^{-1}_jj eta_j^2 - (C^{-1} e_lambda)_j eta_j`` and the non-negativity of the rest.
    """
    if cd.rank == 0:
        return [((), Fraction(0))] if order > 0 else []
    b = cd.apply_inverse(e_lam)
    a = [cd.inv_cartan[j][j] for j in range(cd.rank)]
    floors = [-(bj * bj) / (4 * aj) for aj, bj in zip(a, b)]
    bounds = []
    for j in range(cd.rank):
        rest = sum(floors) - floors[j]
        x = 0
        while a[j] * x * x - b[j] * x + rest < order or x * 2 * a[j] <= b[j]:
            x += 1
        bounds.append(x)
    found = []
    for eta in product(*(range(t + 1) for t in bounds)):
        if not residue_admissible(cd, residue, eta):
            continue
        e = quad_form(cd, eta, e_lam)
        if e < order:
            found.append((tuple(eta), e))
    return sorted(found)


# ------------------------------------------------------------ lattice sums


def delta_sum(ctx: SigmaContext, L: int) -> LaurentSeries:
    """Exact ``sum_n q^(n C^{-1}(n - e_lambda)) prod_j [m_j+n_j over n_j]`` at ``L``.

    The sum runs over :func:`enumerate_delta_support`; the result lives on grid ``1/(2N)``.
    """
    return _delta_sum_cached(ctx.n, ctx.ell, ctx.lam.parts, ctx.sigma, L)


@lru_cache(maxsize=2048)
def _delta_sum_cached(n: int, ell: int, parts: Tuple[int, ...], sigma: int, L: int) -> LaurentSeries:
    ctx = SigmaContext(n, ell, Partition(parts), sigma)
    cd = ctx.cartan
    w = Window(2 * n, 0)
    total = LaurentSeries((), 0, w.denom)
    for x in enumerate_delta_support(ctx, L):
        m, _ = m_system(cd, L, ell, ctx.lam, x)
        term = w.monomial(1, quad_form(cd, x, ctx.e_lam))
        for mj, nj in zip(m, x):
            term = term * gauss_binom(int(mj) + nj, nj)
        total = total + term
    return total


def eta_sum(cd: CartanData, e_lam: Sequence[int], residue: int, window: Window) -> LaurentSeries:
    """``sum_(eta >= 0) q^(eta C^{-1}(eta - e_lambda)) / prod_j (q)_(eta_j)`` over admissible ``eta``.

    Admissibility is ``residue/(2N) - (C^{-1} eta)_1`` integral, so only the class of
    ``residue`` modulo ``2N`` matters.
    """
    n = cd.rank_param
    return _eta_sum_cached(n, tuple(e_lam), residue % (2 * n), window.denom, window.order)


@lru_cache(maxsize=2048)
def _eta_sum_cached(n: int, e_lam: IntVec, residue: int, denom: int, order: int) -> LaurentSeries:
    cd = inv_cartan(n)
    w = Window(denom, order).refine(2 * n)
    total = w.zero()
    for eta, e in enumerate_eta_nonneg(cd, e_lam, residue, w.q_order):
        shift = w.num(e)
        inner = w.with_order(w.order - min(shift, 0))
        term = w.monomial(1, e)
        for x in eta:
            term = term * inv_qfac(x, inner)
        total = total + term
    return Window(denom, order).fit(total)


def restricted_eta_sum(ctx: SigmaContext, L: int, window: Window) -> LaurentSeries:
    """The non-negative occupation sum of the hierarchy lemma, restricted by sigma at ``L``."""
    return eta_sum(ctx.cartan, ctx.e_lam, ctx.residue(L), window)
