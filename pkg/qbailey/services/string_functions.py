"""Level-N A_1^(1) string functions and the regrouped left side of the hierarchy lemma.

The string function ``c^l_m`` is evaluated two ways: from Hecke's indefinite double
sum, and from a restricted occupation-number sum over the A_(N-1) lattice. Indices
outside Hecke's range are brought into it with ``c^l_m = c^l_(-m) = c^l_(m+2N) = c^(N-l)_(N-m)``.
"""

import logging
from collections import defaultdict
from fractions import Fraction
from math import ceil
from typing import Dict, Iterator, List, Optional, Tuple

from qbailey.config import settings
from qbailey.exceptions import InvalidParameters, NonTerminatingSum
from qbailey.schemas import Target, VerificationReport
from qbailey.services.bailey import BaileyPair
from qbailey.services.identities import hl_lemma_lhs
from qbailey.services.lattice import Partition, SigmaContext, eta_sum, inv_cartan
from qbailey.services.qtools import PochhammerSpec, inv_euler, inv_shifted, pochhammer
from qbailey.services.series import LaurentSeries, ValuationBound, Window, at_order, sum_terms
from qbailey.services.verify import Check, run_checks

logger = logging.getLogger(__name__)


class StringFunctionIndex:
    """Index ``(N, l, m)`` of ``c^l_m`` with ``0 <= l <= N`` and ``l - m`` even."""

    def __init__(self, n: int, ell: int, m: int):
        if n < 1:
            raise InvalidParameters(f"Level N must be at least 1, got {n}")
        if not 0 <= ell <= n:
            raise InvalidParameters(f"Need 0 <= l <= N={n}, got l={ell}")
        if (ell - m) % 2:
            raise InvalidParameters(f"l - m must be even, got l={ell}, m={m}")
        self.n = n
        self.ell = ell
        self.m = m

    @property
    def in_hecke_range(self) -> bool:
        return abs(self.m) <= self.ell

    def normalize(self) -> "StringFunctionIndex":
        """An equal string function with ``0 <= m <= l``."""
        n = self.n
        m = self.m % (2 * n)
        if m > n:
            m = 2 * n - m
        if m > self.ell:
            return StringFunctionIndex(n, n - self.ell, n - m)
        return StringFunctionIndex(n, self.ell, m)

    def key(self) -> str:
        return f"N={self.n}/l={self.ell}/m={self.m}"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StringFunctionIndex):
            return NotImplemented
        return (self.n, self.ell, self.m) == (other.n, other.ell, other.m)

    def __repr__(self) -> str:
        return f"StringFunctionIndex({self.key()})"


def string_grid(n: int) -> int:
    """Exponent grid ``1/(4N(N+2))`` shared by all level-N string functions."""
    return 4 * n * (n + 2)


def hecke_exponent(n: int, ell: int, m: int) -> Fraction:
    """``h^l_m = l(l+2)/(4(N+2)) - m^2/(4N)``."""
    return Fraction(ell * (ell + 2), 4 * (n + 2)) - Fraction(m * m, 4 * n)


def _hecke_bracket(n: int, ell: int, m: int, top: int) -> LaurentSeries:
    """The braced double sum of Hecke's form below ``q^top``, on grid 1."""
    terms: Dict[int, int] = defaultdict(int)

    def exponent(j: int, k: int, a: int) -> int:
        return j * (j + a) // 2 + k * ((j + k) * (n + 2) + ell + 1)

    for a, j_pos, j_neg in ((ell + m + 1, 0, -1), (ell - m + 1, 1, 0)):
        # j >= j_pos, k >= 0: increasing in both indices
        j = j_pos
        while exponent(j, 0, a) < top:
            k = 0
            while (e := exponent(j, k, a)) < top:
                terms[e] += -1 if j % 2 else 1
                k += 1
            j += 1
        # j <= j_neg, k < 0: increasing in |k|, and in |j| once |j| >= a/2
        j = j_neg
        for _ in range(settings.MAX_SUM_TERMS):
            if exponent(j, -1, a) >= top and -2 * j >= a:
                break
            k = -1
            while (e := exponent(j, k, a)) < top:
                terms[e] -= -1 if j % 2 else 1
                k -= 1
            j -= 1
        else:
            raise NonTerminatingSum(f"Hecke sum at N={n}, l={ell}, m={m} does not reach q^{top}")
    return LaurentSeries.from_terms(dict(terms), 1, top)


def hecke_form(n: int, ell: int, m: int, window: Window) -> LaurentSeries:
    """``c^l_m = q^h / (q)_inf^3`` times Hecke's double sum, for ``|m| <= l <= N``."""
    idx = StringFunctionIndex(n, ell, m)
    if not idx.in_hecke_range:
        raise InvalidParameters(f"Hecke's form needs |m| <= l, got {idx}")
    h = hecke_exponent(n, ell, m)
    w = window.refine(string_grid(n))
    top = ceil(w.q_order - h)
    if top <= 0:
        return w.zero()
    unit = Window(1, top)
    body = _hecke_bracket(n, ell, m, top) * inv_euler(unit) ** 3
    return w.fit(body.regrid(w.denom).shift(w.num(h)))


def string_function(idx: StringFunctionIndex, window: Window) -> LaurentSeries:
    """``c^l_m`` for any index, through the symmetries and Hecke's form."""
    norm = idx.normalize()
    if norm != idx:
        logger.debug(f"String function {idx} evaluated as {norm}")
    return hecke_form(norm.n, norm.ell, norm.m, window)


def lattice_string_function(n: int, ell: int, m: int, window: Window) -> LaurentSeries:
    """``c^l_m = q^(l(N-l)/(2N(N+2))) / (q)_inf`` times the eta sum with residue ``m - l``, for ``0 <= l <= N-1``."""
    if not 0 <= ell <= n - 1:
        raise InvalidParameters(f"The lattice form needs 0 <= l <= N-1={n - 1}, got {ell}")
    StringFunctionIndex(n, ell, m)
    cd = inv_cartan(n)
    e_lam = Partition((ell,) if ell else ()).e_vector(n)
    pref = Fraction(ell * (n - ell), 2 * n * (n + 2))

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(string_grid(n))
        return w.monomial(1, pref) * eta_sum(cd, e_lam, m - ell, w) * inv_euler(w)

    return at_order(window.refine(string_grid(n)), compute)


def verify_string_symmetries(n: int, ell: int, m: int, window: Window) -> VerificationReport:
    """Check the symmetry relations of ``c^l_m`` starting from an index in Hecke's range."""
    w = window.refine(string_grid(n))

    def checks() -> Iterator[Check]:
        base = hecke_form(n, ell, m, w)
        yield "c(-m)", base, hecke_form(n, ell, -m, w)
        yield "c(m+2N)", base, string_function(StringFunctionIndex(n, ell, m + 2 * n), w)
        if ell <= n - 1:
            yield "lattice c(m+2N)", base, lattice_string_function(n, ell, m + 2 * n, w)
        if ell >= 1:
            yield "c^(N-l)(N-m)", base, lattice_string_function(n, n - ell, n - m, w)
        else:
            yield "c^(N-l)(N-m)", base, hecke_form(n, n, n - m, w)

    key = f"string-functions/symmetry/{StringFunctionIndex(n, ell, m).key()}"
    return run_checks(key, Target.STRING_FUNCTIONS, checks, w)


def verify_lattice_string(n: int, ell: int, m: int, window: Window) -> VerificationReport:
    w = window.refine(string_grid(n))

    def checks() -> Iterator[Check]:
        hecke = string_function(StringFunctionIndex(n, ell, m), w)
        yield "hecke=lattice", hecke, lattice_string_function(n, ell, m, w)

    key = f"string-functions/lattice/{StringFunctionIndex(n, ell, m).key()}"
    return run_checks(key, Target.STRING_FUNCTIONS, checks, w)


# ------------------------------------------------------ regrouped lemma side


def regrouped_classes(n: int, ell: int) -> List[Tuple[Fraction, Tuple[int, ...]]]:
    """Representatives ``p = p_l, p_l + 1, ... <= N/2`` with the classes of ``L`` mod ``N``
    satisfying ``L + l/2 = ±p``; ``p_l`` is 0 for even ``l`` and 1/2 for odd ``l``."""
    found = []
    p = Fraction(ell % 2, 2)
    while p <= Fraction(n, 2):
        up = int(2 * p - ell) // 2
        down = int(-2 * p - ell) // 2
        found.append((p, tuple(sorted({up % n, down % n}))))
        p += 1
    return found


def _class_bound(bp: BaileyPair, n: int, c: int) -> Optional[ValuationBound]:
    """Valuation bound of the class-sum term at ``t``, where ``L = c + N t``."""
    if bp.alpha_bound is None:
        return None
    at_l = (ValuationBound(Fraction(1, n), Fraction(bp.ell, n)) + bp.alpha_bound).shift(-c)
    return ValuationBound(at_l.a2 * n * n, at_l.a1 * n, at_l.a0)


def class_alpha_sum(bp: BaileyPair, n: int, classes: Tuple[int, ...], window: Window) -> LaurentSeries:
    """``sum a^(L/N) q^(L^2/N) alpha_L`` over ``L`` in the given residue classes mod ``N``."""
    total = window.zero()
    for c in classes:
        if bp.support is not None and c > bp.support:
            continue
        stop = None if bp.support is None else (bp.support - c) // n

        def term(t: int, c: int = c) -> LaurentSeries:
            L = c + n * t
            return window.monomial(1, Fraction(bp.ell * L + L * L, n)) * bp.alpha(L, window)

        total = total + sum_terms(term, window, 0, stop, _class_bound(bp, n, c))
    return window.fit(total)


def _single_part(n: int, ell: int, ell_p: int, sigma: int) -> Partition:
    lam = Partition((ell_p,) if ell_p else ())
    SigmaContext(n, ell, lam, sigma)
    return lam


def e55_lhs(bp: BaileyPair, n: int, ell_p: int, sigma: int, window: Window) -> LaurentSeries:
    """The lemma's alpha side with the eta sums pulled out of the ``L``-sum, one per class ``p``.

    Raises:
        InvalidParameters: unless ``l + l' + sigma*N`` is even and ``0 <= l' <= N-1``.
    """
    lam = _single_part(n, bp.ell, ell_p, sigma)
    cd = inv_cartan(n)
    e_lam = lam.e_vector(n)

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(2 * n)
        total = w.zero()
        for p, classes in regrouped_classes(n, bp.ell):
            residue = int(2 * p) - lam.weight + sigma * n
            total = total + eta_sum(cd, e_lam, residue, w) * class_alpha_sum(bp, n, classes, w)
        return total * inv_shifted(bp.ell + 1, None, w)

    return at_order(window.refine(2 * n), compute)


def e55_string_lhs(bp: BaileyPair, n: int, ell_p: int, sigma: int, window: Window) -> LaurentSeries:
    """``q^(-l'(N-l')/(2N(N+2))) (q)_l sum_p c^(l')_(2p+sigma N)`` times the class sums of alpha."""
    _single_part(n, bp.ell, ell_p, sigma)
    pref = Fraction(-ell_p * (n - ell_p), 2 * n * (n + 2))
    finite = pochhammer(PochhammerSpec(1, 1, bp.ell))

    def compute(w: Window) -> LaurentSeries:
        w = w.refine(string_grid(n))
        total = w.zero()
        for p, classes in regrouped_classes(n, bp.ell):
            c = string_function(StringFunctionIndex(n, ell_p, int(2 * p) + sigma * n), w)
            total = total + c * class_alpha_sum(bp, n, classes, w)
        return w.monomial(1, pref) * finite * total

    return at_order(window.refine(string_grid(n)), compute)


def verify_e55(
    bp: BaileyPair,
    n: int,
    ell_p: int,
    sigma: int,
    window: Window,
    string_form: bool = False,
    key: Optional[str] = None,
) -> VerificationReport:
    """Compare the regrouped side (and optionally its string-function assembly) with the lemma's alpha side."""
    w = window.refine(string_grid(n))
    key = key or f"string-functions/e55/{bp.name}/N={n}/l'={ell_p}/sigma={sigma}"

    def checks() -> Iterator[Check]:
        lam = (ell_p,) if ell_p else ()
        direct = hl_lemma_lhs(bp, n, lam, sigma, w)
        yield "regrouped", e55_lhs(bp, n, ell_p, sigma, w), direct
        if string_form:
            yield "string-functions", e55_string_lhs(bp, n, ell_p, sigma, w), direct

    return run_checks(key, Target.STRING_FUNCTIONS, checks, w)
