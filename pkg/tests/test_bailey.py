"""Tests for Bailey pairs, conjugate pairs and the transformations between them."""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from qbailey.exceptions import InvalidParameters, ModulusMismatch, NonTerminatingSum
from qbailey.schemas import VerificationStatus
from qbailey.services.bailey import (
    INF,
    Construction,
    LazySequence,
    RhoParam,
    Seed,
    ShippedKernel,
    beta_from_alpha,
    chained_pair,
    classical_conjugate,
    constructions_for,
    descending_chains,
    gamma_from_delta,
    pairing_sum,
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
from qbailey.services.series import LaurentSeries, ValuationBound, Window, eq_up_to


@pytest.fixture
def window() -> Window:
    return Window.of(12)


class TestLazySequence:
    """Tests for cached on-demand sequences."""

    def test_outside_support_is_zero(self, window):
        """Test that negative indices and indices past the support vanish."""
        calls = []

        def fn(L, w):
            calls.append(L)
            return w.one()

        seq = LazySequence(fn, support=2)
        assert seq(-1, window).is_zero
        assert seq(3, window).is_zero
        assert calls == []

    def test_cached_per_window(self, window):
        """Test that a narrower window reuses the widest entry and a wider one recomputes."""
        calls = []

        def fn(L, w):
            calls.append(w.order)
            return w.zero()

        seq = LazySequence(fn)
        seq(1, window)
        seq(1, window)
        narrow = seq(1, Window.of(5))
        assert calls == [12]
        assert narrow.order == 5
        seq(1, Window.of(20))
        seq(1, Window.of(7))
        assert calls == [12, 20]
        assert len(seq._cache) == 1

    def test_exact_entry_serves_every_window(self, window):
        """Test that an exact entry is computed once."""
        calls = []

        def fn(L, w):
            calls.append(L)
            return w.one()

        seq = LazySequence(fn)
        seq(1, window)
        seq(1, Window.of(40))
        assert calls == [1]


class TestSeeds:
    """Tests for the seed pairs."""

    def test_seed_one_alpha(self, window):
        """Test alpha_1 = -(1 + q + q^2) for pair I."""
        bp = seed_pair(Seed.I)
        assert bp.alpha(1, window) == LaurentSeries([-1, -1, -1])
        assert bp.beta(0, window) == LaurentSeries([1])
        assert bp.beta(2, window).is_zero

    @pytest.mark.parametrize("which,delta", [(Seed.I, 0), (Seed.II, 0), (Seed.III, 0), (Seed.III, 1)])
    def test_seeds_satisfy_defining_relation(self, which, delta, window):
        """Test beta_L against the sum over alpha for L <= 4."""
        report = verify_bailey(seed_pair(which, delta), 4, window)
        assert report.status is VerificationStatus.PASS
        assert report.checks == 5

    def test_seed_three_rejects_delta(self):
        """Test that pair III only takes delta in {0, 1}."""
        with pytest.raises(InvalidParameters):
            seed_pair(Seed.III, 2)


class TestDefiningRelations:
    """Tests for pairs built from one side."""

    def test_beta_from_unit_alpha(self, window):
        """Test beta_1 = 1/(q)_1^2 when alpha is 1 at L = 0 only."""
        bp = beta_from_alpha(0, lambda L, w: w.one(), support=0)
        beta = bp.beta(1, window)
        assert [beta.coeff_at(e) for e in range(4)] == [1, 2, 3, 4]

    def test_gamma_from_unit_delta(self, window):
        """Test gamma_0 = 1 and gamma_1 = 0 when delta is 1 at L = 0 only."""
        cp = gamma_from_delta(0, lambda L, w: w.one(), delta_support=0)
        assert eq_up_to(cp.gamma(0, window), window.one(), window.order)
        assert cp.gamma(1, window).is_zero


class TestTransforms:
    """Tests for the four Bailey-pair transformations."""

    def test_ab_keeps_modulus(self, window):
        """Test that Bailey's lemma yields a pair relative to the same a."""
        bp = transform_AB(seed_pair(Seed.I))
        assert bp.ell == 1
        assert verify_bailey(bp, 3, window).status is VerificationStatus.PASS

    def test_lattice_lowers_modulus(self, window):
        """Test that the first lattice transformation maps a = q to a = 1."""
        bp = transform_lattice(seed_pair(Seed.II))
        assert bp.ell == 0
        assert verify_bailey(bp, 3, window).status is VerificationStatus.PASS

    def test_lattice2_lowers_modulus(self, window):
        """Test that the second lattice transformation maps a = q to a = 1."""
        bp = transform_lattice2(seed_pair(Seed.I))
        assert bp.ell == 0
        assert verify_bailey(bp, 3, window).status is VerificationStatus.PASS

    def test_chain(self, window):
        """Test the chain transformation on pair III."""
        bp = transform_chain_q(seed_pair(Seed.III, 1))
        assert verify_bailey(bp, 3, window).status is VerificationStatus.PASS

    def test_finite_half_integer_rho(self):
        """Test Bailey's lemma with rho1 = q^(1/2) and rho2 infinite."""
        bp = transform_AB(seed_pair(Seed.I), RhoParam.finite(Fraction(1, 2)), INF)
        report = verify_bailey(bp, 3, Window.of(8, 2))
        assert report.status is VerificationStatus.PASS

    def test_rho_on_forbidden_lattice(self):
        """Test that rho = q^2 is rejected for a = q."""
        with pytest.raises(InvalidParameters):
            transform_AB(seed_pair(Seed.I), RhoParam.finite(2), INF)

    def test_rho_equality(self):
        """Test value semantics of transformation parameters."""
        assert RhoParam.finite(Fraction(3, 2)) == RhoParam(Fraction(3, 2))
        assert INF.is_infinite
        assert RhoParam.finite(0) != INF


class TestConjugatePairs:
    """Tests for conjugate pairs and the pairing identity."""

    def test_classical_conjugate(self, window):
        """Test the finite-M conjugate pair against its defining sum."""
        cp = classical_conjugate(0, INF, INF, 3)
        assert verify_conjugate(cp, 3, window).status is VerificationStatus.PASS

    def test_pairing_identity(self, window):
        """Test sum alpha gamma = sum beta delta for pair I and M = 3."""
        lhs, rhs = pairing_sum(seed_pair(Seed.I), classical_conjugate(1, INF, INF, 3), window)
        assert eq_up_to(lhs, rhs, window.order)

    def test_pairing_modulus_mismatch(self, window):
        """Test that pairs relative to different a cannot be paired."""
        with pytest.raises(ModulusMismatch):
            pairing_sum(seed_pair(Seed.I), classical_conjugate(0, INF, INF, 3), window)

    @pytest.mark.parametrize("kernel", list(ShippedKernel))
    def test_shipped_kernels(self, kernel, window):
        """Test that each shipped conjugate transformation returns a conjugate pair."""
        cp = shipped_conjugate_transform(classical_conjugate(1, INF, INF, 3), kernel)
        assert verify_conjugate(cp, 3, window).status is VerificationStatus.PASS


class TestChainedPairs:
    """Tests for Bailey pairs relative to 1 indexed by (k, i, delta)."""

    def test_constructions_for(self):
        """Test which constructions are defined at a few cells."""
        assert constructions_for(3, 1, 0) == [Construction.CHAIN, Construction.CLOSED_FORM]
        assert constructions_for(3, 2, 1) == [Construction.LATTICE2, Construction.CLOSED_FORM]
        assert constructions_for(4, 3, 0) == [
            Construction.LATTICE2,
            Construction.LATTICE,
            Construction.CLOSED_FORM,
        ]

    def test_rejects_small_k(self):
        """Test that k must be at least 2."""
        with pytest.raises(InvalidParameters):
            chained_pair(1, 1, 0)

    def test_rejects_undefined_construction(self):
        """Test that a construction outside its range is refused."""
        with pytest.raises(InvalidParameters):
            chained_pair(3, 1, 0, Construction.LATTICE)

    def test_construction_is_recorded(self):
        """Test that the chosen construction is stored on the pair."""
        assert chained_pair(3, 2, 1).construction == Construction.LATTICE2.value
        assert chained_pair(3, 3, 0, Construction.CLOSED_FORM).construction == "closed-form"

    @pytest.mark.parametrize("k,i,delta", [(2, 1, 0), (2, 2, 1), (3, 1, 1), (3, 2, 0), (3, 3, 1)])
    def test_constructions_agree(self, k, i, delta):
        """Test every composition against the closed form and the defining relation."""
        report = verify_constructions(k, i, delta, 3, Window.of(10))
        assert report.status is VerificationStatus.PASS

    def test_descending_chains(self):
        """Test chains r with r^2 < 5."""
        found = list(descending_chains(1, Fraction(5), [1], [0]))
        assert [c for c, _ in found] == [(0,), (1,), (2,)]

    def test_descending_chains_need_growth(self):
        """Test that an unbounded flat first entry is rejected."""
        with pytest.raises(ValueError):
            list(descending_chains(1, Fraction(5), [0], [0]))


class TestValuationBounds:
    """Tests for the valuation bounds carried by pairs."""

    @staticmethod
    def _respects(series: LaurentSeries, floor: Fraction) -> bool:
        return series.is_zero or series.q_valuation >= floor

    @pytest.mark.parametrize("which,delta", [(Seed.I, 0), (Seed.II, 0), (Seed.III, 0), (Seed.III, 1)])
    def test_seed_bounds(self, which, delta):
        """Test that seed alphas and betas sit on or above their bounds."""
        bp = seed_pair(which, delta)
        w = Window.of(30)
        beta_bound = bp.beta_bound(w)
        for L in range(5):
            assert self._respects(bp.alpha(L, w), bp.alpha_bound(L))
            assert self._respects(bp.beta(L, w), beta_bound(L))

    @pytest.mark.parametrize(
        "k,i,delta,construction",
        [
            (3, 1, 0, Construction.CHAIN),
            (3, 2, 1, Construction.LATTICE2),
            (4, 3, 0, Construction.LATTICE),
            (3, 3, 1, Construction.CLOSED_FORM),
        ],
    )
    def test_transform_bounds(self, k, i, delta, construction):
        """Test that composed transforms keep alpha on or above the propagated bound."""
        bp = chained_pair(k, i, delta, construction)
        assert bp.alpha_bound is not None and bp.alpha_bound.is_convex
        w = Window.of(20)
        for L in range(4):
            assert self._respects(bp.alpha(L, w), bp.alpha_bound(L))

    def test_finite_rho_bound(self):
        """Test the bound of Bailey's lemma with a finite half-integer parameter."""
        bp = transform_AB(seed_pair(Seed.I), RhoParam.finite(Fraction(1, 2)), INF)
        w = Window.of(12, 2)
        for L in range(4):
            assert self._respects(bp.alpha(L, w), bp.alpha_bound(L))

    def test_support_gives_constant_beta_bound(self):
        """Test that a finitely supported alpha bounds beta by its lowest valuation."""
        bp = beta_from_alpha(0, lambda L, w: w.monomial(1, 2 + L), support=3)
        assert bp.beta_bound(Window.of(10)) == ValuationBound.constant(2)

    def test_gamma_from_delta_with_bound(self, window):
        """Test that a delta bound ends the gamma sum where a support would."""
        square = ValuationBound(1)
        bounded = gamma_from_delta(0, lambda r, w: w.monomial(1, r * r), delta_bound=square)
        supported = gamma_from_delta(0, lambda r, w: w.monomial(1, r * r), delta_support=5)
        for L in range(3):
            assert eq_up_to(bounded.gamma(L, window), supported.gamma(L, window), window.order)

    def test_gamma_from_delta_without_bound(self, window):
        """Test that an unbounded infinite delta is refused."""
        cp = gamma_from_delta(0, lambda r, w: w.monomial(1, r * r))
        with pytest.raises(NonTerminatingSum):
            cp.gamma(0, window)

    def test_pairing_with_bounds(self, window):
        """Test the pairing identity for an infinite conjugate pair with bounded delta."""
        bound = ValuationBound(1, 1)
        cp = gamma_from_delta(1, lambda r, w: w.monomial(1, r * r + r), delta_bound=bound)
        lhs, rhs = pairing_sum(seed_pair(Seed.I), cp, window)
        assert eq_up_to(lhs, rhs, window.order)
