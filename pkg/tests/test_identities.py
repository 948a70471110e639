"""Tests for the hierarchy lemma, the two-sided identity and its N = 1, 2 specializations."""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from tests.conftest import coefficients

from qbailey.exceptions import InvalidParameters
from qbailey.schemas import VerificationStatus
from qbailey.services.bailey import Seed, beta_from_alpha, seed_pair
from qbailey.services.identities import (
    GGVariant,
    IdentityCell,
    ag_bressoud_product,
    ag_bressoud_sum,
    corollary_pipeline,
    corollary_proof_sum_checks,
    gg_product,
    gg_sum,
    nonnegative_part,
    thm44_lhs,
    thm44_rhs,
    triple_product_form,
    verify_ag_bressoud,
    verify_corollary_pipeline,
    verify_gg,
    verify_hl_lemma,
    verify_jacobi,
    verify_thm44,
    verify_triple_product,
)
from qbailey.services.series import LaurentSeries, ValuationBound, Window, eq_up_to


class TestRogersRamanujan:
    """The k = 2, delta = 1 cells are the Rogers-Ramanujan identities."""

    def test_first_identity_sum(self, rr_oracle):
        """Test sum q^(n^2+n)/(q)_n against partitions into parts ±2 mod 5 to q^50."""
        s = ag_bressoud_sum(2, 1, 1, Window.of(50))
        assert coefficients(s, 50) == rr_oracle(50, (2, 3))

    def test_second_identity_sum(self, rr_oracle):
        """Test sum q^(n^2)/(q)_n against partitions into parts ±1 mod 5 to q^50."""
        s = ag_bressoud_sum(2, 2, 1, Window.of(50))
        assert coefficients(s, 50) == rr_oracle(50, (1, 4))

    @pytest.mark.parametrize("i,residues", [(1, (2, 3)), (2, (1, 4))])
    def test_product_side(self, rr_oracle, i, residues):
        """Test the residue product independently of the sum to q^50."""
        s = ag_bressoud_product(2, i, 1, Window.of(50))
        assert coefficients(s, 50) == rr_oracle(50, residues)

    def test_lattice_side_at_unit_level(self, rr_oracle):
        """Test that the N = 1 bilateral side reproduces the product."""
        s = thm44_lhs(IdentityCell(1, 1, 2, 2), Window.of(25, 2))
        assert coefficients(s, 25) == rr_oracle(25, (1, 4))


class TestAndrewsGordonBressoud:
    """Tests for the N = 1 sum = product identities."""

    @pytest.mark.parametrize("k,i,delta", [(2, 1, 0), (3, 1, 1), (3, 2, 1), (3, 3, 1), (3, 2, 0), (4, 3, 0)])
    def test_sum_equals_product(self, k, i, delta):
        """Test sum = product and positivity below q^30."""
        report = verify_ag_bressoud(k, i, delta, Window.of(30))
        assert report.status is VerificationStatus.PASS
        assert report.checks == 2

    def test_outside_product_range(self):
        """Test that i = k at delta = 0 has no product form."""
        with pytest.raises(InvalidParameters):
            ag_bressoud_sum(3, 3, 0, Window.of(10))

    def test_nonnegative_part(self):
        """Test the absolute-value series used for positivity."""
        s = LaurentSeries([1, -2, 3], 1, 1, 5)
        assert nonnegative_part(s) == LaurentSeries([1, 2, 3], 1, 1, 5)


class TestGollnitzGordon:
    """Tests for the N = 2 families."""

    @pytest.mark.parametrize("k,i", [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
    def test_n2a(self, k, i):
        """Test the (q^2;q^2) family."""
        assert verify_gg(k, i, GGVariant.N2A, Window.of(30)).status is VerificationStatus.PASS

    @pytest.mark.parametrize("k,i", [(2, 1), (3, 1), (3, 2)])
    def test_n2b(self, k, i):
        """Test the family with a last (q^4;q^4)."""
        assert verify_gg(k, i, GGVariant.N2B, Window.of(30)).status is VerificationStatus.PASS

    def test_gollnitz_gordon_product(self):
        """Test k = 2, i = 1: parts congruent to 3, 4, 5 mod 8."""
        s = gg_product(2, 1, GGVariant.N2A, Window.of(9))
        # 8 = 4+4 = 3+5
        assert coefficients(s, 9) == [1, 0, 0, 1, 1, 1, 1, 1, 2]

    def test_n2b_range(self):
        """Test that N2b stops at i = k - 1."""
        with pytest.raises(InvalidParameters):
            gg_sum(2, 2, GGVariant.N2B, Window.of(10))

    @pytest.mark.parametrize("k,i,delta", [(2, 1, 1), (2, 2, 1), (2, 1, 0), (3, 2, 0)])
    def test_triple_product(self, k, i, delta):
        """Test the sum, the triple-product form and the residue product."""
        report = verify_triple_product(k, i, delta, Window.of(24))
        assert report.status is VerificationStatus.PASS
        assert report.checks == 3

    def test_triple_product_form_is_product(self):
        """Test the triple-product form against the N2a product directly."""
        w = Window.of(20)
        assert eq_up_to(triple_product_form(2, 1, 1, w), gg_product(2, 1, GGVariant.N2A, w))

    @pytest.mark.parametrize("c", [Fraction(1, 2), Fraction(1, 3), Fraction(3, 7)])
    def test_jacobi(self, c):
        """Test Jacobi's triple product at z = q^c."""
        assert verify_jacobi(c, Window.of(12)).status is VerificationStatus.PASS

    def test_jacobi_range(self):
        """Test that c must lie strictly between 0 and 1."""
        report = verify_jacobi(1, Window.of(5))
        assert report.status is VerificationStatus.SKIPPED


class TestAuxiliarySums:
    """Tests for the q-binomial sums behind the N = 2 reduction."""

    @pytest.mark.parametrize("weight", [0, 2, 4])
    @pytest.mark.parametrize("r1", [0, 1, 3])
    def test_finite_and_infinite(self, weight, r1):
        """Test the finite and infinite sums for several weights."""
        report = corollary_proof_sum_checks(weight, r1, Window.of(10))
        assert report.status is VerificationStatus.PASS

    def test_odd_weight(self):
        """Test that an odd weight is rejected."""
        with pytest.raises(InvalidParameters):
            corollary_proof_sum_checks(1, 0, Window.of(5))

    @pytest.mark.parametrize("k,i,delta,weight", [(2, 2, 1, 0), (2, 1, 0, 0), (2, 1, 1, 2)])
    def test_pipeline(self, k, i, delta, weight):
        """Test that summing over sigma and reducing gives the N = 2 sum."""
        report = verify_corollary_pipeline(k, i, delta, weight, Window.of(16))
        assert report.status is VerificationStatus.PASS

    def test_pipeline_returns_both_sides(self):
        """Test the pipeline output on the integer grid."""
        pipeline, target = corollary_pipeline(2, 2, 1, 0, Window.of(10))
        assert eq_up_to(pipeline, target, 10)


class TestTwoSidedIdentity:
    """Tests for the (N, delta, k, i, lambda, sigma) identity."""

    def test_cell_validation(self):
        """Test the parameter ranges of a cell."""
        with pytest.raises(InvalidParameters):
            IdentityCell(1, 2, 2, 1)
        with pytest.raises(InvalidParameters):
            IdentityCell(1, 0, 1, 1)
        with pytest.raises(InvalidParameters):
            IdentityCell(2, 0, 2, 3)

    def test_cell_info(self):
        """Test the range flags and the preferred construction."""
        cell = IdentityCell(1, 0, 2, 2)
        assert cell.info() == {
            "theorem_range": True,
            "corollary_range": False,
            "construction": "closed-form",
        }
        assert IdentityCell(1, 1, 2, 2).info()["construction"] == "lattice2"

    @pytest.mark.parametrize(
        "n,delta,k,i,lam,sigma",
        [
            (1, 1, 2, 2, (), 0),
            (1, 0, 2, 2, (), 0),
            (2, 1, 2, 1, (), 0),
            (2, 0, 2, 2, (), 1),
            (2, 1, 3, 2, (1, 1), 1),
            (3, 0, 2, 1, (), 0),
        ],
    )
    def test_identity(self, n, delta, k, i, lam, sigma):
        """Test both sides of the identity below q^8."""
        report = verify_thm44(IdentityCell(n, delta, k, i, lam, sigma), Window.of(8))
        assert report.status is VerificationStatus.PASS

    def test_identity_through_pair(self):
        """Test that both sides also come out of the hierarchy lemma with the chained pair."""
        report = verify_thm44(IdentityCell(2, 1, 2, 2), Window.of(6), via_pair=True)
        assert report.status is VerificationStatus.PASS
        assert report.checks == 3

    def test_sum_side_at_unit_level(self):
        """Test that the N = 1 chain side is the Andrews-Gordon sum."""
        w = Window.of(20, 2)
        assert eq_up_to(thm44_rhs(IdentityCell(1, 1, 3, 2), w), ag_bressoud_sum(3, 2, 1, Window.of(20)))


class TestHierarchyLemma:
    """Tests for the lemma pairing any Bailey pair with the level-N conjugate pair."""

    @pytest.mark.parametrize(
        "seed,delta,n,lam,sigma",
        [
            (Seed.I, 0, 1, (), 1),
            (Seed.II, 0, 1, (), 1),
            (Seed.II, 0, 2, (1,), 0),
            (Seed.III, 0, 2, (), 0),
            (Seed.III, 1, 3, (1,), 1),
        ],
    )
    def test_lemma(self, seed, delta, n, lam, sigma):
        """Test the alpha side against the beta side."""
        bp = seed_pair(seed, delta)
        assert verify_hl_lemma(bp, n, lam, sigma, Window.of(6)).status is VerificationStatus.PASS

    def test_parity(self):
        """Test that an odd ell + |lambda| + sigma*N skips the cell."""
        report = verify_hl_lemma(seed_pair(Seed.I), 2, (), 0, Window.of(4))
        assert report.status is VerificationStatus.SKIPPED

    @pytest.mark.parametrize("bounded", [False, True])
    def test_gapped_alpha(self, bounded):
        """Test a pair whose alpha vanishes for 1 <= L <= 4 and returns at L = 5."""

        def alpha(L, w):
            return w.one() if L in (0, 5) else LaurentSeries((), 0, w.denom, None)

        if bounded:
            bp = beta_from_alpha(1, alpha, alpha_bound=ValuationBound.constant(0), name="gap")
        else:
            bp = beta_from_alpha(1, alpha, support=5, name="gap")
        assert verify_hl_lemma(bp, 1, (), 1, Window.of(40)).status is VerificationStatus.PASS

    def test_alpha_without_bound(self):
        """Test that an infinite alpha with no bound is reported instead of cut short."""
        bp = beta_from_alpha(1, lambda L, w: w.one() if L == 0 else w.zero(), name="open")
        report = verify_hl_lemma(bp, 1, (), 1, Window.of(10))
        assert report.status is VerificationStatus.FAIL
        assert report.detail.startswith("NonTerminatingSum")
