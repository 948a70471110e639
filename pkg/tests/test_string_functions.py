"""Tests for A_1^(1) string functions and the regrouped lemma side."""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from qbailey.exceptions import InvalidParameters
from qbailey.schemas import VerificationStatus
from qbailey.services.bailey import Seed, seed_pair
from qbailey.services.qtools import inv_euler
from qbailey.services.series import Window, eq_up_to
from qbailey.services.string_functions import (
    StringFunctionIndex,
    e55_lhs,
    hecke_exponent,
    hecke_form,
    lattice_string_function,
    regrouped_classes,
    string_function,
    string_grid,
    verify_e55,
    verify_lattice_string,
    verify_string_symmetries,
)


class TestIndices:
    """Tests for string-function indices and their symmetries."""

    def test_parity(self):
        """Test that l - m must be even."""
        with pytest.raises(InvalidParameters):
            StringFunctionIndex(2, 1, 0)

    def test_level_range(self):
        """Test 0 <= l <= N."""
        with pytest.raises(InvalidParameters):
            StringFunctionIndex(2, 3, 1)

    def test_normalize_reflection(self):
        """Test c^0_2 = c^2_0 at level 2."""
        assert StringFunctionIndex(2, 0, 2).normalize() == StringFunctionIndex(2, 2, 0)

    def test_normalize_period(self):
        """Test c^1_(-5) = c^1_1 at level 3."""
        assert StringFunctionIndex(3, 1, -5).normalize() == StringFunctionIndex(3, 1, 1)

    def test_grid_and_exponent(self):
        """Test the common grid and h^l_m."""
        assert string_grid(2) == 32
        assert hecke_exponent(2, 0, 0) == 0
        assert hecke_exponent(2, 2, 0) == Fraction(1, 2)
        assert hecke_exponent(2, 1, 1) == Fraction(3, 16) - Fraction(1, 8)


class TestHeckeForm:
    """Tests for Hecke's double-sum evaluation."""

    def test_unit_level(self):
        """Test that c^0_0 at level 1 is the partition function."""
        w = Window.of(12)
        assert eq_up_to(hecke_form(1, 0, 0, w), inv_euler(w))

    def test_leading_term(self):
        """Test that c^0_0 at level 2 starts with 1."""
        s = hecke_form(2, 0, 0, Window.of(5))
        assert s.terms()[0] == (0, 1)

    def test_outside_range(self):
        """Test that |m| > l is refused by Hecke's form."""
        with pytest.raises(InvalidParameters):
            hecke_form(2, 0, 2, Window.of(5))

    def test_any_index(self):
        """Test that string_function reaches indices outside Hecke's range."""
        w = Window.of(6)
        assert eq_up_to(string_function(StringFunctionIndex(2, 0, 2), w), hecke_form(2, 2, 0, w))

    @pytest.mark.parametrize("n,ell,m", [(1, 0, 0), (1, 1, 1), (2, 0, 0), (2, 1, 1), (2, 2, 2), (3, 1, -1), (3, 2, 0)])
    def test_symmetries(self, n, ell, m):
        """Test c(-m), c(m+2N) and c^(N-l)_(N-m)."""
        report = verify_string_symmetries(n, ell, m, Window.of(6))
        assert report.status is VerificationStatus.PASS


class TestLatticeForm:
    """Tests for the occupation-number form of string functions."""

    @pytest.mark.parametrize("n,ell,m", [(1, 0, 0), (2, 0, 0), (2, 0, 2), (2, 1, 1), (3, 1, 1), (3, 2, 0), (4, 2, 2)])
    def test_agrees_with_hecke(self, n, ell, m):
        """Test the lattice form against Hecke's form."""
        assert verify_lattice_string(n, ell, m, Window.of(6)).status is VerificationStatus.PASS

    def test_top_weight_refused(self):
        """Test that l = N has no lattice form."""
        with pytest.raises(InvalidParameters):
            lattice_string_function(2, 2, 0, Window.of(4))


class TestRegroupedSide:
    """Tests for the regrouped alpha side of the hierarchy lemma."""

    def test_classes_even(self):
        """Test the classes of L for N = 2, l = 0."""
        assert regrouped_classes(2, 0) == [(Fraction(0), (0,)), (Fraction(1), (1,))]

    def test_classes_odd(self):
        """Test the classes of L for N = 3, l = 1."""
        assert regrouped_classes(3, 1) == [(Fraction(1, 2), (0, 2)), (Fraction(3, 2), (1,))]

    def test_parity_refused(self):
        """Test that an odd l + l' + sigma*N is rejected."""
        with pytest.raises(InvalidParameters):
            e55_lhs(seed_pair(Seed.III), 2, 1, 0, Window.of(4))

    @pytest.mark.parametrize(
        "seed,delta,n,ell_p,sigma",
        [(Seed.III, 0, 2, 0, 0), (Seed.III, 1, 2, 0, 1), (Seed.I, 0, 2, 1, 0), (Seed.II, 0, 3, 1, 0)],
    )
    def test_regrouped_and_string_forms(self, seed, delta, n, ell_p, sigma):
        """Test both regroupings against the direct alpha side."""
        bp = seed_pair(seed, delta)
        report = verify_e55(bp, n, ell_p, sigma, Window.of(4), string_form=True)
        assert report.status is VerificationStatus.PASS
        assert report.checks == 2
