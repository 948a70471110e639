"""Unit tests for q-Pochhammer symbols, Gaussian polynomials and residue products."""

import sys
from fractions import Fraction
from math import comb
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from tests.conftest import count_partitions

from qbailey.exceptions import NonTerminatingProduct
from qbailey.services.qtools import (
    Base,
    PochhammerSpec,
    euler,
    gauss_binom,
    gauss_binom_primed,
    inv_base_factorial,
    inv_euler,
    limit_shifted_factorial,
    pochhammer,
    q_multinomial,
    residue_product,
)
from qbailey.services.series import LaurentSeries, Window


class TestPochhammer:
    """Tests for finite, infinite and negative-length shifted factorials."""

    def test_finite_product(self):
        """Test (q)_3 = (1-q)(1-q^2)(1-q^3)."""
        assert pochhammer(PochhammerSpec(1, 1, 3)) == LaurentSeries([1, -1, -1, 0, 1, 1, -1])

    def test_empty_product(self):
        """Test that (q)_0 is 1."""
        assert pochhammer(PochhammerSpec(1, 1, 0)) == LaurentSeries([1])

    def test_negated_argument(self):
        """Test (-q;q)_2 = (1+q)(1+q^2)."""
        assert pochhammer(PochhammerSpec(1, 1, 2, negated=True)) == LaurentSeries([1, 1, 1, 1])

    def test_negative_exponent_factor(self):
        """Test (q^-1;q)_1 = 1 - q^-1."""
        s = pochhammer(PochhammerSpec(-1, 1, 1))
        assert s.terms() == [(-1, -1), (0, 1)]

    def test_vanishing_factor(self):
        """Test that (q^-1;q)_2 contains the factor 1 - q^0."""
        assert pochhammer(PochhammerSpec(-1, 1, 2)).is_zero

    def test_negative_length(self):
        """Test (q^3;q)_(-1) = 1/(1-q^2)."""
        s = pochhammer(PochhammerSpec(3, 1, -1), Window.of(9))
        assert [s.coeff_at(e) for e in range(9)] == [1, 0, 1, 0, 1, 0, 1, 0, 1]

    def test_half_integer_start(self):
        """Test (-q^(1/2);q)_1 on grid 2."""
        s = pochhammer(PochhammerSpec(Fraction(1, 2), 1, 1, negated=True))
        assert s.denom == 2
        assert s.terms() == [(0, 1), (1, 1)]

    def test_euler_pentagonal(self):
        """Test the pentagonal-number expansion of (q)_inf below q^16."""
        s = euler(Window.of(16))
        expected = {0: 1, 1: -1, 2: -1, 5: 1, 7: 1, 12: -1, 15: -1}
        assert dict(s.terms()) == expected

    def test_partitions_of_four(self):
        """Test that 1/(q)_inf has coefficient 5 at q^4."""
        assert inv_euler(Window.of(10)).coeff_at(4) == 5

    def test_infinite_product_needs_positive_start(self):
        """Test that (q^0;q)_inf is rejected."""
        with pytest.raises(NonTerminatingProduct):
            pochhammer(PochhammerSpec(0, 1, None), Window.of(5))

    def test_step_must_be_positive(self):
        """Test that a zero step is rejected."""
        with pytest.raises(ValueError):
            PochhammerSpec(1, 0, 2)

    def test_base_factorial(self):
        """Test 1/(q^2;q^2)_1 = 1 + q^2 + q^4 + ..."""
        s = inv_base_factorial(1, 2, Window.of(7))
        assert s.terms() == [(0, 1), (2, 1), (4, 1), (6, 1)]


class TestGaussianPolynomials:
    """Tests for ordinary and primed q-binomials and q-multinomials."""

    def test_four_choose_two(self):
        """Test [4 over 2] = 1 + q + 2q^2 + q^3 + q^4."""
        assert gauss_binom(4, 2) == LaurentSeries([1, 1, 2, 1, 1])

    def test_choose_zero(self):
        """Test [n over 0] = 1."""
        for n in range(5):
            assert gauss_binom(n, 0) == LaurentSeries([1])

    def test_negative_bottom(self):
        """Test that [3 over -1] vanishes."""
        assert gauss_binom(3, -1).is_zero

    def test_primed_negative_case(self):
        """Test [-1 over -2]' = (q^-1)_1/(q)_1 = -q^-1."""
        assert gauss_binom_primed(-1, -2) == LaurentSeries([-1], -1)

    def test_primed_zero_case(self):
        """Test that [-3 over 2]' vanishes."""
        assert gauss_binom_primed(-3, 2).is_zero

    def test_primed_agrees_on_ordinary_range(self):
        """Test that both binomials coincide for 0 <= bottom <= top."""
        for top in range(6):
            for bottom in range(top + 1):
                assert gauss_binom_primed(top, bottom) == gauss_binom(top, bottom)

    def test_multinomial(self):
        """Test [2; 1] at base q and at base 1/q."""
        assert q_multinomial(2, (1,)) == LaurentSeries([1, 1])
        assert q_multinomial(2, (1,), Base.INVERSE) == LaurentSeries([1, 1], -1)

    def test_multinomial_overfull(self):
        """Test that [1; 1, 1] vanishes."""
        assert q_multinomial(1, (1, 1)).is_zero

    def test_limit_shifted_factorial(self):
        """Test a^-n (a)_n as a -> inf for n = 0, 1, 3."""
        assert limit_shifted_factorial(0) == LaurentSeries([1])
        assert limit_shifted_factorial(1) == LaurentSeries([-1])
        assert limit_shifted_factorial(3) == LaurentSeries([-1], 3)

    @given(st.integers(1, 12), st.integers(0, 12))
    def test_pascal_recurrence(self, n, k):
        """Test [n over k] = [n-1 over k-1] + q^k [n-1 over k]."""
        rhs = gauss_binom(n - 1, k - 1) + gauss_binom(n - 1, k).shift(k)
        assert gauss_binom(n, k) == rhs

    @given(st.integers(0, 12), st.integers(0, 12))
    def test_evaluates_to_binomial(self, n, k):
        """Test that the coefficients of [n over k] sum to C(n, k)."""
        assert sum(gauss_binom(n, k).coeffs) == (comb(n, k) if k <= n else 0)

    @given(st.integers(0, 6), st.lists(st.integers(0, 3), min_size=1, max_size=3))
    def test_inverse_base_reflection(self, k, v):
        """Test [k; v]_(1/q) q^E = [k; v]_q with E the degree."""
        direct = q_multinomial(k, v)
        reflected = q_multinomial(k, v, Base.INVERSE)
        if direct.is_zero:
            assert reflected.is_zero
            return
        assert reflected.shift(direct.degree) == direct


class TestResidueProducts:
    """Tests for products over parts in residue classes."""

    def test_rogers_ramanujan_parts(self):
        """Test parts congruent to ±1 mod 5: two partitions of 4."""
        s = residue_product(5, (0, 2, 3), Window.of(10))
        assert s.coeff_at(4) == 2

    def test_second_rogers_ramanujan_parts(self):
        """Test parts congruent to ±2 mod 5: one partition of 4."""
        s = residue_product(5, (0, 1, 4), Window.of(10))
        assert s.coeff_at(4) == 1

    def test_exclude_everything(self):
        """Test that excluding every residue leaves 1."""
        assert residue_product(1, (0,), Window.of(10)).terms() == [(0, 1)]

    def test_matches_partition_oracle(self):
        """Test parts congruent to ±1 mod 5 against a coin-change count."""
        s = residue_product(5, (0, 2, 3), Window.of(40))
        oracle = count_partitions(40, lambda p: p % 5 in (1, 4))
        assert [s.coeff_at(e) for e in range(40)] == oracle
