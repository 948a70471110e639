"""Test configuration and fixtures for qbailey tests."""

import sys
from pathlib import Path
from typing import Callable, Iterable, List

import pytest
from hypothesis import settings as hypothesis_settings

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from qbailey.services.series import LaurentSeries, Window

hypothesis_settings.register_profile("default", deadline=None)
hypothesis_settings.load_profile("default")


def count_partitions(limit: int, allowed: Callable[[int], bool]) -> List[int]:
    """Coin-change counts of partitions of 0..limit-1 into parts accepted by ``allowed``."""
    counts = [1] + [0] * (limit - 1)
    for part in range(1, limit):
        if not allowed(part):
            continue
        for total in range(part, limit):
            counts[total] += counts[total - part]
    return counts


def coefficients(s: LaurentSeries, limit: int) -> List[int]:
    """Integer-exponent coefficients ``[q^0], ..., [q^(limit-1)]`` of a series."""
    step = s.denom
    return [s.coeff_at(e * step) for e in range(limit)]


def poly(coeffs: Iterable[int], lo: int = 0, denom: int = 1) -> LaurentSeries:
    return LaurentSeries(list(coeffs), lo, denom)


@pytest.fixture
def window20() -> Window:
    """Integer grid known below q^20."""
    return Window.of(20)


@pytest.fixture
def rr_oracle() -> Callable[[int, Iterable[int]], List[int]]:
    """Partition counts into parts congruent to the given residues mod 5."""

    def oracle(limit: int, residues: Iterable[int]) -> List[int]:
        allowed = {r % 5 for r in residues}
        return count_partitions(limit, lambda p: p % 5 in allowed)

    return oracle


@pytest.fixture
def tmp_config(tmp_path: Path) -> Callable[[str], Path]:
    """Write a TOML sweep config and return its path."""

    def write(text: str) -> Path:
        path = tmp_path / "sweep.toml"
        path.write_text(text, encoding="utf-8")
        return path

    return write
