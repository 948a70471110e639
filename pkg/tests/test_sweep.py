"""Tests for sweep expansion, cell evaluation and report output."""

import json
import random
import sys
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from qbailey.exceptions import NonTerminatingSum
from qbailey.schemas import SigmaPolicy, SweepConfig, Target, VerificationReport, VerificationStatus
from qbailey.services import sweep
from qbailey.services.sweep import (
    evaluate_cell,
    exit_status,
    expand_cells,
    random_rho,
    run_cells,
    summarize,
    table_name,
    target_denominator,
    write_reports,
    write_table,
    write_tables,
)
from qbailey.services.series import LaurentSeries


def report(key: str, status: VerificationStatus) -> VerificationReport:
    detail = "boom" if status is VerificationStatus.FAIL else None
    return VerificationReport(key=key, target=Target.THM44, status=status, detail=detail)


class TestExpansion:
    """Tests for turning a configuration into cells."""

    def test_denominators(self):
        """Test the grid each target is measured on."""
        assert target_denominator(Target.THM44, 3) == 6
        assert target_denominator(Target.COROLLARY, 2, "N1") == 1
        assert target_denominator(Target.COROLLARY, 1, "aux") == 2
        assert target_denominator(Target.STRING_FUNCTIONS, 2) == 32
        assert target_denominator(Target.TELESCOPIC, 4) == 1

    def test_conjugate_pair_grid(self):
        """Test one cell per admissible sigma, sorted by key."""
        config = SweepConfig(target=Target.CONJUGATE_PAIR, N=[2], M=[2], order=4)
        cells = expand_cells(config)
        assert [c.key for c in cells] == [
            "conjugate-pair/N=2/ell=0/lambda=[]/sigma=0/M=2/k=0",
            "conjugate-pair/N=2/ell=0/lambda=[]/sigma=1/M=2/k=0",
        ]
        assert all((c.denom, c.order_numerator) == (4, 16) for c in cells)

    def test_order_numerator(self):
        """Test that a grid numerator is taken as is."""
        config = SweepConfig(target=Target.LEMMA33, N=[3], M=[1], order_numerator=7)
        assert {c.order_numerator for c in expand_cells(config)} == {7}

    def test_telescopic_grid(self):
        """Test the A x B grid for N = 2 and span 1."""
        config = SweepConfig(target=Target.TELESCOPIC, variant="rtele", N=[2], span=1, order=0)
        assert len(expand_cells(config)) == 9

    def test_duplicates_dropped(self):
        """Test that repeated grid values give one cell."""
        config = SweepConfig(target=Target.COROLLARY, variant="N2a", k=[2], i=[1, 1], order=5)
        assert [c.key for c in expand_cells(config)] == ["corollary/N2a/k=2/i=1"]

    def test_explicit_empty_range(self):
        """Test that an empty i list expands to nothing."""
        config = SweepConfig(target=Target.COROLLARY, variant="N2b", k=[2], i=[], order=5)
        assert expand_cells(config) == []

    def test_audit_keys(self):
        """Test that audit cases carry the seed in their keys."""
        config = SweepConfig(target=Target.TRANSFORMS_AUDIT, variant="ab", cases=3, seed=7, order=5)
        keys = [c.key for c in expand_cells(config)]
        assert keys[0] == "transforms-audit/ab/seed=7/case=00000"
        assert len(keys) == 3

    def test_partitions_filtered_by_rank(self):
        """Test that explicit partitions with parts above N-1 are dropped."""
        config = SweepConfig(
            target=Target.GAMMA_DELTA, N=[2], ell=[1], partitions=[[1], [2]], M=[1], order=3
        )
        keys = [c.key for c in expand_cells(config)]
        assert keys == [
            "gamma-delta-pair/N=2/ell=1/lambda=[1]/sigma=0/M=1",
            "gamma-delta-pair/N=2/ell=1/lambda=[1]/sigma=1/M=1",
        ]


class TestEvaluation:
    """Tests for evaluating cells."""

    def test_passing_cell(self):
        """Test a conjugate-pair cell."""
        cell = expand_cells(SweepConfig(target=Target.CONJUGATE_PAIR, N=[1], M=[2], order=5))[0]
        result = evaluate_cell(cell)
        assert result.status is VerificationStatus.PASS
        assert result.key == cell.key

    def test_wrong_parity_is_skipped(self):
        """Test that a fixed sigma with the wrong parity is reported as skipped."""
        config = SweepConfig(target=Target.GAMMA_DELTA, N=[3], sigma=SigmaPolicy.ONE, M=[1], order=3)
        results = [evaluate_cell(c) for c in expand_cells(config)]
        assert [r.status for r in results] == [VerificationStatus.SKIPPED]

    def test_negative_control(self):
        """Test that a corrupted delta fails at q^0."""
        config = SweepConfig(target=Target.CONJUGATE_PAIR, N=[2], M=[2], order=5, corrupt_delta=True)
        results = [evaluate_cell(c) for c in expand_cells(config)]
        assert results
        for r in results:
            assert r.status is VerificationStatus.FAIL
            assert r.mismatch.exponent_num == 0

    def test_audit_cells_pass(self):
        """Test a few random audit cases for every transform."""
        for variant in ("ab", "lattice", "chain", "lattice2"):
            config = SweepConfig(
                target=Target.TRANSFORMS_AUDIT, variant=variant, cases=3, seed=11, order=6
            )
            for r in run_cells(expand_cells(config)):
                assert r.status is VerificationStatus.PASS, r.key
                assert r.seed == 11

    def test_random_rho_avoids_vanishing_factors(self):
        """Test that sampled parameters never put 1 - q^0 in a denominator."""
        rng = random.Random(5)
        for _ in range(200):
            rho = random_rho(rng, 1)
            if rho.is_infinite:
                continue
            gap = 1 - rho.exponent
            assert gap.denominator != 1 or gap > 0

    def test_workers_do_not_change_reports(self):
        """Test that a process pool returns the same sorted reports."""
        config = SweepConfig(target=Target.LEMMA33, N=[1, 2], M=[1, 2], order=4)
        cells = expand_cells(config)
        serial = run_cells(cells, 1)
        pooled = run_cells(cells, 2)
        strip = {"wall_time"}
        assert [r.model_dump(exclude=strip) for r in serial] == [r.model_dump(exclude=strip) for r in pooled]


class TestSummaries:
    """Tests for counts and exit statuses."""

    def test_summarize(self):
        """Test counts per status."""
        counts = summarize([report("a", VerificationStatus.PASS), report("b", VerificationStatus.SKIPPED)])
        assert counts == {"pass": 1, "fail": 0, "skipped": 1, "unverified-bound": 0}

    @pytest.mark.parametrize(
        "statuses,expected",
        [
            ([], 0),
            ([VerificationStatus.PASS, VerificationStatus.SKIPPED], 0),
            ([VerificationStatus.PASS, VerificationStatus.UNVERIFIED], 3),
            ([VerificationStatus.UNVERIFIED, VerificationStatus.FAIL], 1),
        ],
    )
    def test_exit_status(self, statuses, expected):
        """Test that failures dominate unverified bounds."""
        assert exit_status([report(str(j), s) for j, s in enumerate(statuses)]) == expected


class TestOutput:
    """Tests for report lines and coefficient tables."""

    def test_reports_without_timings(self, tmp_path):
        """Test that omitted timings leave no wall_time field."""
        r = report("a", VerificationStatus.PASS).model_copy(update={"wall_time": 0.5})
        path = write_reports([r], tmp_path / "out" / "reports.jsonl", omit_timings=True)
        line = json.loads(path.read_text(encoding="utf-8").strip())
        assert line["key"] == "a"
        assert "wall_time" not in line

    def test_table_rows(self, tmp_path):
        """Test the CSV layout of a coefficient table."""
        path = write_table(LaurentSeries([1, 0, -2], 1, 2), tmp_path / "t.csv")
        assert path.read_text(encoding="utf-8").splitlines() == [
            "exponent_num,denom,coefficient",
            "1,2,1",
            "3,2,-2",
        ]

    def test_table_name(self):
        """Test that keys become safe file names."""
        assert table_name("corollary/N1/k=2/i=2/delta=1") == "corollary_N1_k=2_i=2_delta=1.csv"
        assert table_name("thm44/N=1/lambda=[1, 1]") == "thm44_N=1_lambda=_1_1.csv"

    def test_write_tables(self, tmp_path):
        """Test that the Rogers-Ramanujan cell gets a table of partition counts."""
        config = SweepConfig(target=Target.COROLLARY, variant="N1", k=[2], i=[2], delta=[1], order=10)
        assert write_tables(expand_cells(config), tmp_path) == (1, 0)
        rows = (tmp_path / "corollary_N1_k=2_i=2_delta=1.csv").read_text(encoding="utf-8").splitlines()
        assert rows[:4] == ["exponent_num,denom,coefficient", "0,1,1", "1,1,1", "2,1,1"]

    def test_untabulated_target(self, tmp_path):
        """Test that targets without a sum side write nothing."""
        config = SweepConfig(target=Target.LEMMA33, N=[1], M=[1], order=3)
        assert write_tables(expand_cells(config), tmp_path) == (0, 0)

    def test_failed_table_is_counted(self, tmp_path, monkeypatch):
        """Test that a table whose sum side raises is reported as an error."""

        def broken(cell):
            raise NonTerminatingSum("no bound")

        monkeypatch.setattr(sweep, "table_for_cell", broken)
        config = SweepConfig(
            target=Target.COROLLARY, variant="N1", k=[2], i=[2], delta=[1], order=10
        )
        assert write_tables(expand_cells(config), tmp_path) == (0, 1)
        assert exit_status([], table_errors=1) == 1
