import json

import numpy as np
import pytest

from nmfrank.cli import main
from nmfrank.matrices import load_matrix, save_matrix
from nmfrank.sweep import NOT_AVAILABLE, SweepConfig, emit_report, run_sweep


@pytest.fixture(scope="module")
def planted_matrix():
    rng = np.random.default_rng(21)
    W = np.zeros((15, 3))
    W[np.arange(15), np.arange(15) // 5] = 1.0
    return W @ rng.random((3, 18)) + 0.02 * rng.random((15, 18))


def small_config(**overrides):
    base = dict(k_min=2, k_max=5, inits=3, scd_iters=20, threads=1,
                permutation_repeats=2, cv_repeats=2)
    base.update(overrides)
    return SweepConfig(**base)


class TestRunSweep:
    def test_all_methods_present_exactly_once(self, planted_matrix):
        cfg = small_config()
        report, _ = run_sweep(cfg, A=planted_matrix)
        assert sorted(report["methods"]) == sorted(cfg.methods)

    def test_thread_budget_does_not_change_report(self, planted_matrix):
        r1, _ = run_sweep(small_config(threads=1), A=planted_matrix)
        r8, _ = run_sweep(small_config(threads=8), A=planted_matrix)
        assert json.dumps(r1, sort_keys=True) == json.dumps(r8, sort_keys=True)

    def test_method_subsets_do_not_interact(self, planted_matrix):
        full, _ = run_sweep(small_config(), A=planted_matrix)
        only, _ = run_sweep(small_config(methods=("kscv",)), A=planted_matrix)
        assert only["methods"]["kscv"] == full["methods"]["kscv"]

    def test_cost_ceiling_marks_masked_methods_na(self, planted_matrix):
        cfg = small_config(methods=("kscv", "madimput"), cost_ceiling=10.0)
        report, _ = run_sweep(cfg, A=planted_matrix)
        for name in ("kscv", "madimput"):
            entry = report["methods"][name]
            assert entry["selected"] == NOT_AVAILABLE
            assert entry["projected_cost"] > 10.0

    def test_invalid_rank_bounds(self, planted_matrix):
        with pytest.raises(ValueError):
            run_sweep(small_config(k_min=1), A=planted_matrix)
        with pytest.raises(ValueError):
            run_sweep(small_config(k_max=99), A=planted_matrix)

    def test_unknown_method_rejected(self, planted_matrix):
        with pytest.raises(ValueError):
            run_sweep(small_config(methods=("mci", "aic")), A=planted_matrix)


class TestEmitReport:
    def test_empty_method_list_still_valid(self, tmp_path, planted_matrix):
        report, timings = run_sweep(small_config(methods=()), A=planted_matrix)
        path = emit_report(report, tmp_path / "out", timings)
        parsed = json.loads(path.read_text())
        assert parsed["methods"] == {}
        assert parsed["config"]["k_min"] == 2

    def test_round_trip(self, tmp_path, planted_matrix):
        report, _ = run_sweep(small_config(methods=("mci", "elbow")), A=planted_matrix)
        path = emit_report(report, tmp_path / "out")
        assert json.loads(path.read_text()) == report

    def test_metrics_row_count(self, tmp_path, planted_matrix):
        cfg = small_config(methods=("mci", "elbow"))
        report, _ = run_sweep(cfg, A=planted_matrix)
        emit_report(report, tmp_path / "out")
        lines = (tmp_path / "out" / "metrics.csv").read_text().strip().splitlines()
        assert len(lines) - 1 == 5 - 2 + 1

    def test_plotdata_files(self, tmp_path, planted_matrix):
        report, _ = run_sweep(small_config(methods=("mci",)), A=planted_matrix)
        emit_report(report, tmp_path / "out")
        plot = tmp_path / "out" / "plotdata" / "mci.csv"
        lines = plot.read_text().strip().splitlines()
        assert lines[0] == "rank,value"
        assert len(lines) == 1 + 4


class TestCli:
    def test_swimmer_subcommand(self, tmp_path):
        out = tmp_path / "swimmer.csv"
        assert main(["swimmer", "--out", str(out)]) == 0
        A = load_matrix(out)
        assert A.shape == (256, 1024)

    def test_sweep_subcommand(self, tmp_path, planted_matrix):
        matrix_path = tmp_path / "a.csv"
        save_matrix(matrix_path, planted_matrix)
        out = tmp_path / "run"
        rc = main([
            "sweep", "--input", str(matrix_path), "--kmin", "2", "--kmax", "5",
            "--inits", "3", "--scd-iters", "15", "--methods", "mci,elbow",
            "--threads", "2", "--out", str(out),
        ])
        assert rc == 0
        report = json.loads((out / "report.json").read_text())
        assert set(report["methods"]) == {"mci", "elbow"}
        assert (out / "metrics.csv").exists()
        assert (out / "timings.json").exists()
