import numpy as np
import pytest

from nmfrank.rsic import (
    MciCurve,
    ResidualStack,
    build_residual_stack,
    coordinatewise_iqr,
    detect_islands,
    max_delta_map,
    mci,
    smooth_curve,
)
from nmfrank.solver import FactorPair


def brute_force_iqr(column):
    """Order-statistic interpolation at fractional position 1 + (a-1) q."""
    x = sorted(column)
    a = len(x)

    def quantile(q):
        pos = (a - 1) * q
        lo = int(np.floor(pos))
        hi = int(np.ceil(pos))
        return x[lo] + (pos - lo) * (x[hi] - x[lo])

    return quantile(0.75) - quantile(0.25)


def make_fits(A, pairs):
    return [FactorPair(np.asarray(W, dtype=float), np.asarray(H, dtype=float))
            for W, H in pairs]


class TestResidualStack:
    def test_identical_fits_give_identical_rows(self):
        A = np.array([[1.0, 2.0], [3.0, 4.0]])
        fits = make_fits(A, [([[1.0], [1.0]], [[1.0, 1.0]])] * 2)
        R = build_residual_stack(A, fits)
        assert np.array_equal(R.data[0], R.data[1])

    def test_exact_factorization_gives_zero_row(self):
        A = np.array([[2.0, 4.0]])
        fits = make_fits(A, [([[2.0]], [[1.0, 2.0]]), ([[1.0]], [[2.0, 4.0]])])
        R = build_residual_stack(A, fits)
        assert np.array_equal(R.data[0], np.zeros(2))

    def test_row_is_hand_flattened_residual(self):
        A = np.array([[1.0, 2.0], [3.0, 4.0]])
        W, H = np.array([[1.0], [2.0]]), np.array([[1.0, 1.0]])
        fits = make_fits(A, [(W, H), (W, H)])
        R = build_residual_stack(A, fits)
        assert np.array_equal(R.data[0], (A - W @ H).ravel())

    def test_single_run_rejected(self):
        A = np.ones((2, 2))
        with pytest.raises(ValueError):
            build_residual_stack(A, make_fits(A, [([[1.0], [1.0]], [[1.0, 1.0]])]))

    def test_mixed_ranks_rejected(self):
        A = np.ones((2, 2))
        fits = make_fits(A, [([[1.0], [1.0]], [[1.0, 1.0]]),
                             ([[1.0, 0.0], [0.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]])])
        with pytest.raises(ValueError):
            build_residual_stack(A, fits)


class TestCoordinatewiseIqr:
    def test_constant_column(self):
        R = ResidualStack(2, np.full((4, 3), 2.5))
        assert np.array_equal(coordinatewise_iqr(R), np.zeros(3))

    def test_four_point_interpolation(self):
        R = ResidualStack(2, np.array([[1.0], [2.0], [3.0], [4.0]]))
        assert coordinatewise_iqr(R)[0] == pytest.approx(1.5, abs=1e-15)

    def test_two_point_interpolation(self):
        R = ResidualStack(2, np.array([[0.0], [2.0]]))
        assert coordinatewise_iqr(R)[0] == pytest.approx(1.0, abs=1e-15)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = int(rng.integers(2, 26))
            cols = int(rng.integers(1, 201))
            data = rng.normal(size=(a, cols))
            R = ResidualStack(3, data)
            got = coordinatewise_iqr(R)
            want = [brute_force_iqr(data[:, j]) for j in range(cols)]
            assert np.allclose(got, want, atol=1e-12)

    def test_batching_is_transparent(self):
        rng = np.random.default_rng(1)
        R = ResidualStack(2, rng.normal(size=(5, 50)))
        assert np.array_equal(coordinatewise_iqr(R, batch=7), coordinatewise_iqr(R))


class TestMci:
    def test_identical_runs_give_zero(self):
        R = ResidualStack(2, np.tile(np.random.default_rng(2).normal(size=20), (6, 1)))
        assert mci(R) == 0.0

    def test_two_run_scalar(self):
        assert mci(ResidualStack(1, np.array([[0.0], [2.0]]))) == pytest.approx(1.0)

    def test_is_mean_of_columnwise_iqr(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=(9, 40))
        R = ResidualStack(4, data)
        want = np.mean([brute_force_iqr(data[:, j]) for j in range(40)])
        assert mci(R) == pytest.approx(want, abs=1e-12)

    def test_invariant_under_run_permutation(self):
        rng = np.random.default_rng(4)
        data = rng.normal(size=(7, 30))
        shuffled = data[rng.permutation(7)]
        assert mci(ResidualStack(2, data)) == pytest.approx(
            mci(ResidualStack(2, shuffled)), abs=1e-15)

    def test_scales_linearly(self):
        rng = np.random.default_rng(5)
        data = rng.normal(size=(6, 25))
        base = mci(ResidualStack(2, data))
        assert mci(ResidualStack(2, 3.5 * data)) == pytest.approx(3.5 * base, rel=1e-12)


class TestDetectIslands:
    def test_plateau_before_jump(self):
        curve = MciCurve(range(1, 10), [1, 1, 1, 1, 1, 3, 2, 2, 2])
        assert detect_islands(curve) == [5]

    def test_gentle_geometric_increase_is_empty(self):
        values = [1.1 ** i for i in range(8)]
        assert detect_islands(MciCurve(range(2, 10), values)) == []

    def test_two_plateaus_both_reported(self):
        curve = MciCurve(range(1, 9), [1, 1, 1, 5, 2, 2, 2, 8])
        assert detect_islands(curve) == [3, 7]

    def test_strictly_rising_curve_has_no_islands(self):
        # neither the jump into rank 4 nor the rise at the very start
        # creates an island: no rank sits on a flat stretch
        curve = MciCurve(range(1, 5), [1, 2, 3, 10])
        assert detect_islands(curve) == []

    def test_collapse_to_stable_level_reported(self):
        # a hard drop followed by a flat tail marks the entry point of the
        # stable region
        curve = MciCurve(range(1, 4), [5, 1, 1])
        assert detect_islands(curve) == [2]

    def test_last_rank_never_reported(self):
        # no trailing evidence at the final rank, for either pattern
        curve = MciCurve(range(1, 4), [5, 5, 1])
        assert detect_islands(curve) == []

    def test_collapse_reports_first_entry_point_only(self):
        # the collapse continues past rank 3, but the stable region is
        # bounded by its first qualifying rank, not by later ones
        curve = MciCurve(range(1, 7), [9.0, 9.0, 2.0, 0.2, 0.2, 0.2])
        assert detect_islands(curve) == [3]

    def test_mild_drop_is_not_a_collapse(self):
        curve = MciCurve(range(1, 6), [4.0, 2.0, 1.1, 1.0, 1.0])
        assert detect_islands(curve) == []

    def test_collapse_needs_flat_tail(self):
        # the tail creeps back up after the drop, so rank 2 does not bound
        # a stable region (and no single step rises fast enough to jump)
        curve = MciCurve(range(1, 6), [9.0, 1.0, 1.2, 1.44, 1.7])
        assert detect_islands(curve) == []

    def test_drop_from_below_floor_ignored(self):
        curve = MciCurve(range(1, 6), [1e-9, 1e-10, 1e-11, 1e-11, 1e-11])
        assert detect_islands(curve, eps_floor=1e-6) == []

    def test_too_few_ranks_rejected(self):
        with pytest.raises(ValueError):
            detect_islands(MciCurve(range(1, 3), [1, 2]))

    def test_invariant_under_uniform_scaling(self):
        curve = [1, 1, 2, 2, 2, 9, 4, 4]
        a = detect_islands(MciCurve(range(1, 9), curve))
        b = detect_islands(MciCurve(range(1, 9), [100.0 * v for v in curve]))
        assert a == b == [2, 5]


class TestMaxDeltaMap:
    def test_single_fit_gives_zero(self):
        A = np.ones((2, 2))
        fits = make_fits(A, [([[1.0], [1.0]], [[0.5, 0.5]])])
        assert np.array_equal(max_delta_map(A, fits), np.zeros((2, 2)))

    def test_identical_fits_give_zero(self):
        A = np.ones((2, 3))
        pair = ([[1.0], [1.0]], [[0.4, 0.4, 0.4]])
        assert np.array_equal(max_delta_map(A, make_fits(A, [pair, pair])), np.zeros((2, 3)))

    def test_coordinate_delta_arithmetic(self):
        A = np.array([[1.0]])
        # coordinate errors 0.2 and 0.7; norms within 10% forces tol up
        fits = make_fits(A, [([[1.0]], [[0.8]]), ([[1.0]], [[0.3]])])
        out = max_delta_map(A, fits, tol=2.0)
        assert out[0, 0] == pytest.approx(0.5, abs=1e-15)

    def test_far_fits_excluded(self):
        A = np.array([[1.0]])
        fits = make_fits(A, [([[1.0]], [[0.9]]), ([[1.0]], [[0.91]]), ([[1.0]], [[0.0]])])
        out = max_delta_map(A, fits, tol=0.20)
        # the zero fit (residual 1.0) is far from the median residual 0.1
        assert out[0, 0] == pytest.approx(0.01, abs=1e-10)

    def test_bounded_by_max_error(self):
        rng = np.random.default_rng(6)
        A = rng.random((4, 5))
        fits = make_fits(A, [(rng.random((4, 2)), rng.random((2, 5))) for _ in range(5)])
        out = max_delta_map(A, fits, tol=10.0)
        max_err = np.max([np.abs(A - f.W @ f.H) for f in fits], axis=0)
        assert (out >= 0).all()
        assert (out <= max_err + 1e-15).all()


def test_smooth_curve_moving_median():
    curve = MciCurve(range(1, 6), [1.0, 9.0, 1.0, 1.0, 1.0])
    out = smooth_curve(curve, window=3)
    assert out.values.tolist() == [1.0, 1.0, 1.0, 1.0, 1.0]
