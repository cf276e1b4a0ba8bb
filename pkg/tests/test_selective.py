"""Threshold selection, error-keep curves, rank diagnostics, file formats."""

import json
import math

import numpy as np
import pytest

from forecast_uq.selective import (
    KEEP_GRID,
    ErrorKeepCurve,
    error_keep_curve,
    error_score_correlation,
    keep_grid_readout,
    mae_at_keep,
    mae_at_threshold,
    make_records,
    read_curve_csv,
    write_curve_csv,
    write_matrix_json,
    write_scatter_csv,
)


def records_from(errors, scores):
    errors = np.asarray(errors, dtype=np.float64)
    return make_records(np.zeros_like(errors), errors, scores)


def random_records(n, seed=0):
    rng = np.random.default_rng(seed)
    return records_from(rng.exponential(2.0, size=n), rng.uniform(0.0, 10.0, size=n))


class TestMaeAtThreshold:
    def test_hand_case_strict_inequality(self):
        recs = records_from([1.0, 9.0], [0.1, 0.9])
        mae, keep = mae_at_threshold(recs, 0.5)
        assert mae == 1.0 and keep == 0.5
        # a record sitting exactly on the threshold is declined
        mae, keep = mae_at_threshold(recs, 0.9)
        assert mae == 1.0 and keep == 0.5

    def test_threshold_at_or_below_min_keeps_nothing(self):
        recs = records_from([1.0, 9.0], [0.1, 0.9])
        mae, keep = mae_at_threshold(recs, 0.1)
        assert math.isnan(mae) and keep == 0.0

    def test_infinite_threshold_is_plain_mae(self):
        recs = random_records(500)
        mae, keep = mae_at_threshold(recs, math.inf)
        expected = np.mean([r.abs_error for r in recs])
        np.testing.assert_allclose(mae, expected, rtol=1e-12)
        assert keep == 1.0

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            mae_at_threshold([], 1.0)


class TestErrorKeepCurve:
    def test_last_point_keeps_everything(self):
        recs = random_records(200)
        curve = error_keep_curve(recs, n_points=20)
        last = curve.points[-1]
        assert last.threshold == math.inf
        assert last.keep_fraction == 1.0 and last.n_kept == 200
        np.testing.assert_allclose(last.mae, np.mean([r.abs_error for r in recs]), rtol=1e-12)

    def test_oracle_scores_give_monotone_curve(self):
        rng = np.random.default_rng(1)
        errors = rng.exponential(1.0, size=400)
        recs = records_from(errors, errors)
        curve = error_keep_curve(recs, n_points=40)
        maes = [p.mae for p in curve.points if p.n_kept > 0]
        assert np.all(np.diff(maes) >= -1e-12)

    def test_first_point_declines_everything(self):
        recs = random_records(50)
        first = error_keep_curve(recs, n_points=10).points[0]
        assert first.n_kept == 0 and math.isnan(first.mae)

    def test_constant_scores_collapse_to_two_points(self):
        recs = records_from([1.0, 2.0, 3.0], [0.5, 0.5, 0.5])
        curve = error_keep_curve(recs)
        assert len(curve.points) == 2
        assert curve.points[1].mae == 2.0

    def test_n_points_caps_sweep_length(self):
        recs = random_records(5000)
        curve = error_keep_curve(recs, n_points=25)
        assert len(curve.points) <= 25
        assert curve.n_total == 5000

    def test_keep_fraction_consistent_with_n_kept(self):
        recs = random_records(333)
        for p in error_keep_curve(recs, n_points=15).points:
            assert p.n_kept == round(p.keep_fraction * 333)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            error_keep_curve(random_records(10), n_points=1)


class TestMaeAtKeep:
    def test_keep_all_is_plain_mae(self):
        recs = random_records(101)
        expected = np.mean([r.abs_error for r in recs])
        np.testing.assert_allclose(mae_at_keep(recs, 1.0), expected, rtol=1e-12)

    def test_hand_case(self):
        recs = records_from([4.0, 1.0, 2.0, 8.0], [0.9, 0.1, 0.5, 0.95])
        assert mae_at_keep(recs, 0.25) == 1.0
        assert mae_at_keep(recs, 0.5) == 1.5
        np.testing.assert_allclose(mae_at_keep(recs, 0.75), 7.0 / 3.0, rtol=1e-15)
        assert mae_at_keep(recs, 1.0) == 3.75

    def test_matches_order_statistics_for_oracle_scores(self):
        rng = np.random.default_rng(2)
        errors = rng.exponential(1.0, size=200)
        recs = records_from(errors, errors)
        sorted_errors = np.sort(errors)
        for k in (0.1, 0.25, 0.5, 0.9):
            n = math.ceil(k * 200)
            np.testing.assert_allclose(
                mae_at_keep(recs, k), sorted_errors[:n].mean(), rtol=1e-12
            )

    def test_permutation_invariant(self):
        rng = np.random.default_rng(3)
        errors = rng.exponential(1.0, size=64)
        scores = rng.uniform(0.0, 1.0, size=64)
        recs = records_from(errors, scores)
        perm = rng.permutation(64)
        shuffled = records_from(errors[perm], scores[perm])
        for k in KEEP_GRID:
            assert mae_at_keep(recs, k) == mae_at_keep(shuffled, k)

    def test_monotone_transform_of_scores_is_identity(self):
        rng = np.random.default_rng(4)
        errors = rng.exponential(1.0, size=64)
        scores = rng.uniform(0.0, 5.0, size=64)
        recs = records_from(errors, scores)
        cubed = records_from(errors, scores**3)
        shifted = records_from(errors, np.exp(scores))
        for k in KEEP_GRID:
            assert mae_at_keep(recs, k) == mae_at_keep(cubed, k)
            assert mae_at_keep(recs, k) == mae_at_keep(shifted, k)

    def test_fraction_bounds(self):
        recs = random_records(10)
        with pytest.raises(ValueError):
            mae_at_keep(recs, 0.0)
        with pytest.raises(ValueError):
            mae_at_keep(recs, 1.5)

    def test_grid_readout_matches_pointwise_calls(self):
        recs = random_records(77)
        readout = keep_grid_readout(recs)
        assert tuple(readout) == KEEP_GRID
        for k, value in readout.items():
            assert value == mae_at_keep(recs, k)


class TestErrorScoreCorrelation:
    def test_perfect_positive(self):
        errors = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        rho, scatter = error_score_correlation(records_from(errors, errors * 7.0))
        np.testing.assert_allclose(rho, 1.0, rtol=1e-12)
        assert scatter.shape == (5, 2)
        np.testing.assert_array_equal(scatter[:, 0], errors)

    def test_perfect_negative(self):
        errors = np.array([1.0, 2.0, 3.0, 4.0])
        rho, _ = error_score_correlation(records_from(errors, 10.0 - errors))
        np.testing.assert_allclose(rho, -1.0, rtol=1e-12)

    def test_independent_scores_near_zero(self):
        rng = np.random.default_rng(5)
        recs = records_from(
            rng.exponential(1.0, size=10_000), rng.uniform(0.0, 1.0, size=10_000)
        )
        rho, _ = error_score_correlation(recs)
        assert abs(rho) < 0.05

    def test_constant_side_gives_nan(self):
        rho, _ = error_score_correlation(records_from([1.0, 2.0, 3.0], [0.5, 0.5, 0.5]))
        assert math.isnan(rho)

    def test_needs_three_records(self):
        with pytest.raises(ValueError):
            error_score_correlation(records_from([1.0, 2.0], [0.1, 0.2]))


class TestMakeRecords:
    def test_lengths_must_agree(self):
        with pytest.raises(ValueError):
            make_records([1.0, 2.0], [1.0], [0.1, 0.2])

    def test_values_carried_over(self):
        recs = make_records([1.0, -2.0], [1.5, -1.0], [0.3, 0.7])
        assert recs[0].abs_error == 0.5 and recs[1].abs_error == 1.0
        assert recs[1].score == 0.7


class TestFileFormats:
    def test_curve_round_trip(self, tmp_path):
        curve = error_keep_curve(random_records(120), n_points=12)
        path = tmp_path / "curve.csv"
        write_curve_csv(curve, path)
        loaded = read_curve_csv(path)
        assert loaded.n_total == curve.n_total
        assert len(loaded.points) == len(curve.points)
        for a, b in zip(curve.points, loaded.points):
            assert a.threshold == b.threshold or (math.isinf(a.threshold) and math.isinf(b.threshold))
            assert a.keep_fraction == b.keep_fraction
            assert a.mae == b.mae or (math.isnan(a.mae) and math.isnan(b.mae))
            assert a.n_kept == b.n_kept

    def test_curve_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("cutoff,keep,mae,n\n0.0,0.0,nan,0\n")
        with pytest.raises(ValueError):
            read_curve_csv(path)

    def test_curve_write_is_deterministic(self, tmp_path):
        curve = error_keep_curve(random_records(60), n_points=8)
        write_curve_csv(curve, tmp_path / "a.csv")
        write_curve_csv(curve, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_scatter_csv(self, tmp_path):
        _, scatter = error_score_correlation(random_records(40))
        path = tmp_path / "scatter.csv"
        write_scatter_csv(scatter, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "abs_error,score"
        assert len(lines) == 41
        first = lines[1].split(",")
        assert float(first[0]) == scatter[0, 0] and float(first[1]) == scatter[0, 1]

    def test_scatter_shape_checked(self, tmp_path):
        with pytest.raises(ValueError):
            write_scatter_csv(np.zeros((3, 4)), tmp_path / "x.csv")

    def test_matrix_json_layout(self, tmp_path):
        rows = {
            "dense_heteroscedastic+predicted_scale": {
                0.25: {"mean": 1.0, "std": 0.1, "per_seed": {"0": 0.9, "1": 1.1}},
                1.0: {"mean": 2.0, "std": 0.2, "per_seed": {"0": 1.8, "1": 2.2}},
            }
        }
        path = tmp_path / "matrix.json"
        write_matrix_json(rows, (0.25, 1.0), path)
        doc = json.loads(path.read_text())
        assert doc["schema_version"] == 1
        assert doc["keep_grid"] == ["0.25", "1.0"]
        cell = doc["rows"]["dense_heteroscedastic+predicted_scale"]["0.25"]
        assert cell["mean"] == 1.0 and cell["per_seed"]["1"] == 1.1

    def test_empty_curve_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("threshold,keep_fraction,mae,n_kept\n")
        with pytest.raises(ValueError):
            read_curve_csv(path)
