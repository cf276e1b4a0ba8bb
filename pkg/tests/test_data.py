"""Generator, normalization, featurization, split, and CSV round trips."""

import numpy as np
import pytest

from forecast_uq.data import (
    DEFAULT_STD_THRESHOLD,
    FAMILIES,
    Dataset,
    GeneratorConfig,
    RawSeries,
    center_scale_normalize,
    feature_matrix,
    featurize,
    generate_synthetic,
    make_dataset,
    read_series_csv,
    split,
    write_series_csv,
)
from forecast_uq.exceptions import ConfigError


def small_config(**overrides) -> GeneratorConfig:
    base = {
        "families": {"periodic": 10, "spikes": 10, "trend": 10, "noise": 10},
        "series_length": 24,
        "amplitude_range": (10.0, 100.0),
        "noise": {"law": "constant", "scale": 2.0},
        "seed": 5,
    }
    base.update(overrides)
    return GeneratorConfig(**base)


class TestCenterScaleNormalize:
    def test_hand_computed_example(self):
        out = center_scale_normalize(np.array([1.0, 2.0, 3.0]))
        # population std of (1,2,3) is sqrt(2/3)
        expected = [-1.224744871391589, 0.0, 1.224744871391589]
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_constant_series_takes_centered_branch(self):
        np.testing.assert_allclose(center_scale_normalize(np.full(5, 5.0)), np.zeros(5))

    def test_shift_invariance(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=24)
        np.testing.assert_allclose(center_scale_normalize(z), center_scale_normalize(z + 42.0), atol=1e-9)

    def test_threshold_switches_branches(self):
        z = np.array([0.0, 1e-8])  # std = 5e-9
        centered = center_scale_normalize(z, std_threshold=1e-6)
        assert np.abs(centered).max() < 1e-8
        scaled = center_scale_normalize(z, std_threshold=1e-12)
        np.testing.assert_allclose(scaled, [-1.0, 1.0])

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError):
            center_scale_normalize(np.array([1.0]))
        with pytest.raises(ValueError):
            center_scale_normalize(np.array([1.0, 2.0]), std_threshold=0.0)


class TestFeaturize:
    def test_hand_computed_attributes(self):
        fv = featurize(RawSeries(values=[1.0, 2.0, 3.0], target=4.0))
        np.testing.assert_allclose(fv.mean, 2.0)
        np.testing.assert_allclose(fv.std, 0.816496580927726, atol=1e-12)
        assert fv.flatten().shape == (5,)

    def test_zero_series(self):
        fv = featurize(RawSeries(values=np.zeros(4), target=0.0))
        np.testing.assert_allclose(fv.normalized, np.zeros(4))
        assert fv.mean == 0.0 and fv.std == 0.0

    def test_std_homogeneity(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=24)
        base = featurize(RawSeries(values=values, target=0.0))
        scaled = featurize(RawSeries(values=3.0 * values, target=0.0))
        np.testing.assert_allclose(scaled.std, 3.0 * base.std, rtol=1e-12)

    def test_normalized_part_is_standardized(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            values = rng.uniform(5.0, 500.0) * rng.normal(size=24) + rng.uniform(-50, 50)
            fv = featurize(RawSeries(values=values, target=1.0))
            if fv.std >= DEFAULT_STD_THRESHOLD:
                assert abs(fv.normalized.mean()) < 1e-9
                assert abs(fv.normalized.std() - 1.0) < 1e-9


class TestRawSeries:
    def test_validates_length_and_finiteness(self):
        with pytest.raises(ValueError):
            RawSeries(values=[1.0], target=0.0)
        with pytest.raises(ValueError):
            RawSeries(values=[1.0, np.inf], target=0.0)
        with pytest.raises(ValueError):
            RawSeries(values=[1.0, 2.0], target=np.nan)
        with pytest.raises(ValueError):
            RawSeries(values=[1.0, 2.0], target=0.0, true_scale=-1.0)


class TestGenerator:
    def test_counts_and_lengths(self):
        series = generate_synthetic(small_config())
        assert len(series) == 40
        assert all(s.length == 24 for s in series)
        assert all(s.true_scale == 2.0 for s in series)

    def test_determinism(self):
        a = generate_synthetic(small_config())
        b = generate_synthetic(small_config())
        assert all(
            np.array_equal(x.values, y.values) and x.target == y.target
            for x, y in zip(a, b)
        )

    def test_zero_noise_reveals_exact_pattern(self):
        quiet = generate_synthetic(small_config(noise={"law": "constant", "scale": 0.0}))
        noisy = generate_synthetic(small_config(noise={"law": "constant", "scale": 3.0}))
        # same pattern stream: the zero-noise run is the other one's truth
        for q, n in zip(quiet, noisy):
            assert np.all(np.isfinite(q.values))
            assert not np.array_equal(q.values, n.values)
        periodic = quiet[0].values
        season = periodic[:12]
        np.testing.assert_allclose(periodic[12:24], season, atol=1e-9)

    def test_mean_abs_residual_matches_scale(self):
        # flat-pattern family: residual around the level is b * |standard laplace|
        config = small_config(
            families={"noise": 10000},
            noise={"law": "constant", "scale": 2.0},
            amplitude_range=(50.0, 50.0),
        )
        series = generate_synthetic(config)
        residuals = np.concatenate([s.values - 50.0 for s in series])
        np.testing.assert_allclose(np.abs(residuals).mean(), 2.0, rtol=0.05)

    def test_noise_law_slope_is_recoverable(self):
        config = small_config(
            families={"noise": 10000},
            noise={"law": "uniform", "low": 0.5, "high": 8.0},
            amplitude_range=(20.0, 20.0),
        )
        series = generate_synthetic(config)
        abs_residuals = np.array([abs(s.target - 20.0) for s in series])
        scales = np.array([s.true_scale for s in series])
        slope = np.polyfit(scales, abs_residuals, 1)[0]
        np.testing.assert_allclose(slope, 1.0, atol=0.1)

    def test_amplitude_linear_scale_spans_configured_range(self):
        config = small_config(
            families={"trend": 4000},
            noise={"law": "amplitude_linear", "low": 1.0, "high": 20.0},
        )
        series = generate_synthetic(config)
        scales = np.array([s.true_scale for s in series])
        assert scales.min() >= 1.0 and scales.max() <= 20.0
        assert scales.max() - scales.min() > 15.0

    def test_patterns_stable_across_noise_laws(self):
        base = small_config(noise={"law": "constant", "scale": 0.0})
        alt = small_config(noise={"law": "amplitude_linear", "low": 0.0, "high": 0.0})
        for x, y in zip(generate_synthetic(base), generate_synthetic(alt)):
            np.testing.assert_allclose(x.values, y.values, atol=1e-12)

    def test_explicit_seed_overrides_config(self):
        a = generate_synthetic(small_config(), seed=123)
        b = generate_synthetic(small_config(seed=123))
        assert np.array_equal(a[0].values, b[0].values)

    def test_all_families_produce_finite_features(self):
        for s in generate_synthetic(small_config(noise={"law": "uniform", "low": 0.0, "high": 9.0})):
            fv = featurize(s)
            assert np.all(np.isfinite(fv.flatten()))


class TestGeneratorConfig:
    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            GeneratorConfig.from_dict({"families": {"trend": 1}, "extra_knob": 1})

    def test_unknown_family_rejected(self):
        with pytest.raises(ConfigError):
            small_config(families={"sawtooth": 5})

    def test_nonpositive_count_rejected(self):
        with pytest.raises(ConfigError):
            small_config(families={"trend": 0})

    def test_short_series_rejected(self):
        with pytest.raises(ConfigError):
            small_config(series_length=1)

    def test_bad_amplitude_range_rejected(self):
        with pytest.raises(ConfigError):
            small_config(amplitude_range=(0.0, 10.0))
        with pytest.raises(ConfigError):
            small_config(amplitude_range=(10.0, 5.0))

    def test_bad_noise_law_rejected(self):
        with pytest.raises(ConfigError):
            small_config(noise={"law": "gaussian", "scale": 1.0})
        with pytest.raises(ConfigError):
            small_config(noise={"law": "constant", "scale": -1.0})
        with pytest.raises(ConfigError):
            small_config(noise={"law": "uniform", "low": 5.0, "high": 1.0})
        with pytest.raises(ConfigError):
            small_config(noise={"law": "constant", "scale": 1.0, "typo": 2})

    def test_wrong_schema_version_rejected(self):
        with pytest.raises(ConfigError):
            small_config(schema_version=2)

    def test_round_trips_through_dict(self):
        config = small_config()
        again = GeneratorConfig.from_dict(config.to_dict())
        assert again == config


class TestSplit:
    def make(self, n) -> Dataset:
        series = [
            RawSeries(values=np.array([float(i), float(i + 1), float(i + 2)]), target=float(i))
            for i in range(n)
        ]
        return make_dataset(series)

    def test_ten_percent_split(self):
        train, val = split(self.make(100), 0.1, seed=0)
        assert len(train) == 90 and len(val) == 10
        assert train.split_tag == "train" and val.split_tag == "validation"

    def test_union_preserved_and_disjoint(self):
        ds = self.make(37)
        train, val = split(ds, 0.25, seed=1)
        targets = sorted(ex.target for ex in list(train) + list(val))
        assert targets == sorted(ex.target for ex in ds)
        assert len(train) + len(val) == len(ds)
        assert not {ex.target for ex in train} & {ex.target for ex in val}

    def test_deterministic(self):
        ds = self.make(50)
        first = split(ds, 0.2, seed=7)
        second = split(ds, 0.2, seed=7)
        assert [ex.target for ex in first[1]] == [ex.target for ex in second[1]]

    def test_both_sides_nonempty_even_when_rounding_to_zero(self):
        train, val = split(self.make(5), 0.01, seed=0)
        assert len(val) == 1 and len(train) == 4

    def test_bad_inputs_rejected(self):
        with pytest.raises(ValueError):
            split(self.make(10), 0.0, seed=0)
        with pytest.raises(ValueError):
            split(Dataset(examples=()), 0.5, seed=0)


class TestCsvRoundTrip:
    def test_exact_round_trip_with_scale(self, tmp_path):
        series = generate_synthetic(small_config())
        path = tmp_path / "data.csv"
        write_series_csv(series, path)
        back = read_series_csv(path)
        assert len(back) == len(series)
        for orig, loaded in zip(series, back):
            assert np.array_equal(orig.values, loaded.values)
            assert orig.target == loaded.target
            assert orig.true_scale == loaded.true_scale

    def test_header_and_column_count(self, tmp_path):
        path = tmp_path / "data.csv"
        write_series_csv(generate_synthetic(small_config()), path)
        header = path.read_text().splitlines()[0].split(",")
        assert header == [f"value_{i}" for i in range(1, 25)] + ["target", "true_scale"]

    def test_external_data_without_scale(self, tmp_path):
        series = [RawSeries(values=[1.0, 2.0, 3.0], target=4.0)]
        path = tmp_path / "external.csv"
        write_series_csv(series, path)
        assert "true_scale" not in path.read_text().splitlines()[0]
        assert read_series_csv(path)[0].true_scale is None

    def test_missing_target_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_series_csv(path)


class TestFeatureMatrix:
    def test_shapes_and_values(self):
        ds = make_dataset(generate_synthetic(small_config()))
        x, y = feature_matrix(ds)
        assert x.shape == (40, 26)
        assert y.shape == (40,)
        np.testing.assert_allclose(x[0], ds.examples[0].features.flatten())

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            feature_matrix(Dataset(examples=()))
