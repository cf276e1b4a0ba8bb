"""Synthetic series generation, normalization, featurization, and CSV I/O.

A raw example is a short monthly series ``z = (z_1, ..., z_T)`` with the
next value ``z_{T+1}`` as the prediction target. Features are the
normalized series plus its raw mean and standard deviation, so the model
sees shape and can still recover the monetary scale.

The generator produces series from four pattern families (periodic,
spikes, trend, noise) and corrupts them with Laplace noise whose scale
follows a configured law. The true per-series scale is recorded, which
is what makes uncertainty estimates testable: generated data comes with
its own ground truth.

Pattern draws and noise draws come from separate seeded streams, so the
underlying patterns are identical across noise laws for a fixed seed. A
zero-noise run therefore reveals the exact pattern a noisy run was built
on.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ConfigError

__all__ = [
    "DEFAULT_STD_THRESHOLD",
    "FAMILIES",
    "Dataset",
    "Example",
    "FeatureVector",
    "GeneratorConfig",
    "RawSeries",
    "center_scale_normalize",
    "feature_matrix",
    "featurize",
    "generate_synthetic",
    "make_dataset",
    "read_series_csv",
    "split",
    "write_series_csv",
]

DEFAULT_STD_THRESHOLD = 1e-6

FAMILIES = ("periodic", "spikes", "trend", "noise")

NOISE_LAWS = ("constant", "uniform", "amplitude_linear")

SPLIT_TAGS = ("train", "validation", "test")


@dataclass(frozen=True)
class RawSeries:
    """One observed window plus its target (the next value).

    ``true_scale`` is the ground-truth Laplace noise scale when the
    series is synthetic, ``None`` for external data.
    """

    values: np.ndarray
    target: float
    true_scale: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "target", float(self.target))
        if values.ndim != 1 or values.size < 2:
            raise ValueError("series needs at least 2 values")
        if not np.all(np.isfinite(values)) or not np.isfinite(self.target):
            raise ValueError("series values and target must be finite")
        if self.true_scale is not None:
            scale = float(self.true_scale)
            if not np.isfinite(scale) or scale < 0.0:
                raise ValueError("true_scale must be finite and nonnegative")
            object.__setattr__(self, "true_scale", scale)

    @property
    def length(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class FeatureVector:
    """Normalized series values plus the raw mean and std attributes."""

    normalized: np.ndarray
    mean: float
    std: float

    def __post_init__(self):
        object.__setattr__(self, "normalized", np.asarray(self.normalized, dtype=np.float64))
        if self.std < 0.0:
            raise ValueError("std must be nonnegative")

    def flatten(self) -> np.ndarray:
        """Full model input: T normalized values, then mean, then std."""
        return np.concatenate([self.normalized, [self.mean, self.std]])


@dataclass(frozen=True)
class Example:
    features: FeatureVector
    target: float
    raw: RawSeries


@dataclass(frozen=True)
class Dataset:
    examples: tuple[Example, ...]
    split_tag: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        if self.split_tag not in SPLIT_TAGS:
            raise ValueError(f"unknown split tag {self.split_tag!r}")

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)


def center_scale_normalize(z, std_threshold: float = DEFAULT_STD_THRESHOLD) -> np.ndarray:
    """Center a series by its mean; divide by the std when std >= std_threshold.

    Uses the population (divide-by-T) standard deviation. Below the
    threshold the series is only centered, so near-constant series do
    not blow up.
    """
    if std_threshold <= 0.0:
        raise ValueError("std_threshold must be positive")
    z = np.asarray(z, dtype=np.float64)
    if z.size < 2:
        raise ValueError("series needs at least 2 values")
    centered = z - z.mean()
    std = float(z.std())
    return centered / std if std >= std_threshold else centered


def featurize(series: RawSeries, std_threshold: float = DEFAULT_STD_THRESHOLD) -> FeatureVector:
    """Build the model input (normalized values, raw mean, raw std)."""
    z = series.values
    return FeatureVector(
        normalized=center_scale_normalize(z, std_threshold),
        mean=float(z.mean()),
        std=float(z.std()),
    )


def make_dataset(
    series: Iterable[RawSeries],
    std_threshold: float = DEFAULT_STD_THRESHOLD,
    split_tag: str = "train",
) -> Dataset:
    examples = tuple(
        Example(features=featurize(s, std_threshold), target=s.target, raw=s) for s in series
    )
    return Dataset(examples=examples, split_tag=split_tag)


def feature_matrix(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Stack a dataset into (X, y) arrays of shape (N, T+2) and (N,)."""
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    x = np.stack([ex.features.flatten() for ex in dataset.examples])
    y = np.array([ex.target for ex in dataset.examples], dtype=np.float64)
    return x, y


# -- synthetic generation ----------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    """Validated description of a synthetic dataset.

    ``families`` maps family name to series count. ``noise`` is one of
      {"law": "constant", "scale": b}
      {"law": "uniform", "low": b_lo, "high": b_hi}        per-series b ~ U
      {"law": "amplitude_linear", "low": b_lo, "high": b_hi}
    where amplitude_linear maps a series' amplitude affinely from the
    amplitude range onto [b_lo, b_hi], tying noise to magnitude.
    """

    families: dict[str, int]
    series_length: int = 24
    amplitude_range: tuple[float, float] = (10.0, 100.0)
    noise: dict = field(default_factory=lambda: {"law": "constant", "scale": 1.0})
    seed: int = 0
    schema_version: int = 1

    _FIELDS = (
        "families",
        "series_length",
        "amplitude_range",
        "noise",
        "seed",
        "schema_version",
    )

    def __post_init__(self):
        if self.schema_version != 1:
            raise ConfigError(f"unsupported schema_version {self.schema_version!r}")
        if not self.families:
            raise ConfigError("families must name at least one pattern family")
        for name, count in self.families.items():
            if name not in FAMILIES:
                raise ConfigError(f"unknown family {name!r}, expected one of {FAMILIES}")
            if not isinstance(count, int) or count <= 0:
                raise ConfigError(f"family count must be a positive integer, got {name}={count!r}")
        if self.series_length < 2:
            raise ConfigError("series_length must be at least 2")
        lo, hi = self.amplitude_range
        if not (0.0 < lo <= hi):
            raise ConfigError("amplitude_range must satisfy 0 < low <= high")
        object.__setattr__(self, "amplitude_range", (float(lo), float(hi)))
        self._validate_noise()

    def _validate_noise(self):
        noise = self.noise
        law = noise.get("law")
        if law not in NOISE_LAWS:
            raise ConfigError(f"unknown noise law {law!r}, expected one of {NOISE_LAWS}")
        number = (int, float)
        if law == "constant":
            keys, scale = {"law", "scale"}, noise.get("scale")
            if not isinstance(scale, number) or scale < 0.0:
                raise ConfigError("constant noise needs scale >= 0")
        else:
            keys = {"law", "low", "high"}
            lo, hi = noise.get("low"), noise.get("high")
            if not (isinstance(lo, number) and isinstance(hi, number)):
                raise ConfigError(f"{law} noise needs numeric low and high")
            if law == "uniform" and not 0.0 <= lo <= hi:
                raise ConfigError("uniform noise needs 0 <= low <= high")
            if law == "amplitude_linear":
                # low maps to the smallest amplitude, high to the largest;
                # low > high (noise shrinking with magnitude) is legitimate
                if lo < 0.0 or hi < 0.0:
                    raise ConfigError("amplitude_linear noise needs nonnegative low and high")
                if self.amplitude_range[0] == self.amplitude_range[1]:
                    raise ConfigError("amplitude_linear noise needs a non-degenerate amplitude_range")
        extra = set(noise) - keys
        if extra:
            raise ConfigError(f"unknown noise keys {sorted(extra)}")

    @classmethod
    def from_dict(cls, raw: dict) -> "GeneratorConfig":
        if not isinstance(raw, dict):
            raise ConfigError("generator config must be a JSON object")
        extra = set(raw) - set(cls._FIELDS)
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        kwargs = dict(raw)
        if "amplitude_range" in kwargs:
            rng = kwargs["amplitude_range"]
            if not isinstance(rng, (list, tuple)) or len(rng) != 2:
                raise ConfigError("amplitude_range must be a [low, high] pair")
            kwargs["amplitude_range"] = (float(rng[0]), float(rng[1]))
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "GeneratorConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "families": dict(self.families),
            "series_length": self.series_length,
            "amplitude_range": list(self.amplitude_range),
            "noise": dict(self.noise),
            "seed": self.seed,
        }


def _pattern(family: str, amplitude: float, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Deterministic shape of one series over steps 1..n_steps."""
    t = np.arange(1, n_steps + 1, dtype=np.float64)
    if family == "periodic":
        phase = rng.integers(0, 12)
        return amplitude + 0.5 * amplitude * np.sin(2.0 * np.pi * (t + phase) / 12.0)
    if family == "spikes":
        spikes = rng.random(n_steps) < 0.1
        heights = amplitude * rng.uniform(2.0, 4.0, size=n_steps)
        return amplitude + np.where(spikes, heights, 0.0)
    if family == "trend":
        slope = amplitude * rng.uniform(-1.0, 1.0) / n_steps
        return amplitude + slope * t
    if family == "noise":
        return np.full(n_steps, amplitude)
    raise ValueError(f"unknown family {family!r}")


def _noise_scale(config: GeneratorConfig, amplitude: float, rng: np.random.Generator) -> float:
    noise = config.noise
    if noise["law"] == "constant":
        return float(noise["scale"])
    if noise["law"] == "uniform":
        return float(rng.uniform(noise["low"], noise["high"]))
    amp_lo, amp_hi = config.amplitude_range
    frac = (amplitude - amp_lo) / (amp_hi - amp_lo)
    return float(noise["low"] + (noise["high"] - noise["low"]) * frac)


def generate_synthetic(config: GeneratorConfig, seed: int | None = None) -> list[RawSeries]:
    """Draw the configured families, in canonical family order.

    Each series gets two independent seeded streams: one for its
    pattern, one for its noise. Patterns are therefore stable across
    noise-law changes. ``seed`` overrides ``config.seed`` when given.
    """
    base_seed = config.seed if seed is None else seed
    n_steps = config.series_length + 1  # window plus the target step
    out: list[RawSeries] = []
    index = 0
    for family in FAMILIES:
        for _ in range(config.families.get(family, 0)):
            pattern_rng = np.random.default_rng(np.random.SeedSequence([base_seed, index, 0]))
            noise_rng = np.random.default_rng(np.random.SeedSequence([base_seed, index, 1]))
            amplitude = float(pattern_rng.uniform(*config.amplitude_range))
            pattern = _pattern(family, amplitude, n_steps, pattern_rng)
            scale = _noise_scale(config, amplitude, noise_rng)
            z = pattern + scale * noise_rng.laplace(0.0, 1.0, size=n_steps)
            out.append(
                RawSeries(values=z[:-1], target=float(z[-1]), true_scale=scale)
            )
            index += 1
    return out


def split(dataset: Dataset, validation_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded disjoint train/validation split of one dataset.

    Split sizes are within one example of the exact fraction, and both
    sides are nonempty (which needs at least 2 examples).
    """
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation_fraction must be in (0, 1)")
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least 2 examples to split")
    n_val = int(round(n * validation_fraction))
    n_val = min(max(n_val, 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    val_idx = set(order[:n_val].tolist())
    train = tuple(ex for i, ex in enumerate(dataset.examples) if i not in val_idx)
    val = tuple(dataset.examples[i] for i in order[:n_val])
    return (
        Dataset(examples=train, split_tag="train"),
        Dataset(examples=val, split_tag="validation"),
    )


# -- CSV I/O -----------------------------------------------------------------


def write_series_csv(series: Sequence[RawSeries], path) -> None:
    """One series per row: T value columns, target, then true_scale if known.

    Floats are written with repr so files round-trip exactly and
    identical data produces byte-identical files.
    """
    if not series:
        raise ValueError("nothing to write")
    length = series[0].length
    if any(s.length != length for s in series):
        raise ValueError("all series must share one length")
    with_scale = all(s.true_scale is not None for s in series)
    header = [f"value_{i}" for i in range(1, length + 1)] + ["target"]
    if with_scale:
        header.append("true_scale")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for s in series:
            row = [repr(float(v)) for v in s.values] + [repr(s.target)]
            if with_scale:
                row.append(repr(s.true_scale))
            writer.writerow(row)


def read_series_csv(path) -> list[RawSeries]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty, expected a header row") from None
        if "target" not in header:
            raise ValueError(f"{path} has no 'target' column")
        target_col = header.index("target")
        if target_col < 2:
            raise ValueError("need at least 2 value columns before 'target'")
        with_scale = "true_scale" in header
        out = []
        for row in reader:
            values = np.array([float(v) for v in row[:target_col]])
            scale = float(row[header.index("true_scale")]) if with_scale else None
            out.append(RawSeries(values=values, target=float(row[target_col]), true_scale=scale))
    return out
