"""Selective prediction: trade error against the fraction of forecasts kept.

Given per-sample uncertainty scores (lower = more confident), a model
can decline to answer above a threshold. Sweeping the threshold maps out
an error-vs-keep curve; fixed keep fractions give comparable readouts
across models, and the rank correlation between scores and realized
errors measures whether the scores mean anything at all.

Keeping nothing leaves the error undefined, reported as NaN rather than
0 so an empty selection can never look perfect.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .models import PredictionRecord

__all__ = [
    "KEEP_GRID",
    "CurvePoint",
    "ErrorKeepCurve",
    "error_keep_curve",
    "error_score_correlation",
    "keep_grid_readout",
    "mae_at_keep",
    "mae_at_threshold",
    "make_records",
    "read_curve_csv",
    "write_curve_csv",
    "write_matrix_json",
    "write_scatter_csv",
]

# Fixed readout fractions for side-by-side model tables.
KEEP_GRID = (0.25, 0.41, 0.5, 0.75, 0.995, 1.0)


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    keep_fraction: float
    mae: float  # NaN when nothing is kept
    n_kept: int


@dataclass(frozen=True)
class ErrorKeepCurve:
    points: tuple[CurvePoint, ...]
    n_total: int

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))


def make_records(y_true, y_hat, scores) -> list[PredictionRecord]:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if not y_true.shape == y_hat.shape == scores.shape or y_true.ndim != 1:
        raise ValueError("y_true, y_hat, scores must be equal-length vectors")
    return [
        PredictionRecord(y_hat=float(p), score=float(s), y_true=float(t))
        for t, p, s in zip(y_true, y_hat, scores)
    ]


def _errors_and_scores(records: Sequence[PredictionRecord]) -> tuple[np.ndarray, np.ndarray]:
    if len(records) == 0:
        raise ValueError("records must be nonempty")
    errors = np.array([r.abs_error for r in records])
    scores = np.array([r.score for r in records])
    return errors, scores


def mae_at_threshold(records: Sequence[PredictionRecord], threshold: float) -> tuple[float, float]:
    """MAE over the records with score strictly below threshold.

    Returns (mae, keep_fraction); mae is NaN when the threshold keeps
    nothing.
    """
    errors, scores = _errors_and_scores(records)
    kept = scores < threshold
    n_kept = int(kept.sum())
    if n_kept == 0:
        return math.nan, 0.0
    return float(errors[kept].mean()), n_kept / len(records)


def error_keep_curve(records: Sequence[PredictionRecord], n_points: int = 50) -> ErrorKeepCurve:
    """Sweep thresholds over the observed scores (subsampled to n_points).

    The sweep always ends with an above-maximum threshold, so the last
    point keeps everything and its MAE is the plain MAE.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    errors, scores = _errors_and_scores(records)
    unique = np.unique(scores)
    if len(unique) > n_points - 1:
        pick = np.linspace(0, len(unique) - 1, n_points - 1).round().astype(int)
        unique = unique[np.unique(pick)]
    thresholds = list(unique) + [math.inf]
    points = []
    for threshold in thresholds:
        mae, keep = mae_at_threshold(records, threshold)
        points.append(
            CurvePoint(
                threshold=float(threshold),
                keep_fraction=keep,
                mae=mae,
                n_kept=int(round(keep * len(records))),
            )
        )
    return ErrorKeepCurve(points=tuple(points), n_total=len(records))


def mae_at_keep(records: Sequence[PredictionRecord], k_fraction: float) -> float:
    """MAE of the ceil(k*N) most-confident records.

    Rank-based: any strictly increasing transform of the scores selects
    the same records. Ties keep input order (stable sort).
    """
    if not 0.0 < k_fraction <= 1.0:
        raise ValueError("k_fraction must be in (0, 1]")
    errors, scores = _errors_and_scores(records)
    n_keep = math.ceil(k_fraction * len(records))
    order = np.argsort(scores, kind="stable")
    return float(errors[order[:n_keep]].mean())


def keep_grid_readout(
    records: Sequence[PredictionRecord], grid: Sequence[float] = KEEP_GRID
) -> dict[float, float]:
    return {float(k): mae_at_keep(records, k) for k in grid}


def error_score_correlation(records: Sequence[PredictionRecord]):
    """Spearman rank correlation between |error| and score, plus the pairs.

    Returns (rho, scatter) where scatter is an (N, 2) array of
    (abs_error, score) rows for external plotting. Rho is NaN when
    either side is constant (ranks undefined).
    """
    if len(records) < 3:
        raise ValueError("need at least 3 records for a rank correlation")
    errors, scores = _errors_and_scores(records)
    scatter = np.column_stack([errors, scores])
    if np.all(errors == errors[0]) or np.all(scores == scores[0]):
        return math.nan, scatter
    rho = float(stats.spearmanr(errors, scores).statistic)
    return rho, scatter


# -- file formats ------------------------------------------------------------


def write_curve_csv(curve: ErrorKeepCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "keep_fraction", "mae", "n_kept"])
        for p in curve.points:
            writer.writerow([repr(p.threshold), repr(p.keep_fraction), repr(p.mae), p.n_kept])


def read_curve_csv(path) -> ErrorKeepCurve:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["threshold", "keep_fraction", "mae", "n_kept"]:
            raise ValueError(f"unexpected curve header {header}")
        points = tuple(
            CurvePoint(
                threshold=float(row[0]),
                keep_fraction=float(row[1]),
                mae=float(row[2]),
                n_kept=int(row[3]),
            )
            for row in reader
        )
    if not points:
        raise ValueError(f"{path} has no curve points")
    return ErrorKeepCurve(points=points, n_total=points[-1].n_kept)


def write_scatter_csv(scatter: np.ndarray, path) -> None:
    """(abs_error, score) pairs; consumers typically plot both on log scales."""
    scatter = np.asarray(scatter, dtype=np.float64)
    if scatter.ndim != 2 or scatter.shape[1] != 2:
        raise ValueError(f"scatter must be (N, 2), got {scatter.shape}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["abs_error", "score"])
        for err, score in scatter:
            writer.writerow([repr(float(err)), repr(float(score))])


def write_matrix_json(rows: dict, keep_grid: Sequence[float], path) -> None:
    """Comparison matrix: row name -> {keep K -> {mean, std, per_seed}}.

    Row names identify a (predictor, score) pair, e.g.
    "dense_heteroscedastic+predicted_scale". JSON keys are the grid
    fractions as strings.
    """
    doc = {
        "schema_version": 1,
        "keep_grid": [repr(float(k)) for k in keep_grid],
        "rows": {
            name: {repr(float(k)): cell for k, cell in row.items()}
            for name, row in rows.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
