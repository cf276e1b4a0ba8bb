"""Command line pipeline: generate, train, evaluate, cluster.

Every command is deterministic given its config and seeds, and re-running
one overwrites its outputs with identical bytes. The CLI renders no
plots; it writes tidy CSV/JSON artifacts for external tools.

Output locations come from ``--out`` or, when that is omitted, the
``FORECAST_UQ_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cluster import kmeans
from .data import (
    DEFAULT_STD_THRESHOLD,
    GeneratorConfig,
    center_scale_normalize,
    feature_matrix,
    generate_synthetic,
    make_dataset,
    read_series_csv,
    write_series_csv,
)
from .exceptions import ConfigError, ShapeError, TrainingError
from .models import (
    BACKBONES,
    BASELINES,
    UNCERTAINTIES,
    ModelSpec,
    TrainConfig,
    baseline_predict,
    build,
    input_variance_score,
    load_checkpoint,
    mc_dropout_predict,
    predict,
    save_checkpoint,
    train,
)
from .selective import (
    KEEP_GRID,
    error_keep_curve,
    error_score_correlation,
    keep_grid_readout,
    make_records,
    write_curve_csv,
    write_matrix_json,
    write_scatter_csv,
)

__all__ = [
    "OUT_ENV_VAR",
    "RunConfig",
    "cmd_cluster",
    "cmd_evaluate",
    "cmd_generate",
    "cmd_train",
    "main",
]

OUT_ENV_VAR = "FORECAST_UQ_OUT"
DEFAULT_SEEDS = (0, 1, 2, 3, 4, 5)

DEFAULT_GENERATOR = GeneratorConfig(
    families={"periodic": 250, "spikes": 250, "trend": 250, "noise": 250},
    series_length=24,
    amplitude_range=(10.0, 100.0),
    noise={"law": "uniform", "low": 1.0, "high": 10.0},
    seed=0,
)


@dataclass(frozen=True)
class RunConfig:
    """Command parameters beyond file paths, loadable from one JSON doc.

    ``models`` is the training grid as (backbone, uncertainty) pairs; an
    empty grid means every combination. Evaluation-only fields are
    ignored by train and vice versa.
    """

    schema_version: int = 1
    models: tuple[tuple[str, str], ...] = ()
    train: TrainConfig = TrainConfig()
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    desk: bool = False
    mc_samples: int = 50
    curve_points: int = 50
    scatter_rows: int = 10000
    k: int = 16
    std_threshold: float = DEFAULT_STD_THRESHOLD

    def __post_init__(self):
        if self.schema_version != 1:
            raise ConfigError(f"unsupported schema_version {self.schema_version!r}")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        for backbone, uncertainty in self.models:
            if backbone not in BACKBONES or uncertainty not in UNCERTAINTIES:
                raise ConfigError(f"unknown model ({backbone!r}, {uncertainty!r})")
        if self.mc_samples < 2:
            raise ConfigError("mc_samples must be at least 2")
        if self.curve_points < 2:
            raise ConfigError("curve_points must be at least 2")
        if self.scatter_rows < 1:
            raise ConfigError("scatter_rows must be positive")
        if self.k < 1:
            raise ConfigError("k must be positive")

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("run config must be a JSON object")
        allowed = {
            "schema_version", "models", "train", "seeds", "desk",
            "mc_samples", "curve_points", "scatter_rows", "k", "std_threshold",
        }
        extra = set(raw) - allowed
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        kwargs = dict(raw)
        if "models" in kwargs:
            models = kwargs["models"]
            if not isinstance(models, list):
                raise ConfigError("models must be a list of {backbone, uncertainty} objects")
            pairs = []
            for entry in models:
                if not isinstance(entry, dict) or set(entry) != {"backbone", "uncertainty"}:
                    raise ConfigError(f"bad model entry {entry!r}")
                pairs.append((entry["backbone"], entry["uncertainty"]))
            kwargs["models"] = tuple(pairs)
        if "train" in kwargs:
            if not isinstance(kwargs["train"], dict):
                raise ConfigError("train must be an object of training fields")
            try:
                kwargs["train"] = TrainConfig(**kwargs["train"])
            except TypeError as exc:
                raise ConfigError(f"bad train section: {exc}") from None
        if "seeds" in kwargs:
            kwargs["seeds"] = tuple(int(s) for s in kwargs["seeds"])
        return cls(**kwargs)


# -- generate -----------------------------------------------------------------


def cmd_generate(config: GeneratorConfig, out_path) -> None:
    series = generate_synthetic(config)
    write_series_csv(series, out_path)
    print(f"wrote {len(series)} series to {out_path}")


# -- train --------------------------------------------------------------------


def _checkpoint_stem(spec: ModelSpec, seed: int) -> str:
    return f"{spec.backbone}_{spec.uncertainty}_seed{seed}"


def _train_job(spec_dict: dict, train_dict: dict, data_path: str, std_threshold: float, out_dir: str) -> str:
    """One (model, seed) training run; module-level so jobs can fork."""
    spec_dict = dict(spec_dict)
    spec_dict["layer_sizes"] = tuple(spec_dict["layer_sizes"])
    spec = ModelSpec(**spec_dict)
    config = TrainConfig(**train_dict)
    dataset = make_dataset(read_series_csv(data_path), std_threshold)
    model = build(spec, seed=config.seed)
    model, history = train(model, dataset, config)
    stem = _checkpoint_stem(spec, config.seed)
    save_checkpoint(model, os.path.join(out_dir, stem + ".ckpt.json"), config)
    history_doc = {"schema_version": 1, **history}
    with open(os.path.join(out_dir, stem + ".history.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(history_doc, sort_keys=True, indent=2) + "\n")
    return stem


def cmd_train(run: RunConfig, data_path, out_dir, jobs: int = 1) -> list[str]:
    series = read_series_csv(data_path)
    input_dim = series[0].length + 2
    grid = run.models or tuple((b, u) for b in BACKBONES for u in UNCERTAINTIES)
    os.makedirs(out_dir, exist_ok=True)

    job_args = []
    for backbone, uncertainty in grid:
        spec = ModelSpec.default(backbone, uncertainty, input_dim, desk=run.desk)
        for seed in run.seeds:
            config = replace(run.train, seed=seed)
            job_args.append(
                (spec.to_dict(), config.to_dict(), str(data_path), run.std_threshold, str(out_dir))
            )

    stems = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for stem in pool.map(_train_job, *zip(*job_args)):
                stems.append(stem)
                print(f"trained {stem}")
    else:
        for args in job_args:
            stem = _train_job(*args)
            stems.append(stem)
            print(f"trained {stem}")
    return stems


# -- evaluate -----------------------------------------------------------------


def _load_checkpoints(checkpoints_dir, seeds_filter=None):
    """Group checkpoint models as {(backbone, uncertainty): {seed: model}}."""
    groups: dict[tuple[str, str], dict[int, object]] = {}
    names = sorted(os.listdir(checkpoints_dir))
    for name in names:
        if not name.endswith(".ckpt.json"):
            continue
        model = load_checkpoint(os.path.join(checkpoints_dir, name))
        if seeds_filter is not None and model.seed not in seeds_filter:
            continue
        key = (model.spec.backbone, model.spec.uncertainty)
        by_seed = groups.setdefault(key, {})
        if model.seed in by_seed:
            raise ConfigError(f"duplicate checkpoint for {key} seed {model.seed}")
        by_seed[model.seed] = model
    return groups


def _model_scores(model, x, y, var_scores, run: RunConfig):
    """Yield (score_name, records) for every score this model supports."""
    if model.spec.uncertainty == "mc_dropout":
        y_hat, mc_std = mc_dropout_predict(model, x, run.mc_samples, seed=model.seed)
        yield "mc_std", make_records(y, y_hat, mc_std)
    else:
        y_hat, scales = predict(model, x)
        if model.spec.uncertainty == "heteroscedastic":
            yield "predicted_scale", make_records(y, y_hat, scales)
    yield "input_variance", make_records(y, y_hat, var_scores)


def cmd_evaluate(run: RunConfig, checkpoints_dir, data_path, out_dir, seeds_filter=None) -> dict:
    dataset = make_dataset(read_series_csv(data_path), run.std_threshold)
    x, y = feature_matrix(dataset)
    var_scores = np.array([input_variance_score(ex.raw) for ex in dataset.examples])
    os.makedirs(out_dir, exist_ok=True)

    rows: dict[str, dict[float, dict]] = {}
    het_records: dict[str, dict[int, list]] = {}

    groups = _load_checkpoints(checkpoints_dir, seeds_filter)
    for (backbone, uncertainty), by_seed in sorted(groups.items()):
        per_score: dict[str, dict[int, list]] = {}
        for seed in sorted(by_seed):
            model = by_seed[seed]
            for score_name, records in _model_scores(model, x, y, var_scores, run):
                per_score.setdefault(score_name, {})[seed] = records
        for score_name, by_seed_records in per_score.items():
            row_name = f"{backbone}_{uncertainty}+{score_name}"
            row: dict[float, dict] = {}
            readouts = {
                seed: keep_grid_readout(records) for seed, records in by_seed_records.items()
            }
            for k in KEEP_GRID:
                values = np.array([readouts[seed][k] for seed in sorted(readouts)])
                row[k] = {
                    "mean": float(values.mean()),
                    "std": float(values.std()),
                    "per_seed": {str(seed): readouts[seed][k] for seed in sorted(readouts)},
                }
            rows[row_name] = row
            for seed, records in by_seed_records.items():
                curve = error_keep_curve(records, run.curve_points)
                write_curve_csv(curve, os.path.join(out_dir, f"curve_{row_name}_seed{seed}.csv"))
            if score_name == "predicted_scale":
                het_records[row_name] = by_seed_records

    for kind in BASELINES:
        y_hat = np.array([baseline_predict(kind, ex.raw) for ex in dataset.examples])
        records = make_records(y, y_hat, var_scores)
        row_name = f"baseline_{kind}+input_variance"
        readout = keep_grid_readout(records)
        rows[row_name] = {
            k: {"mean": readout[k], "std": 0.0, "per_seed": {"0": readout[k]}}
            for k in KEEP_GRID
        }
        curve = error_keep_curve(records, run.curve_points)
        write_curve_csv(curve, os.path.join(out_dir, f"curve_{row_name}.csv"))

    matrix_path = os.path.join(out_dir, "matrix.json")
    write_matrix_json(rows, KEEP_GRID, matrix_path)
    print(f"wrote {matrix_path} with {len(rows)} rows")

    if het_records:
        best_row = min(het_records, key=lambda name: rows[name][1.0]["mean"])
        by_seed_records = het_records[best_row]
        best_seed = sorted(by_seed_records)[0]
        records = by_seed_records[best_seed]
        rho, scatter = error_score_correlation(records)
        if len(scatter) > run.scatter_rows:
            rng = np.random.default_rng(best_seed)
            pick = np.sort(rng.choice(len(scatter), size=run.scatter_rows, replace=False))
            scatter = scatter[pick]
        scatter_path = os.path.join(out_dir, "scatter.csv")
        write_scatter_csv(scatter, scatter_path)
        print(
            f"wrote {scatter_path} ({len(scatter)} rows) from {best_row} seed {best_seed}, "
            f"spearman rho {rho:.3f}"
        )
    return rows


# -- cluster ------------------------------------------------------------------


def cmd_cluster(run: RunConfig, data_path, out_dir, seed: int) -> None:
    series = read_series_csv(data_path)
    normalized = np.stack([center_scale_normalize(s.values, run.std_threshold) for s in series])
    result = kmeans(normalized, run.k, seed=seed)
    os.makedirs(out_dir, exist_ok=True)

    length = normalized.shape[1]
    centroids_path = os.path.join(out_dir, "centroids.csv")
    with open(centroids_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["cluster"] + [f"value_{i}" for i in range(1, length + 1)]) + "\n")
        for i, row in enumerate(result.centroids):
            fh.write(",".join([str(i)] + [repr(float(v)) for v in row]) + "\n")

    assignments_path = os.path.join(out_dir, "assignments.csv")
    with open(assignments_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("series_index,cluster\n")
        for i, cluster in enumerate(result.assignments):
            fh.write(f"{i},{int(cluster)}\n")

    summary = {
        "schema_version": 1,
        "k": run.k,
        "seed": seed,
        "inertia": result.inertia,
        "n_iter": result.n_iter,
    }
    with open(os.path.join(out_dir, "cluster_summary.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(f"clustered {len(series)} series into {run.k} groups, inertia {result.inertia:.4f}")


# -- argument plumbing ---------------------------------------------------------


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def _resolve_out(args, kind: str) -> str:
    if args.out:
        return args.out
    env = os.environ.get(OUT_ENV_VAR)
    if env:
        return os.path.join(env, "dataset.csv") if kind == "file" else env
    raise ConfigError(f"no output location: pass --out or set {OUT_ENV_VAR}")


def _run_config(args) -> RunConfig:
    run = RunConfig.from_json(args.config) if args.config else RunConfig()
    if args.seeds:
        run = replace(run, seeds=args.seeds)
    if getattr(args, "desk", False):
        run = replace(run, desk=True)
    return run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forecast-uq",
        description="Uncertainty-aware forecasting pipeline over short series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data_required: bool):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--data", required=data_required, help="dataset CSV")
        p.add_argument("--out", help=f"output location (default from ${OUT_ENV_VAR})")
        p.add_argument("--seeds", type=_parse_seeds, help="comma-separated seed list")
        p.add_argument("--jobs", type=int, default=1, help="parallel training jobs")

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    common(p, data_required=False)
    p.set_defaults(func=_main_generate)

    p = sub.add_parser("train", help="train the model grid on a dataset")
    common(p, data_required=True)
    p.add_argument("--desk", action="store_true", help="small architecture profile")
    p.set_defaults(func=_main_train)

    p = sub.add_parser("evaluate", help="selective-prediction comparison matrix")
    common(p, data_required=True)
    p.add_argument("--checkpoints", required=True, help="directory of .ckpt.json files")
    p.set_defaults(func=_main_evaluate)

    p = sub.add_parser("cluster", help="k-means over normalized series")
    common(p, data_required=True)
    p.set_defaults(func=_main_cluster)
    return parser


def _main_generate(args) -> int:
    config = GeneratorConfig.from_json(args.config) if args.config else DEFAULT_GENERATOR
    if args.seeds:
        config = GeneratorConfig.from_dict({**config.to_dict(), "seed": args.seeds[0]})
    out_path = _resolve_out(args, "file")
    parent = os.path.dirname(out_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    cmd_generate(config, out_path)
    return 0


def _main_train(args) -> int:
    run = _run_config(args)
    cmd_train(run, args.data, _resolve_out(args, "dir"), jobs=args.jobs)
    return 0


def _main_evaluate(args) -> int:
    run = _run_config(args)
    seeds_filter = set(args.seeds) if args.seeds else None
    cmd_evaluate(run, args.checkpoints, args.data, _resolve_out(args, "dir"), seeds_filter)
    return 0


def _main_cluster(args) -> int:
    run = _run_config(args)
    seed = args.seeds[0] if args.seeds else run.seeds[0]
    cmd_cluster(run, args.data, _resolve_out(args, "dir"), seed)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ShapeError, TrainingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
