"""JSON configs, CSV outputs and run manifests."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import fields
from pathlib import Path

from citesim import __version__
from citesim.engine import Trajectory
from citesim.model import AgentMode, ConfigError, ModelConfig, Variant
from citesim.rng import InvalidParameterError, distribution_from_dict

SERIES_HEADER = ("t", "correlation", "churn", "gini")
COUNTS_HEADER = ("paper_id", "quality", "citations")
SWEEP_HEADER = ("variant", "axis", "value", "seed", "end_correlation", "mean_churn", "end_gini")
INTERVALS_HEADER = ("variant", "axis", "value", "metric", "mean", "ci_lo", "ci_hi")
DECOMPOSITION_HEADER = (
    "variant",
    "seed",
    "frac_substantive_top40",
    "frac_substantive_41_150",
    "frac_rhetorical_top40",
    "frac_rhetorical_41_150",
    "frac_other",
)

CONFIG_KEYS = tuple(f.name for f in fields(ModelConfig))
_DIST_KEYS = {"quality_dist", "rhetorical_dist", "threshold_dist"}


class ConfigParseError(ValueError):
    """The configuration document is not well-formed JSON."""


def fmt(value) -> str:
    """Locale-free number formatting; ``None`` becomes an empty field."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if hasattr(value, "item"):
        value = value.item()
        if isinstance(value, int):
            return str(value)
    return repr(float(value))


def config_to_dict(config: ModelConfig) -> dict:
    out = {}
    for name in CONFIG_KEYS:
        value = getattr(config, name)
        if name in _DIST_KEYS:
            value = value.to_dict()
        elif isinstance(value, (Variant, AgentMode)):
            value = value.value
        out[name] = value
    return out


def serialize_config(config: ModelConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=False)


def config_from_dict(data: dict) -> ModelConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = [k for k in data if k not in CONFIG_KEYS]
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(sorted(unknown))}", tuple(unknown))
    kwargs = {}
    for key, value in data.items():
        try:
            if key in _DIST_KEYS:
                value = distribution_from_dict(value)
            elif key == "variant":
                value = Variant(value)
            elif key == "agent_mode":
                value = AgentMode(value)
        except (InvalidParameterError, ValueError, TypeError) as exc:
            raise ConfigError(f"{key}: {exc}", (key,)) from exc
        kwargs[key] = value
    return ModelConfig(**kwargs)


def parse_config(text: str) -> ModelConfig:
    """Parse a JSON config; absent keys take the model defaults."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"malformed config at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def load_config(path) -> ModelConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _open_csv(path):
    return open(path, "w", newline="", encoding="utf-8")


def counts_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".counts.csv")


def emit_run_csv(trajectory: Trajectory, path) -> None:
    """Write the per-timestep series to ``path`` and the final counts next to it."""
    path = Path(path)
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for r in trajectory.records:
            w.writerow((r.timestep, fmt(r.correlation), fmt(r.churn), fmt(r.gini)))
    with _open_csv(counts_path(path)) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COUNTS_HEADER)
        for i, (q, c) in enumerate(zip(trajectory.qualities, trajectory.citations)):
            w.writerow((i, fmt(q), int(c)))


def read_counts_csv(path) -> tuple[list[float], list[int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["quality"]) for r in rows], [int(r["citations"]) for r in rows]


def read_series_csv(path) -> list[dict]:
    def parse(v, kind):
        return None if v == "" else kind(v)

    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {
                "t": int(r["t"]),
                "correlation": parse(r["correlation"], float),
                "churn": parse(r["churn"], int),
                "gini": float(r["gini"]),
            }
            for r in csv.DictReader(fh)
        ]


def write_sweep_csv(result, path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in result.rows:
            w.writerow(
                (r.variant.value, r.axis, fmt(r.value), r.seed, fmt(r.end_correlation), fmt(r.mean_churn), fmt(r.end_gini))
            )


def write_intervals_csv(result, path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INTERVALS_HEADER)
        for iv in result.intervals:
            w.writerow((iv.variant.value, iv.axis, fmt(iv.value), iv.metric, fmt(iv.mean), fmt(iv.ci_lo), fmt(iv.ci_hi)))


def write_decomposition_csv(rows, path) -> None:
    """``rows`` are (variant, seed, SlotDecomposition) triples."""
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DECOMPOSITION_HEADER)
        for variant, seed, d in rows:
            w.writerow(
                (
                    Variant(variant).value,
                    seed,
                    fmt(d.frac_substantive_top40),
                    fmt(d.frac_substantive_41_150),
                    fmt(d.frac_rhetorical_top40),
                    fmt(d.frac_rhetorical_41_150),
                    fmt(d.frac_other),
                )
            )


def write_manifest(path, config: ModelConfig, seeds, outputs, **extra) -> None:
    manifest = {
        "version": __version__,
        "config": config_to_dict(config),
        "seeds": [int(s) for s in seeds],
        **extra,
        "outputs": sorted(str(p) for p in outputs),
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def read_manifest(path) -> dict:
    manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    manifest["config"] = config_from_dict(manifest["config"])
    return manifest


def write_experiment(result, out_dir) -> list[Path]:
    """Write every file of a named reproduction into ``out_dir``; returns the paths written."""
    from citesim.experiments import summarize

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    exp = result.experiment
    manifest_runs = {}
    for label, by_variant in result.runs.items():
        decomposition_rows = []
        for variant, trajectories in by_variant.items():
            for traj in trajectories:
                path = out_dir / f"{label}_{variant.value}_seed{traj.seed}.csv"
                emit_run_csv(traj, path)
                written += [path, counts_path(path)]
                s = summarize(traj)
                if s.decomposition is not None:
                    decomposition_rows.append((variant, traj.seed, s.decomposition))
        path = out_dir / f"{label}_decomposition.csv"
        write_decomposition_csv(decomposition_rows, path)
        written.append(path)
        first = next(iter(by_variant.values()))[0].config
        manifest_runs[label] = {"config": config_to_dict(first), "variants": [v.value for v in by_variant]}
    manifest_sweeps = {}
    for label, sweep_result in result.sweeps.items():
        spec = sweep_result.spec
        rows_path = out_dir / f"{label}_sweep.csv"
        intervals_path = out_dir / f"{label}_intervals.csv"
        write_sweep_csv(sweep_result, rows_path)
        write_intervals_csv(sweep_result, intervals_path)
        written += [rows_path, intervals_path]
        manifest_sweeps[label] = {
            "config": config_to_dict(spec.base),
            "axis": spec.axis,
            "values": list(spec.values),
            "variants": [v.value for v in spec.variants],
        }
    base = exp.runs[0][1] if exp.runs else exp.sweeps[0][1]
    manifest_path = out_dir / "manifest.json"
    write_manifest(
        manifest_path,
        base,
        result.seeds,
        [p.name for p in written],
        experiment=exp.name,
        description=exp.description,
        runs=manifest_runs,
        sweeps=manifest_sweeps,
    )
    written.append(manifest_path)
    return written


def ensure_dir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror}") from exc
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return path
