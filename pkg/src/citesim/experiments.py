"""Replication, parameter sweeps, bootstrap intervals and the named figure runs."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from citesim import metrics
from citesim.engine import Trajectory, run_simulation
from citesim.model import AgentMode, ModelConfig, Variant
from citesim.rng import BetaOneW, Normal, RandomStream

log = logging.getLogger(__name__)

DEFAULT_SEEDS = tuple(range(10))
DEFAULT_RESAMPLES = 1000
DEFAULT_LEVEL = 0.95
# bootstrap streams live under their own base seed so they never collide with run streams
BOOTSTRAP_BASE_SEED = 0xB0075712A9

SUMMARY_METRICS = ("end_correlation", "mean_churn", "end_gini")


def _set_quality_w(config: ModelConfig, w) -> ModelConfig:
    return config.replace(quality_dist=BetaOneW(float(w)), rhetorical_dist=BetaOneW(float(w)))


AXES: dict[str, Callable[[ModelConfig, float], ModelConfig]] = {
    "citing_budget": lambda c, v: c.replace(citing_budget=int(v)),
    "reading_budget": lambda c, v: c.replace(reading_budget=int(v)),
    "literature_size": lambda c, v: c.replace(literature_size=int(v)),
    "alpha": lambda c, v: c.replace(alpha=float(v)),
    "beta_reinforce": lambda c, v: c.replace(beta_reinforce=float(v)),
    "error_sd": lambda c, v: c.replace(error_sd=float(v)),
    "fit_halfwidth": lambda c, v: c.replace(fit_halfwidth=float(v)),
    "quality_w": _set_quality_w,
}
INTEGER_AXES = {"citing_budget", "reading_budget", "literature_size"}


class SweepError(RuntimeError):
    """A sweep cell failed; ``cell`` identifies (variant, axis value, seed)."""

    def __init__(self, message: str, cell: tuple):
        super().__init__(message)
        self.cell = cell


@dataclass(frozen=True)
class RunSummary:
    end_correlation: float | None
    mean_churn: float | None
    end_gini: float
    decomposition: metrics.SlotDecomposition | None


def summarize(traj: Trajectory) -> RunSummary:
    decomposition = metrics.slot_decomposition(traj) if traj.records else None
    return RunSummary(traj.end_correlation, traj.mean_churn, traj.end_gini, decomposition)


def _summarize_config(config: ModelConfig) -> RunSummary:
    return summarize(run_simulation(config))


def _pool_map(fn, items: list, workers: int | None) -> list:
    """Order-preserving map; results never depend on ``workers``."""
    if workers is None:
        workers = int(os.environ.get("CITESIM_WORKERS", "1"))
    if workers <= 0:
        workers = os.cpu_count() or 1
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def run_replicates(config: ModelConfig, seeds: Sequence[int], workers: int | None = None) -> list[Trajectory]:
    if len(seeds) == 0:
        raise ValueError("run_replicates needs at least one seed")
    configs = [config.replace(seed=int(s)) for s in seeds]
    return _pool_map(run_simulation, configs, workers)


def bootstrap_ci(
    samples, level: float = DEFAULT_LEVEL, resamples: int = DEFAULT_RESAMPLES, stream: RandomStream | None = None
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``samples``."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise metrics.InvalidInputError("bootstrap_ci needs a nonempty 1-d sample")
    if not 0 < level < 1:
        raise metrics.InvalidInputError(f"level must lie in (0, 1), got {level}")
    if resamples < 1:
        raise metrics.InvalidInputError(f"resamples must be >= 1, got {resamples}")
    if stream is None:
        stream = RandomStream(BOOTSTRAP_BASE_SEED, 0)
    idx = stream.generator.integers(0, x.size, size=(resamples, x.size))
    means = x[idx].mean(axis=1)
    tail = (1 - level) / 2
    lo, hi = np.quantile(means, [tail, 1 - tail])
    return float(lo), float(hi)


@dataclass(frozen=True)
class SweepSpec:
    base: ModelConfig
    axis: str
    values: tuple
    seeds: tuple = DEFAULT_SEEDS
    variants: tuple = tuple(Variant)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {sorted(AXES)}")
        values = tuple(int(v) if self.axis in INTEGER_AXES else float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "variants", tuple(Variant(v) for v in self.variants))
        if not values:
            raise ValueError("sweep values must be nonempty")
        diffs = np.diff(values)
        if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError(f"sweep values must be strictly monotone, got {values}")
        if not self.seeds:
            raise ValueError("sweep seeds must be nonempty")
        if not self.variants:
            raise ValueError("sweep needs at least one variant")

    def cell_config(self, variant: Variant, value, seed: int) -> ModelConfig:
        return AXES[self.axis](self.base.replace(variant=variant, seed=seed), value)

    def cells(self) -> list[tuple[Variant, float, int]]:
        return [(v, x, s) for v in self.variants for x in self.values for s in self.seeds]


@dataclass(frozen=True)
class SweepRow:
    variant: Variant
    axis: str
    value: float
    seed: int
    end_correlation: float | None
    mean_churn: float | None
    end_gini: float
    decomposition: metrics.SlotDecomposition | None = None


@dataclass(frozen=True)
class Interval:
    variant: Variant
    axis: str
    value: float
    metric: str
    mean: float | None
    ci_lo: float | None
    ci_hi: float | None


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]
    intervals: list[Interval] = field(default_factory=list)

    def cell(self, variant, value) -> list[SweepRow]:
        variant = Variant(variant)
        return [r for r in self.rows if r.variant is variant and r.value == value]

    def mean(self, variant, value, metric: str) -> float:
        xs = [getattr(r, metric) for r in self.cell(variant, value)]
        xs = [x for x in xs if x is not None]
        return float(np.mean(xs)) if xs else float("nan")

    def interval(self, variant, value, metric: str) -> Interval:
        variant = Variant(variant)
        for iv in self.intervals:
            if iv.variant is variant and iv.value == value and iv.metric == metric:
                return iv
        raise KeyError((variant, value, metric))


def _cell_intervals(spec: SweepSpec, rows: list[SweepRow], resamples: int, level: float) -> list[Interval]:
    out = []
    k = 0
    for variant in spec.variants:
        for value in spec.values:
            cell = [r for r in rows if r.variant is variant and r.value == value]
            for metric in SUMMARY_METRICS:
                k += 1
                xs = [getattr(r, metric) for r in cell if getattr(r, metric) is not None]
                if not xs:
                    out.append(Interval(variant, spec.axis, value, metric, None, None, None))
                    continue
                lo, hi = bootstrap_ci(xs, level, resamples, RandomStream(BOOTSTRAP_BASE_SEED, k))
                out.append(Interval(variant, spec.axis, value, metric, float(np.mean(xs)), lo, hi))
    return out


def sweep(
    spec: SweepSpec,
    workers: int | None = None,
    resamples: int = DEFAULT_RESAMPLES,
    level: float = DEFAULT_LEVEL,
) -> SweepResult:
    cells = spec.cells()
    configs = []
    for variant, value, seed in cells:
        try:
            configs.append(spec.cell_config(variant, value, seed))
        except ValueError as exc:
            raise SweepError(
                f"invalid config for cell variant={variant.value} {spec.axis}={value} seed={seed}: {exc}",
                (variant, value, seed),
            ) from exc
    log.info("sweep %s: %d cells", spec.axis, len(configs))
    summaries = _pool_map(_summarize_config, configs, workers)
    rows = [
        SweepRow(variant, spec.axis, value, seed, s.end_correlation, s.mean_churn, s.end_gini, s.decomposition)
        for (variant, value, seed), s in zip(cells, summaries)
    ]
    return SweepResult(spec, rows, _cell_intervals(spec, rows, resamples, level))


# -- named reproductions ----------------------------------------------------

CITING_GRID = tuple(range(20, 101, 10))
READING_GRID = tuple(range(50, 151, 10))
LITERATURE_GRID = tuple(range(200, 801, 100))
BETA_VALUES = (0.0, 0.3, 1.0)


@dataclass(frozen=True)
class Experiment:
    """One figure: either single runs at ``base`` or sweeps over ``axis``.

    ``sweeps`` maps an output label to (base config, axis, values, variants).
    """

    name: str
    description: str
    runs: tuple = ()
    sweeps: tuple = ()


def _citing_sweep(label: str, base: ModelConfig, variants=tuple(Variant)):
    return (label, base, "citing_budget", CITING_GRID, tuple(variants))


def _experiments() -> dict[str, Experiment]:
    d = ModelConfig()
    three = tuple(Variant)
    homog = d.replace(agent_mode=AgentMode.HOMOGENEOUS)
    return {
        e.name: e
        for e in [
            Experiment("fig2", "three variants at the default parameters", runs=(("default", d, three),)),
            Experiment("fig3", "citing budget 20 to 100", sweeps=(_citing_sweep("citing_budget", d),)),
            Experiment(
                "fig4", "reading budget 50 to 150", sweeps=(("reading_budget", d, "reading_budget", READING_GRID, three),)
            ),
            Experiment(
                "fig5",
                "literature size 200 to 800",
                sweeps=(("literature_size", d, "literature_size", LITERATURE_GRID, three),),
            ),
            Experiment("s2", "quality and rhetorical values Beta(1,4)", sweeps=(_citing_sweep("citing_budget", _set_quality_w(d, 4)),)),
            Experiment("s3", "quality and rhetorical values Beta(1,8)", sweeps=(_citing_sweep("citing_budget", _set_quality_w(d, 8)),)),
            Experiment(
                "s4",
                "quality and rhetorical values N(0.5, 0.1) on [0, 1]",
                sweeps=(
                    _citing_sweep(
                        "citing_budget",
                        d.replace(quality_dist=Normal(0.5, 0.1, (0.0, 1.0)), rhetorical_dist=Normal(0.5, 0.1, (0.0, 1.0))),
                    ),
                ),
            ),
            Experiment(
                "s5",
                "thresholds N(0.5, 0.2) on [0, 1]",
                sweeps=(_citing_sweep("citing_budget", d.replace(threshold_dist=Normal(0.5, 0.2, (0.0, 1.0)))),),
            ),
            Experiment("s6", "perception error sd 0.1", sweeps=(_citing_sweep("citing_budget", d.replace(error_sd=0.1)),)),
            Experiment("s7", "perception error sd 0.02", sweeps=(_citing_sweep("citing_budget", d.replace(error_sd=0.02)),)),
            Experiment("s8", "fit Uniform(-0.05, 0.05)", sweeps=(_citing_sweep("citing_budget", d.replace(fit_halfwidth=0.05)),)),
            Experiment("s9", "fit Uniform(-0.2, 0.2)", sweeps=(_citing_sweep("citing_budget", d.replace(fit_halfwidth=0.2)),)),
            Experiment("s10", "no citation reinforcement (alpha = 0)", sweeps=(_citing_sweep("citing_budget", d.replace(alpha=0.0)),)),
            Experiment(
                "s11_alpha0",
                "stronger citation reinforcement (alpha = 0.002)",
                sweeps=(_citing_sweep("citing_budget", d.replace(alpha=0.002)),),
            ),
            Experiment(
                "s11_beta",
                "full model at beta in {0, 0.3, 1}",
                sweeps=(("beta_reinforce", d, "beta_reinforce", BETA_VALUES, (Variant.FULL,)),)
                + tuple(
                    _citing_sweep(f"citing_budget_beta{b:g}", d.replace(beta_reinforce=b), (Variant.FULL,))
                    for b in BETA_VALUES
                ),
            ),
            Experiment(
                "s12_s13_homogeneous",
                "homogeneous agents",
                runs=(("homogeneous", homog, three),),
                sweeps=(_citing_sweep("citing_budget", homog),),
            ),
        ]
    }


EXPERIMENTS = _experiments()


class UnknownExperimentError(KeyError):
    def __str__(self) -> str:
        return f"unknown experiment {self.args[0]!r}; valid names: {', '.join(EXPERIMENTS)}"


@dataclass
class ExperimentResult:
    experiment: Experiment
    seeds: tuple
    runs: dict = field(default_factory=dict)  # label -> {variant: [Trajectory]}
    sweeps: dict = field(default_factory=dict)  # label -> SweepResult


def reproduce_named(
    name: str,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    workers: int | None = None,
    resamples: int = DEFAULT_RESAMPLES,
) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise UnknownExperimentError(name)
    exp = EXPERIMENTS[name]
    seeds = tuple(int(s) for s in seeds)
    result = ExperimentResult(exp, seeds)
    for label, base, variants in exp.runs:
        result.runs[label] = {v: run_replicates(base.replace(variant=v), seeds, workers) for v in variants}
    for label, base, axis, values, variants in exp.sweeps:
        spec = SweepSpec(base, axis, values, seeds, variants)
        result.sweeps[label] = sweep(spec, workers, resamples)
    return result
