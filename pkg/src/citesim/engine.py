"""The three-stage citing procedure and the T-step simulation loop.

Each timestep one fresh agent joins: it reads the ``m`` papers it perceives as
best, cites substantively the read papers it judges good enough, and (in the
full model) fills the rest of its reference list rhetorically. Citation counts
then rise by one for every distinct paper it cited.

Random sub-streams: stream 0 draws the literature, stream ``t + 1`` draws the
agent of timestep ``t``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from citesim import metrics
from citesim.model import (
    HOMOGENEOUS_THRESHOLD,
    AgentMode,
    AgentView,
    ModelConfig,
    Paper,
    Variant,
    effective_quality_array,
    perceived_quality_array,
    rhetorical_value_array,
)
from citesim.rng import RandomStream, sample_normal, sample_uniform


class SlotKind(str, enum.Enum):
    SUBSTANTIVE = "substantive"
    RHETORICAL = "rhetorical"


@dataclass(frozen=True)
class CitationSlot:
    paper_id: int
    kind: SlotKind


class Literature:
    """The fixed set of N papers, stored column-wise."""

    def __init__(self, quality, shared_rhetorical_base, citations=None):
        self.quality = np.asarray(quality, dtype=float)
        self.shared_rhetorical_base = np.asarray(shared_rhetorical_base, dtype=float)
        n = self.quality.size
        if self.shared_rhetorical_base.shape != (n,):
            raise ValueError("quality and shared_rhetorical_base must have the same length")
        self.citations = np.zeros(n, dtype=np.int64) if citations is None else np.array(citations, dtype=np.int64)

    @classmethod
    def generate(cls, config: ModelConfig, stream: RandomStream) -> "Literature":
        n = config.literature_size
        quality = np.clip(config.quality_dist.sample(stream, n), 0.0, 1.0)
        rhetorical = np.clip(config.rhetorical_dist.sample(stream, n), 0.0, 1.0)
        return cls(quality, rhetorical)

    def __len__(self) -> int:
        return self.quality.size

    def paper(self, i: int) -> Paper:
        return Paper(int(i), float(self.quality[i]), float(self.shared_rhetorical_base[i]), int(self.citations[i]))

    def papers(self) -> list[Paper]:
        return [self.paper(i) for i in range(len(self))]


@dataclass
class TimestepRecord:
    timestep: int
    paper_ids: np.ndarray
    rhetorical: np.ndarray
    correlation: float | None
    churn: int | None
    gini: float
    reading_set: np.ndarray | None = None

    @property
    def slots(self) -> list[CitationSlot]:
        return [
            CitationSlot(int(p), SlotKind.RHETORICAL if r else SlotKind.SUBSTANTIVE)
            for p, r in zip(self.paper_ids, self.rhetorical)
        ]

    @property
    def snapshot(self) -> metrics.MetricSnapshot:
        return metrics.MetricSnapshot(self.timestep, self.correlation, self.churn, self.gini)


@dataclass
class Trajectory:
    config: ModelConfig
    qualities: np.ndarray
    citations: np.ndarray
    records: list[TimestepRecord] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.seed

    def series(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    @property
    def end_correlation(self) -> float | None:
        return metrics.pearson(self.citations, self.qualities) if self.qualities.size >= 2 else None

    @property
    def end_gini(self) -> float:
        return metrics.gini(self.citations)

    @property
    def mean_churn(self) -> float | None:
        values = [r.churn for r in self.records if r.churn is not None]
        return float(np.mean(values)) if values else None


def build_agent_view(config: ModelConfig, literature: Literature, stream: RandomStream) -> AgentView:
    n = len(literature)
    if config.agent_mode is AgentMode.HOMOGENEOUS:
        threshold = HOMOGENEOUS_THRESHOLD
        fit = np.zeros(n)
        rhetorical_base = literature.shared_rhetorical_base.copy()
    else:
        threshold = float(config.threshold_dist.sample(stream))
        fit = sample_uniform(stream, -config.fit_halfwidth, config.fit_halfwidth, n)
        rhetorical_base = np.clip(config.rhetorical_dist.sample(stream, n), 0.0, 1.0)
    error = sample_normal(stream, 0.0, config.error_sd, size=n)
    return AgentView(threshold, fit, error, rhetorical_base)


def _rank_desc(values, ids=None) -> np.ndarray:
    """Indices (or ``ids``) ordered by descending value, ties by ascending id."""
    if ids is None:
        return np.argsort(-values, kind="stable")
    order = np.lexsort((ids, -values))
    return ids[order]


def _top_k(values, k: int) -> np.ndarray:
    """The ``k`` indices with largest value, descending, ties by ascending index."""
    n = values.size
    if k >= n:
        return _rank_desc(values)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    cutoff = np.partition(values, n - k)[n - k]
    # every index tied with the cutoff stays a candidate so the id tie-break is exact
    candidates = np.flatnonzero(values >= cutoff)
    return _rank_desc(values[candidates], candidates)[:k]


def select_reading_set(literature: Literature, view: AgentView, config: ModelConfig) -> np.ndarray:
    s = perceived_quality_array(literature.quality, view.fit, view.error, literature.citations, config.alpha)
    return _top_k(s, min(config.reading_budget, len(literature)))


def select_substantive(
    reading_set: np.ndarray, view: AgentView, config: ModelConfig, literature: Literature
) -> np.ndarray:
    """Paper ids cited substantively, best first."""
    ids = np.asarray(reading_set, dtype=np.int64)
    q_eff = effective_quality_array(literature.quality[ids], view.fit[ids])
    if config.variant is not Variant.NULL_FIXED_REFERENCE:
        keep = q_eff > view.threshold
        ids, q_eff = ids[keep], q_eff[keep]
    return _rank_desc(q_eff, ids)[: config.citing_budget]


def fill_rhetorical(
    substantive: np.ndarray, literature: Literature, view: AgentView, reading_set: np.ndarray, config: ModelConfig
) -> np.ndarray:
    """Paper ids cited rhetorically, filling the slots substantive citing left open."""
    free = config.citing_budget - len(substantive)
    if free <= 0:
        return np.empty(0, dtype=np.int64)
    has_read = np.zeros(len(literature), dtype=bool)
    has_read[reading_set] = True
    r = rhetorical_value_array(
        view.rhetorical_base,
        literature.quality,
        view.fit,
        view.error,
        literature.citations,
        config.alpha,
        config.beta_reinforce,
        has_read,
    )
    return _top_k(r, free)


def run_timestep(literature: Literature, config: ModelConfig, stream: RandomStream, view: AgentView | None = None):
    """One agent's citing decisions; updates ``literature.citations`` in place.

    Returns ``(paper_ids, rhetorical_mask, reading_set)``.
    """
    if view is None:
        view = build_agent_view(config, literature, stream)
    reading = select_reading_set(literature, view, config)
    substantive = select_substantive(reading, view, config, literature)
    if config.variant is Variant.FULL:
        rhetorical = fill_rhetorical(substantive, literature, view, reading, config)
    else:
        rhetorical = np.empty(0, dtype=np.int64)
    paper_ids = np.concatenate([substantive, rhetorical]).astype(np.int64)
    mask = np.zeros(paper_ids.size, dtype=bool)
    mask[substantive.size :] = True
    literature.citations[np.unique(paper_ids)] += 1
    return paper_ids, mask, reading


def reference_list(paper_ids, rhetorical_mask) -> list[CitationSlot]:
    return [
        CitationSlot(int(p), SlotKind.RHETORICAL if r else SlotKind.SUBSTANTIVE)
        for p, r in zip(paper_ids, rhetorical_mask)
    ]


def run_simulation(config: ModelConfig, *, keep_reading_sets: bool = False) -> Trajectory:
    config.validate()
    root = RandomStream(config.seed, 0)
    literature = Literature.generate(config, root)
    n = len(literature)
    traj = Trajectory(config=config, qualities=literature.quality.copy(), citations=literature.citations)
    prev_cited = None
    for t in range(config.timesteps):
        stream = root.substream(t + 1)
        ids, mask, reading = run_timestep(literature, config, stream)
        cited = np.zeros(n, dtype=bool)
        cited[ids] = True
        churn = None if prev_cited is None else int(np.count_nonzero(cited & ~prev_cited))
        prev_cited = cited
        traj.records.append(
            TimestepRecord(
                timestep=t,
                paper_ids=ids,
                rhetorical=mask,
                correlation=metrics.pearson(literature.citations, literature.quality) if n >= 2 else None,
                churn=churn,
                gini=metrics.gini(literature.citations),
                reading_set=reading if keep_reading_sets else None,
            )
        )
    traj.citations = literature.citations.copy()
    return traj
