"""Community-health measures: citation/quality correlation, churn and Gini."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

TOP_GROUP_FRACTION = 40 / 600
MID_GROUP_FRACTION = 150 / 600


class InvalidInputError(ValueError):
    pass


@dataclass(frozen=True)
class MetricSnapshot:
    timestep: int
    correlation: float | None
    churn: int | None
    gini: float


@dataclass(frozen=True)
class SlotDecomposition:
    frac_substantive_top40: float
    frac_substantive_41_150: float
    frac_rhetorical_top40: float
    frac_rhetorical_41_150: float
    frac_other: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def pearson(x, y) -> float | None:
    """Pearson correlation, or ``None`` when either vector is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError(f"pearson needs equal-length 1-d vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise InvalidInputError("pearson needs at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def gini(values) -> float:
    """Gini coefficient via the sorted-rank identity; an all-zero vector gives 0."""
    xs = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise InvalidInputError("gini needs a nonempty 1-d vector")
    if np.any(xs < 0):
        raise InvalidInputError("gini is undefined for negative values")
    total = xs.sum()
    if total == 0:
        return 0.0
    n = xs.size
    xs = np.sort(xs)
    ranks = 2.0 * np.arange(1, n + 1) - n - 1
    return float(max(0.0, (ranks @ xs) / (n * total)))


def churn(prev_refs: Iterable[int], cur_refs: Iterable[int]) -> int:
    """Number of distinct papers cited now that were not cited in the previous step."""
    return len(set(int(i) for i in cur_refs) - set(int(i) for i in prev_refs))


def quality_groups(qualities, n_papers: int | None = None) -> np.ndarray:
    """Label each paper 0 (top group), 1 (mid group) or 2 (rest) by quality rank.

    Cutoffs are 40 and 150 at 600 papers and scale with the literature size.
    """
    q = np.asarray(qualities, dtype=float)
    n = q.size if n_papers is None else n_papers
    top = int(round(TOP_GROUP_FRACTION * n))
    mid = int(round(MID_GROUP_FRACTION * n))
    order = np.lexsort((np.arange(q.size), -q))
    labels = np.full(q.size, 2, dtype=np.int8)
    labels[order[:top]] = 0
    labels[order[top:mid]] = 1
    return labels


def slot_decomposition(trajectory, qualities=None) -> SlotDecomposition:
    """Share of all issued slots by (kind, quality group), pooled over timesteps."""
    if not trajectory.records:
        raise InvalidInputError("slot_decomposition needs a nonempty trajectory")
    q = trajectory.qualities if qualities is None else qualities
    labels = quality_groups(q)
    counts = np.zeros((2, 3), dtype=np.int64)
    for rec in trajectory.records:
        groups = labels[rec.paper_ids]
        np.add.at(counts, (rec.rhetorical.astype(np.int64), groups), 1)
    total = counts.sum()
    if total == 0:
        return SlotDecomposition(0.0, 0.0, 0.0, 0.0, 1.0)
    sub_top, sub_mid, rhe_top, rhe_mid = (
        counts[0, 0] / total,
        counts[0, 1] / total,
        counts[1, 0] / total,
        counts[1, 1] / total,
    )
    other = (counts[0, 2] + counts[1, 2]) / total
    return SlotDecomposition(float(sub_top), float(sub_mid), float(rhe_top), float(rhe_mid), float(other))
