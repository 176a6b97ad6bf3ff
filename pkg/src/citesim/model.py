"""Domain types and the per-agent perception rules.

The array helpers (``*_array``) operate on whole literatures at once and are
what the engine uses; the scalar functions take a :class:`Paper` and an
:class:`AgentView` and exist for inspection and testing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields

import numpy as np

from citesim.rng import BetaOneW, Distribution, Normal, Uniform


class ConfigError(ValueError):
    """A ModelConfig violates one of its invariants."""

    def __init__(self, message: str, fields: tuple[str, ...] = ()):
        super().__init__(message)
        self.fields = fields


class Variant(str, enum.Enum):
    FULL = "full"
    NULL_FIXED_REFERENCE = "null_fixed_reference"
    NULL_FIXED_THRESHOLD = "null_fixed_threshold"


class AgentMode(str, enum.Enum):
    HETEROGENEOUS = "heterogeneous"
    HOMOGENEOUS = "homogeneous"


HOMOGENEOUS_THRESHOLD = 0.5


@dataclass
class Paper:
    id: int
    quality: float
    shared_rhetorical_base: float
    citations: int = 0


@dataclass
class AgentView:
    threshold: float
    fit: np.ndarray
    error: np.ndarray
    rhetorical_base: np.ndarray


@dataclass(frozen=True)
class ModelConfig:
    literature_size: int = 600
    reading_budget: int = 120
    citing_budget: int = 40
    timesteps: int = 1000
    alpha: float = 0.001
    beta_reinforce: float = 0.3
    quality_dist: Distribution = field(default_factory=lambda: BetaOneW(6.0))
    rhetorical_dist: Distribution = field(default_factory=lambda: BetaOneW(6.0))
    threshold_dist: Distribution = field(default_factory=lambda: Uniform(0.0, 1.0))
    error_sd: float = 0.05
    fit_halfwidth: float = 0.1
    variant: Variant = Variant.FULL
    agent_mode: AgentMode = AgentMode.HETEROGENEOUS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "agent_mode", AgentMode(self.agent_mode))
        self.validate()

    def validate(self) -> None:
        for name in ("literature_size", "reading_budget", "citing_budget", "timesteps", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}", (name,))
        if self.citing_budget <= 0:
            raise ConfigError(f"citing_budget must be > 0, got {self.citing_budget}", ("citing_budget",))
        if self.reading_budget <= 0:
            raise ConfigError(f"reading_budget must be > 0, got {self.reading_budget}", ("reading_budget",))
        if self.literature_size <= 0:
            raise ConfigError(f"literature_size must be > 0, got {self.literature_size}", ("literature_size",))
        if self.reading_budget > self.literature_size:
            raise ConfigError(
                f"reading_budget ({self.reading_budget}) must not exceed literature_size ({self.literature_size})",
                ("reading_budget", "literature_size"),
            )
        if self.timesteps < 0:
            raise ConfigError(f"timesteps must be >= 0, got {self.timesteps}", ("timesteps",))
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}", ("seed",))
        for name in ("alpha", "beta_reinforce", "error_sd", "fit_halfwidth"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be a finite real >= 0, got {value!r}", (name,))
        for name in ("quality_dist", "rhetorical_dist", "threshold_dist"):
            if not isinstance(getattr(self, name), (BetaOneW, Uniform, Normal)):
                raise ConfigError(f"{name} must be a distribution spec", (name,))

    def replace(self, **changes) -> "ModelConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ModelConfig(**values)


# -- vectorized forms -------------------------------------------------------


def effective_quality_array(quality, fit):
    return np.clip(quality + fit, 0.0, 1.0)


def perceived_quality_array(quality, fit, error, citations, alpha: float):
    return np.clip(quality + fit + error, 0.0, 1.0) + alpha * citations


def rhetorical_value_array(rhetorical_base, quality, fit, error, citations, alpha: float, beta: float, has_read):
    """Rhetorical value; where ``has_read`` is true the perception error is dropped."""
    noisy = perceived_quality_array(quality, fit, error, citations, alpha)
    clean = effective_quality_array(quality, fit) + alpha * citations
    return rhetorical_base + beta * np.where(has_read, clean, noisy)


# -- scalar forms -----------------------------------------------------------


def effective_quality(paper: Paper, view: AgentView) -> float:
    """Quality of ``paper`` in the agent's eyes once read: quality plus fit, clamped to [0, 1]."""
    return float(effective_quality_array(paper.quality, view.fit[paper.id]))


def perceived_quality(paper: Paper, view: AgentView, alpha: float) -> float:
    return float(
        perceived_quality_array(paper.quality, view.fit[paper.id], view.error[paper.id], paper.citations, alpha)
    )


def rhetorical_value(paper: Paper, view: AgentView, alpha: float, beta_reinforce: float, has_read: bool) -> float:
    i = paper.id
    return float(
        rhetorical_value_array(
            view.rhetorical_base[i],
            paper.quality,
            view.fit[i],
            view.error[i],
            paper.citations,
            alpha,
            beta_reinforce,
            has_read,
        )
    )
