"""Seeded random streams and the handful of samplers the citing model needs.

Every stream is a numpy ``PCG64`` generator keyed by ``(base_seed, stream_id)``
through :class:`numpy.random.SeedSequence`, so a run is reproducible from its
seed alone and sub-streams never share state.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist
from typing import Union

import numpy as np

MAX_REJECTION_ROUNDS = 10**6
MIN_TRUNCATED_MASS = 1e-12

_UINT64 = 2**64


class InvalidParameterError(ValueError):
    """A sampler was called with parameters outside its domain."""


class RandomStream:
    """A single-owner random stream identified by ``(base_seed, stream_id)``."""

    __slots__ = ("base_seed", "stream_id", "generator")

    def __init__(self, base_seed: int, stream_id: int = 0):
        if not (0 <= base_seed < _UINT64 and 0 <= stream_id < _UINT64):
            raise InvalidParameterError("base_seed and stream_id must be unsigned 64-bit integers")
        self.base_seed = int(base_seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(entropy=self.base_seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def substream(self, stream_id: int) -> "RandomStream":
        """A fresh stream sharing this stream's base seed."""
        return RandomStream(self.base_seed, stream_id)

    def uniform01(self, size=None):
        return self.generator.random(size)

    def __repr__(self) -> str:
        return f"RandomStream(base_seed={self.base_seed}, stream_id={self.stream_id})"


def sample_uniform(stream: RandomStream, lo: float, hi: float, size=None):
    if lo > hi:
        raise InvalidParameterError(f"uniform bounds out of order: lo={lo} > hi={hi}")
    if lo == hi:
        return lo if size is None else np.full(size, float(lo))
    return stream.generator.uniform(lo, hi, size)


def beta_one_w_inverse_cdf(u, w: float):
    """Inverse CDF of Beta(1, w); the CDF is ``1 - (1 - x)**w``."""
    if w <= 0:
        raise InvalidParameterError(f"Beta(1, w) needs w > 0, got {w}")
    return 1.0 - np.power(1.0 - np.asarray(u, dtype=float), 1.0 / w)


def sample_beta_one_w(stream: RandomStream, w: float, size=None):
    if w <= 0:
        raise InvalidParameterError(f"Beta(1, w) needs w > 0, got {w}")
    x = beta_one_w_inverse_cdf(stream.uniform01(size), w)
    return float(x) if size is None else x


def _truncated_mass(mu: float, sd: float, lo: float, hi: float) -> float:
    if sd == 0:
        return 1.0 if lo <= mu <= hi else 0.0
    dist = NormalDist(mu, sd)
    return dist.cdf(hi) - dist.cdf(lo)


def sample_normal(stream: RandomStream, mu: float, sd: float, bounds=None, size=None):
    """Normal draws, optionally truncated to ``bounds`` by rejection."""
    if sd < 0:
        raise InvalidParameterError(f"normal sd must be >= 0, got {sd}")
    if bounds is None:
        if sd == 0:
            return float(mu) if size is None else np.full(size, float(mu))
        return stream.generator.normal(mu, sd, size)

    lo, hi = bounds
    if not lo < hi:
        raise InvalidParameterError(f"truncation bounds out of order: {bounds}")
    if _truncated_mass(mu, sd, lo, hi) < MIN_TRUNCATED_MASS:
        raise InvalidParameterError(f"truncation interval {bounds} has negligible mass under N({mu}, {sd})")
    if sd == 0:
        return float(mu) if size is None else np.full(size, float(mu))

    count = 1 if size is None else int(np.prod(size))
    out = stream.generator.normal(mu, sd, count)
    bad = (out < lo) | (out > hi)
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > MAX_REJECTION_ROUNDS:
            raise InvalidParameterError(f"rejection sampling for N({mu}, {sd}) on {bounds} did not converge")
        k = int(bad.sum())
        out[bad] = stream.generator.normal(mu, sd, k)
        bad = (out < lo) | (out > hi)
    return float(out[0]) if size is None else out.reshape(size)


@dataclass(frozen=True)
class BetaOneW:
    w: float = 6.0
    kind = "beta_one_w"

    def __post_init__(self):
        if not self.w > 0:
            raise InvalidParameterError(f"Beta(1, w) needs w > 0, got {self.w}")

    def sample(self, stream: RandomStream, size=None):
        return sample_beta_one_w(stream, self.w, size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "w": self.w}


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if self.lo > self.hi:
            raise InvalidParameterError(f"uniform bounds out of order: lo={self.lo} > hi={self.hi}")

    def sample(self, stream: RandomStream, size=None):
        return sample_uniform(stream, self.lo, self.hi, size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sd: float = 1.0
    truncate: tuple[float, float] | None = None
    kind = "normal"

    def __post_init__(self):
        if self.sd < 0:
            raise InvalidParameterError(f"normal sd must be >= 0, got {self.sd}")
        if self.truncate is not None:
            lo, hi = self.truncate
            object.__setattr__(self, "truncate", (float(lo), float(hi)))
            if not lo < hi:
                raise InvalidParameterError(f"truncation bounds out of order: {self.truncate}")
            if _truncated_mass(self.mu, self.sd, lo, hi) < MIN_TRUNCATED_MASS:
                raise InvalidParameterError(f"truncation interval {self.truncate} has negligible mass")

    def sample(self, stream: RandomStream, size=None):
        return sample_normal(stream, self.mu, self.sd, self.truncate, size)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "mu": self.mu, "sd": self.sd}
        if self.truncate is not None:
            d["truncate"] = list(self.truncate)
        return d


Distribution = Union[BetaOneW, Uniform, Normal]

_KINDS = {"beta_one_w": BetaOneW, "uniform": Uniform, "normal": Normal}


def distribution_from_dict(spec: dict) -> Distribution:
    """Build a distribution from its tagged-object form, e.g. ``{"kind": "beta_one_w", "w": 6}``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidParameterError(f"distribution spec must be an object with a 'kind' key, got {spec!r}")
    params = dict(spec)
    kind = params.pop("kind")
    if kind not in _KINDS:
        raise InvalidParameterError(f"unknown distribution kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls = _KINDS[kind]
    allowed = set(cls.__dataclass_fields__)
    extra = set(params) - allowed
    if extra:
        raise InvalidParameterError(f"unknown keys for {kind!r} distribution: {sorted(extra)}")
    if kind == "normal" and params.get("truncate") is not None:
        params["truncate"] = tuple(params["truncate"])
    return cls(**params)
