"""Cost models and reproducible cost generation.

Every replication ``r`` of a run with master seed ``s`` owns a fixed window
of a Philox stream keyed by ``s``: ``4 * ceil(m / 4)`` raw 64-bit words for
``m`` items, starting at word ``r * 4 * ceil(m / 4)``.  Costs come from those
words through the inverse CDF, so the cost vector of ``(s, r)`` does not
depend on block sizes, thread counts or which other replications ran.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

_TWO53 = float(2 ** 53)


@dataclass(frozen=True)
class Uniform:
    d: float = 1.0
    name = "uniform"

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"uniform scale must be positive, got {self.d}")

    def ppf(self, u):
        return self.d * u

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float) / self.d, 0.0, 1.0)

    def mean_below(self, v: float) -> float:
        return 0.5 * min(v, self.d)

    @property
    def param(self):
        return self.d


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0
    name = "exp"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"exponential rate must be positive, got {self.rate}")

    def ppf(self, u):
        return -np.log1p(-u) / self.rate

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return -np.expm1(-self.rate * x)

    def mean_below(self, v: float) -> float:
        # 1/rate - v / (exp(rate v) - 1), arranged to stay accurate for small v
        z = self.rate * v
        if z < 1e-6:
            return v / 2 - self.rate * v * v / 12
        return (math.expm1(z) - z) / (self.rate * math.expm1(z))

    @property
    def param(self):
        return self.rate


@dataclass(frozen=True)
class BetaA1:
    """Beta(alpha, 1): density ``alpha x**(alpha-1)`` on (0, 1)."""

    alpha: float = 1.0
    name = "beta"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"beta alpha must be positive, got {self.alpha}")

    def ppf(self, u):
        return u ** (1.0 / self.alpha)

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0) ** self.alpha

    def mean_below(self, v: float) -> float:
        return self.alpha / (self.alpha + 1) * min(v, 1.0)

    @property
    def param(self):
        return self.alpha


Distribution = Union[Uniform, Exponential, BetaA1]

_FAMILIES = {"uniform": Uniform, "exp": Exponential, "exponential": Exponential, "beta": BetaA1}


def make_distribution(name: str, param: float | None = None) -> Distribution:
    try:
        cls = _FAMILIES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown distribution {name!r}; expected uniform, exp or beta") from None
    return cls() if param is None else cls(float(param))


def conditional_mean_below(dist: Distribution, v: float) -> float:
    """``E[X | X <= v]`` in closed form."""
    if not v > 0:
        raise ValueError(f"v must be positive, got {v}")
    return dist.mean_below(v)


@dataclass(frozen=True)
class CostModel:
    """Independent per-item cost distributions."""

    items: tuple

    @classmethod
    def iid(cls, dist: Distribution | str, size: int, param: float | None = None) -> "CostModel":
        if isinstance(dist, str):
            dist = make_distribution(dist, param)
        return cls(tuple([dist] * size))

    @classmethod
    def parse(cls, spec: str, size: int, param: float | None = None) -> "CostModel":
        """``"uniform"``, ``"exp"``, ``"beta:2"`` etc.; ``param`` overrides the suffix."""
        name, _, suffix = spec.partition(":")
        if param is None and suffix:
            param = float(suffix)
        return cls.iid(name, size, param)

    @property
    def size(self) -> int:
        return len(self.items)

    @property
    def homogeneous(self) -> bool:
        return all(d == self.items[0] for d in self.items)

    def transform(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms of shape ``(..., size)`` to costs."""
        if self.homogeneous:
            return self.items[0].ppf(u)
        out = np.empty_like(u)
        for j, d in enumerate(self.items):
            out[..., j] = d.ppf(u[..., j])
        return out

    def to_dict(self) -> dict:
        if self.homogeneous:
            d = self.items[0]
            return {"dist": d.name, "param": d.param, "size": self.size}
        return {"items": [{"dist": d.name, "param": d.param} for d in self.items]}

    @classmethod
    def from_dict(cls, d: dict) -> "CostModel":
        if "items" in d:
            return cls(tuple(make_distribution(x["dist"], x["param"]) for x in d["items"]))
        return cls.iid(d["dist"], int(d["size"]), d.get("param"))


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if self.replication_index < 0:
            raise ValueError("replication_index must be non-negative")


def _key(master_seed: int) -> np.ndarray:
    return np.random.SeedSequence(master_seed).generate_state(2, dtype=np.uint64)


def _words_per_rep(m: int) -> int:
    return 4 * max(1, -(-m // 4))


def raw_uniforms(master_seed: int, start: int, count: int, m: int) -> np.ndarray:
    """Open-interval uniforms for replications ``start .. start+count-1``, shape ``(count, m)``."""
    w = _words_per_rep(m)
    bg = np.random.Philox(key=_key(master_seed))
    bg.advance(start * w // 4)
    raw = bg.random_raw(count * w).reshape(count, w)[:, :m]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO53


def _has_ties(row: np.ndarray) -> bool:
    s = np.sort(row)
    return bool(np.any(s[1:] == s[:-1]))


def _salted(model: CostModel, master_seed: int, r: int) -> tuple[np.ndarray, int]:
    salt = 0
    while True:
        salt += 1
        ss = np.random.SeedSequence([master_seed, r, salt])
        bg = np.random.Philox(key=ss.generate_state(2, dtype=np.uint64))
        raw = bg.random_raw(model.size)
        row = model.transform(((raw >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO53)
        if not _has_ties(row):
            return row, salt


def sample_batch(model: CostModel, master_seed: int, start: int, count: int) -> tuple[np.ndarray, int]:
    """Costs for ``count`` consecutive replications and the number re-drawn for ties.

    A row with exactly equal entries (possible in floating point) is replaced
    by a draw from a salted stream unique to that replication.
    """
    costs = model.transform(raw_uniforms(master_seed, start, count, model.size))
    if model.size < 2:
        return costs, 0
    s = np.sort(costs, axis=1)
    bad = np.flatnonzero(np.any(s[:, 1:] == s[:, :-1], axis=1))
    for i in bad:
        costs[i], _ = _salted(model, master_seed, start + int(i))
    return costs, len(bad)


def sample_costs(model: CostModel, seed: SeedSpec) -> np.ndarray:
    costs, _ = sample_batch(model, seed.master_seed, seed.replication_index, 1)
    return costs[0]
