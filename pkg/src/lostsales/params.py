"""Environment constants and the demand distribution.

`ItemParams` holds every per-item constant of the lost-sales problem:
unit procurement cost c, unit holding cost h, lost-sales penalty p,
lead time L, order cap a_max, post-receipt inventory cap y_max, demand
truncation d_max, demand mean, and the discount factor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ItemParams:
    c: float = 0.0
    h: float = 1.0
    p: float = 4.0
    L: int = 4
    a_max: int = 20
    y_max: int = 100
    d_max: int = 20
    d_mean: float = 5.0
    gamma: float = 0.995

    def __post_init__(self):
        if self.c < 0 or self.h < 0 or self.p < 0:
            raise ConfigError("costs c, h, p must be nonnegative")
        if self.L < 1:
            raise ConfigError(f"lead time L must be >= 1, got {self.L}")
        if self.a_max <= 0:
            raise ConfigError(f"a_max must be positive, got {self.a_max}")
        if self.d_max <= 0:
            raise ConfigError(f"d_max must be positive, got {self.d_max}")
        if self.d_max > self.y_max:
            raise ConfigError(
                f"d_max ({self.d_max}) must not exceed y_max ({self.y_max})"
            )
        if self.d_max == self.y_max:
            warnings.warn(
                "d_max == y_max: demand can clear the maximal inventory every "
                "period; results remain valid but the censored/uncensored split "
                "degenerates at full stock",
                stacklevel=2,
            )
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigError(f"gamma must lie in (0, 1], got {self.gamma}")

    @property
    def n_actions(self) -> int:
        return self.a_max + 1

    @property
    def n_states(self) -> int:
        return (self.y_max + 1) * (self.a_max + 1) ** (self.L - 1)

    def with_(self, **kwargs) -> "ItemParams":
        return replace(self, **kwargs)

    def max_period_cost(self) -> float:
        return self.c * self.a_max + self.h * self.y_max + self.p * self.d_max


class DemandModel:
    """Poisson demand clamped to d_max: samples are min(Poisson(mean), d_max).

    The pmf lumps the Poisson upper tail P(D >= d_max) into the d_max cell,
    so the pmf and the sampler describe the same distribution exactly.
    """

    kind = "poisson-clamped"

    def __init__(self, mean: float, d_max: int):
        if mean <= 0:
            raise ConfigError(f"demand mean must be positive, got {mean}")
        if d_max <= 0:
            raise ConfigError(f"d_max must be positive, got {d_max}")
        self.mean = float(mean)
        self.d_max = int(d_max)
        pmf = np.zeros(d_max + 1)
        term = math.exp(-mean)
        for d in range(d_max):
            pmf[d] = term
            term *= mean / (d + 1)
        pmf[d_max] = max(0.0, 1.0 - pmf[:d_max].sum())
        self.pmf = pmf

    @classmethod
    def from_params(cls, params: ItemParams) -> "DemandModel":
        return cls(params.d_mean, params.d_max)

    @classmethod
    def from_pmf(cls, pmf) -> "DemandModel":
        """Explicit categorical demand over {0, ..., len(pmf)-1}."""
        pmf = np.asarray(pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size < 1:
            raise ConfigError("pmf must be a one-dimensional vector")
        if np.any(pmf < 0) or abs(pmf.sum() - 1.0) > 1e-12:
            raise ConfigError("pmf entries must be nonnegative and sum to 1")
        obj = cls.__new__(cls)
        obj.mean = float(np.arange(pmf.size) @ pmf)
        obj.d_max = pmf.size - 1
        obj.pmf = pmf.copy()
        obj.kind = "categorical"
        return obj

    @classmethod
    def degenerate(cls, d: int, d_max: int | None = None) -> "DemandModel":
        """Point mass at d (deterministic demand)."""
        size = (d if d_max is None else d_max) + 1
        pmf = np.zeros(size)
        pmf[d] = 1.0
        return cls.from_pmf(pmf)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "poisson-clamped":
            draw = rng.poisson(self.mean, size=size)
            return np.minimum(draw, self.d_max) if size is not None else min(int(draw), self.d_max)
        draw = rng.choice(self.d_max + 1, size=size, p=self.pmf)
        return draw if size is not None else int(draw)

    def tail_ge(self) -> np.ndarray:
        """tail_ge[d] = P(D >= d), length d_max + 2 (last entry 0)."""
        out = np.zeros(self.d_max + 2)
        out[: self.d_max + 1] = self.pmf[::-1].cumsum()[::-1]
        return out
