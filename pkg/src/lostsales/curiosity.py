"""Ensemble-disagreement curiosity and the side-count-weighted intrinsic reward.

An M-head value ensemble disagrees most where it has trained least; the
spread of the heads at (s, a),

    disagreement = (1/M) * sqrt(sum_m (Q_m(s,a) - mean_m Q_m(s,a))^2),

is the curiosity signal. The intrinsic reward of a transition adds the
average curiosity of its J side experiences, scaled by log10(J) so that
pairs generating more side experiences are favored:

    r_in = disagreement(s, a) + log10(J) * (1/J) * sum_j disagreement(s_j, a_j).

The final training reward mixes extrinsic and intrinsic rewards with a
weight beta that decays multiplicatively per episode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class IntrinsicRewardConfig:
    beta0: float = 0.01
    beta_decay: float = 0.9
    M: int = 5

    def __post_init__(self):
        if not (0.0 <= self.beta0 <= 1.0):
            raise ConfigError("beta0 must lie in [0, 1]")
        if not (0.0 < self.beta_decay <= 1.0):
            raise ConfigError("beta_decay must lie in (0, 1]")
        if self.M < 2:
            raise ConfigError("ensemble disagreement needs M >= 2 heads")

    def beta_at(self, episode: int) -> float:
        return self.beta0 * self.beta_decay**episode


def disagreement_from_values(values: np.ndarray) -> np.ndarray:
    """values: (M, ...) per-head estimates at fixed (s, a) -> (...)."""
    M = values.shape[0]
    if M < 2:
        raise ConfigError("disagreement undefined for fewer than 2 heads")
    dev = values - values.mean(axis=0)
    return np.sqrt((dev**2).sum(axis=0)) / M


def head_disagreement(model, state_vec, action: int) -> float:
    """Curiosity of a single (state, action) under the model's online heads."""
    x = np.asarray(state_vec, dtype=float).reshape(1, -1)
    vals = model.head_values(x)[:, 0, int(action)]
    return float(disagreement_from_values(vals))


def intrinsic_reward(own_curiosity: float, side_curiosities) -> float:
    """Combine a transition's own curiosity with its side experiences'.

    side_curiosities may be empty (degenerate case: returns own alone).
    """
    side = np.asarray(side_curiosities, dtype=float)
    J = side.size
    if J == 0:
        return float(own_curiosity)
    return float(own_curiosity + math.log10(J) * side.mean())


def intrinsic_reward_for(model, exp_state_vec, exp_action, side_state_vecs, side_actions) -> float:
    own = head_disagreement(model, exp_state_vec, exp_action)
    side_states = np.asarray(side_state_vecs, dtype=float)
    if side_states.size == 0:
        return intrinsic_reward(own, [])
    vals = model.head_values(side_states)  # (M, J, A)
    J = side_states.shape[0]
    picked = vals[:, np.arange(J), np.asarray(side_actions, dtype=np.int64)]
    return intrinsic_reward(own, disagreement_from_values(picked))


def mix_reward(r: float, r_in: float, beta: float) -> float:
    """(1 - beta) * r + beta * r_in; exact identity at beta = 0."""
    if not (0.0 <= beta <= 1.0):
        raise ConfigError("beta must lie in [0, 1]")
    if beta == 0.0:
        return r
    return (1.0 - beta) * r + beta * r_in
