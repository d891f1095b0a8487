"""Tabular Q-learning, plain and side-experience-augmented.

Tables are dense (n_states, n_actions) float64 arrays indexed mixed-radix
over (y, pipeline). All true returns are <= 0, so the all-zero init is
optimistic and drives early exploration.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .config import AgentConfig
from .curiosity import IntrinsicRewardConfig, disagreement_from_values, mix_reward
from .env import Experience, SingleItemState
from .errors import ConfigError
from .fg import FeedbackGraphSpec, generate_side_experiences
from .params import ItemParams


def state_index(params: ItemParams, y: int, pipeline) -> int:
    A = params.a_max + 1
    idx = y
    for q in pipeline:
        idx = idx * A + q
    return idx


def state_from_index(params: ItemParams, idx: int) -> SingleItemState:
    A = params.a_max + 1
    pipe = []
    for _ in range(params.L - 1):
        pipe.append(idx % A)
        idx //= A
    return SingleItemState(idx, tuple(reversed(pipe)))


def state_vector(state: SingleItemState) -> np.ndarray:
    return np.array((state.y,) + state.pipeline, dtype=float)


class QTable:
    def __init__(self, params: ItemParams):
        self.params = params
        self.values = np.zeros((params.n_states, params.n_actions))

    def row(self, state: SingleItemState) -> np.ndarray:
        return self.values[state_index(self.params, state.y, state.pipeline)]

    def greedy_table(self) -> np.ndarray:
        """Greedy action per state (ties to the lowest index), int32."""
        return self.values.argmax(axis=1).astype(np.int32)


def act_epsilon_greedy(values_at_state, epsilon: float, rng: np.random.Generator) -> int:
    """Greedy with probability 1 - epsilon (ties to the lowest index),
    otherwise uniform over all actions."""
    values_at_state = np.asarray(values_at_state)
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(0, values_at_state.size))
    return int(values_at_state.argmax())


def q_update(table: QTable, exp: Experience, alpha: float, gamma: float):
    p = table.params
    si = state_index(p, exp.s.y, exp.s.pipeline)
    ni = state_index(p, exp.s_next.y, exp.s_next.pipeline)
    q = table.values
    q[si, exp.a] += alpha * (exp.r + gamma * q[ni].max() - q[si, exp.a])


def q_update_with_fg(
    table: QTable,
    exp: Experience,
    spec: FeedbackGraphSpec,
    params: ItemParams,
    alpha: float,
    gamma: float,
    rng: np.random.Generator | None = None,
):
    """Update on the real experience, then on every side experience it
    makes observable, in enumeration order."""
    q_update(table, exp, alpha, gamma)
    for side in generate_side_experiences(exp, spec, params, rng=rng):
        q_update(table, side, alpha, gamma)


class EnsembleQTable:
    """M bootstrapped tables; the curiosity model with tabular backing."""

    backing = "table"

    def __init__(self, params: ItemParams, n_heads: int):
        if n_heads < 1:
            raise ConfigError("need at least one head")
        self.params = params
        self.n_heads = n_heads
        self.tables = [QTable(params) for _ in range(n_heads)]

    @property
    def M(self) -> int:
        return self.n_heads

    def head_values(self, states: np.ndarray) -> np.ndarray:
        """states: (B, L) raw (y, pipeline) rows -> (M, B, A)."""
        idx = np.asarray(
            [state_index(self.params, int(s[0]), [int(v) for v in s[1:]]) for s in states]
        )
        return np.stack([t.values[idx] for t in self.tables])

    def mean_values_row(self, state: SingleItemState) -> np.ndarray:
        si = state_index(self.params, state.y, state.pipeline)
        return np.mean([t.values[si] for t in self.tables], axis=0)


class TabularAgent:
    """Asynchronous Q-learning agent, optionally side-experience-augmented
    and curiosity-driven.

    The common configuration (no intrinsic reward, inventory+action
    enumeration, no cap) runs whole episodes inside a kernel; otherwise a
    step loop over the same operations is used.
    """

    kind = "qtable"

    def __init__(
        self,
        params: ItemParams,
        config: AgentConfig,
        fg_spec: FeedbackGraphSpec | None = None,
        intrinsic: IntrinsicRewardConfig | None = None,
        seed: int = 0,
    ):
        self.params = params
        self.config = config
        self.fg_spec = fg_spec or FeedbackGraphSpec()
        self.fg_spec.check_against(params)
        self.intrinsic = intrinsic or IntrinsicRewardConfig()
        self.beta = self.intrinsic.beta0 if config.use_intrinsic else 0.0
        self._episode = 0
        ss = np.random.SeedSequence([seed, 0xA6E47])
        explore_ss, boot_ss, cap_ss = ss.spawn(3)
        self.rng_explore = np.random.Generator(np.random.PCG64(explore_ss))
        self.rng_boot = np.random.Generator(np.random.PCG64(boot_ss))
        self.rng_cap = np.random.Generator(np.random.PCG64(cap_ss))
        if config.use_intrinsic:
            self.model = EnsembleQTable(params, config.heads)
            self.table = self.model.tables[0]
        else:
            self.model = None
            self.table = QTable(params)

    # -- acting ---------------------------------------------------------
    def _values_at(self, state: SingleItemState) -> np.ndarray:
        if self.model is not None:
            return self.model.mean_values_row(state)
        return self.table.row(state)

    def act(self, state: SingleItemState, explore: bool = True) -> int:
        eps = self.config.epsilon if explore else 0.0
        return act_epsilon_greedy(self._values_at(state), eps, self.rng_explore)

    def greedy_action_table(self) -> np.ndarray:
        if self.model is not None:
            stacked = np.mean([t.values for t in self.model.tables], axis=0)
            return stacked.argmax(axis=1).astype(np.int32)
        return self.table.greedy_table()

    # -- learning -------------------------------------------------------
    def _kernel_eligible(self) -> bool:
        return (
            not self.config.use_intrinsic
            and self.fg_spec.enumerate_pipeline_dims == 0
            and self.fg_spec.cap_side_per_experience is None
        )

    def run_episode(self, env, demands: np.ndarray) -> float:
        """Collect-and-update over one episode of pre-drawn demands."""
        cfg = self.config
        T = len(demands)
        eps_u = self.rng_explore.random(T)
        rand_a = self.rng_explore.integers(0, self.params.a_max + 1, size=T)
        if self._kernel_eligible():
            p = self.params
            pipe = np.array(env.state.pipeline, dtype=np.int64)
            y_end, total_r = kernels.q_learning_episode(
                self.table.values,
                env.state.y,
                pipe,
                np.asarray(demands, dtype=np.int64),
                eps_u,
                rand_a.astype(np.int64),
                p.c,
                p.h,
                p.p,
                p.a_max,
                p.y_max,
                cfg.alpha,
                cfg.gamma,
                cfg.epsilon,
                1 if cfg.use_fg else 0,
            )
            # Keep the env in lockstep with the kernel's endpoint.
            env.state = SingleItemState(int(y_end), tuple(int(v) for v in pipe))
            return float(total_r)
        total_r = 0.0
        for t in range(T):
            state = env.state
            if eps_u[t] < cfg.epsilon:
                a = int(rand_a[t])
            else:
                a = int(self._values_at(state).argmax())
            exp = env.step(a, demand=int(demands[t]))
            total_r += exp.r
            self.observe(exp)
        return total_r

    def observe(self, exp: Experience):
        cfg = self.config
        if not cfg.use_intrinsic:
            if cfg.use_fg:
                q_update_with_fg(
                    self.table, exp, self.fg_spec, self.params, cfg.alpha, cfg.gamma,
                    rng=self.rng_cap,
                )
            else:
                q_update(self.table, exp, cfg.alpha, cfg.gamma)
            return
        # Curiosity path: mix the intrinsic reward into every update and
        # train each head on its own coin-flip subsample.
        side = (
            generate_side_experiences(exp, self.fg_spec, self.params, rng=self.rng_cap)
            if cfg.use_fg
            else []
        )
        r_mixed = self._mixed_reward(exp, side)
        head_mask = self.rng_boot.random(self.model.M) < 0.5
        if not head_mask.any():
            head_mask[:] = True
        for keep, table in zip(head_mask, self.model.tables):
            if not keep:
                continue
            self._update_indexed(table, exp, r_mixed)
            for s in side:
                self._update_indexed(table, s, s.r)

    def _mixed_reward(self, exp: Experience, side) -> float:
        if self.beta == 0.0:
            return exp.r
        own_vals = np.array(
            [t.values[state_index(self.params, exp.s.y, exp.s.pipeline), exp.a]
             for t in self.model.tables]
        )
        own = float(disagreement_from_values(own_vals))
        if side:
            svals = np.stack(
                [
                    np.array(
                        [t.values[state_index(self.params, s.s.y, s.s.pipeline), s.a]
                         for t in self.model.tables]
                    )
                    for s in side
                ],
                axis=1,
            )
            sides = disagreement_from_values(svals)
            r_in = own + np.log10(len(side)) * sides.mean()
        else:
            r_in = own
        return mix_reward(exp.r, float(r_in), self.beta)

    def _update_indexed(self, table: QTable, exp, r: float | None = None):
        p = self.params
        q = table.values
        si = state_index(p, exp.s.y, exp.s.pipeline)
        ni = state_index(p, exp.s_next.y, exp.s_next.pipeline)
        rr = exp.r if r is None else r
        q[si, exp.a] += self.config.alpha * (
            rr + self.config.gamma * q[ni].max() - q[si, exp.a]
        )

    def end_episode(self):
        self._episode += 1
        if self.config.use_intrinsic:
            self.beta = self.intrinsic.beta_at(self._episode)
