"""From-scratch deep Q-learning with an M-head ensemble, side-experience
replay, and optional curiosity mixing.

Each head is a full value net trained on its own coin-flip subsample of
the batch; the head mean drives control. Targets are per head,
r_final + gamma * max_a' Q_target_m(s', a'); the task is continuing, so
no terminal mask exists. The side buffer holds synthetically completed
transitions; batches concatenate draws from both buffers.
"""

from __future__ import annotations

import numpy as np

from .config import AgentConfig
from .curiosity import IntrinsicRewardConfig, disagreement_from_values
from .env import Experience, SingleItemState
from .fg import FeedbackGraphSpec, side_batch_arrays, side_state_action_grid
from .nets import EnsembleMLP
from .params import ItemParams
from .replay import ReplayBuffer


class DQNAgent:
    kind = "dqn"

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
        self.intrinsic = intrinsic or IntrinsicRewardConfig(M=config.heads)
        self.beta = self.intrinsic.beta0 if config.use_intrinsic else 0.0
        self._episode = 0
        self._train_steps = 0
        ss = np.random.SeedSequence([seed, 0xD62A1])
        init_ss, explore_ss, sample_ss, boot_ss, cap_ss = ss.spawn(5)
        self.rng_init = np.random.Generator(np.random.PCG64(init_ss))
        self.rng_explore = np.random.Generator(np.random.PCG64(explore_ss))
        self.rng_sample = np.random.Generator(np.random.PCG64(sample_ss))
        self.rng_boot = np.random.Generator(np.random.PCG64(boot_ss))
        self.rng_cap = np.random.Generator(np.random.PCG64(cap_ss))
        L = params.L
        self.model = EnsembleMLP(
            config.heads, L, params.n_actions, config.hidden, self.rng_init, lr=config.lr
        )
        self.buffer_main = ReplayBuffer(config.buffer_main, L, kind="main")
        self.buffer_side = ReplayBuffer(config.buffer_side, L, kind="side")
        self._norm = np.array([params.y_max] + [params.a_max] * (L - 1), dtype=float)

    # -- acting ---------------------------------------------------------
    def normalize(self, states: np.ndarray) -> np.ndarray:
        return np.asarray(states, dtype=float) / self._norm

    def _state_vec(self, state: SingleItemState) -> np.ndarray:
        return np.array((state.y,) + state.pipeline, dtype=float)

    def act(self, state: SingleItemState, explore: bool = True) -> int:
        if explore and self.rng_explore.random() < self.config.epsilon:
            return int(self.rng_explore.integers(0, self.params.n_actions))
        x = self.normalize(self._state_vec(state).reshape(1, -1))
        return int(self.model.mean_values(x)[0].argmax())

    # -- experience intake ----------------------------------------------
    def observe(self, exp: Experience):
        vec = self._state_vec(exp.s)
        nvec = self._state_vec(exp.s_next)
        self.buffer_main.add(
            ReplayBuffer.pack(vec, exp.a, exp.r, nvec, exp.d_obs, exp.censored)
        )
        if self.config.use_fg:
            self._store_side(exp)
        loss = None
        for _ in range(self.config.updates_per_step):
            loss = self.train_step()
        return loss

    def _store_side(self, exp: Experience):
        states, actions, rewards, next_states, d_obs, censored = side_batch_arrays(
            exp.s.y,
            exp.s.pipeline,
            exp.d_obs,
            exp.censored,
            self.params,
            k=self.fg_spec.enumerate_pipeline_dims,
        )
        cap = self.fg_spec.cap_side_per_experience
        if cap is not None and len(actions) > cap:
            keep = np.sort(self.rng_cap.choice(len(actions), size=cap, replace=False))
            states, actions, rewards = states[keep], actions[keep], rewards[keep]
            next_states, d_obs, censored = next_states[keep], d_obs[keep], censored[keep]
        rows = np.empty((len(actions), self.buffer_side.row_dim))
        L = self.params.L
        rows[:, :L] = states
        rows[:, L] = actions
        rows[:, L + 1] = rewards
        rows[:, L + 2 : 2 * L + 2] = next_states
        rows[:, 2 * L + 2] = d_obs
        rows[:, 2 * L + 3] = censored
        self.buffer_side.add_batch(rows)

    # -- learning -------------------------------------------------------
    def train_step(self):
        """One batched update; returns the mean head loss, or None while
        the main buffer cannot fill a batch yet."""
        cfg = self.config
        if len(self.buffer_main) < cfg.batch_main:
            return None
        rows = self.buffer_main.sample(cfg.batch_main, self.rng_sample)
        if cfg.use_fg and len(self.buffer_side) > 0:
            side_rows = self.buffer_side.sample(cfg.batch_side, self.rng_sample)
            rows = np.concatenate([rows, side_rows], axis=0)
        states, actions, rewards, next_states, d_obs, censored = self.buffer_main.unpack(rows)

        r_final = rewards
        if cfg.use_intrinsic and self.beta != 0.0:
            r_in = self._intrinsic_rewards(states, actions, d_obs, censored)
            r_final = (1.0 - self.beta) * rewards + self.beta * r_in

        x = self.normalize(states)
        nx = self.normalize(next_states)
        B = rows.shape[0]
        # Double-DQN backup: the online head mean picks the next action,
        # each head's target net values it.
        next_online = self.model.head_values(nx)  # (M, B, A)
        a_star = next_online.mean(axis=0).argmax(axis=1)
        next_target = self.model.target_values(nx)[:, np.arange(B), a_star]  # (M, B)
        losses = []
        for m, (head, opt) in enumerate(zip(self.model.heads, self.model.opts)):
            mask = (self.rng_boot.random(B) < 0.5).astype(float)
            if mask.sum() == 0:
                mask[:] = 1.0
            targets = r_final + cfg.gamma * next_target[m]
            loss, grads = head.loss_and_grads(x, actions, targets, weights=mask)
            opt.step(head.params(), grads)
            losses.append(loss)
        self._train_steps += 1
        if self._train_steps % cfg.target_update_every == 0:
            self.model.sync_targets()
        return float(np.mean(losses))

    def _intrinsic_rewards(self, states, actions, d_obs, censored) -> np.ndarray:
        """Curiosity of each sampled row plus the log-scaled mean curiosity
        of the side experiences it would generate now.

        Rows sharing (inventory bound, copied pipeline) generate identical
        side sets, so each distinct set is scored once per batch (the
        capped variant subsamples per row and skips this pooling).
        """
        x = self.normalize(states)
        vals = self.model.head_values(x)  # (M, B, A)
        B = states.shape[0]
        own = disagreement_from_values(vals[:, np.arange(B), actions])
        k = self.fg_spec.enumerate_pipeline_dims
        cap = self.fg_spec.cap_side_per_experience
        if cap is not None or k > 0:
            return self._intrinsic_rewards_general(states, d_obs, censored, own)
        bounds = np.where(censored, states[:, 0].astype(np.int64), self.params.y_max)
        keys = {}
        for i in range(B):
            keys.setdefault((int(bounds[i]), tuple(states[i, 1:])), []).append(i)
        grids, counts = [], []
        for (bound, pipe), _rows in keys.items():
            g_states, g_actions = side_state_action_grid(bound, pipe, self.params.a_max)
            grids.append((g_states, g_actions))
            counts.append(len(g_actions))
        all_states = np.concatenate([g[0] for g in grids], axis=0)
        all_actions = np.concatenate([g[1] for g in grids])
        svals = self.model.head_values(self.normalize(all_states))
        picked = svals[:, np.arange(all_states.shape[0]), all_actions]
        dis = disagreement_from_values(picked)
        r_in = np.empty(B)
        offset = 0
        for (key, rows), J in zip(keys.items(), counts):
            bonus = np.log10(J) * dis[offset : offset + J].mean()
            for i in rows:
                r_in[i] = own[i] + bonus
            offset += J
        return r_in

    def _intrinsic_rewards_general(self, states, d_obs, censored, own) -> np.ndarray:
        cap = self.fg_spec.cap_side_per_experience
        k = self.fg_spec.enumerate_pipeline_dims
        B = states.shape[0]
        side_states, side_actions, bounds = [], [], [0]
        for i in range(B):
            s_states, s_actions, _, _, _, _ = side_batch_arrays(
                int(states[i, 0]),
                states[i, 1:].astype(np.int64),
                int(d_obs[i]),
                bool(censored[i]),
                self.params,
                k=k,
            )
            if cap is not None and len(s_actions) > cap:
                keep = np.sort(
                    self.rng_cap.choice(len(s_actions), size=cap, replace=False)
                )
                s_states, s_actions = s_states[keep], s_actions[keep]
            side_states.append(s_states)
            side_actions.append(s_actions)
            bounds.append(bounds[-1] + len(s_actions))
        all_states = np.concatenate(side_states, axis=0)
        all_actions = np.concatenate(side_actions)
        svals = self.model.head_values(self.normalize(all_states))
        picked = svals[:, np.arange(all_states.shape[0]), all_actions]
        dis = disagreement_from_values(picked)
        r_in = np.empty(B)
        for i in range(B):
            lo, hi = bounds[i], bounds[i + 1]
            J = hi - lo
            r_in[i] = own[i] if J == 0 else own[i] + np.log10(J) * dis[lo:hi].mean()
        return r_in

    def end_episode(self):
        self._episode += 1
        if self.config.use_intrinsic:
            self.beta = self.intrinsic.beta_at(self._episode)

    def greedy_q_table(self) -> np.ndarray:
        """Mean-head values over the whole state grid (small instances only)."""
        from .qlearn import state_from_index

        p = self.params
        grid = np.array(
            [
                (lambda s: (s.y,) + s.pipeline)(state_from_index(p, i))
                for i in range(p.n_states)
            ],
            dtype=float,
        )
        return self.model.mean_values(self.normalize(grid)).argmax(axis=1).astype(np.int32)


def dqn_train_step(agent: DQNAgent):
    """Run one model update on the agent's buffers (None while not ready)."""
    return agent.train_step()
