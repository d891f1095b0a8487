"""Exact dynamic-programming oracle and policy evaluation.

Value iteration runs synchronous Bellman sweeps over the full
(y, pipeline) state grid with the expectation over demand taken exactly,
until the sup-norm change drops below `tol`. Each sweep is one dense
matmul against the demand-truncation matrix, so the cost per sweep is
(y_max+1)^2 * (a_max+1)^L flops.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .env import SingleItemState
from .errors import ConfigError, SizeError
from .heuristics import holding_penalty_costs, truncation_matrix
from .params import DemandModel, ItemParams

# Dense state-action tensors beyond this size (entries) are refused.
SA_ENTRY_BUDGET = 3.0e8


@dataclass
class VIResult:
    params: ItemParams
    values: np.ndarray  # (n_states,)
    policy: np.ndarray  # (n_states,) int32 greedy actions
    sweeps: int
    deltas: np.ndarray  # sup-norm change per sweep

    def action(self, state: SingleItemState) -> int:
        from .qlearn import state_index

        return int(self.policy[state_index(self.params, state.y, state.pipeline)])


def value_iteration(
    params: ItemParams,
    demand: DemandModel | None = None,
    tol: float = 1e-6,
    max_sweeps: int = 200000,
) -> VIResult:
    """Solve V(s) = min_a E_D[cost(s,a,D) + gamma * V(s'(s,a,D))] exactly."""
    if tol <= 0:
        raise ConfigError("tol must be positive")
    demand = demand or DemandModel.from_params(params)
    Y = params.y_max + 1
    A = params.a_max + 1
    L = params.L
    n_sa = Y * A**L
    if n_sa > SA_ENTRY_BUDGET:
        raise SizeError(
            f"state-action tensor has {n_sa:.3g} entries; exact value iteration "
            f"is limited to {SA_ENTRY_BUDGET:.0e} — reduce L (or the bounds)"
        )
    M = truncation_matrix(demand, params.y_max)
    hp = holding_penalty_costs(demand, params)
    # Immediate expected cost of (s, a) depends on y and a only.
    a_cost = params.c * np.arange(A)
    # Post-truncation inventory u plus the next arrival v, capped.
    Z = np.minimum(np.arange(Y)[:, None] + np.arange(A)[None, :], params.y_max)

    R = A ** (L - 1)  # trailing state-action dims beyond (y, arrival)
    V = np.zeros(Y * R)
    deltas = []
    Vgrid = V.reshape(Y, R)
    sweeps = 0
    while sweeps < max_sweeps:
        # B[u, v, rest] = V[min(u+v, y_max), rest]; the arrival v is the
        # oldest pipeline slot (the action itself when L == 1), and `rest`
        # runs over the remaining slots plus the new order — exactly the
        # trailing axes of the state-action tensor.
        B = Vgrid[Z]  # (Y, A, R)
        EV = M @ B.reshape(Y, A * R)  # (Y, A*R)
        Q = EV.reshape((Y,) + (A,) * L)
        Q = Q * params.gamma
        Q += hp.reshape((Y,) + (1,) * L)
        Q += a_cost  # broadcasts over the last axis: the new order
        V_new = Q.min(axis=-1).reshape(-1)
        delta = float(np.abs(V_new - V).max())
        deltas.append(delta)
        V = V_new
        Vgrid = V.reshape(Y, R)
        sweeps += 1
        if delta <= tol:
            break
    B = Vgrid[Z]
    EV = M @ B.reshape(Y, A * R)
    Q = EV.reshape((Y,) + (A,) * L) * params.gamma
    Q += hp.reshape((Y,) + (1,) * L)
    Q += a_cost
    policy = Q.reshape(-1, A).argmin(axis=1).astype(np.int32)
    return VIResult(params, V, policy, sweeps, np.array(deltas))


@dataclass
class EvalResult:
    mean_cost: float
    std_cost: float  # across episodes
    per_episode: np.ndarray


def evaluate_policy(
    policy,
    params: ItemParams,
    demand: DemandModel | None = None,
    episodes: int = 100,
    steps: int = 400,
    seed: int = 0,
    warmup: int = 0,
) -> EvalResult:
    """Simulated mean cost/period of a greedy policy, fresh reset per episode.

    `policy` is a dense int action table over states, or a callable
    f(t, state) -> action. The optional warmup excludes the cold-start
    transient (empty shelf, empty pipeline) from the average; the long-run
    average cost is the warmup->infinity limit.
    """
    demand = demand or DemandModel.from_params(params)
    total = warmup + steps
    per_episode = np.empty(episodes)
    cost_out = np.empty(total)
    y_out = np.empty(total, dtype=np.int64)
    table = policy if isinstance(policy, np.ndarray) else None
    for e in range(episodes):
        ss = np.random.SeedSequence([seed, e, 0xEBA1])
        demands = demand.sample(
            np.random.Generator(np.random.PCG64(ss)), size=total
        ).astype(np.int64)
        if table is not None:
            pipe = np.zeros(params.L - 1, dtype=np.int64)
            kernels.rollout_table_policy(
                table.astype(np.int32), 0, pipe, demands,
                params.c, params.h, params.p, params.a_max, params.y_max,
                cost_out, y_out,
            )
        else:
            from .env import SingleItemEnv, initial_state

            env = SingleItemEnv(params, demand=demand, seed=0)
            env.state = initial_state(params)
            for t in range(total):
                a = policy(t, env.state)
                exp = env.step(a, demand=int(demands[t]))
                cost_out[t] = -exp.r
        per_episode[e] = cost_out[warmup:].sum() / steps
    return EvalResult(float(per_episode.mean()), float(per_episode.std()), per_episode)


# ---------------------------------------------------------------------------
# Greedy-policy file format: little-endian header of three uint32
# (y_max, a_max, L), then one action byte per state in mixed-radix
# (y, pipeline) order.

def save_policy(path, params: ItemParams, policy: np.ndarray):
    if policy.shape != (params.n_states,):
        raise ConfigError("policy table does not match the state space")
    if params.a_max > 255:
        raise ConfigError("action byte format supports a_max <= 255")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<III", params.y_max, params.a_max, params.L))
        fh.write(policy.astype(np.uint8).tobytes())


def load_policy(path):
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) != 12:
            raise ConfigError(f"truncated policy file {path}")
        y_max, a_max, L = struct.unpack("<III", header)
        body = fh.read()
    n = (y_max + 1) * (a_max + 1) ** (L - 1)
    table = np.frombuffer(body, dtype=np.uint8)
    if table.size != n:
        raise ConfigError(
            f"policy file {path} has {table.size} actions, expected {n}"
        )
    return {"y_max": int(y_max), "a_max": int(a_max), "L": int(L)}, table.astype(np.int32)
