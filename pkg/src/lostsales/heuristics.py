"""Baseline ordering policies and brute-force parameter search.

Six policies: constant order, bracket (fractional-rate variant of constant
order), 1- and 2-period myopic (expected demand distribution assumed
known), base-stock, and capped base-stock. All actions are clamped to
[0, a_max]. The myopic policies propagate the post-receipt inventory
distribution exactly through the lead time, period by period, applying
the lost-sales truncation at every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError
from .params import DemandModel, ItemParams


@dataclass(frozen=True)
class HeuristicParams:
    r_h: float = 0.0  # constant-order rate (real for bracket, integer otherwise)
    S_h: int = 0      # base-stock level
    theta_h: float = 0.0  # bracket phase in [0, 1)

    def validate(self, item: ItemParams):
        if not (0 <= self.r_h <= item.a_max):
            raise ConfigError(f"r_h must lie in [0, {item.a_max}]")
        s_cap = item.y_max + (item.L - 1) * item.a_max
        if not (0 <= self.S_h <= s_cap):
            raise ConfigError(f"S_h must lie in [0, {s_cap}]")
        if not (0.0 <= self.theta_h < 1.0):
            raise ConfigError("theta_h must lie in [0, 1)")


def _clamp(a: int, a_max: int) -> int:
    return 0 if a < 0 else (a_max if a > a_max else a)


def constant_order(hp: HeuristicParams, item: ItemParams) -> int:
    return _clamp(int(round(hp.r_h)), item.a_max)


def bracket(t: int, hp: HeuristicParams, item: ItemParams) -> int:
    a = math.floor((t + 1) * hp.r_h + hp.theta_h) - math.ceil(t * hp.r_h + hp.theta_h)
    return _clamp(a, item.a_max)


def base_stock(state, hp: HeuristicParams, item: ItemParams) -> int:
    position = state.y + sum(state.pipeline)
    return _clamp(int(hp.S_h) - position, item.a_max)


def capped_base_stock(state, hp: HeuristicParams, item: ItemParams) -> int:
    return min(base_stock(state, hp, item), _clamp(int(round(hp.r_h)), item.a_max))


# ---------------------------------------------------------------------------
# Exact demand propagation used by the myopic policies.

def truncation_matrix(demand: DemandModel, y_max: int) -> np.ndarray:
    """M[y, u] = P([y - D]^+ = u) for y, u in 0..y_max."""
    pmf = demand.pmf
    tail = demand.tail_ge()
    M = np.zeros((y_max + 1, y_max + 1))
    for y in range(y_max + 1):
        # Shelf emptied: every demand >= y does it (impossible once y > d_max).
        M[y, 0] = tail[y] if y <= demand.d_max else 0.0
        for u in range(max(1, y - demand.d_max), y + 1):
            M[y, u] = pmf[y - u]
    return M


def shift_columns(dist: np.ndarray, arrival: int, y_max: int) -> np.ndarray:
    """Receive `arrival` units: mass at u moves to min(u + arrival, y_max)."""
    out = np.zeros_like(dist)
    if arrival == 0:
        return dist.copy()
    out[..., arrival:y_max] = dist[..., : y_max - arrival]
    out[..., y_max] = dist[..., y_max - arrival :].sum(axis=-1)
    return out


def holding_penalty_costs(demand: DemandModel, item: ItemParams) -> np.ndarray:
    """hp[y] = E_D[h*[y-D]^+ + p*[D-y]^+]."""
    d = np.arange(demand.d_max + 1)
    y = np.arange(item.y_max + 1)[:, None]
    cost = item.h * np.maximum(y - d, 0) + item.p * np.maximum(d - y, 0)
    return cost @ demand.pmf


def _decode_states(item: ItemParams):
    """All states decoded as (y, pipeline digits); returns (y, digits (S, L-1))."""
    A = item.a_max + 1
    idx = np.arange(item.n_states)
    digits = np.empty((item.n_states, item.L - 1), dtype=np.int64)
    rem = idx.copy()
    for i in range(item.L - 2, -1, -1):
        digits[:, i] = rem % A
        rem //= A
    return rem, digits  # rem is now y


def pipeline_propagated_dists(item: ItemParams, demand: DemandModel) -> np.ndarray:
    """Distribution of the post-receipt inventory after the L-1 pipeline
    arrivals, per state: returns D (n_states, y_max+1)."""
    Y = item.y_max + 1
    M = truncation_matrix(demand, item.y_max)
    y0, digits = _decode_states(item)
    D = np.zeros((item.n_states, Y))
    D[np.arange(item.n_states), y0] = 1.0
    for step in range(item.L - 1):
        D = D @ M
        arrivals = digits[:, step]
        out = np.zeros_like(D)
        for v in range(item.a_max + 1):
            sel = arrivals == v
            if sel.any():
                out[sel] = shift_columns(D[sel], v, item.y_max)
        D = out
    return D


def _gathered(table: np.ndarray, a_max: int, y_max: int) -> np.ndarray:
    """G[u, a] = table[min(u + a, y_max)] for vectorized post-arrival lookups."""
    u = np.arange(y_max + 1)[:, None]
    a = np.arange(a_max + 1)[None, :]
    return table[np.minimum(u + a, y_max)]


def myopic_action_table(
    item: ItemParams, demand: DemandModel, horizon: int
) -> np.ndarray:
    """Myopic policy as a dense per-state action table.

    horizon 1: smallest order a whose exact stockout probability at the
    arrival period, P(y_{t+L} < D), satisfies P <= (c+h)/(p+h); a_max when
    no order does.
    horizon 2: a = argmin_a E[cost at arrival] + gamma * min_a' E[cost one
    period later | a, a'], with a' chosen open-loop.
    """
    if horizon not in (1, 2):
        raise ConfigError("myopic horizon must be 1 or 2")
    if abs(demand.pmf.sum() - 1.0) > 1e-9 or (demand.pmf < 0).any():
        raise ConfigError("demand pmf must be a probability vector")
    Y = item.y_max + 1
    A = item.a_max + 1
    M = truncation_matrix(demand, item.y_max)
    D1 = pipeline_propagated_dists(item, demand)  # dist of y_{t+L-1} post-receipt
    T1 = D1 @ M  # post-demand inventory right before our order arrives
    if horizon == 1:
        tail = demand.tail_ge()
        gt = np.zeros(Y)  # gt[z] = P(D > z), zero once z >= d_max
        n = min(Y, demand.d_max + 1)
        gt[:n] = tail[1 : n + 1]
        stockout_after = _gathered(gt, item.a_max, item.y_max)
        probs = T1 @ stockout_after  # (S, A)
        ratio = (item.c + item.h) / (item.p + item.h)
        ok = probs <= ratio + 1e-12
        table = np.where(ok.any(axis=1), ok.argmax(axis=1), item.a_max)
        return table.astype(np.int32)

    hp = holding_penalty_costs(demand, item)
    hp_after = _gathered(hp, item.a_max, item.y_max)  # (Y, A): E cost at inventory min(u+a, y_max)
    ec1 = item.c * np.arange(A) + T1 @ hp_after  # (S, A)
    ec2min = np.empty_like(ec1)
    a_cost = item.c * np.arange(A)
    chunk = max(1, int(2e7) // (Y * A))
    for lo in range(0, item.n_states, chunk):
        hi = min(lo + chunk, item.n_states)
        block = T1[lo:hi]  # (B, Y)
        for a in range(A):
            d2 = shift_columns(block, a, item.y_max) @ M  # (B, Y)
            ec2min[lo:hi, a] = (d2 @ hp_after + a_cost).min(axis=1)
    total = ec1 + item.gamma * ec2min
    return total.argmin(axis=1).astype(np.int32)


# ---------------------------------------------------------------------------
# Rollout evaluation and grid search.

def policy_action_table(kind: str, hp: HeuristicParams, item: ItemParams,
                        demand: DemandModel | None = None) -> np.ndarray:
    """State-feedback policies as dense tables (bracket is time-based and
    has no table; see bracket_action_sequence)."""
    y0, digits = _decode_states(item)
    position = y0 + digits.sum(axis=1)
    if kind == "constant":
        a = np.full(item.n_states, _clamp(int(round(hp.r_h)), item.a_max))
    elif kind == "base-stock":
        a = np.clip(int(hp.S_h) - position, 0, item.a_max)
    elif kind == "capped-base-stock":
        cap = _clamp(int(round(hp.r_h)), item.a_max)
        a = np.minimum(np.clip(int(hp.S_h) - position, 0, item.a_max), cap)
    elif kind in ("myopic1", "myopic2"):
        dm = demand if demand is not None else DemandModel.from_params(item)
        return myopic_action_table(item, dm, 1 if kind == "myopic1" else 2)
    else:
        raise ConfigError(f"no action table for policy kind {kind!r}")
    return a.astype(np.int32)


def bracket_action_sequence(hp: HeuristicParams, item: ItemParams, n: int) -> np.ndarray:
    return np.array([bracket(t, hp, item) for t in range(n)], dtype=np.int64)


def _episode_demands(demand: DemandModel, seed: int, episode: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence([seed, episode, 0x6E1D])
    return demand.sample(np.random.Generator(np.random.PCG64(ss)), size=n).astype(np.int64)


def evaluate_table_policy(
    table: np.ndarray, item: ItemParams, demand: DemandModel,
    episodes: int, steps: int, seed: int, warmup: int = 0,
):
    """Mean cost/period (and std over episodes) of a state-indexed policy;
    each episode starts from the empty state, and the first `warmup`
    periods are excluded from the average."""
    total = warmup + steps
    costs = np.empty(episodes)
    cost_out = np.empty(total)
    y_out = np.empty(total, dtype=np.int64)
    for e in range(episodes):
        demands = _episode_demands(demand, seed, e, total)
        pipe = np.zeros(item.L - 1, dtype=np.int64)
        kernels.rollout_table_policy(
            table, 0, pipe, demands, item.c, item.h, item.p,
            item.a_max, item.y_max, cost_out, y_out,
        )
        costs[e] = cost_out[warmup:].sum() / steps
    return float(costs.mean()), float(costs.std()), costs


def evaluate_action_sequence_policy(
    hp: HeuristicParams, item: ItemParams, demand: DemandModel,
    episodes: int, steps: int, seed: int, warmup: int = 0,
):
    total = warmup + steps
    acts = bracket_action_sequence(hp, item, total)
    costs = np.empty(episodes)
    cost_out = np.empty(total)
    y_out = np.empty(total, dtype=np.int64)
    for e in range(episodes):
        demands = _episode_demands(demand, seed, e, total)
        pipe = np.zeros(item.L - 1, dtype=np.int64)
        kernels.rollout_action_sequence(
            acts, 0, pipe, demands, item.c, item.h, item.p,
            item.a_max, item.y_max, cost_out, y_out,
        )
        costs[e] = cost_out[warmup:].sum() / steps
    return float(costs.mean()), float(costs.std()), costs


def default_grids(kind: str, item: ItemParams) -> dict:
    s_hi = min(item.y_max + (item.L - 1) * item.a_max, 3 * item.a_max)
    if kind == "constant":
        return {"r_h": list(range(item.a_max + 1))}
    if kind == "bracket":
        return {
            "r_h": [round(0.05 * i, 2) for i in range(20 * item.a_max + 1)],
            "theta_h": [round(0.05 * i, 2) for i in range(20)],
        }
    if kind == "base-stock":
        return {"S_h": list(range(s_hi + 1))}
    if kind == "capped-base-stock":
        return {"S_h": list(range(s_hi + 1)), "r_h": list(range(item.a_max + 1))}
    if kind in ("myopic1", "myopic2"):
        return {}  # no free parameters once the demand pmf is known
    raise ConfigError(f"unknown policy kind {kind!r}")


def grid_search(
    kind: str,
    item: ItemParams,
    grids: dict | None = None,
    eval_episodes: int = 30,
    seed: int = 0,
    steps: int = 400,
    warmup: int = 100,
    demand: DemandModel | None = None,
):
    """Brute-force parameter search by simulation.

    Every grid point is scored on the same demand streams (common random
    numbers), so the argmin comparison is paired. Ties go to the
    lexicographically smaller parameter tuple because points are visited
    in lexicographic order and only strict improvements replace the best.
    Returns (best HeuristicParams, best mean cost, [(params, cost), ...]).
    """
    demand = demand or DemandModel.from_params(item)
    grids = grids if grids is not None else default_grids(kind, item)
    for values in grids.values():
        if len(values) == 0:
            raise ConfigError("empty parameter grid")
    names = sorted(grids)
    combos = [()]
    for name in names:
        combos = [c + (v,) for c in combos for v in sorted(grids[name])]
    if not combos:
        combos = [()]
    best_hp, best_cost, results = None, math.inf, []
    for combo in combos:
        hp = HeuristicParams(**dict(zip(names, combo)))
        hp.validate(item)
        if kind == "bracket":
            cost, _, _ = evaluate_action_sequence_policy(
                hp, item, demand, eval_episodes, steps, seed, warmup
            )
        else:
            table = policy_action_table(kind, hp, item, demand)
            cost, _, _ = evaluate_table_policy(
                table, item, demand, eval_episodes, steps, seed, warmup
            )
        results.append((hp, cost))
        if cost < best_cost:
            best_hp, best_cost = hp, cost
    return best_hp, best_cost, results
