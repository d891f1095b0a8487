"""Training loop: collect -> store -> (side-store) -> update, with a greedy
evaluation rollout after every episode.

All randomness is pre-drawn from named seed streams, so a run is a pure
function of (config, seed): train demands come from (seed, episode),
evaluation demands from (seed, episode) on a separate tag shared by every
agent variant — ablation arms with equal seeds face identical demand
sequences, which makes their learning curves seed-paired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .env import SingleItemEnv, initial_state
from .params import DemandModel, ItemParams

_TRAIN_TAG = 0x7121
_EVAL_TAG = 0xE7A1


def _stream(seed: int, episode: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, episode, tag])))


def train_demands(demand: DemandModel, seed: int, episode: int, n: int) -> np.ndarray:
    return demand.sample(_stream(seed, episode, _TRAIN_TAG), size=n).astype(np.int64)


def eval_demands(demand: DemandModel, seed: int, episode: int, n: int) -> np.ndarray:
    return demand.sample(_stream(seed, episode, _EVAL_TAG), size=n).astype(np.int64)


@dataclass(frozen=True)
class RunRow:
    run_id: str
    seed: int
    episode: int
    env_steps: int
    eval_mean_cost: float
    eval_std: float
    beta: float


def greedy_eval_costs(agent, params: ItemParams, demands: np.ndarray) -> np.ndarray:
    """Per-period costs of the agent's greedy policy from a fresh reset."""
    T = len(demands)
    cost_out = np.empty(T)
    y_out = np.empty(T, dtype=np.int64)
    if hasattr(agent, "greedy_action_table"):
        table = agent.greedy_action_table()
        pipe = np.zeros(params.L - 1, dtype=np.int64)
        kernels.rollout_table_policy(
            table, 0, pipe, demands, params.c, params.h, params.p,
            params.a_max, params.y_max, cost_out, y_out,
        )
        return cost_out
    env = SingleItemEnv(params, seed=0)
    env.state = initial_state(params)
    for t in range(T):
        a = agent.act(env.state, explore=False)
        exp = env.step(a, demand=int(demands[t]))
        cost_out[t] = -exp.r
    return cost_out


def run_training(
    agent,
    params: ItemParams,
    demand: DemandModel,
    episodes: int,
    steps_per_episode: int,
    eval_steps: int,
    seed: int,
    run_id: str = "run",
) -> list[RunRow]:
    env = SingleItemEnv(params, demand=demand, seed=seed)
    rows = []
    for episode in range(episodes):
        env.state = initial_state(params)
        demands = train_demands(demand, seed, episode, steps_per_episode)
        if hasattr(agent, "run_episode"):
            agent.run_episode(env, demands)
        else:
            for t in range(steps_per_episode):
                a = agent.act(env.state, explore=True)
                exp = env.step(a, demand=int(demands[t]))
                agent.observe(exp)
        agent.end_episode()
        costs = greedy_eval_costs(agent, params, eval_demands(demand, seed, episode, eval_steps))
        rows.append(
            RunRow(
                run_id=run_id,
                seed=seed,
                episode=episode,
                env_steps=(episode + 1) * steps_per_episode,
                eval_mean_cost=float(costs.mean()),
                eval_std=float(costs.std()),
                beta=float(getattr(agent, "beta", 0.0)),
            )
        )
    return rows


def _item_stream(seed, episode, tag, item_idx):
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, episode, tag, item_idx]))
    )


def run_training_multi(
    agents: list,
    items: list[ItemParams],
    episodes: int,
    steps_per_episode: int,
    eval_steps: int,
    seed: int,
    run_id: str = "run",
) -> list[RunRow]:
    """Train one agent per item on its own experience stream; the logged
    evaluation cost is the joint (summed) cost per period."""
    demands_models = [DemandModel.from_params(it) for it in items]
    envs = [SingleItemEnv(it, seed=seed) for it in items]
    rows = []
    for episode in range(episodes):
        per_item = []
        for i, dm in enumerate(demands_models):
            per_item.append(
                dm.sample(_item_stream(seed, episode, _TRAIN_TAG, i), size=steps_per_episode)
                .astype(np.int64)
            )
        for env, it in zip(envs, items):
            env.state = initial_state(it)
        for i, (agent, env) in enumerate(zip(agents, envs)):
            if hasattr(agent, "run_episode"):
                agent.run_episode(env, per_item[i])
            else:
                for t in range(steps_per_episode):
                    a = agent.act(env.state, explore=True)
                    agent.observe(env.step(a, demand=int(per_item[i][t])))
        joint = np.zeros(eval_steps)
        for i, (agent, it, dm) in enumerate(zip(agents, items, demands_models)):
            ev = dm.sample(_item_stream(seed, episode, _EVAL_TAG, i), size=eval_steps)
            joint += greedy_eval_costs(agent, it, ev.astype(np.int64))
        for agent in agents:
            agent.end_episode()
        rows.append(
            RunRow(
                run_id=run_id,
                seed=seed,
                episode=episode,
                env_steps=(episode + 1) * steps_per_episode,
                eval_mean_cost=float(joint.mean()),
                eval_std=float(joint.std()),
                beta=float(getattr(agents[0], "beta", 0.0)),
            )
        )
    return rows


def run_training_echelon(
    w_agent,
    r_agents: list,
    config,
    episodes: int,
    steps_per_episode: int,
    eval_steps: int,
    seed: int,
    run_id: str = "run",
) -> list[RunRow]:
    """Per-node learners on the coupled warehouse/retailer dynamics.

    Every node trains on its own transitions (the warehouse's demand is
    the retailers' order sum), with the node's own side-experience scope.
    """
    from .env import MultiEchelonEnv

    env = MultiEchelonEnv(config, seed=seed)
    retailers = list(config.retailers)
    rows = []
    for episode in range(episodes):
        env.reset(seed)
        r_demands = [
            DemandModel.from_params(it)
            .sample(_item_stream(seed, episode, _TRAIN_TAG, i), size=steps_per_episode)
            .astype(np.int64)
            for i, it in enumerate(retailers)
        ]
        for t in range(steps_per_episode):
            w_a = w_agent.act(env.w_state, explore=True)
            r_as = [ag.act(s, explore=True) for ag, s in zip(r_agents, env.r_states)]
            result = env.step(w_a, r_as, r_demands=[int(d[t]) for d in r_demands])
            w_agent.observe(result.warehouse)
            for ag, exp in zip(r_agents, result.retailers):
                ag.observe(exp)
        for ag in [w_agent] + r_agents:
            ag.end_episode()
        # Greedy joint evaluation from a fresh reset.
        env.reset(seed)
        ev_demands = [
            DemandModel.from_params(it)
            .sample(_item_stream(seed, episode, _EVAL_TAG, i), size=eval_steps)
            .astype(np.int64)
            for i, it in enumerate(retailers)
        ]
        costs = np.empty(eval_steps)
        for t in range(eval_steps):
            w_a = w_agent.act(env.w_state, explore=False)
            r_as = [ag.act(s, explore=False) for ag, s in zip(r_agents, env.r_states)]
            result = env.step(w_a, r_as, r_demands=[int(d[t]) for d in ev_demands])
            costs[t] = -result.joint_r
        rows.append(
            RunRow(
                run_id=run_id,
                seed=seed,
                episode=episode,
                env_steps=(episode + 1) * steps_per_episode,
                eval_mean_cost=float(costs.mean()),
                eval_std=float(costs.std()),
                beta=float(getattr(w_agent, "beta", 0.0)),
            )
        )
    return rows
