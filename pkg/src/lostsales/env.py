"""Seeded lost-sales inventory environments: single-item, multi-item, multi-echelon.

Dynamics per period: demand d is drawn, the order placed L periods ago
arrives, and the reward is the negated period cost
    r = -(c*a + h*[y - d]^+ + p*[d - y]^+),       [x]^+ = max(x, 0).
Post-receipt inventory is capped at y_max (overflow is discarded at no
extra cost); unmet demand is lost and only d_obs = min(d, y) is observed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ActionError, ConfigError
from .params import DemandModel, ItemParams


@dataclass(frozen=True)
class SingleItemState:
    """Inventory after receipt plus the L-1 outstanding orders (oldest first)."""

    y: int
    pipeline: tuple[int, ...]


@dataclass(frozen=True)
class Experience:
    """One transition as stored in replay buffers; r is always <= 0."""

    s: SingleItemState
    a: int
    r: float
    s_next: SingleItemState
    d_obs: int
    censored: bool


def transition(params: ItemParams, y: int, pipeline: tuple[int, ...], a: int, d: int):
    """Pure one-step dynamics; returns (r, d_obs, censored, y_next, pipeline_next).

    The same function drives the real environment and the synthetic side
    experiences (which feed it the observed demand), so the two can never
    drift apart.
    """
    leftover = y - d if y > d else 0
    lost = d - y if d > y else 0
    r = -(params.c * a + params.h * leftover + params.p * lost)
    d_obs = d if d < y else y
    arrival = pipeline[0] if params.L > 1 else a
    y_next = min(leftover + arrival, params.y_max)
    pipeline_next = pipeline[1:] + (a,) if params.L > 1 else ()
    return r, d_obs, d_obs == y, y_next, pipeline_next


def initial_state(params: ItemParams) -> SingleItemState:
    return SingleItemState(0, (0,) * (params.L - 1))


class SingleItemEnv:
    """Single-item environment; a pure function of (params, seed, actions)."""

    def __init__(self, params: ItemParams, demand: DemandModel | None = None, seed: int = 0):
        self.params = params
        self.demand = demand if demand is not None else DemandModel.from_params(params)
        if self.demand.d_max > params.y_max:
            raise ConfigError("demand support exceeds y_max")
        self.reset(seed)

    def reset(self, seed: int) -> SingleItemState:
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        self.state = initial_state(self.params)
        return self.state

    def draw_demands(self, n: int) -> np.ndarray:
        return self.demand.sample(self._rng, size=n)

    def step(self, a: int, demand: int | None = None) -> Experience:
        p = self.params
        if not (0 <= a <= p.a_max) or int(a) != a:
            raise ActionError(f"action {a} outside [0, {p.a_max}]")
        d = int(self.demand.sample(self._rng)) if demand is None else int(demand)
        s = self.state
        r, d_obs, censored, y_next, pipe_next = transition(p, s.y, s.pipeline, int(a), d)
        s_next = SingleItemState(y_next, pipe_next)
        self.state = s_next
        return Experience(s, int(a), r, s_next, d_obs, censored)


class MultiItemEnv:
    """Independent items under one roof; joint reward is the sum over items."""

    def __init__(self, items: list[ItemParams], seed: int = 0):
        if not items:
            raise ConfigError("multi-item environment needs at least one item")
        self.items = list(items)
        self.reset(seed)

    def reset(self, seed: int) -> list[SingleItemState]:
        children = np.random.SeedSequence(seed).spawn(len(self.items))
        self.envs = []
        for item, ss in zip(self.items, children):
            env = SingleItemEnv.__new__(SingleItemEnv)
            env.params = item
            env.demand = DemandModel.from_params(item)
            env._rng = np.random.Generator(np.random.PCG64(ss))
            env.state = initial_state(item)
            self.envs.append(env)
        return self.states

    @property
    def states(self) -> list[SingleItemState]:
        return [e.state for e in self.envs]

    def step(self, actions, demands=None):
        if len(actions) != len(self.envs):
            raise ActionError(
                f"expected {len(self.envs)} actions, got {len(actions)}"
            )
        if demands is not None and len(demands) != len(self.envs):
            raise ActionError("one forced demand per item required")
        exps = [
            env.step(a, None if demands is None else demands[i])
            for i, (env, a) in enumerate(zip(self.envs, actions))
        ]
        return exps, sum(e.r for e in exps)


@dataclass(frozen=True)
class MultiEchelonConfig:
    """One warehouse serving several retailers.

    Retailer demand is customer-facing and sampled; warehouse demand is the
    sum of the retailers' (capped) orders and is never sampled.
    """

    warehouse: ItemParams
    retailers: tuple[ItemParams, ...]
    allocation_rule: str = "proportional-largest-remainder"

    def __post_init__(self):
        if not self.retailers:
            raise ConfigError("echelon needs at least one retailer")
        if self.allocation_rule != "proportional-largest-remainder":
            raise ConfigError(f"unknown allocation rule {self.allocation_rule!r}")


def allocate_largest_remainder(available: int, orders: list[int]) -> list[int]:
    """Split `available` units across orders proportionally.

    Integer shares come from flooring the proportional quota; leftover units
    go to the largest fractional remainders, ties toward the lower index.
    When supply covers all orders everyone receives their order in full.
    """
    total = sum(orders)
    if total <= available:
        return list(orders)
    if total == 0:
        return [0] * len(orders)
    quotas = [available * o / total for o in orders]
    shares = [int(q) for q in quotas]
    leftover = available - sum(shares)
    by_remainder = sorted(
        range(len(orders)), key=lambda i: (-(quotas[i] - shares[i]), i)
    )
    for i in by_remainder[:leftover]:
        shares[i] += 1
    return shares


@dataclass
class EchelonStepResult:
    warehouse: Experience
    retailers: list[Experience]
    allocation: list[int]
    joint_r: float = field(init=False)

    def __post_init__(self):
        self.joint_r = self.warehouse.r + sum(e.r for e in self.retailers)


class MultiEchelonEnv:
    """Warehouse + retailers; retailer shipments travel through their pipelines.

    Each period: retailers place orders (capped at their a_max), the
    warehouse sees their sum as its demand, fills what its stock allows
    (shortfall is lost with the warehouse penalty), and the allocated
    quantities enter the retailers' pipelines. Retailers then face sampled
    customer demand with ordinary lost-sales dynamics.
    """

    def __init__(self, config: MultiEchelonConfig, seed: int = 0):
        self.config = config
        self.reset(seed)

    def reset(self, seed: int, warehouse_y: int = 0):
        cfg = self.config
        children = np.random.SeedSequence(seed).spawn(len(cfg.retailers))
        self.r_demand = [DemandModel.from_params(r) for r in cfg.retailers]
        self.r_rng = [np.random.Generator(np.random.PCG64(ss)) for ss in children]
        self.w_state = SingleItemState(warehouse_y, (0,) * (cfg.warehouse.L - 1))
        self.r_states = [initial_state(r) for r in cfg.retailers]
        return self.w_state, list(self.r_states)

    def step(self, w_action: int, r_actions, r_demands=None) -> EchelonStepResult:
        cfg = self.config
        w = cfg.warehouse
        if not (0 <= w_action <= w.a_max):
            raise ActionError(f"warehouse action {w_action} outside [0, {w.a_max}]")
        if len(r_actions) != len(cfg.retailers):
            raise ActionError("one order per retailer required")
        orders = []
        for a, item in zip(r_actions, cfg.retailers):
            if not (0 <= a <= item.a_max):
                raise ActionError(f"retailer action {a} outside [0, {item.a_max}]")
            orders.append(int(a))

        # Warehouse faces the endogenous demand sum(orders).
        d_w = sum(orders)
        ws = self.w_state
        filled = min(d_w, ws.y)
        allocation = allocate_largest_remainder(filled, orders)
        r_w, d_obs_w, censored_w, y_w_next, pipe_w_next = transition(
            w, ws.y, ws.pipeline, int(w_action), d_w
        )
        w_next = SingleItemState(y_w_next, pipe_w_next)
        w_exp = Experience(ws, int(w_action), r_w, w_next, d_obs_w, censored_w)
        self.w_state = w_next

        r_exps = []
        for i, (item, shipped) in enumerate(zip(cfg.retailers, allocation)):
            d = (
                int(self.r_demand[i].sample(self.r_rng[i]))
                if r_demands is None
                else int(r_demands[i])
            )
            s = self.r_states[i]
            # The retailer pays procurement on what actually ships.
            r, d_obs, censored, y_next, pipe_next = transition(
                item, s.y, s.pipeline, shipped, d
            )
            s_next = SingleItemState(y_next, pipe_next)
            r_exps.append(Experience(s, shipped, r, s_next, d_obs, censored))
            self.r_states[i] = s_next
        return EchelonStepResult(w_exp, r_exps, allocation)


# Published multi-environment parameter sets: penalties and lead times per
# item (multi-item) or per retailer with a fixed warehouse (multi-echelon);
# every other constant stays at the single-item default.
MULTI_ITEM_PRESETS = {
    2: {"p": [4, 9], "L": [4, 3]},
    3: {"p": [4, 9, 19], "L": [4, 3, 2]},
    5: {"p": [4, 9, 4, 9, 19], "L": [4, 4, 3, 3, 2]},
}

ECHELON_RETAILER_PRESETS = {
    1: {"p": [4], "L": [4]},
    2: {"p": [4, 9], "L": [4, 4]},
    4: {"p": [4, 9, 4, 9], "L": [4, 4, 3, 3]},
}

ECHELON_WAREHOUSE_PRESET = {"p": 4, "L": 4}


def multi_item_params(n_items: int, base: ItemParams | None = None) -> list[ItemParams]:
    if n_items not in MULTI_ITEM_PRESETS:
        raise ConfigError(f"no preset for {n_items} items; configure items explicitly")
    base = base or ItemParams()
    preset = MULTI_ITEM_PRESETS[n_items]
    return [base.with_(p=float(p), L=L) for p, L in zip(preset["p"], preset["L"])]


def echelon_config(n_retailers: int, base: ItemParams | None = None) -> MultiEchelonConfig:
    if n_retailers not in ECHELON_RETAILER_PRESETS:
        raise ConfigError(
            f"no preset for {n_retailers} retailers; configure the echelon explicitly"
        )
    base = base or ItemParams()
    preset = ECHELON_RETAILER_PRESETS[n_retailers]
    warehouse = base.with_(**{k: v for k, v in ECHELON_WAREHOUSE_PRESET.items()})
    retailers = tuple(
        base.with_(p=float(p), L=L) for p, L in zip(preset["p"], preset["L"])
    )
    return MultiEchelonConfig(warehouse=warehouse, retailers=retailers)
