"""Configuration files and experiment settings.

Environment files are YAML with keys named after the standard constants:

    c: 0          # unit procurement cost
    h: 1          # unit holding cost per period
    p: 4          # unit lost-sales penalty
    L: 4          # lead time (periods)
    a_max: 20     # maximum order
    y_max: 100    # maximum post-receipt inventory
    d_max: 20     # demand truncation bound
    d_mean: 5     # Poisson demand mean
    gamma: 0.995  # discount factor

Top-level keys define the base item. A multi-item environment adds

    items:
      - {p: 4, L: 4}
      - {p: 9, L: 3}

where each entry overrides the base. A multi-echelon environment adds

    echelon:
      warehouse: {p: 4, L: 4}
      retailers:
        - {p: 4, L: 4}
        - {p: 9, L: 4}

`items` and `echelon` are mutually exclusive.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .env import MultiEchelonConfig, MultiEchelonEnv, MultiItemEnv, SingleItemEnv
from .params import ItemParams

_ITEM_KEYS = {f.name for f in dataclasses.fields(ItemParams)}


@dataclass(frozen=True)
class EnvConfig:
    mode: str  # single | multi | echelon
    item: ItemParams | None = None
    items: tuple[ItemParams, ...] = ()
    echelon: MultiEchelonConfig | None = None

    @classmethod
    def single(cls, item: ItemParams | None = None) -> "EnvConfig":
        return cls(mode="single", item=item or ItemParams())


def _item_from_dict(data: dict, base: ItemParams) -> ItemParams:
    unknown = set(data) - _ITEM_KEYS
    if unknown:
        raise ConfigError(f"unknown item keys: {sorted(unknown)}")
    coerced = {}
    for key, value in data.items():
        want_int = key in ("L", "a_max", "y_max", "d_max")
        try:
            coerced[key] = int(value) if want_int else float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"item key {key!r} has non-numeric value {value!r}")
    return base.with_(**coerced)


def parse_env_config(data: dict) -> EnvConfig:
    if not isinstance(data, dict):
        raise ConfigError("environment config must be a mapping")
    base_fields = {k: v for k, v in data.items() if k in _ITEM_KEYS}
    base = _item_from_dict(base_fields, ItemParams())
    if "items" in data and "echelon" in data:
        raise ConfigError("'items' and 'echelon' are mutually exclusive")
    if "items" in data:
        entries = data["items"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("'items' must be a non-empty list")
        items = tuple(_item_from_dict(e or {}, base) for e in entries)
        return EnvConfig(mode="multi", item=base, items=items)
    if "echelon" in data:
        ech = data["echelon"]
        if not isinstance(ech, dict) or "retailers" not in ech:
            raise ConfigError("'echelon' needs a 'retailers' list")
        warehouse = _item_from_dict(ech.get("warehouse") or {}, base)
        retailers = tuple(_item_from_dict(e or {}, base) for e in ech["retailers"])
        return EnvConfig(
            mode="echelon",
            item=base,
            echelon=MultiEchelonConfig(warehouse=warehouse, retailers=retailers),
        )
    return EnvConfig(mode="single", item=base)


def load_env_config(path: str) -> EnvConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}")
    return parse_env_config(data or {})


def build_env(config: EnvConfig, seed: int):
    if config.mode == "single":
        return SingleItemEnv(config.item, seed=seed)
    if config.mode == "multi":
        return MultiItemEnv(list(config.items), seed=seed)
    if config.mode == "echelon":
        return MultiEchelonEnv(config.echelon, seed=seed)
    raise ConfigError(f"unknown environment mode {config.mode!r}")


@dataclass(frozen=True)
class AgentConfig:
    """Learner knobs; defaults follow the standard single-item setup."""

    epsilon: float = 0.1
    gamma: float = 0.995
    lr: float = 1e-4
    alpha: float = 0.1  # tabular learning rate
    target_update_every: int = 100
    batch_main: int = 128
    batch_side: int = 256
    buffer_main: int = 12000
    buffer_side: int = 192000
    updates_per_step: int = 1
    hidden: int = 512
    heads: int = 5
    use_fg: bool = True
    use_intrinsic: bool = True

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0):
            raise ConfigError("epsilon must lie in [0, 1]")
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigError("gamma must lie in (0, 1]")
        if self.heads < 1:
            raise ConfigError("at least one value head required")


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig
    agent: AgentConfig = AgentConfig()
    fg_dims: int = 0
    fg_cap: int | None = None
    beta0: float = 0.01
    beta_decay: float = 0.9
    seeds: tuple[int, ...] = tuple(range(20))
    episodes: int = 100
    steps_per_episode: int = 1000
    eval_steps: int = 400
    agent_kind: str = "dqn"  # qtable | dqn

    def __post_init__(self):
        if self.agent_kind not in ("qtable", "dqn"):
            raise ConfigError(f"unknown agent kind {self.agent_kind!r}")
        if not self.seeds:
            raise ConfigError("at least one seed required")


_EXPERIMENT_KEYS = {
    "seeds", "episodes", "steps_per_episode", "eval_steps", "agent_kind",
    "fg_dims", "fg_cap", "beta0", "beta_decay",
}


def load_experiment_config(path: str) -> ExperimentConfig:
    """Whole-experiment YAML: environment keys at the top level plus optional
    `agent:` (AgentConfig fields) and `experiment:` (run shape) sections."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}")
    env_data = {k: v for k, v in data.items() if k not in ("agent", "experiment")}
    env = parse_env_config(env_data)
    agent_fields = {f.name for f in dataclasses.fields(AgentConfig)}
    agent_data = data.get("agent") or {}
    unknown = set(agent_data) - agent_fields
    if unknown:
        raise ConfigError(f"unknown agent keys: {sorted(unknown)}")
    agent = AgentConfig(**agent_data)
    exp_data = data.get("experiment") or {}
    unknown = set(exp_data) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
    if "seeds" in exp_data:
        seeds = exp_data["seeds"]
        exp_data["seeds"] = tuple(int(s) for s in (
            range(seeds) if isinstance(seeds, int) else seeds
        ))
    return ExperimentConfig(env=env, agent=agent, **exp_data)
