"""Side-experience generation from the lost-sales feedback structure.

A real transition reveals the observed demand d_obs. Because the dynamics
are driven by demand alone, d_obs lets us synthesize the transition any
other (inventory, action) pair would have produced this period:

* uncensored source (demand fully observed): every inventory level
  0..y_max is reachable knowledge, so the side set spans the whole grid;
* censored source (inventory sold out at y): only levels up to y would
  also have sold out for sure, so side states are bounded by the source
  inventory.

Side rewards and next states treat d_obs as the demand realization — in
the censored case this underestimates the true lost-sales penalty, which
is deliberate: it is all the data contains.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .env import Experience, SingleItemState, transition
from .errors import ConfigError
from .params import ItemParams


@dataclass(frozen=True)
class FeedbackGraphSpec:
    """Enumeration scope.

    enumerate_pipeline_dims (k): how many leading pipeline entries are
    enumerated over 0..a_max in addition to inventory and action; the
    remaining entries are copied from the source. k=0 (default) varies
    inventory and action only.

    cap_side_per_experience: optional budget; when the enumeration exceeds
    it, a uniform subsample (in enumeration order) is kept.
    """

    enumerate_pipeline_dims: int = 0
    cap_side_per_experience: int | None = None

    def __post_init__(self):
        if self.enumerate_pipeline_dims < 0:
            raise ConfigError("enumerate_pipeline_dims must be >= 0")
        if self.cap_side_per_experience is not None and self.cap_side_per_experience < 0:
            raise ConfigError("cap_side_per_experience must be >= 0")

    def check_against(self, params: ItemParams):
        if self.enumerate_pipeline_dims > params.L - 1:
            raise ConfigError(
                f"enumerate_pipeline_dims={self.enumerate_pipeline_dims} exceeds "
                f"pipeline length {params.L - 1}"
            )


@dataclass(frozen=True)
class SideExperience:
    s: SingleItemState
    a: int
    r: float
    s_next: SingleItemState
    d_obs: int
    censored: bool
    source_id: int = -1


def y_bound_for(exp_censored: bool, exp_y: int, params: ItemParams) -> int:
    return exp_y if exp_censored else params.y_max


def side_count(exp: Experience, spec: FeedbackGraphSpec, params: ItemParams) -> int:
    """Number of side experiences without materializing them."""
    spec.check_against(params)
    k = spec.enumerate_pipeline_dims
    bound = y_bound_for(exp.censored, exp.s.y, params)
    full = (bound + 1) * (params.a_max + 1) ** (k + 1)
    if spec.cap_side_per_experience is not None:
        return min(full, spec.cap_side_per_experience)
    return full


def generate_side_experiences(
    exp: Experience,
    spec: FeedbackGraphSpec,
    params: ItemParams,
    rng: np.random.Generator | None = None,
    source_id: int = -1,
) -> list[SideExperience]:
    """Enumerate side experiences for one real transition.

    Order: inventory ascending, then each enumerated pipeline dimension
    ascending, then action ascending. The source pair itself appears in
    the list whenever its pipeline lies in the enumerated set (always for
    k=0). Capping subsamples uniformly but preserves this order; it needs
    an RNG.
    """
    spec.check_against(params)
    k = spec.enumerate_pipeline_dims
    bound = y_bound_for(exp.censored, exp.s.y, params)
    d_obs = exp.d_obs
    src_pipe = exp.s.pipeline
    actions = range(params.a_max + 1)
    out = []
    sid = source_id
    for y_hat in range(bound + 1):
        for combo in itertools.product(actions, repeat=k):
            pipe = combo + src_pipe[k:]
            for a_hat in actions:
                r, d_o, cens, y_next, pipe_next = transition(
                    params, y_hat, pipe, a_hat, d_obs
                )
                out.append(
                    SideExperience(
                        SingleItemState(y_hat, pipe),
                        a_hat,
                        r,
                        SingleItemState(y_next, pipe_next),
                        d_o,
                        cens,
                        source_id=sid,
                    )
                )
    cap = spec.cap_side_per_experience
    if cap is not None and len(out) > cap:
        if rng is None:
            raise ConfigError("capping side experiences requires an RNG")
        keep = np.sort(rng.choice(len(out), size=cap, replace=False))
        out = [out[i] for i in keep]
    return out


def side_state_action_grid(y_bound: int, pipeline, a_max: int):
    """(states, actions) of the default-scope side set: inventory 0..y_bound
    by action 0..a_max with the pipeline copied; same order as the
    generator. Lighter than side_batch_arrays for curiosity scoring."""
    A = a_max + 1
    J = (y_bound + 1) * A
    n_pipe = len(pipeline)
    states = np.empty((J, 1 + n_pipe))
    states[:, 0] = np.repeat(np.arange(y_bound + 1), A)
    for i in range(n_pipe):
        states[:, 1 + i] = pipeline[i]
    actions = np.tile(np.arange(A, dtype=np.int64), y_bound + 1)
    return states, actions


def side_batch_arrays(
    y: int,
    pipeline,
    d_obs: int,
    censored: bool,
    params: ItemParams,
    k: int = 0,
):
    """Vectorized twin of generate_side_experiences for value-net training.

    Returns (states, actions, rewards, next_states, d_obs_rows, censored_rows)
    as arrays with states laid out as (y, pipeline...) rows, in the same
    enumeration order as the list-based generator. Each row's d_obs is
    min(d_obs, y_hat): the row records what a store at that inventory would
    have observed, so the Experience invariants hold row by row.
    """
    a_n = params.a_max + 1
    bound = y + 1 if censored else params.y_max + 1
    pipe = np.asarray(pipeline, dtype=np.int64)
    enum_dims = [np.arange(bound)] + [np.arange(a_n)] * (k + 1)
    grids = np.meshgrid(*enum_dims, indexing="ij")
    y_hat = grids[0].ravel()
    a_hat = grids[-1].ravel()
    J = y_hat.size
    n_pipe = pipe.size

    pipes = np.empty((J, n_pipe), dtype=np.int64) if n_pipe else np.empty((J, 0), np.int64)
    for i in range(k):
        pipes[:, i] = grids[1 + i].ravel()
    for i in range(k, n_pipe):
        pipes[:, i] = pipe[i]

    leftover = np.maximum(y_hat - d_obs, 0)
    lost = np.maximum(d_obs - y_hat, 0)
    rewards = -(params.c * a_hat + params.h * leftover + params.p * lost)
    arrival = pipes[:, 0] if n_pipe else a_hat
    y_next = np.minimum(leftover + arrival, params.y_max)

    states = np.empty((J, 1 + n_pipe))
    states[:, 0] = y_hat
    states[:, 1:] = pipes
    next_states = np.empty((J, 1 + n_pipe))
    next_states[:, 0] = y_next
    if n_pipe:
        next_states[:, 1:-1] = pipes[:, 1:]
        next_states[:, -1] = a_hat
    d_obs_rows = np.minimum(d_obs, y_hat).astype(np.int64)
    censored_rows = d_obs_rows == y_hat
    return (
        states,
        a_hat.astype(np.int64),
        rewards.astype(np.float64),
        next_states,
        d_obs_rows,
        censored_rows,
    )
