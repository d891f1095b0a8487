import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lostsales.env import (
    Experience,
    MultiEchelonConfig,
    MultiEchelonEnv,
    MultiItemEnv,
    SingleItemEnv,
    SingleItemState,
    allocate_largest_remainder,
    echelon_config,
    initial_state,
    multi_item_params,
    transition,
)
from lostsales.errors import ActionError, ConfigError
from lostsales.params import DemandModel, ItemParams

TABLE_DEFAULTS = ItemParams()


def test_defaults_match_standard_configuration():
    assert (TABLE_DEFAULTS.L, TABLE_DEFAULTS.p, TABLE_DEFAULTS.y_max) == (4, 4.0, 100)
    assert (TABLE_DEFAULTS.a_max, TABLE_DEFAULTS.c, TABLE_DEFAULTS.h) == (20, 0.0, 1.0)
    assert (TABLE_DEFAULTS.d_mean, TABLE_DEFAULTS.d_max) == (5.0, 20)


def test_param_validation():
    with pytest.raises(ConfigError):
        ItemParams(L=0)
    with pytest.raises(ConfigError):
        ItemParams(h=-1.0)
    with pytest.raises(ConfigError):
        ItemParams(d_max=30, y_max=20)
    with pytest.raises(ConfigError):
        ItemParams(gamma=0.0)
    with pytest.warns(UserWarning):
        ItemParams(d_max=20, y_max=20)


def test_demand_pmf_sums_to_one_and_lumps_tail():
    dm = DemandModel(5.0, 20)
    assert abs(dm.pmf.sum() - 1.0) <= 1e-12
    # The last cell carries the whole upper tail mass P(D >= d_max).
    import math

    exact_tail = 1.0 - sum(math.exp(-5) * 5**d / math.factorial(d) for d in range(20))
    assert dm.pmf[20] == pytest.approx(exact_tail, abs=1e-12)


def test_demand_sampling_reproducible():
    dm = DemandModel(5.0, 20)
    a = dm.sample(np.random.Generator(np.random.PCG64(42)), size=1000)
    b = dm.sample(np.random.Generator(np.random.PCG64(42)), size=1000)
    assert np.array_equal(a, b)
    assert a.max() <= 20 and a.min() >= 0


def test_reset_all_zero():
    env = SingleItemEnv(TABLE_DEFAULTS, seed=7)
    assert env.state == SingleItemState(0, (0, 0, 0))
    env2 = SingleItemEnv(TABLE_DEFAULTS.with_(L=2), seed=0)
    assert env2.state == SingleItemState(0, (0,))


def test_reset_determinism_first_1000_draws():
    env = SingleItemEnv(TABLE_DEFAULTS, seed=11)
    first = env.draw_demands(1000)
    env.reset(11)
    again = env.draw_demands(1000)
    assert np.array_equal(first, again)


def test_step_worked_example_uncensored():
    p = TABLE_DEFAULTS.with_(L=3)
    env = SingleItemEnv(p, seed=0)
    env.state = SingleItemState(10, (3, 2))
    exp = env.step(4, demand=7)
    assert exp.s_next == SingleItemState(6, (2, 4))
    assert exp.r == -3.0
    assert exp.d_obs == 7 and exp.censored is False


def test_step_worked_example_censored():
    p = TABLE_DEFAULTS.with_(L=2)
    env = SingleItemEnv(p, seed=0)
    env.state = SingleItemState(2, (0,))
    exp = env.step(1, demand=5)
    assert exp.s_next == SingleItemState(0, (1,))
    assert exp.r == -12.0  # 4 * (5 - 2) lost-sales penalty
    assert exp.d_obs == 2 and exp.censored is True


def test_step_zero_case_is_censored():
    env = SingleItemEnv(TABLE_DEFAULTS, seed=0)
    exp = env.step(0, demand=0)
    assert exp.s_next.y == 0 and exp.r == 0.0
    assert exp.d_obs == 0 and exp.censored is True


def test_action_bounds():
    env = SingleItemEnv(TABLE_DEFAULTS, seed=0)
    with pytest.raises(ActionError):
        env.step(21)
    with pytest.raises(ActionError):
        env.step(-1)


@st.composite
def random_step(draw):
    L = draw(st.integers(1, 4))
    a_max = draw(st.integers(1, 8))
    y_max = draw(st.integers(8, 30))
    d_max = draw(st.integers(1, min(8, y_max)))
    p = ItemParams(L=L, a_max=a_max, y_max=y_max, d_max=d_max, d_mean=2.0, p=4.0, c=0.5)
    y = draw(st.integers(0, y_max))
    pipe = tuple(draw(st.integers(0, a_max)) for _ in range(L - 1))
    a = draw(st.integers(0, a_max))
    d = draw(st.integers(0, d_max))
    return p, y, pipe, a, d


@given(random_step())
@settings(max_examples=200, deadline=None)
def test_transition_invariants(case):
    p, y, pipe, a, d = case
    r, d_obs, censored, y_next, pipe_next = transition(p, y, pipe, a, d)
    # Conservation before the cap: what's left plus what sold equals stock.
    arrival = pipe[0] if p.L > 1 else a
    if d <= y:
        assert min(y - d + arrival, p.y_max) == y_next
        assert d_obs == d
    else:
        assert y_next == min(arrival, p.y_max)
        assert d_obs == y
    assert censored == (d_obs == y)
    assert (d_obs < y) == (not censored)
    assert -(p.c * p.a_max + p.h * p.y_max + p.p * p.d_max) <= r <= 0.0
    assert len(pipe_next) == p.L - 1
    if p.L > 1:
        assert pipe_next == pipe[1:] + (a,)


def test_trajectory_pure_function_of_seed_and_actions():
    actions = [3, 0, 5, 2, 7, 1, 0, 4] * 10
    def run():
        env = SingleItemEnv(TABLE_DEFAULTS, seed=5)
        return [env.step(a) for a in actions]

    first, second = run(), run()
    assert first == second


# -- multi-item -------------------------------------------------------------

def test_multi_item_additivity():
    p = TABLE_DEFAULTS.with_(L=3)
    env = MultiItemEnv([p, p], seed=0)
    env.envs[0].state = SingleItemState(10, (3, 2))
    env.envs[1].state = SingleItemState(10, (3, 2))
    exps, joint = env.step([4, 4], demands=[7, 7])
    assert joint == -6.0
    assert all(e.r == -3.0 for e in exps)


def test_multi_item_presets():
    three = multi_item_params(3)
    assert [it.p for it in three] == [4, 9, 19]
    assert [it.L for it in three] == [4, 3, 2]
    five = multi_item_params(5)
    assert [it.p for it in five] == [4, 9, 4, 9, 19]
    assert [it.L for it in five] == [4, 4, 3, 3, 2]


def test_multi_item_length_mismatch():
    env = MultiItemEnv(multi_item_params(2), seed=0)
    with pytest.raises(ActionError):
        env.step([1])


def test_multi_item_independent_streams():
    env = MultiItemEnv([TABLE_DEFAULTS, TABLE_DEFAULTS], seed=3)
    d0 = env.envs[0].draw_demands(50)
    d1 = env.envs[1].draw_demands(50)
    assert not np.array_equal(d0, d1)


# -- multi-echelon ----------------------------------------------------------

def brute_force_allocation(available, orders):
    """Oracle: enumerate all feasible integer splits and pick the
    largest-remainder one (closest to proportional in squared error, ties
    resolved toward more units at lower indexes)."""
    import itertools

    total = sum(orders)
    filled = min(total, available)
    if total == 0:
        return [0] * len(orders)
    quotas = [available * o / total for o in orders] if total > available else list(map(float, orders))
    best, best_key = None, None
    for split in itertools.product(*(range(o + 1) for o in orders)):
        if sum(split) != filled:
            continue
        err = sum((x - q) ** 2 for x, q in zip(split, quotas))
        key = (err, tuple(-x for x in split))
        if best_key is None or key < best_key:
            best, best_key = list(split), key
    return best


def test_allocation_worked_example():
    assert allocate_largest_remainder(5, [4, 4]) == [3, 2]
    assert brute_force_allocation(5, [4, 4]) == [3, 2]


@given(
    st.integers(0, 30),
    st.lists(st.integers(0, 12), min_size=1, max_size=4),
)
@settings(max_examples=200, deadline=None)
def test_allocation_matches_bruteforce(available, orders):
    assert allocate_largest_remainder(available, orders) == brute_force_allocation(
        available, orders
    )


def test_echelon_presets():
    cfg = echelon_config(2)
    assert cfg.warehouse.p == 4 and cfg.warehouse.L == 4
    assert [r.p for r in cfg.retailers] == [4, 9]
    assert [r.L for r in cfg.retailers] == [4, 4]


def test_echelon_shortage_and_allocation():
    base = TABLE_DEFAULTS.with_(L=2)
    cfg = MultiEchelonConfig(warehouse=base, retailers=(base, base))
    env = MultiEchelonEnv(cfg, seed=0)
    env.w_state = SingleItemState(5, (0,))
    result = env.step(0, [4, 4], r_demands=[0, 0])
    assert result.allocation == [3, 2]
    # Warehouse faced demand 8 with stock 5: censored, 3 units lost.
    assert result.warehouse.d_obs == 5 and result.warehouse.censored
    assert result.warehouse.r == -4.0 * 3
    # Shipments enter the retailer pipelines, arriving after their lead time.
    assert result.retailers[0].s_next.pipeline == (3,)
    assert result.retailers[1].s_next.pipeline == (2,)


def test_echelon_degenerate_matches_single_item():
    base = TABLE_DEFAULTS.with_(L=3)
    cfg = MultiEchelonConfig(warehouse=base.with_(a_max=1), retailers=(base,))
    env = MultiEchelonEnv(cfg, seed=0)
    env.reset(0, warehouse_y=base.y_max)
    single = SingleItemEnv(base, seed=0)
    demands = [4, 6, 2, 9, 0, 5, 7, 3, 1, 8]
    actions = [5, 3, 0, 7, 2, 4, 6, 1, 0, 5]
    for a, d in zip(actions, demands):
        res = env.step(0, [a], r_demands=[d])
        exp = single.step(a, demand=d)
        assert res.retailers[0].s == exp.s
        assert res.retailers[0].s_next == exp.s_next
        assert res.retailers[0].r == exp.r
        assert res.retailers[0].censored == exp.censored


def test_echelon_joint_reward_sums_nodes():
    cfg = echelon_config(2)
    env = MultiEchelonEnv(cfg, seed=1)
    res = env.step(3, [2, 2], r_demands=[1, 1])
    assert res.joint_r == pytest.approx(res.warehouse.r + sum(e.r for e in res.retailers))
