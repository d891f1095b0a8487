import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lostsales.env import Experience, SingleItemEnv, SingleItemState
from lostsales.errors import ConfigError
from lostsales.fg import (
    FeedbackGraphSpec,
    generate_side_experiences,
    side_batch_arrays,
    side_count,
    side_state_action_grid,
)
from lostsales.params import ItemParams


def make_exp(params, y, pipe, a, d):
    env = SingleItemEnv(params, seed=0)
    env.state = SingleItemState(y, pipe)
    return env.step(a, demand=d)


def test_count_censored_small():
    p = ItemParams(L=2, a_max=2, y_max=10, d_max=5, d_mean=2.0)
    exp = make_exp(p, 3, (1,), 2, 9)  # demand exceeds stock -> censored at 3
    assert exp.censored
    side = generate_side_experiences(exp, FeedbackGraphSpec(), p)
    assert len(side) == 12  # (3+1) * (2+1)
    assert side_count(exp, FeedbackGraphSpec(), p) == 12
    assert {s.s.y for s in side} == {0, 1, 2, 3}


def test_count_uncensored_full_grid():
    p = ItemParams()  # y_max 100, a_max 20
    exp = make_exp(p.with_(L=2), 50, (0,), 4, 3)
    assert not exp.censored
    spec = FeedbackGraphSpec()
    assert side_count(exp, spec, p.with_(L=2)) == 101 * 21 == 2121
    side = generate_side_experiences(exp, spec, p.with_(L=2))
    assert len(side) == 2121


def test_count_closed_forms():
    p = ItemParams(L=3)
    exp_c = make_exp(p, 0, (0, 0), 0, 5)
    assert exp_c.censored
    assert side_count(exp_c, FeedbackGraphSpec(), p) == 21
    exp_u = make_exp(p, 80, (0, 0), 0, 5)
    assert side_count(exp_u, FeedbackGraphSpec(enumerate_pipeline_dims=1), p) == 101 * 21**2


def test_side_reward_worked_example():
    p = ItemParams(L=2, a_max=2, y_max=10, d_max=5, d_mean=2.0)
    exp = make_exp(p, 3, (2,), 1, 3)  # censored at 3, d_obs = 3
    side = generate_side_experiences(exp, FeedbackGraphSpec(), p)
    match = [s for s in side if s.s.y == 1 and s.a == 0]
    assert len(match) == 1
    s = match[0]
    assert s.r == -8.0  # penalty 4 * (3 - 1)
    assert s.s_next == SingleItemState(2, (0,))


def test_enumeration_order():
    p = ItemParams(L=2, a_max=1, y_max=5, d_max=2, d_mean=1.0)
    exp = make_exp(p, 1, (1,), 0, 2)
    side = generate_side_experiences(exp, FeedbackGraphSpec(), p)
    assert [(s.s.y, s.a) for s in side] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_self_inclusion_default_scope():
    p = ItemParams(L=3, a_max=3, y_max=8, d_max=4, d_mean=1.5)
    exp = make_exp(p, 5, (2, 1), 3, 1)
    side = generate_side_experiences(exp, FeedbackGraphSpec(), p)
    assert any(s.s == exp.s and s.a == exp.a for s in side)


@st.composite
def random_experience(draw):
    L = draw(st.integers(1, 3))
    a_max = draw(st.integers(1, 4))
    y_max = draw(st.integers(4, 12))
    d_max = draw(st.integers(1, min(6, y_max)))
    p = ItemParams(L=L, a_max=a_max, y_max=y_max, d_max=d_max, d_mean=2.0, c=0.3)
    y = draw(st.integers(0, y_max))
    pipe = tuple(draw(st.integers(0, a_max)) for _ in range(L - 1))
    a = draw(st.integers(0, a_max))
    d = draw(st.integers(0, d_max))
    k = draw(st.integers(0, L - 1))
    return p, make_exp(p, y, pipe, a, d), k


@given(random_experience())
@settings(max_examples=120, deadline=None)
def test_side_count_equals_length_and_censor_bound(case):
    p, exp, k = case
    spec = FeedbackGraphSpec(enumerate_pipeline_dims=k)
    side = generate_side_experiences(exp, spec, p)
    assert len(side) == side_count(exp, spec, p)
    if exp.censored:
        assert all(s.s.y <= exp.s.y for s in side)
    else:
        assert {s.s.y for s in side} == set(range(p.y_max + 1))


@given(random_experience())
@settings(max_examples=120, deadline=None)
def test_side_experiences_consistent_with_env(case):
    """Every side tuple equals a real environment step forced to d_obs."""
    p, exp, k = case
    spec = FeedbackGraphSpec(enumerate_pipeline_dims=k)
    env = SingleItemEnv(p, seed=0)
    for s in generate_side_experiences(exp, spec, p):
        env.state = s.s
        ref = env.step(s.a, demand=exp.d_obs)
        assert ref.r == s.r
        assert ref.s_next == s.s_next
        assert ref.d_obs == s.d_obs
        assert ref.censored == s.censored


@given(random_experience())
@settings(max_examples=60, deadline=None)
def test_batch_arrays_match_list_generator(case):
    p, exp, k = case
    spec = FeedbackGraphSpec(enumerate_pipeline_dims=k)
    side = generate_side_experiences(exp, spec, p)
    states, actions, rewards, next_states, d_obs, censored = side_batch_arrays(
        exp.s.y, exp.s.pipeline, exp.d_obs, exp.censored, p, k=k
    )
    assert len(side) == len(actions)
    for i, s in enumerate(side):
        assert tuple(states[i].astype(int)) == (s.s.y,) + s.s.pipeline
        assert actions[i] == s.a
        assert rewards[i] == s.r
        assert tuple(next_states[i].astype(int)) == (s.s_next.y,) + s.s_next.pipeline
        assert d_obs[i] == s.d_obs
        assert censored[i] == s.censored


def test_grid_helper_matches_batch_states():
    p = ItemParams(L=2, a_max=3, y_max=10, d_max=8, d_mean=2.0)
    exp = make_exp(p, 4, (2,), 1, 9)
    states, actions, *_ = side_batch_arrays(exp.s.y, exp.s.pipeline, exp.d_obs, exp.censored, p)
    g_states, g_actions = side_state_action_grid(4, exp.s.pipeline, p.a_max)
    assert np.array_equal(states, g_states)
    assert np.array_equal(actions, g_actions)


def test_cap_subsamples_in_order():
    p = ItemParams(L=2, a_max=3, y_max=10, d_max=8, d_mean=2.0)
    exp = make_exp(p, 9, (1,), 2, 3)
    spec = FeedbackGraphSpec(cap_side_per_experience=10)
    rng = np.random.default_rng(0)
    side = generate_side_experiences(exp, spec, p, rng=rng)
    assert len(side) == 10 == side_count(exp, spec, p)
    ys = [(s.s.y, s.a) for s in side]
    assert ys == sorted(ys)
    with pytest.raises(ConfigError):
        generate_side_experiences(exp, spec, p)  # cap without an RNG


def test_spec_validation():
    p = ItemParams(L=2)
    with pytest.raises(ConfigError):
        FeedbackGraphSpec(enumerate_pipeline_dims=2).check_against(p)
    with pytest.raises(ConfigError):
        FeedbackGraphSpec(enumerate_pipeline_dims=-1)
