import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lostsales.curiosity import (
    IntrinsicRewardConfig,
    disagreement_from_values,
    head_disagreement,
    intrinsic_reward,
    mix_reward,
)
from lostsales.errors import ConfigError


class StubModel:
    """Fixed per-head values: heads x actions, independent of state."""

    def __init__(self, table):
        self.table = np.asarray(table, dtype=float)
        self.M = self.table.shape[0]

    def head_values(self, x):
        B = x.shape[0]
        return np.repeat(self.table[:, None, :], B, axis=1)


def test_disagreement_two_heads():
    model = StubModel([[1.0], [3.0]])
    assert head_disagreement(model, [0.0], 0) == pytest.approx(math.sqrt(2) / 2)


def test_disagreement_all_equal_is_zero():
    model = StubModel([[2.5], [2.5], [2.5]])
    assert head_disagreement(model, [0.0], 0) == 0.0


def test_disagreement_four_heads():
    model = StubModel([[0.0], [0.0], [0.0], [4.0]])
    assert head_disagreement(model, [0.0], 0) == pytest.approx(math.sqrt(12) / 4)


def test_disagreement_needs_two_heads():
    with pytest.raises(ConfigError):
        disagreement_from_values(np.array([[1.0]]))


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=8))
def test_disagreement_head_permutation_invariant(vals):
    v = np.array(vals)
    base = disagreement_from_values(v)
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert disagreement_from_values(rng.permutation(v)) == pytest.approx(base)
    assert base >= 0.0
    assert (base == 0.0) == bool(np.all(v == v[0]))


def test_intrinsic_reward_worked_examples():
    r = intrinsic_reward(math.sqrt(2) / 2, [0.5] * 10)
    assert r == pytest.approx(math.sqrt(2) / 2 + 0.5)  # log10(10) = 1
    assert intrinsic_reward(0.3, [9.9]) == pytest.approx(0.3)  # log10(1) = 0
    assert intrinsic_reward(0.42, []) == pytest.approx(0.42)  # degenerate


def test_intrinsic_reward_permutation_invariant():
    rng = np.random.default_rng(1)
    sides = rng.random(17).tolist()
    base = intrinsic_reward(0.2, sides)
    assert intrinsic_reward(0.2, list(reversed(sides))) == pytest.approx(base)


def test_intrinsic_reward_monotone_in_count_at_fixed_mean():
    vals = [intrinsic_reward(0.1, [0.5] * j) for j in (1, 4, 44, 84, 2121)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_censored_vs_uncensored_side_counts_order_reward():
    # Same mean curiosity, side counts 84 (censored y=3) vs 2121 (full grid).
    censored = intrinsic_reward(0.7, [0.5] * 84)
    uncensored = intrinsic_reward(0.7, [0.5] * 2121)
    assert uncensored > censored


def test_mix_reward_examples():
    assert mix_reward(-3.0, 1.2, 0.01) == pytest.approx(-2.958)
    r = -7.25
    assert mix_reward(r, 123.4, 0.0) is r or mix_reward(r, 123.4, 0.0) == r
    assert mix_reward(-3.0, 1.2, 1.0) == 1.2


@given(
    st.floats(-50, 0),
    st.floats(-5, 5),
    st.floats(0, 1),
)
def test_mix_reward_affine_and_fixed_point(r, r_in, beta):
    mixed = mix_reward(r, r_in, beta)
    assert mixed == pytest.approx((1 - beta) * r + beta * r_in)
    assert mix_reward(r, r, beta) == pytest.approx(r)


def test_mix_reward_beta_zero_bit_exact():
    r = -0.0
    assert str(mix_reward(r, 5.0, 0.0)) == str(r)


def test_mix_reward_bounds():
    with pytest.raises(ConfigError):
        mix_reward(-1.0, 0.0, 1.5)


def test_intrinsic_config_validation_and_decay():
    cfg = IntrinsicRewardConfig(beta0=0.01, beta_decay=0.9, M=5)
    assert cfg.beta_at(0) == 0.01
    assert cfg.beta_at(2) == pytest.approx(0.01 * 0.81)
    with pytest.raises(ConfigError):
        IntrinsicRewardConfig(beta0=2.0)
    with pytest.raises(ConfigError):
        IntrinsicRewardConfig(beta_decay=0.0)
    with pytest.raises(ConfigError):
        IntrinsicRewardConfig(M=1)
