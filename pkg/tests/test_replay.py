import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lostsales.errors import ConfigError
from lostsales.replay import ReplayBuffer


def row(v, state_dim=2):
    return ReplayBuffer.pack([v] * state_dim, v, -v, [v] * state_dim, v, False)


def test_pack_unpack_roundtrip():
    buf = ReplayBuffer(8, state_dim=3)
    buf.add(ReplayBuffer.pack([1, 2, 3], 4, -5.5, [6, 7, 8], 2, True))
    states, actions, rewards, next_states, d_obs, censored = buf.unpack(buf.oldest_first())
    assert states.tolist() == [[1, 2, 3]]
    assert actions.tolist() == [4]
    assert rewards.tolist() == [-5.5]
    assert next_states.tolist() == [[6, 7, 8]]
    assert d_obs.tolist() == [2]
    assert censored.tolist() == [True]


@given(st.lists(st.integers(0, 10**6), min_size=0, max_size=300), st.integers(1, 40))
@settings(max_examples=80, deadline=None)
def test_capacity_and_fifo_eviction(values, capacity):
    buf = ReplayBuffer(capacity, state_dim=2)
    for v in values:
        buf.add(row(v))
        assert len(buf) <= capacity
    kept = buf.unpack(buf.oldest_first())[1].tolist()
    assert kept == values[-min(len(values), capacity):]


@given(
    st.lists(st.lists(st.integers(0, 10**6), min_size=0, max_size=50), max_size=12),
    st.integers(1, 30),
)
@settings(max_examples=60, deadline=None)
def test_add_batch_equals_sequential_adds(chunks, capacity):
    a = ReplayBuffer(capacity, state_dim=2)
    b = ReplayBuffer(capacity, state_dim=2)
    for chunk in chunks:
        rows = np.array([row(v) for v in chunk]).reshape(len(chunk), a.row_dim)
        a.add_batch(rows)
        for v in chunk:
            b.add(row(v))
        assert np.array_equal(a.oldest_first(), b.oldest_first())


def test_sampling_uniform_and_deterministic():
    buf = ReplayBuffer(100, state_dim=1)
    for v in range(100):
        buf.add(ReplayBuffer.pack([v], v, 0.0, [v], 0, False))
    s1 = buf.sample(64, np.random.Generator(np.random.PCG64(5)))
    s2 = buf.sample(64, np.random.Generator(np.random.PCG64(5)))
    assert np.array_equal(s1, s2)


def test_validation():
    with pytest.raises(ConfigError):
        ReplayBuffer(0, state_dim=2)
    with pytest.raises(ConfigError):
        ReplayBuffer(4, state_dim=2, kind="weird")
