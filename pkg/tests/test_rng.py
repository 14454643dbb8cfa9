import pytest
from hypothesis import given, strategies as st

from kinex.errors import UsageError
from kinex.rng import MASK64, RngStream, splitmix64


def test_splitmix64_reference_value():
    state, out = splitmix64(0)
    assert state == 0x9E3779B97F4A7C15
    assert out == 0xE220A8397B1DCDAF


def test_same_seed_same_sequence():
    a = RngStream(42)
    b = RngStream(42)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_different_seeds_differ():
    a = RngStream(42)
    b = RngStream(43)
    assert [a.next_u64() for _ in range(5)] != [b.next_u64() for _ in range(5)]


def test_streams_are_jumps_of_the_base_stream():
    base = RngStream(7)
    base.jump()
    assert base.state == RngStream(7, 1).state
    assert RngStream(7, 0).state != RngStream(7, 1).state != RngStream(7, 2).state


def test_restore_resumes_the_sequence():
    a = RngStream(99, 3)
    a.next_u64()
    b = RngStream(0)
    b.restore(a.state)
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]


def test_restore_rejects_zero_state():
    with pytest.raises(UsageError):
        RngStream(1).restore((0, 0, 0, 0))


def test_outputs_are_64_bit():
    stream = RngStream(1)
    assert all(0 <= stream.next_u64() <= MASK64 for _ in range(1000))


@given(st.integers(min_value=0, max_value=MASK64), st.integers(min_value=1, max_value=10**6))
def test_below_stays_in_range(seed, n):
    stream = RngStream(seed)
    assert all(0 <= stream.below(n) < n for _ in range(20))


@given(st.integers(min_value=0, max_value=MASK64))
def test_uniform_in_unit_interval(seed):
    stream = RngStream(seed)
    assert all(0.0 <= stream.uniform() < 1.0 for _ in range(20))


def test_uniform_mean():
    stream = RngStream(2024)
    values = [stream.uniform() for _ in range(20000)]
    assert sum(values) / len(values) == pytest.approx(0.5, abs=0.01)


def test_invalid_arguments():
    with pytest.raises(UsageError):
        RngStream(1, -1)
    with pytest.raises(UsageError):
        RngStream(1).below(0)
