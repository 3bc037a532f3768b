"""Latency arithmetic for the split local/offloaded execution model."""

import numpy as np
import pytest

from famec import (
    AllocationState,
    ServerProfile,
    UserProfile,
    ZeroFrequency,
    ZeroRate,
    local_latency,
    offload_transfer_latency,
    server_exec_latency,
    system_total_latency,
    upload_latency,
    user_total_latency,
)


def _user(data_size=16000.0, cycles=1000.0, ratio=0.5, iters=10.0, freq=1e9, model=0.1):
    return UserProfile(
        data_size=data_size,
        cycles_per_bit=cycles,
        minibatch_ratio=ratio,
        local_iterations=iters,
        local_cpu_frequency=freq,
        model_size_factor=model,
    )


def _server(cycles=1000.0, ratio=0.5, iters=10.0, budget=1e10):
    return ServerProfile(
        cycles_per_bit=cycles,
        minibatch_ratio=ratio,
        server_iterations=iters,
        max_total_frequency=budget,
    )


UNIT_USER = _user(data_size=1.0, cycles=1.0, ratio=1.0, iters=1.0, freq=1.0, model=1.0)
UNIT_SERVER = _server(cycles=1.0, ratio=1.0, iters=1.0, budget=1.0)


def test_local_latency_unit_case():
    assert local_latency(UNIT_USER) == 1.0


def test_local_latency_halves_with_double_frequency():
    slow = local_latency(_user(freq=1e9))
    fast = local_latency(_user(freq=2e9))
    assert fast == pytest.approx(slow / 2.0, rel=1e-15)


def test_local_latency_reference_point():
    # 1000 cycles/bit on 16000 bits, half the data, 10 iterations, 1 GHz
    assert local_latency(_user()) == pytest.approx(0.08, rel=1e-12)


def test_upload_latency_cases():
    assert upload_latency(UNIT_USER, 1.0) == 1.0
    assert upload_latency(_user(), 1.6e6) == pytest.approx(1e-3, rel=1e-12)
    assert upload_latency(_user(), 1e30) < 1e-20
    with pytest.raises(ZeroRate):
        upload_latency(_user(), 0.0)
    with pytest.raises(ZeroRate):
        upload_latency(_user(), -1.0)


def test_transfer_latency_cases():
    assert offload_transfer_latency(UNIT_USER, 1.0) == 1.0
    assert offload_transfer_latency(_user(), 1.87e7) == pytest.approx(16000.0 / 1.87e7, rel=1e-12)
    with pytest.raises(ZeroRate):
        offload_transfer_latency(_user(), 0.0)


def test_transfer_latency_is_scale_invariant():
    base = offload_transfer_latency(_user(data_size=8000.0), 2e6)
    scaled = offload_transfer_latency(_user(data_size=8000.0 * 7.0), 2e6 * 7.0)
    assert scaled == pytest.approx(base, rel=1e-15)


def test_server_exec_latency_cases():
    assert server_exec_latency(UNIT_USER, UNIT_SERVER, 1.0) == 1.0
    half = server_exec_latency(_user(), _server(), 2e9)
    full = server_exec_latency(_user(), _server(), 1e9)
    assert half == pytest.approx(full / 2.0, rel=1e-15)
    assert server_exec_latency(_user(), _server(), 1e10) == pytest.approx(8e-3, rel=1e-12)
    with pytest.raises(ZeroFrequency):
        server_exec_latency(_user(), _server(), 0.0)


def test_total_latency_pure_local_branch():
    user = _user()
    rate = 2e6
    # beta 0 must not touch the server terms, so a zero share is fine
    value = user_total_latency(user, _server(), 0.0, 0.0, rate)
    assert value == local_latency(user) + upload_latency(user, rate)


def test_total_latency_pure_offload_branch():
    user = _user()
    rate = 2e6
    freq = 3e9
    value = user_total_latency(user, _server(), 1.0, freq, rate)
    expected = offload_transfer_latency(user, rate) + server_exec_latency(user, _server(), freq)
    assert value == pytest.approx(expected, rel=1e-15)


def test_total_latency_mixes_equal_branches():
    # both branches sum to 2 s, so any split gives 2 s
    value = user_total_latency(UNIT_USER, UNIT_SERVER, 0.5, 1.0, 1.0)
    assert value == pytest.approx(2.0, rel=1e-15)


def test_total_latency_is_affine_in_beta():
    rng = np.random.default_rng(20)
    for _ in range(20):
        user = _user(data_size=float(rng.uniform(4096, 16384)))
        rate = float(rng.uniform(1e6, 1e8))
        freq = float(rng.uniform(1e9, 1e10))
        b = float(rng.uniform(0.1, 0.8))
        h = 0.1
        at = [user_total_latency(user, _server(), x, freq, rate) for x in (b - h, b, b + h)]
        second_diff = at[0] - 2.0 * at[1] + at[2]
        assert abs(second_diff) <= 1e-12 * max(at)


def test_total_latency_monotone_in_rate_and_frequency():
    rng = np.random.default_rng(21)
    for _ in range(20):
        user = _user(data_size=float(rng.uniform(4096, 16384)))
        beta = float(rng.uniform(0.1, 1.0))
        rate = float(rng.uniform(1e6, 1e8))
        freq = float(rng.uniform(1e9, 1e10))
        base = user_total_latency(user, _server(), beta, freq, rate)
        assert user_total_latency(user, _server(), beta, freq, rate * 1.1) <= base
        assert user_total_latency(user, _server(), beta, freq * 1.1, rate) <= base
        assert base >= 0.0


def test_system_latency_single_user():
    user = _user()
    allocation = AllocationState(np.array([0.3]), np.array([2e9]))
    rates = np.array([5e6])
    total = system_total_latency([user], _server(), allocation, rates)
    assert total == user_total_latency(user, _server(), 0.3, 2e9, 5e6)


def test_system_latency_adds_identical_users():
    users = [_user() for _ in range(4)]
    allocation = AllocationState(np.full(4, 0.25), np.full(4, 1e9))
    rates = np.full(4, 5e6)
    total = system_total_latency(users, _server(), allocation, rates)
    single = user_total_latency(users[0], _server(), 0.25, 1e9, 5e6)
    assert total == pytest.approx(4.0 * single, rel=1e-14)


def test_system_latency_matches_loop_oracle():
    rng = np.random.default_rng(22)
    users = [_user(data_size=float(rng.uniform(4096, 16384))) for _ in range(3)]
    allocation = AllocationState(rng.uniform(0.0, 1.0, 3), rng.uniform(1e9, 3e9, 3))
    rates = rng.uniform(1e6, 1e8, 3)
    total = system_total_latency(users, _server(), allocation, rates)
    by_hand = sum(
        user_total_latency(
            users[n],
            _server(),
            float(allocation.offload_ratios[n]),
            float(allocation.server_frequencies[n]),
            float(rates[n]),
        )
        for n in range(3)
    )
    assert total == pytest.approx(by_hand, rel=1e-14)


def test_user_profile_rejects_nonpositive_fields():
    with pytest.raises(ValueError):
        _user(data_size=0.0)
    with pytest.raises(ValueError):
        _user(freq=-1e9)
    with pytest.raises(ValueError):
        _server(budget=0.0)


def test_allocation_state_validation():
    state = AllocationState(np.array([0.5, 0.0]), np.array([1e9, 0.0]))
    state.validate(1e10)
    with pytest.raises(ValueError):
        AllocationState(np.array([1.5, 0.0]), np.array([1e9, 0.0])).validate(1e10)
    with pytest.raises(ValueError):
        AllocationState(np.array([0.5, 0.0]), np.array([0.0, 0.0])).validate(1e10)
    with pytest.raises(ValueError):
        AllocationState(np.array([0.5, 0.5]), np.array([8e9, 8e9])).validate(1e10)
    with pytest.raises(ValueError):
        AllocationState(np.array([0.5]), np.array([1e9, 1e9]))
    local = AllocationState.local_only(3)
    assert np.array_equal(local.offload_ratios, np.zeros(3))
    assert np.array_equal(local.server_frequencies, np.zeros(3))
