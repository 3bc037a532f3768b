"""Channel construction, zero-forcing combining and rate identities."""

import cmath
import math

import numpy as np
import pytest

import _helpers
import _oracles
from famec import (
    ChannelMatrix,
    PlanarPosition,
    RankDeficientChannel,
    UserChannelSpec,
    build_channel_matrix,
    channel_vector,
    field_response_vector,
    per_user_rate,
    phase_difference,
    positions_to_vector,
    reference_grid,
    vector_to_positions,
    zf_combining_matrix,
)

WAVELENGTH = 0.1


def _single_path_spec(elevation, azimuth, gain=1.0 + 0j):
    return UserChannelSpec(
        elevation_aoas=np.array([elevation]),
        azimuth_aoas=np.array([azimuth]),
        path_gains=np.array([gain]),
        transmit_power=1.0,
        distance_to_bs=50.0,
    )


def test_phase_difference_zero_at_reference_point():
    assert phase_difference(PlanarPosition(0.0, 0.0), 0.7, -1.2) == 0.0


def test_phase_difference_projects_onto_axes():
    pos = PlanarPosition(0.3, -0.4)
    # elevation pi/2 kills the y term, elevation 0 kills the x term
    assert phase_difference(pos, math.pi / 2, 0.0) == pytest.approx(0.3, abs=1e-15)
    assert phase_difference(pos, 0.0, 1.1) == pytest.approx(-0.4, abs=1e-15)


def test_field_response_is_all_ones_at_origin():
    rng = np.random.default_rng(0)
    spec = _helpers.random_spec(rng)
    f = field_response_vector(PlanarPosition(0.0, 0.0), spec, WAVELENGTH)
    assert np.array_equal(f, np.ones(3, dtype=complex))


def test_field_response_half_wavelength_flip():
    spec = _single_path_spec(math.pi / 2, 0.0)
    f = field_response_vector(PlanarPosition(WAVELENGTH / 2.0, 0.0), spec, WAVELENGTH)
    assert abs(f[0] - (-1.0)) <= 1e-12


def test_field_response_matches_termwise_recomputation():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(50):
        spec = _helpers.random_spec(rng, paths=4)
        pos = _helpers.random_positions(rng, 1)[0]
        f = field_response_vector(pos, spec, WAVELENGTH)
        for l in range(4):
            rho = pos.x * math.sin(spec.elevation_aoas[l]) * math.cos(
                spec.azimuth_aoas[l]
            ) + pos.y * math.cos(spec.elevation_aoas[l])
            expected = cmath.exp(1j * 2.0 * math.pi * rho / WAVELENGTH)
            worst = max(worst, abs(f[l] - expected))
        worst = max(worst, float(np.max(np.abs(np.abs(f) - 1.0))))
    assert worst <= 1e-12


def test_channel_vector_unit_gain_at_origin():
    spec = _single_path_spec(0.4, -0.2)
    origin = [PlanarPosition(0.0, 0.0)] * 3
    h = channel_vector(origin, spec, WAVELENGTH)
    assert np.allclose(h, np.ones(3), atol=1e-15)


def test_channel_vector_zero_gains_give_zero_vector():
    rng = np.random.default_rng(2)
    base = _helpers.random_spec(rng)
    spec = UserChannelSpec(
        elevation_aoas=base.elevation_aoas,
        azimuth_aoas=base.azimuth_aoas,
        path_gains=np.zeros(3, dtype=complex),
        transmit_power=1.0,
        distance_to_bs=50.0,
    )
    positions = _helpers.random_positions(rng, 4)
    assert np.array_equal(channel_vector(positions, spec, WAVELENGTH), np.zeros(4))


def test_channel_vector_matches_naive_summation():
    rng = np.random.default_rng(3)
    for _ in range(20):
        spec = _helpers.random_spec(rng, paths=2)
        positions = _helpers.random_positions(rng, 2)
        fast = channel_vector(positions, spec, WAVELENGTH)
        slow = _oracles.naive_channel_vector(positions, spec, WAVELENGTH)
        assert np.allclose(fast, slow, rtol=1e-12, atol=1e-18)


def test_single_path_magnitudes_survive_translation():
    # with one path each entry has magnitude |g| and the vector norm cannot
    # change under a common shift of all antennas
    rng = np.random.default_rng(4)
    for _ in range(10):
        spec = _helpers.random_spec(rng, paths=1)
        positions = _helpers.random_positions(rng, 4)
        shift = rng.uniform(-0.3, 0.3, 2)
        moved = [PlanarPosition(p.x + shift[0], p.y + shift[1]) for p in positions]
        h = channel_vector(positions, spec, WAVELENGTH)
        h_moved = channel_vector(moved, spec, WAVELENGTH)
        g_mag = abs(complex(spec.path_gains[0]))
        assert np.allclose(np.abs(h), g_mag, rtol=1e-12)
        assert np.allclose(np.abs(h_moved), g_mag, rtol=1e-12)
        assert np.linalg.norm(h) == pytest.approx(np.linalg.norm(h_moved), rel=1e-12)


def test_channel_matrix_columns_match_channel_vector():
    rng = np.random.default_rng(5)
    specs = [_helpers.random_spec(rng) for _ in range(3)]
    positions = _helpers.random_positions(rng, 4)
    matrix = build_channel_matrix(positions, specs, WAVELENGTH)
    for n, spec in enumerate(specs):
        assert np.array_equal(matrix.entries[:, n], channel_vector(positions, spec, WAVELENGTH))
    assert matrix.antenna_positions == positions


def test_zf_of_identity_channel_is_identity():
    channel = ChannelMatrix(
        entries=np.eye(3, dtype=complex),
        antenna_positions=[PlanarPosition(0.0, 0.0)] * 3,
    )
    w = zf_combining_matrix(channel)
    assert np.allclose(w.entries, np.eye(3), atol=1e-12)


def test_zf_single_user_is_matched_filter_over_norm():
    rng = np.random.default_rng(6)
    h = rng.normal(size=4) + 1j * rng.normal(size=4)
    channel = ChannelMatrix(
        entries=h[:, None], antenna_positions=[PlanarPosition(0.0, 0.0)] * 4
    )
    w = zf_combining_matrix(channel)
    expected = h / float(np.real(np.vdot(h, h)))
    assert np.allclose(w.entries[:, 0], expected, rtol=1e-12)


def test_zf_identity_on_random_instances():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(30):
        specs = [_helpers.random_spec(rng) for _ in range(3)]
        positions = _helpers.random_positions(rng, 4)
        channel = build_channel_matrix(positions, specs, WAVELENGTH)
        w = zf_combining_matrix(channel)
        resid = w.entries.conj().T @ channel.entries - np.eye(3)
        worst = max(worst, float(np.max(np.abs(resid))))
    assert worst <= 1e-9


def test_zf_rejects_colocated_antennas():
    rng = np.random.default_rng(8)
    specs = [_helpers.random_spec(rng) for _ in range(3)]
    stacked = [PlanarPosition(0.02, -0.01)] * 4
    channel = build_channel_matrix(stacked, specs, WAVELENGTH)
    with pytest.raises(RankDeficientChannel):
        zf_combining_matrix(channel)


def test_zf_rejects_more_users_than_antennas():
    rng = np.random.default_rng(9)
    specs = [_helpers.random_spec(rng) for _ in range(3)]
    positions = _helpers.random_positions(rng, 2)
    channel = build_channel_matrix(positions, specs, WAVELENGTH)
    with pytest.raises(RankDeficientChannel):
        zf_combining_matrix(channel)


def test_rate_unit_case_is_one_bit():
    channel = ChannelMatrix(
        entries=np.ones((1, 1), dtype=complex),
        antenna_positions=[PlanarPosition(0.0, 0.0)],
    )
    w = zf_combining_matrix(channel)
    noise = 3.5e-15
    rate = per_user_rate(channel, w, 0, noise, noise, 1.0)
    assert rate == pytest.approx(1.0, rel=1e-12)


def test_rate_vanishes_without_power():
    rng = np.random.default_rng(10)
    specs = [_helpers.random_spec(rng) for _ in range(3)]
    positions = _helpers.random_positions(rng, 4)
    channel = build_channel_matrix(positions, specs, WAVELENGTH)
    w = zf_combining_matrix(channel)
    assert per_user_rate(channel, w, 0, 0.0, 1e-15, 1e6) == 0.0


def test_rate_matches_general_interference_form():
    rng = np.random.default_rng(11)
    noise = 3.981e-15
    worst = 0.0
    for _ in range(30):
        specs = [_helpers.random_spec(rng) for _ in range(3)]
        positions = _helpers.random_positions(rng, 4)
        channel = build_channel_matrix(positions, specs, WAVELENGTH)
        w = zf_combining_matrix(channel)
        powers = [s.transmit_power for s in specs]
        for n in range(3):
            direct = per_user_rate(channel, w, n, powers[n], noise, 1e6)
            general = _oracles.general_rate(channel, w, n, powers, noise, 1e6)
            worst = max(worst, abs(direct - general) / abs(general))
    assert worst <= 1e-9


def test_reference_grid_four_antennas():
    grid = reference_grid(4, 0.1)
    got = sorted((round(p.x, 12), round(p.y, 12)) for p in grid)
    assert got == [(-0.05, -0.05), (-0.05, 0.05), (0.05, -0.05), (0.05, 0.05)]


@pytest.mark.parametrize("count", [1, 3, 5, 6, 8])
def test_reference_grid_respects_spacing(count):
    grid = reference_grid(count, 0.1)
    assert len(grid) == count
    for i, a in enumerate(grid):
        for b in grid[i + 1 :]:
            assert math.hypot(a.x - b.x, a.y - b.y) >= 0.1 - 1e-12


def test_position_vector_round_trip():
    positions = [PlanarPosition(1.0, 2.0), PlanarPosition(-3.0, 4.5)]
    vec = positions_to_vector(positions)
    assert np.array_equal(vec, np.array([1.0, 2.0, -3.0, 4.5]))
    assert vector_to_positions(vec) == positions
    with pytest.raises(ValueError):
        vector_to_positions(np.array([1.0, 2.0, 3.0]))


def test_channel_matrix_is_deterministic():
    rng = np.random.default_rng(12)
    specs = [_helpers.random_spec(rng) for _ in range(3)]
    positions = _helpers.random_positions(rng, 4)
    a = build_channel_matrix(positions, specs, WAVELENGTH)
    b = build_channel_matrix(positions, specs, WAVELENGTH)
    assert np.array_equal(a.entries, b.entries)
