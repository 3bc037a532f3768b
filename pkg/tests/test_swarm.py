"""Swarm dynamics, penalty arithmetic and the penalized placement objective."""

import math

import numpy as np
import pytest

import _helpers
import _oracles
from famec import (
    AllocationState,
    Particle,
    PlanarPosition,
    ScenarioConfig,
    SwarmConfig,
    clamp_positions,
    fitness,
    inertia_weight,
    init_swarm,
    penalty,
    positions_to_vector,
    run_pso,
    sample_scenario,
    update_particle,
)

BASE = dict(region_half_width=0.15, min_spacing=0.1)


class _OnesRng:
    """Stands in for a Generator; every uniform draw is 1."""

    def random(self, size=None):
        if size is None:
            return 1.0
        return np.ones(size)


def test_config_validation():
    with pytest.raises(ValueError):
        SwarmConfig(particle_count=1, **BASE)
    with pytest.raises(ValueError):
        SwarmConfig(max_iterations=-1, **BASE)
    with pytest.raises(ValueError):
        SwarmConfig(inertia_max=0.3, inertia_min=0.4, **BASE)
    with pytest.raises(ValueError):
        SwarmConfig(region_half_width=0.0, min_spacing=0.1)
    cfg = SwarmConfig(**BASE)
    assert cfg.velocity_clamp == pytest.approx(0.075)


def test_inertia_weight_endpoints_and_midpoint():
    cfg = SwarmConfig(**BASE)
    assert inertia_weight(cfg, 0, 50) == cfg.inertia_max
    assert inertia_weight(cfg, 50, 50) == cfg.inertia_min
    mid = inertia_weight(cfg, 25, 50)
    assert mid == pytest.approx((cfg.inertia_max + cfg.inertia_min) / 2.0, rel=1e-15)


def test_clamp_positions():
    a = 0.15
    vec = np.array([0.1, -0.12, 0.3, -0.45])
    clamped = clamp_positions(vec, a)
    assert np.array_equal(clamped, np.array([0.1, -0.12, a, -a]))
    in_range = np.array([0.05, -0.05])
    assert np.array_equal(clamp_positions(in_range, a), in_range)


def test_update_is_stationary_at_shared_best():
    cfg = SwarmConfig(**BASE)
    x = np.array([0.02, -0.05, 0.1, 0.0])
    particle = Particle(
        position=x.copy(),
        velocity=np.zeros(4),
        personal_best_position=x.copy(),
        personal_best_fitness=1.0,
    )
    moved = update_particle(particle, x.copy(), 0.7, cfg, np.random.default_rng(0))
    assert np.array_equal(moved.position, x)
    assert np.array_equal(moved.velocity, np.zeros(4))


def test_pure_social_pull_lands_on_global_best():
    cfg = SwarmConfig(cognitive_factor=0.0, social_factor=1.0, **BASE)
    x = np.zeros(4)
    g = np.array([0.03, -0.02, 0.01, 0.04])
    particle = Particle(
        position=x.copy(),
        velocity=np.zeros(4),
        personal_best_position=x.copy(),
        personal_best_fitness=1.0,
    )
    moved = update_particle(particle, g, 0.0, cfg, _OnesRng())
    assert np.allclose(moved.position, g, atol=1e-15)


def test_update_clamps_velocity_and_position():
    cfg = SwarmConfig(cognitive_factor=0.0, social_factor=1.0, **BASE)
    # target far outside: velocity saturates at the clamp, position at the wall
    x = np.full(2, 0.14)
    particle = Particle(
        position=x.copy(),
        velocity=np.zeros(2),
        personal_best_position=x.copy(),
        personal_best_fitness=1.0,
    )
    g = np.full(2, 10.0)
    moved = update_particle(particle, g, 0.0, cfg, _OnesRng())
    assert np.all(np.abs(moved.velocity) <= cfg.velocity_clamp + 1e-15)
    assert np.all(moved.position <= cfg.region_half_width)
    assert np.array_equal(moved.position, np.full(2, cfg.region_half_width))


def test_penalty_zero_when_feasible():
    cfg = SwarmConfig(**BASE)
    positions = [PlanarPosition(-0.1, -0.1), PlanarPosition(0.1, 0.1)]
    lats = np.array([0.05, 0.04])
    caps = np.array([0.06, 0.04])
    assert penalty(positions, lats, caps, cfg) == 0.0


def test_penalty_spacing_boundary_and_violation():
    cfg = SwarmConfig(**BASE)
    lats = np.array([0.01])
    caps = np.array([0.02])
    at_spacing = [PlanarPosition(0.0, 0.0), PlanarPosition(0.1, 0.0)]
    assert penalty(at_spacing, lats, caps, cfg) == 0.0
    tight = [PlanarPosition(0.0, 0.0), PlanarPosition(0.05, 0.0)]
    assert penalty(tight, lats, caps, cfg) == cfg.penalty_distance


def test_penalty_counts_each_close_pair():
    cfg = SwarmConfig(**BASE)
    clustered = [
        PlanarPosition(0.0, 0.0),
        PlanarPosition(0.01, 0.0),
        PlanarPosition(0.0, 0.01),
    ]
    lats = np.array([0.01])
    caps = np.array([0.02])
    assert penalty(clustered, lats, caps, cfg) == 3.0 * cfg.penalty_distance


def test_penalty_latency_excess_is_quadratic():
    cfg = SwarmConfig(**BASE)
    positions = [PlanarPosition(-0.1, 0.0), PlanarPosition(0.1, 0.0)]
    caps = np.array([0.05, 0.08])
    excess = 0.25
    lats = caps + np.array([excess, 0.0])
    assert penalty(positions, lats, caps, cfg) == pytest.approx(
        cfg.penalty_latency * excess**2, rel=1e-15
    )
    # at the cap exactly there is no violation
    assert penalty(positions, caps.copy(), caps, cfg) == 0.0


def test_penalty_combines_both_terms():
    cfg = SwarmConfig(**BASE)
    positions = [PlanarPosition(0.0, 0.0), PlanarPosition(0.02, 0.0)]
    caps = np.array([0.05])
    lats = np.array([0.06])
    expected = cfg.penalty_latency * 0.01**2 + cfg.penalty_distance
    assert penalty(positions, lats, caps, cfg) == pytest.approx(expected, rel=1e-12)


def test_penalty_randomized_zero_iff_feasible():
    rng = np.random.default_rng(50)
    cfg = SwarmConfig(**BASE)
    for _ in range(300):
        positions = _helpers.random_positions(rng, 4)
        caps = rng.uniform(0.05, 0.2, 3)
        lats = caps * rng.uniform(0.5, 1.5, 3)
        value = penalty(positions, lats, caps, cfg)
        lat_ok = bool(np.all(lats <= caps))
        spacing_ok = all(
            math.hypot(a.x - b.x, a.y - b.y) >= cfg.min_spacing
            for i, a in enumerate(positions)
            for b in positions[i + 1 :]
        )
        assert (value == 0.0) == (lat_ok and spacing_ok)
        assert value >= 0.0


def test_fitness_equals_direct_recomputation():
    instance = sample_scenario(ScenarioConfig(), 60)
    n = len(instance.users)
    allocation = AllocationState(
        np.full(n, 0.4), np.full(n, instance.config.server_max_frequency / (2 * n))
    )
    context, allocation, swarm_cfg = _helpers.context_for(instance, allocation)
    rng = np.random.default_rng(61)
    for _ in range(10):
        vec = positions_to_vector(
            _helpers.random_positions(rng, 4, instance.config.region_half_width)
        )
        expected, _ = _oracles.direct_fitness(vec, instance, allocation, swarm_cfg)
        assert fitness(vec, context) == pytest.approx(expected, rel=1e-9)


def test_fitness_sentinel_for_colocated_antennas():
    instance = sample_scenario(ScenarioConfig(), 62)
    context, _, _ = _helpers.context_for(instance)
    vec = np.tile([0.02, -0.01], 4)
    assert fitness(vec, context) == 1e6


def test_init_swarm_is_uniform_and_seeded():
    cfg_small = ScenarioConfig(antenna_count=1, user_count=1)
    instance = sample_scenario(cfg_small, 63)
    context, _, _ = _helpers.context_for(instance)
    half = cfg_small.region_half_width
    swarm_cfg = SwarmConfig(
        region_half_width=half, min_spacing=cfg_small.min_spacing, particle_count=50000
    )
    state = init_swarm(swarm_cfg, 1, 77, context)
    coords = np.concatenate([p.position for p in state.particles])
    assert coords.size == 100000
    assert np.all(np.abs(coords) <= half)
    # mean of U[-half, half] over n draws: 3 standard errors around zero
    standard_error = half / math.sqrt(3.0 * coords.size)
    assert abs(float(np.mean(coords))) <= 3.0 * standard_error
    again = init_swarm(swarm_cfg, 1, 77, context)
    assert all(
        np.array_equal(a.position, b.position)
        for a, b in zip(state.particles, again.particles)
    )
    assert all(np.array_equal(p.velocity, np.zeros(2)) for p in state.particles[:10])
    fits = [p.personal_best_fitness for p in state.particles]
    assert state.global_best_fitness == min(fits)


def test_init_swarm_keeps_injected_incumbent():
    instance = sample_scenario(ScenarioConfig(), 64)
    context, _, swarm_cfg = _helpers.context_for(instance)
    incumbent = np.full(8, 0.4)  # outside the region, must come back clamped
    state = init_swarm(swarm_cfg, 4, 5, context, initial_position=incumbent)
    assert np.array_equal(
        state.particles[0].position, np.full(8, swarm_cfg.region_half_width)
    )


def test_run_pso_trace_shape_and_monotonicity():
    instance = sample_scenario(ScenarioConfig(), 65)
    context, _, _ = _helpers.context_for(instance)
    swarm_cfg = SwarmConfig(particle_count=12, max_iterations=20, **BASE)
    best_position, best_fitness, trace = run_pso(swarm_cfg, context, rng_seed=9)
    assert trace.shape == (21,)
    assert np.all(np.diff(trace) <= 0.0)
    assert trace[-1] == best_fitness
    assert best_position.shape == (8,)


def test_run_pso_zero_iterations_reports_initial_best():
    instance = sample_scenario(ScenarioConfig(), 66)
    context, _, _ = _helpers.context_for(instance)
    swarm_cfg = SwarmConfig(particle_count=6, max_iterations=0, **BASE)
    run = run_pso(swarm_cfg, context, rng_seed=3)
    assert run.fitness_trace.shape == (1,)
    assert run.best_fitness == run.fitness_trace[0]


def test_run_pso_seeded_and_parallel_determinism():
    instance = sample_scenario(ScenarioConfig(), 67)
    context, _, _ = _helpers.context_for(instance)
    swarm_cfg = SwarmConfig(particle_count=10, max_iterations=8, **BASE)
    serial = run_pso(swarm_cfg, context, rng_seed=21)
    rerun = run_pso(swarm_cfg, context, rng_seed=21)
    threaded = run_pso(swarm_cfg, context, rng_seed=21, workers=2)
    other_seed = run_pso(swarm_cfg, context, rng_seed=22)
    assert np.array_equal(serial.fitness_trace, rerun.fitness_trace)
    assert np.array_equal(serial.best_position, rerun.best_position)
    assert np.array_equal(serial.fitness_trace, threaded.fitness_trace)
    assert np.array_equal(serial.best_position, threaded.best_position)
    assert not np.array_equal(serial.fitness_trace, other_seed.fitness_trace)


def test_run_pso_warm_start_never_loses_to_incumbent():
    instance = sample_scenario(ScenarioConfig(), 68)
    context, _, swarm_cfg = _helpers.context_for(instance)
    small = SwarmConfig(particle_count=8, max_iterations=5, **BASE)
    incumbent = positions_to_vector(instance.reference_positions)
    run = run_pso(small, context, rng_seed=11, initial_position=incumbent)
    assert run.best_fitness <= fitness(incumbent, context)


def test_particles_stay_inside_region_across_updates():
    instance = sample_scenario(ScenarioConfig(), 69)
    context, _, _ = _helpers.context_for(instance)
    swarm_cfg = SwarmConfig(particle_count=8, max_iterations=0, **BASE)
    state = init_swarm(swarm_cfg, 4, 13, context)
    rng_streams = np.random.default_rng(14)
    for t in range(5):
        w = inertia_weight(swarm_cfg, t, 5)
        for i in range(len(state.particles)):
            state.particles[i] = update_particle(
                state.particles[i],
                state.global_best_position,
                w,
                swarm_cfg,
                np.random.default_rng(rng_streams.integers(1 << 32)),
            )
            assert np.all(np.abs(state.particles[i].position) <= swarm_cfg.region_half_width)


def test_run_pso_matches_dense_grid_on_single_antenna():
    cfg_small = ScenarioConfig(antenna_count=1, user_count=1)
    instance = sample_scenario(cfg_small, 70)
    context, _, _ = _helpers.context_for(instance)
    half = cfg_small.region_half_width
    axis = np.linspace(-half, half, 200)
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    batch = np.column_stack([xs.ravel(), ys.ravel()])
    grid_values, _ = context.evaluate(batch, 1e6)
    grid_best = float(np.min(grid_values))
    swarm_cfg = SwarmConfig(
        region_half_width=half, min_spacing=cfg_small.min_spacing
    )
    run = run_pso(swarm_cfg, context, rng_seed=71)
    assert abs(run.best_fitness - grid_best) <= 0.02 * grid_best
