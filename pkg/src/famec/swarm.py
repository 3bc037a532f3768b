"""Particle-swarm search over antenna placements.

Positions are flat vectors (x1, y1, ..., xM, yM) inside the square movable
region. The fitness of a placement is the total system latency at the frozen
offloading allocation plus penalties for violated latency caps and antenna
pairs closer than the minimum spacing. Every random draw comes from a
substream keyed by (seed, iteration, particle), so evaluation order and
parallelism cannot change the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channels, kernels, latency
from .channels import PlanarPosition
from .latency import AllocationState, ServerProfile, UserProfile

# Fitness assigned to a placement whose channel matrix is too ill-conditioned,
# when no finite global best exists yet to scale it from.
DEFAULT_SENTINEL = 1e6
_SENTINEL_FACTOR = 1e6

_INIT_DOMAIN = 0
_UPDATE_DOMAIN = 1


@dataclass
class SwarmConfig:
    """Swarm size, dynamics coefficients and penalty weights.

    velocity_clamp defaults to half the region half-width. tau_latency and
    tau_distance weight the cap-violation and spacing penalties.
    """

    region_half_width: float
    min_spacing: float
    particle_count: int = 50
    max_iterations: int = 50
    cognitive_factor: float = 2.0
    social_factor: float = 2.0
    inertia_max: float = 0.9
    inertia_min: float = 0.4
    penalty_latency: float = 1e3
    penalty_distance: float = 1e3
    velocity_clamp: float | None = None
    per_coordinate_draws: bool = False

    def __post_init__(self) -> None:
        if not self.region_half_width > 0:
            raise ValueError("region_half_width must be positive")
        if not self.min_spacing > 0:
            raise ValueError("min_spacing must be positive")
        if self.particle_count < 2:
            raise ValueError("particle_count must be at least 2")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.inertia_max < self.inertia_min:
            raise ValueError("inertia_max must not be below inertia_min")
        if self.velocity_clamp is None:
            self.velocity_clamp = self.region_half_width / 2.0
        if not self.velocity_clamp > 0:
            raise ValueError("velocity_clamp must be positive")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    personal_best_position: np.ndarray
    personal_best_fitness: float


@dataclass
class SwarmState:
    particles: list[Particle]
    global_best_position: np.ndarray
    global_best_fitness: float
    global_best_latency: float
    iteration: int


@dataclass
class PsoRun:
    """Outcome of one swarm run with per-iteration global-best traces.

    Unpacks as (best_position, best_fitness, fitness_trace); the latency and
    position traces ride along as attributes.
    """

    best_position: np.ndarray
    best_fitness: float
    fitness_trace: np.ndarray
    latency_trace: np.ndarray
    position_trace: np.ndarray

    def __iter__(self):
        return iter((self.best_position, self.best_fitness, self.fitness_trace))


@dataclass
class EvaluationContext:
    """Frozen scenario and allocation data needed to score a placement.

    Per-user latency is written as latency_const + latency_bits / rate so the
    kernel only recomputes the rate-dependent part.
    """

    antenna_count: int
    coeff_x: np.ndarray
    coeff_y: np.ndarray
    path_gains: np.ndarray
    wave_number: float
    power_over_noise: np.ndarray
    bandwidth: float
    latency_const: np.ndarray
    latency_bits: np.ndarray
    latency_caps: np.ndarray
    tau_latency: float
    tau_distance: float
    min_spacing_sq: float
    rcond_sq_min: float = channels.RCOND_THRESHOLD**2

    @classmethod
    def build(
        cls,
        specs: list[channels.UserChannelSpec],
        users: list[UserProfile],
        server: ServerProfile,
        allocation: AllocationState,
        wavelength: float,
        noise_power: float,
        bandwidth: float,
        latency_caps: np.ndarray,
        config: SwarmConfig,
        antenna_count: int,
    ) -> "EvaluationContext":
        allocation.validate(server.max_total_frequency)
        beta = allocation.offload_ratios
        freqs = allocation.server_frequencies
        local = np.array([latency.local_latency(u) for u in users])
        cycles = np.array([latency.server_cycles(u, server) for u in users])
        data = np.array([u.data_size for u in users])
        model_bits = np.array([u.model_size_factor * u.data_size for u in users])
        exec_terms = np.where(beta > 0, beta * cycles / np.where(freqs > 0, freqs, 1.0), 0.0)
        lat_const = (1.0 - beta) * local + exec_terms
        lat_bits = (1.0 - beta) * model_bits + beta * data
        elev = np.array([s.elevation_aoas for s in specs])
        azim = np.array([s.azimuth_aoas for s in specs])
        gains = np.array([s.path_gains for s in specs])
        powers = np.array([s.transmit_power for s in specs])
        return cls(
            antenna_count=antenna_count,
            coeff_x=np.sin(elev) * np.cos(azim),
            coeff_y=np.cos(elev),
            path_gains=gains,
            wave_number=2.0 * math.pi / wavelength,
            power_over_noise=powers / noise_power,
            bandwidth=bandwidth,
            latency_const=lat_const,
            latency_bits=lat_bits,
            latency_caps=np.asarray(latency_caps, dtype=float),
            tau_latency=config.penalty_latency,
            tau_distance=config.penalty_distance,
            min_spacing_sq=config.min_spacing**2,
        )

    def evaluate(
        self, positions: np.ndarray, sentinel: float, workers: int = 1
    ) -> tuple[np.ndarray, np.ndarray]:
        """Fitness and penalty-free latency of a batch of position vectors."""
        positions = np.ascontiguousarray(positions, dtype=float)
        args = (
            self.coeff_x,
            self.coeff_y,
            self.path_gains,
            self.wave_number,
            self.power_over_noise,
            self.bandwidth,
            self.latency_const,
            self.latency_bits,
            self.latency_caps,
            self.tau_latency,
            self.tau_distance,
            self.min_spacing_sq,
            self.rcond_sq_min,
            sentinel,
        )
        if workers <= 1 or positions.shape[0] < 2 * workers:
            return kernels.fitness_batch(positions, *args)
        chunks = np.array_split(positions, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda chunk: kernels.fitness_batch(chunk, *args), chunks))
        fitness = np.concatenate([p[0] for p in parts])
        lat = np.concatenate([p[1] for p in parts])
        return fitness, lat


def fitness(
    position_vector: np.ndarray, context: EvaluationContext, sentinel: float = DEFAULT_SENTINEL
) -> float:
    """Penalized objective of one placement."""
    values, _ = context.evaluate(np.asarray(position_vector, dtype=float)[None, :], sentinel)
    return float(values[0])


def penalty(
    positions: list[PlanarPosition],
    per_user_latencies: np.ndarray,
    latency_caps: np.ndarray,
    config: SwarmConfig,
) -> float:
    """Constraint penalty of a placement, written as explicit loops.

    penalty_latency weights the squared amount by which each user's latency
    exceeds its cap; penalty_distance adds a fixed charge per antenna pair
    strictly closer than the minimum spacing (a pair exactly at the spacing
    is satisfied). Zero exactly when all constraints hold.
    """
    total = 0.0
    for lat, cap in zip(per_user_latencies, latency_caps):
        over = float(lat) - float(cap)
        if over > 0.0:
            total += config.penalty_latency * over * over
    for i in range(len(positions)):
        for j in range(i + 1, len(positions)):
            dx = positions[i].x - positions[j].x
            dy = positions[i].y - positions[j].y
            if math.hypot(dx, dy) < config.min_spacing:
                total += config.penalty_distance
    return total


def clamp_positions(position_vector: np.ndarray, half_width: float) -> np.ndarray:
    """Componentwise clamp of antenna coordinates to [-half_width, half_width]."""
    return np.clip(np.asarray(position_vector, dtype=float), -half_width, half_width)


def inertia_weight(config: SwarmConfig, t: int, total_iterations: int) -> float:
    """Linearly decreasing inertia: max at t=0, min at t=total_iterations."""
    if total_iterations <= 0:
        return config.inertia_max
    frac = t / total_iterations
    return config.inertia_max - (config.inertia_max - config.inertia_min) * frac


def update_particle(
    particle: Particle,
    global_best: np.ndarray,
    inertia: float,
    config: SwarmConfig,
    rng: np.random.Generator,
) -> Particle:
    """One velocity/position step toward the personal and global bests.

    Uses two fresh uniform draws (scalars by default, per-coordinate when
    configured), clamps each velocity component, then clamps the position to
    the region.
    """
    dim = particle.position.size
    if config.per_coordinate_draws:
        draws = rng.random((2, dim))
    else:
        draws = rng.random(2)
    r1, r2 = draws[0], draws[1]
    velocity = (
        inertia * particle.velocity
        + config.cognitive_factor * r1 * (particle.personal_best_position - particle.position)
        + config.social_factor * r2 * (global_best - particle.position)
    )
    clamp = float(config.velocity_clamp)
    velocity = np.clip(velocity, -clamp, clamp)
    position = clamp_positions(particle.position + velocity, config.region_half_width)
    return Particle(
        position=position,
        velocity=velocity,
        personal_best_position=particle.personal_best_position,
        personal_best_fitness=particle.personal_best_fitness,
    )


def _update_rng(rng_seed: int, t: int, i: int) -> np.random.Generator:
    seq = np.random.SeedSequence(rng_seed, spawn_key=(_UPDATE_DOMAIN, t, i))
    return np.random.Generator(np.random.PCG64(seq))


def _sentinel_for(global_best: float) -> float:
    if math.isfinite(global_best):
        return _SENTINEL_FACTOR * global_best
    return DEFAULT_SENTINEL


def init_swarm(
    config: SwarmConfig,
    antenna_count: int,
    rng_seed: int,
    context: EvaluationContext,
    initial_position: np.ndarray | None = None,
    workers: int = 1,
) -> SwarmState:
    """Uniform positions in the region, zero velocities, bests from evaluation.

    initial_position, when given, replaces the first particle's draw; the
    alternating driver uses it to keep the incumbent placement in the swarm.
    """
    dim = 2 * antenna_count
    seq = np.random.SeedSequence(rng_seed, spawn_key=(_INIT_DOMAIN,))
    rng = np.random.Generator(np.random.PCG64(seq))
    half = config.region_half_width
    positions = rng.uniform(-half, half, size=(config.particle_count, dim))
    if initial_position is not None:
        positions[0] = clamp_positions(initial_position, half)
    fitness_values, latencies = context.evaluate(positions, DEFAULT_SENTINEL, workers)
    particles = [
        Particle(
            position=positions[i].copy(),
            velocity=np.zeros(dim),
            personal_best_position=positions[i].copy(),
            personal_best_fitness=float(fitness_values[i]),
        )
        for i in range(config.particle_count)
    ]
    best = int(np.argmin(fitness_values))
    return SwarmState(
        particles=particles,
        global_best_position=positions[best].copy(),
        global_best_fitness=float(fitness_values[best]),
        global_best_latency=float(latencies[best]),
        iteration=0,
    )


def run_pso(
    config: SwarmConfig,
    context: EvaluationContext,
    rng_seed: int,
    initial_position: np.ndarray | None = None,
    workers: int = 1,
) -> PsoRun:
    """Full swarm search; the global-best trace is non-increasing by construction."""
    total = config.max_iterations
    state = init_swarm(config, context.antenna_count, rng_seed, context, initial_position, workers)
    dim = 2 * context.antenna_count
    fitness_trace = np.empty(total + 1)
    latency_trace = np.empty(total + 1)
    position_trace = np.empty((total + 1, dim))
    fitness_trace[0] = state.global_best_fitness
    latency_trace[0] = state.global_best_latency
    position_trace[0] = state.global_best_position

    for t in range(1, total + 1):
        w = inertia_weight(config, t, total)
        anchor = state.global_best_position.copy()
        for i in range(config.particle_count):
            state.particles[i] = update_particle(
                state.particles[i], anchor, w, config, _update_rng(rng_seed, t, i)
            )
        positions = np.stack([p.position for p in state.particles])
        sentinel = _sentinel_for(state.global_best_fitness)
        values, latencies = context.evaluate(positions, sentinel, workers)
        for i, particle in enumerate(state.particles):
            if values[i] < particle.personal_best_fitness:
                particle.personal_best_fitness = float(values[i])
                particle.personal_best_position = positions[i].copy()
        best = int(np.argmin(values))
        if values[best] < state.global_best_fitness:
            state.global_best_fitness = float(values[best])
            state.global_best_position = positions[best].copy()
            state.global_best_latency = float(latencies[best])
        state.iteration = t
        fitness_trace[t] = state.global_best_fitness
        latency_trace[t] = state.global_best_latency
        position_trace[t] = state.global_best_position

    return PsoRun(
        best_position=state.global_best_position.copy(),
        best_fitness=state.global_best_fitness,
        fitness_trace=fitness_trace,
        latency_trace=latency_trace,
        position_trace=position_trace,
    )
