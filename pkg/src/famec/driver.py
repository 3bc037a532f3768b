"""Outer alternation between resource allocation and antenna placement.

Each outer round solves the offloading/CPU-share problem at the current
antenna positions, then runs the swarm over positions at the frozen
allocation. Either half-step is rejected if it would raise the penalized
objective, and the incumbent placement is injected into every swarm as a
particle, so the recorded outer trace never increases. Two fixed-antenna
baselines share the same reporting shape.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import channels, latency, swarm as swarm_mod
from .allocation import AllocationProblem, solve_allocation, threshold_round
from .channels import PlanarPosition
from .errors import ScenarioInvalid
from .latency import AllocationState
from .scenario import ScenarioInstance
from .swarm import EvaluationContext, SwarmConfig, run_pso

# Substream tags for the driver-owned random draws; the swarm uses its own
# (0,)/(1,...) tags under the per-run seed, sampling uses (11,).
_INITIAL_POSITION_DOMAIN = 13
_SWARM_DOMAIN = 17


def derive_seed(root_seed: int, *path: int) -> int:
    """Deterministic child seed for an independent named substream."""
    seq = np.random.SeedSequence(root_seed, spawn_key=tuple(path))
    return int(seq.generate_state(1, np.uint64)[0])


def swarm_config_from(cfg) -> SwarmConfig:
    """SwarmConfig carrying the scenario's geometry and PSO hyperparameters."""
    return SwarmConfig(
        region_half_width=cfg.region_half_width,
        min_spacing=cfg.min_spacing,
        particle_count=cfg.particle_count,
        max_iterations=cfg.swarm_iterations,
        cognitive_factor=cfg.cognitive_factor,
        social_factor=cfg.social_factor,
        inertia_max=cfg.inertia_max,
        inertia_min=cfg.inertia_min,
        penalty_latency=cfg.penalty_latency,
        penalty_distance=cfg.penalty_distance,
        velocity_clamp=cfg.velocity_clamp,
    )


def alternation_config_from(cfg) -> "AlternationConfig":
    return AlternationConfig(
        swarm=swarm_config_from(cfg),
        outer_iterations=cfg.outer_iterations,
        allocation_tolerance=cfg.allocation_tolerance,
        rounding_mode=cfg.rounding_mode,
        rounding_threshold=cfg.rounding_threshold,
        rng_seed=cfg.rng_seed,
    )


@dataclass
class AlternationConfig:
    """Outer-loop bookkeeping around a SwarmConfig."""

    swarm: SwarmConfig
    outer_iterations: int = 3
    allocation_tolerance: float = 1e-6
    rounding_mode: str = "continuous"
    rounding_threshold: float = 0.5
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be at least 1")
        if self.rounding_mode not in ("continuous", "threshold"):
            raise ValueError("rounding_mode must be 'continuous' or 'threshold'")
        if not 0 < self.rounding_threshold < 1:
            raise ValueError("rounding_threshold must be in (0, 1)")
        if self.allocation_tolerance <= 0:
            raise ValueError("allocation_tolerance must be positive")


@dataclass
class RunResult:
    """Everything a run produced, self-consistent by recomputation.

    outer_trace holds the penalized objective after each half-step (two
    entries per outer round for the alternating scheme, one entry total for
    the baselines). inner_traces are the per-round swarm global-best traces;
    the matching latency and position traces ride alongside for export.
    """

    final_positions: list[PlanarPosition]
    final_allocation: AllocationState
    total_latency: float
    per_user_latencies: np.ndarray
    outer_trace: np.ndarray
    inner_traces: list[np.ndarray]
    rates: np.ndarray
    beta_trace: np.ndarray
    inner_latency_traces: list[np.ndarray]
    inner_position_traces: list[np.ndarray]
    allocation_feasible: bool = True
    runtime_seconds: float = 0.0


def _check_scenario(scenario: ScenarioInstance) -> None:
    n = len(scenario.users)
    if n > scenario.config.antenna_count:
        raise ScenarioInvalid(
            f"{n} users cannot be separated by {scenario.config.antenna_count} antennas"
        )
    if len(scenario.channel_specs) != n:
        raise ScenarioInvalid("channel specs and user profiles must align")


def _rates_at(scenario: ScenarioInstance, positions: list[PlanarPosition]) -> np.ndarray:
    return channels.rates_for_positions(
        positions,
        scenario.channel_specs,
        scenario.config.wavelength,
        scenario.noise_power,
        scenario.config.bandwidth,
    )


def _per_user_latencies(
    scenario: ScenarioInstance, allocation: AllocationState, rates: np.ndarray
) -> np.ndarray:
    values = [
        latency.user_total_latency(
            user,
            scenario.server,
            float(allocation.offload_ratios[n]),
            float(allocation.server_frequencies[n]),
            float(rates[n]),
        )
        for n, user in enumerate(scenario.users)
    ]
    return np.array(values)


def _penalized_objective(
    scenario: ScenarioInstance,
    config: SwarmConfig,
    positions: list[PlanarPosition],
    allocation: AllocationState,
    rates: np.ndarray,
) -> tuple[float, float, np.ndarray]:
    lats = _per_user_latencies(scenario, allocation, rates)
    total = float(np.sum(lats))
    pen = swarm_mod.penalty(positions, lats, scenario.latency_caps, config)
    return total + pen, total, lats


def _evaluation_context(
    scenario: ScenarioInstance, allocation: AllocationState, config: SwarmConfig
) -> EvaluationContext:
    return EvaluationContext.build(
        scenario.channel_specs,
        scenario.users,
        scenario.server,
        allocation,
        scenario.config.wavelength,
        scenario.noise_power,
        scenario.config.bandwidth,
        scenario.latency_caps,
        config,
        scenario.config.antenna_count,
    )


def run_alternating(
    scenario: ScenarioInstance,
    config: AlternationConfig,
    workers: int = 1,
    record_runtime: bool = False,
) -> RunResult:
    """Joint optimization of offloading, CPU shares and antenna positions.

    With swarm iterations set to zero the placement stays at the fixed
    reference grid and a single outer round reduces to the fixed-antenna
    baseline exactly.
    """
    start = time.perf_counter()
    _check_scenario(scenario)
    cfg = scenario.config
    swarm_cfg = config.swarm
    n_users = len(scenario.users)

    if swarm_cfg.max_iterations == 0:
        d_vec = channels.positions_to_vector(scenario.reference_positions)
    else:
        seq = np.random.SeedSequence(
            config.rng_seed, spawn_key=(_INITIAL_POSITION_DOMAIN,)
        )
        rng = np.random.default_rng(seq)
        half = swarm_cfg.region_half_width
        d_vec = rng.uniform(-half, half, size=2 * cfg.antenna_count)

    positions = channels.vector_to_positions(d_vec)
    allocation = AllocationState.local_only(n_users)
    rates = _rates_at(scenario, positions)
    best_pen, total, lats = _penalized_objective(
        scenario, swarm_cfg, positions, allocation, rates
    )

    outer_entries: list[float] = []
    beta_rows: list[np.ndarray] = []
    inner_traces: list[np.ndarray] = []
    inner_latency_traces: list[np.ndarray] = []
    inner_position_traces: list[np.ndarray] = []
    feasible = True

    for k in range(1, config.outer_iterations + 1):
        # allocation half-step at frozen positions
        problem = AllocationProblem(
            users=scenario.users,
            server=scenario.server,
            rates=rates,
            latency_caps=scenario.latency_caps,
        )
        sol = solve_allocation(problem, config.allocation_tolerance, initial=allocation)
        cand_pen, cand_total, cand_lats = _penalized_objective(
            scenario, swarm_cfg, positions, sol.allocation, rates
        )
        if cand_pen <= best_pen:
            allocation = sol.allocation
            best_pen = cand_pen
            total = cand_total
            lats = cand_lats
            feasible = sol.feasible
        outer_entries.append(best_pen)
        beta_rows.append(allocation.offload_ratios.copy())

        # placement half-step at frozen allocation
        if swarm_cfg.max_iterations > 0:
            context = _evaluation_context(scenario, allocation, swarm_cfg)
            pso_seed = derive_seed(config.rng_seed, _SWARM_DOMAIN, k)
            run = run_pso(
                swarm_cfg, context, pso_seed, initial_position=d_vec, workers=workers
            )
            inner_traces.append(run.fitness_trace)
            inner_latency_traces.append(run.latency_trace)
            inner_position_traces.append(run.position_trace)
            if run.best_fitness <= best_pen:
                d_vec = run.best_position
                positions = channels.vector_to_positions(d_vec)
                best_pen = float(run.best_fitness)
                rates = _rates_at(scenario, positions)
                _, total, lats = _penalized_objective(
                    scenario, swarm_cfg, positions, allocation, rates
                )
        outer_entries.append(best_pen)

    if config.rounding_mode == "threshold":
        problem = AllocationProblem(
            users=scenario.users,
            server=scenario.server,
            rates=rates,
            latency_caps=scenario.latency_caps,
        )
        allocation = threshold_round(problem, allocation, config.rounding_threshold)

    lats = _per_user_latencies(scenario, allocation, rates)
    total = float(np.sum(lats))
    runtime = time.perf_counter() - start if record_runtime else 0.0
    return RunResult(
        final_positions=positions,
        final_allocation=allocation,
        total_latency=total,
        per_user_latencies=lats,
        outer_trace=np.array(outer_entries),
        inner_traces=inner_traces,
        rates=np.asarray(rates, dtype=float),
        beta_trace=np.array(beta_rows),
        inner_latency_traces=inner_latency_traces,
        inner_position_traces=inner_position_traces,
        allocation_feasible=feasible,
        runtime_seconds=runtime,
    )


def run_baseline_local_only(
    scenario: ScenarioInstance, record_runtime: bool = False
) -> RunResult:
    """All users compute locally; antennas stay on the reference grid."""
    start = time.perf_counter()
    _check_scenario(scenario)
    positions = list(scenario.reference_positions)
    rates = _rates_at(scenario, positions)
    allocation = AllocationState.local_only(len(scenario.users))
    lats = _per_user_latencies(scenario, allocation, rates)
    total = float(np.sum(lats))
    runtime = time.perf_counter() - start if record_runtime else 0.0
    return RunResult(
        final_positions=positions,
        final_allocation=allocation,
        total_latency=total,
        per_user_latencies=lats,
        outer_trace=np.array([total]),
        inner_traces=[],
        rates=np.asarray(rates, dtype=float),
        beta_trace=np.zeros((1, len(scenario.users))),
        inner_latency_traces=[],
        inner_position_traces=[],
        runtime_seconds=runtime,
    )


def run_baseline_fixed_antenna(
    scenario: ScenarioInstance, config: AlternationConfig, record_runtime: bool = False
) -> RunResult:
    """Offloading enabled, one allocation solve, antennas on the reference grid."""
    start = time.perf_counter()
    _check_scenario(scenario)
    positions = list(scenario.reference_positions)
    rates = _rates_at(scenario, positions)
    problem = AllocationProblem(
        users=scenario.users,
        server=scenario.server,
        rates=rates,
        latency_caps=scenario.latency_caps,
    )
    sol = solve_allocation(problem, config.allocation_tolerance)
    allocation = sol.allocation
    if config.rounding_mode == "threshold":
        allocation = threshold_round(problem, allocation, config.rounding_threshold)
    lats = _per_user_latencies(scenario, allocation, rates)
    total = float(np.sum(lats))
    pen = swarm_mod.penalty(positions, lats, scenario.latency_caps, config.swarm)
    runtime = time.perf_counter() - start if record_runtime else 0.0
    return RunResult(
        final_positions=positions,
        final_allocation=allocation,
        total_latency=total,
        per_user_latencies=lats,
        outer_trace=np.array([total + pen]),
        inner_traces=[],
        rates=np.asarray(rates, dtype=float),
        beta_trace=np.array([allocation.offload_ratios.copy()]),
        inner_latency_traces=[],
        inner_position_traces=[],
        allocation_feasible=sol.feasible,
        runtime_seconds=runtime,
    )
