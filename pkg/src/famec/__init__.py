"""Latency minimization for movable-antenna mobile edge computing.

Models multi-path uplink channels as functions of receive-antenna positions,
computes zero-forcing rates, and jointly optimizes task offloading, server
CPU shares and antenna placement by alternating an exact allocation solver
with a particle-swarm placement search.
"""

from .allocation import (
    AllocationProblem,
    AllocationSolution,
    kkt_residual,
    solve_allocation,
    threshold_round,
)
from .channels import (
    ChannelMatrix,
    CombiningMatrix,
    PlanarPosition,
    UserChannelSpec,
    build_channel_matrix,
    channel_vector,
    field_response_vector,
    per_user_rate,
    phase_difference,
    positions_to_vector,
    rates_for_positions,
    reference_grid,
    vector_to_positions,
    zf_combining_matrix,
)
from .driver import (
    AlternationConfig,
    RunResult,
    alternation_config_from,
    run_alternating,
    run_baseline_fixed_antenna,
    run_baseline_local_only,
    swarm_config_from,
)
from .errors import (
    FamecError,
    IoError,
    ParseError,
    RankDeficientChannel,
    ScenarioInvalid,
    ValidationError,
    ZeroFrequency,
    ZeroRate,
)
from .export import export_results
from .latency import (
    AllocationState,
    ServerProfile,
    UserProfile,
    local_latency,
    offload_transfer_latency,
    server_exec_latency,
    system_total_latency,
    upload_latency,
    user_total_latency,
)
from .scenario import (
    ScenarioConfig,
    ScenarioInstance,
    dbm_to_watts,
    dumps_config,
    load_config,
    loads_config,
    sample_scenario,
    save_config,
    watts_to_dbm,
)
from .swarm import (
    EvaluationContext,
    Particle,
    PsoRun,
    SwarmConfig,
    SwarmState,
    clamp_positions,
    fitness,
    inertia_weight,
    init_swarm,
    penalty,
    run_pso,
    update_particle,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationProblem",
    "AllocationSolution",
    "AllocationState",
    "AlternationConfig",
    "ChannelMatrix",
    "CombiningMatrix",
    "EvaluationContext",
    "FamecError",
    "IoError",
    "ParseError",
    "Particle",
    "PlanarPosition",
    "PsoRun",
    "RankDeficientChannel",
    "RunResult",
    "ScenarioConfig",
    "ScenarioInstance",
    "ScenarioInvalid",
    "ServerProfile",
    "SwarmConfig",
    "SwarmState",
    "UserChannelSpec",
    "UserProfile",
    "ValidationError",
    "ZeroFrequency",
    "ZeroRate",
    "alternation_config_from",
    "build_channel_matrix",
    "channel_vector",
    "clamp_positions",
    "dbm_to_watts",
    "dumps_config",
    "export_results",
    "field_response_vector",
    "fitness",
    "inertia_weight",
    "init_swarm",
    "kkt_residual",
    "load_config",
    "loads_config",
    "local_latency",
    "offload_transfer_latency",
    "penalty",
    "per_user_rate",
    "phase_difference",
    "positions_to_vector",
    "rates_for_positions",
    "reference_grid",
    "run_alternating",
    "run_baseline_fixed_antenna",
    "run_baseline_local_only",
    "run_pso",
    "sample_scenario",
    "save_config",
    "server_exec_latency",
    "solve_allocation",
    "swarm_config_from",
    "system_total_latency",
    "threshold_round",
    "update_particle",
    "upload_latency",
    "user_total_latency",
    "vector_to_positions",
    "watts_to_dbm",
    "zf_combining_matrix",
]
