"""Self-contained invariant checks for the `validate` CLI subcommand.

Each check returns (name, passed, detail). These are quick smoke versions of
the full test suite: channel identities, the two-path fitness consistency,
solver sanity, penalty exactness and seeded determinism.
"""

from __future__ import annotations

import math

import numpy as np

from . import allocation as alloc_mod, channels, kernels, latency, swarm as swarm_mod
from .allocation import AllocationProblem, kkt_residual, solve_allocation
from .channels import PlanarPosition, UserChannelSpec
from .latency import AllocationState
from .scenario import ScenarioConfig, sample_scenario
from .swarm import EvaluationContext, SwarmConfig, run_pso


def _random_spec(rng, paths=3) -> UserChannelSpec:
    return UserChannelSpec(
        elevation_aoas=rng.uniform(-math.pi / 2, math.pi / 2, paths),
        azimuth_aoas=rng.uniform(-math.pi / 2, math.pi / 2, paths),
        path_gains=rng.normal(size=paths) * 1e-4 + 1j * rng.normal(size=paths) * 1e-4,
        transmit_power=1.0,
        distance_to_bs=50.0,
    )


def _random_positions(rng, count, half=0.15) -> list[PlanarPosition]:
    return [
        PlanarPosition(float(x), float(y))
        for x, y in rng.uniform(-half, half, size=(count, 2))
    ]


def check_unit_modulus(seed=0) -> tuple[str, bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        spec = _random_spec(rng)
        pos = _random_positions(rng, 1)[0]
        f = channels.field_response_vector(pos, spec, 0.1)
        worst = max(worst, float(np.max(np.abs(np.abs(f) - 1.0))))
    return ("field response unit modulus", worst <= 1e-12, f"max deviation {worst:.2e}")


def check_zf_identity(seed=1) -> tuple[str, bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        specs = [_random_spec(rng) for _ in range(3)]
        positions = _random_positions(rng, 4)
        h = channels.build_channel_matrix(positions, specs, 0.1)
        w = channels.zf_combining_matrix(h)
        resid = w.entries.conj().T @ h.entries - np.eye(3)
        worst = max(worst, float(np.max(np.abs(resid))))
    return ("zero-forcing identity", worst <= 1e-9, f"max |W^H H - I| {worst:.2e}")


def check_rate_equivalence(seed=2) -> tuple[str, bool, str]:
    rng = np.random.default_rng(seed)
    noise = 3.98e-15
    worst = 0.0
    for _ in range(20):
        specs = [_random_spec(rng) for _ in range(3)]
        positions = _random_positions(rng, 4)
        h = channels.build_channel_matrix(positions, specs, 0.1)
        w = channels.zf_combining_matrix(h)
        for n in range(3):
            direct = channels.per_user_rate(h, w, n, 1.0, noise, 1e6)
            wn = w.entries[:, n]
            signal = abs(np.vdot(wn, h.entries[:, n])) ** 2
            interference = sum(
                abs(np.vdot(wn, h.entries[:, k])) ** 2 for k in range(3) if k != n
            )
            denom = interference + float(np.vdot(wn, wn).real) * noise
            general = 1e6 * math.log2(1.0 + signal / denom)
            rel = abs(direct - general) / max(abs(general), 1e-300)
            worst = max(worst, rel)
    return ("rate form equivalence", worst <= 1e-9, f"max relative gap {worst:.2e}")


def check_penalty_exactness(seed=3) -> tuple[str, bool, str]:
    rng = np.random.default_rng(seed)
    config = SwarmConfig(region_half_width=0.15, min_spacing=0.1)
    failures = 0
    for _ in range(200):
        positions = _random_positions(rng, 4)
        caps = rng.uniform(0.05, 0.2, 3)
        lats = caps * rng.uniform(0.5, 1.5, 3)
        value = swarm_mod.penalty(positions, lats, caps, config)
        violated = bool(np.any(lats > caps))
        too_close = any(
            math.hypot(a.x - b.x, a.y - b.y) < config.min_spacing
            for i, a in enumerate(positions)
            for b in positions[i + 1 :]
        )
        if (value == 0.0) != (not violated and not too_close):
            failures += 1
    return ("penalty zero iff feasible", failures == 0, f"{failures} mismatches")


def check_hessian_diagonal(seed=4) -> tuple[str, bool, str]:
    rng = np.random.default_rng(seed)
    instance = sample_scenario(ScenarioConfig(), 99)
    n_users = len(instance.users)
    problem = AllocationProblem(
        users=instance.users,
        server=instance.server,
        rates=rng.uniform(1e6, 1e8, n_users),
        latency_caps=instance.latency_caps * 10.0,
    )
    worst = 0.0
    for _ in range(20):
        beta = rng.uniform(0.2, 0.9, n_users)
        freqs = rng.uniform(1e9, 3e9, n_users)
        n = int(rng.integers(n_users))
        analytic = alloc_mod.hessian_f_diagonal(
            problem, AllocationState(beta, freqs), n
        )
        step = float(freqs[n]) * 1e-4

        def total_at(f):
            shifted = freqs.copy()
            shifted[n] = f
            return alloc_mod.objective(problem, AllocationState(beta, shifted))

        numeric = (
            total_at(freqs[n] + step) - 2 * total_at(freqs[n]) + total_at(freqs[n] - step)
        ) / step**2
        rel = abs(analytic - numeric) / max(abs(analytic), 1e-300)
        worst = max(worst, rel)
    return ("latency Hessian diagonal", worst <= 1e-4, f"max relative gap {worst:.2e}")


def check_allocation_sanity(seed=5) -> tuple[str, bool, str]:
    rng = np.random.default_rng(seed)
    issues = []
    for draw in range(5):
        instance = sample_scenario(ScenarioConfig(), int(rng.integers(1 << 16)))
        rates = rng.uniform(1e6, 5e7, len(instance.users))
        problem = AllocationProblem(
            users=instance.users,
            server=instance.server,
            rates=rates,
            latency_caps=instance.latency_caps * rng.uniform(1.0, 1.5),
        )
        sol = solve_allocation(problem, 1e-6)
        local = float(np.sum(problem.local_branch_latencies()))
        if sol.feasible and sol.objective > local * (1 + 1e-9):
            issues.append(f"draw {draw}: worse than local-only")
        total = float(np.sum(sol.allocation.server_frequencies))
        if total > instance.server.max_total_frequency * (1 + 1e-9):
            issues.append(f"draw {draw}: budget violated")
        if sol.feasible and kkt_residual(problem, sol.allocation) > 1e-5:
            issues.append(f"draw {draw}: stationarity residual too large")
    return ("allocation solver sanity", not issues, "; ".join(issues) or "ok")


def check_fitness_two_path(seed=6) -> tuple[str, bool, str]:
    instance = sample_scenario(ScenarioConfig(), seed)
    cfg = instance.config
    swarm_cfg = SwarmConfig(
        region_half_width=cfg.region_half_width, min_spacing=cfg.min_spacing
    )
    n = len(instance.users)
    allocation = AllocationState(
        offload_ratios=np.full(n, 0.5),
        server_frequencies=np.full(n, cfg.server_max_frequency / (2 * n)),
    )
    context = EvaluationContext.build(
        instance.channel_specs,
        instance.users,
        instance.server,
        allocation,
        cfg.wavelength,
        instance.noise_power,
        cfg.bandwidth,
        instance.latency_caps,
        swarm_cfg,
        cfg.antenna_count,
    )
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        positions = _random_positions(rng, cfg.antenna_count, cfg.region_half_width)
        vector = channels.positions_to_vector(positions)
        via_kernel = swarm_mod.fitness(vector, context)
        rates = channels.rates_for_positions(
            positions, instance.channel_specs, cfg.wavelength,
            instance.noise_power, cfg.bandwidth,
        )
        lats = np.array(
            [
                latency.user_total_latency(
                    user, instance.server,
                    float(allocation.offload_ratios[i]),
                    float(allocation.server_frequencies[i]),
                    float(rates[i]),
                )
                for i, user in enumerate(instance.users)
            ]
        )
        direct = float(np.sum(lats)) + swarm_mod.penalty(
            positions, lats, instance.latency_caps, swarm_cfg
        )
        rel = abs(via_kernel - direct) / max(abs(direct), 1e-300)
        worst = max(worst, rel)
    return ("fitness two-path consistency", worst <= 1e-9, f"max relative gap {worst:.2e}")


def check_backend_agreement(seed=7) -> tuple[str, bool, str]:
    if "compiled" not in kernels.available_backends():
        return ("kernel backend agreement", True, "compiled backend not built; skipped")
    instance = sample_scenario(ScenarioConfig(), seed)
    cfg = instance.config
    swarm_cfg = SwarmConfig(
        region_half_width=cfg.region_half_width, min_spacing=cfg.min_spacing
    )
    allocation = AllocationState.local_only(len(instance.users))
    context = EvaluationContext.build(
        instance.channel_specs, instance.users, instance.server, allocation,
        cfg.wavelength, instance.noise_power, cfg.bandwidth,
        instance.latency_caps, swarm_cfg, cfg.antenna_count,
    )
    rng = np.random.default_rng(seed)
    batch = rng.uniform(
        -cfg.region_half_width, cfg.region_half_width, size=(64, 2 * cfg.antenna_count)
    )
    args = (
        context.coeff_x, context.coeff_y, context.path_gains, context.wave_number,
        context.power_over_noise, context.bandwidth, context.latency_const,
        context.latency_bits, context.latency_caps, context.tau_latency,
        context.tau_distance, context.min_spacing_sq, context.rcond_sq_min, 1e6,
    )
    fit_py, lat_py = kernels.get_module("python").fitness_batch(batch, *args)
    fit_c, lat_c = kernels.get_module("compiled").fitness_batch(batch, *args)
    gap = float(np.max(np.abs(fit_py - fit_c) / np.maximum(np.abs(fit_py), 1e-300)))
    return ("kernel backend agreement", gap <= 1e-9, f"max relative gap {gap:.2e}")


def check_swarm_determinism(seed=8) -> tuple[str, bool, str]:
    instance = sample_scenario(ScenarioConfig(), seed)
    cfg = instance.config
    swarm_cfg = SwarmConfig(
        region_half_width=cfg.region_half_width,
        min_spacing=cfg.min_spacing,
        particle_count=8,
        max_iterations=5,
    )
    allocation = AllocationState.local_only(len(instance.users))
    context = EvaluationContext.build(
        instance.channel_specs, instance.users, instance.server, allocation,
        cfg.wavelength, instance.noise_power, cfg.bandwidth,
        instance.latency_caps, swarm_cfg, cfg.antenna_count,
    )
    first = run_pso(swarm_cfg, context, rng_seed=123)
    second = run_pso(swarm_cfg, context, rng_seed=123, workers=2)
    same = bool(
        np.array_equal(first.fitness_trace, second.fitness_trace)
        and np.array_equal(first.best_position, second.best_position)
    )
    monotone = bool(np.all(np.diff(first.fitness_trace) <= 0.0))
    ok = same and monotone
    detail = "identical traces, monotone" if ok else f"same={same} monotone={monotone}"
    return ("swarm determinism and monotonicity", ok, detail)


def run_all(seed: int = 0) -> list[tuple[str, bool, str]]:
    checks = [
        check_unit_modulus,
        check_zf_identity,
        check_rate_equivalence,
        check_penalty_exactness,
        check_hessian_diagonal,
        check_allocation_sanity,
        check_fitness_two_path,
        check_backend_agreement,
        check_swarm_determinism,
    ]
    return [check(seed + offset) for offset, check in enumerate(checks)]
