"""Compare the compiled and pure-python fitness kernels.

Times fitness_batch on growing batch sizes and a short end-to-end swarm run
on each backend. Run with: python3 benchmarks/benchmark_backends.py
"""

import time

import numpy as np

from famec import ScenarioConfig, SwarmConfig, sample_scenario
from famec.latency import AllocationState
from famec import kernels
from famec.swarm import EvaluationContext, run_pso


def build_context():
    config = ScenarioConfig()
    instance = sample_scenario(config, 42)
    swarm_cfg = SwarmConfig(
        region_half_width=config.region_half_width, min_spacing=config.min_spacing
    )
    n = len(instance.users)
    allocation = AllocationState(
        offload_ratios=np.full(n, 0.5),
        server_frequencies=np.full(n, config.server_max_frequency / (2 * n)),
    )
    context = EvaluationContext.build(
        instance.channel_specs,
        instance.users,
        instance.server,
        allocation,
        config.wavelength,
        instance.noise_power,
        config.bandwidth,
        instance.latency_caps,
        swarm_cfg,
        config.antenna_count,
    )
    return config, swarm_cfg, context


def time_batches(context, half_width):
    rng = np.random.default_rng(0)
    rows = []
    for batch in (1, 16, 64, 256, 1024):
        positions = rng.uniform(-half_width, half_width, size=(batch, 8))
        args = (
            context.coeff_x, context.coeff_y, context.path_gains,
            context.wave_number, context.power_over_noise, context.bandwidth,
            context.latency_const, context.latency_bits, context.latency_caps,
            context.tau_latency, context.tau_distance, context.min_spacing_sq,
            context.rcond_sq_min, 1e6,
        )
        timings = {}
        for name in kernels.available_backends():
            module = kernels.get_module(name)
            module.fitness_batch(positions, *args)  # warm up
            reps = max(3, 2000 // batch)
            start = time.perf_counter()
            for _ in range(reps):
                module.fitness_batch(positions, *args)
            timings[name] = (time.perf_counter() - start) / reps
        rows.append((batch, timings))
    return rows


def time_pso(swarm_cfg, context):
    timings = {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        run_pso(swarm_cfg, context, rng_seed=1)  # warm up
        start = time.perf_counter()
        result = run_pso(swarm_cfg, context, rng_seed=1)
        timings[name] = (time.perf_counter() - start, result.best_fitness)
    kernels.set_backend("auto")
    return timings


def main():
    config, swarm_cfg, context = build_context()
    backends = kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    print()
    print("fitness_batch mean call time")
    header = f"{'batch':>6}" + "".join(f"{name:>14}" for name in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for batch, timings in time_batches(context, config.region_half_width):
        line = f"{batch:>6}" + "".join(f"{timings[b] * 1e6:>12.1f}us" for b in backends)
        if "compiled" in timings and "python" in timings:
            line += f"{timings['python'] / timings['compiled']:>9.1f}x"
        print(line)
    print()
    print("full swarm run (50 particles x 50 iterations)")
    for name, (elapsed, best) in time_pso(swarm_cfg, context).items():
        print(f"  {name:>9}: {elapsed * 1e3:8.1f} ms  (best fitness {best:.6f})")


if __name__ == "__main__":
    main()
