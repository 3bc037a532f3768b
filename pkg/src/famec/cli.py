"""Batch command-line interface.

Subcommands: run (joint optimization), baseline (fixed-antenna schemes),
sweep (antenna-count comparison over many seeds), validate (quick invariant
suite). Progress goes to stderr; machine-readable output goes to the CSV
files under --out. Exit codes: 0 success, 1 failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import kernels, validate as validate_mod
from .driver import (
    alternation_config_from,
    run_alternating,
    run_baseline_fixed_antenna,
    run_baseline_local_only,
)
from .errors import FamecError
from .export import export_results
from .scenario import ScenarioConfig, load_config, sample_scenario


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default=None,
        help="config file path, or 'default' for built-in defaults",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    parser.add_argument("--out", default="results", help="output directory for CSVs")
    parser.add_argument(
        "--jobs", type=int, default=1, help="parallel fitness evaluation threads"
    )
    parser.add_argument(
        "--timings",
        action="store_true",
        help="record wall-clock runtimes in the summary (off by default so outputs are reproducible)",
    )
    parser.add_argument(
        "--backend",
        choices=("auto", "python", "compiled"),
        default=None,
        help="select the fitness kernel implementation",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="famec",
        description="Latency minimization for movable-antenna edge computing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="joint allocation + antenna placement")
    _add_common(run_p)
    run_p.add_argument("--outer", type=int, default=None, help="outer iterations")
    run_p.add_argument("--inner", type=int, default=None, help="swarm iterations")

    base_p = sub.add_parser("baseline", help="fixed-antenna reference schemes")
    base_p.add_argument(
        "--scheme", choices=("local", "fixed"), required=True,
        help="local: no offloading; fixed: offloading at the reference grid",
    )
    _add_common(base_p)

    sweep_p = sub.add_parser("sweep", help="compare schemes across antenna counts")
    sweep_p.add_argument(
        "--antennas", default="4,6,8", help="comma-separated antenna counts"
    )
    sweep_p.add_argument("--seeds", type=int, default=20, help="number of seeds")
    _add_common(sweep_p)
    sweep_p.add_argument("--outer", type=int, default=None, help="outer iterations")
    sweep_p.add_argument("--inner", type=int, default=None, help="swarm iterations")

    val_p = sub.add_parser("validate", help="run the quick invariant suite")
    val_p.add_argument("--seed", type=int, default=0)
    val_p.add_argument(
        "--backend", choices=("auto", "python", "compiled"), default=None
    )
    return parser


def _load(args: argparse.Namespace) -> ScenarioConfig:
    if args.config in (None, "default"):
        config = ScenarioConfig()
    else:
        config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if getattr(args, "outer", None) is not None:
        overrides["outer_iterations"] = args.outer
    if getattr(args, "inner", None) is not None:
        overrides["swarm_iterations"] = args.inner
    if overrides:
        config = replace(config, **overrides)
    return config


def _select_backend(args: argparse.Namespace) -> None:
    if args.backend is not None:
        kernels.set_backend(args.backend)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load(args)
    _select_backend(args)
    seed = config.rng_seed
    _say(f"sampling scenario (seed {seed})")
    instance = sample_scenario(config, seed)
    _say(
        f"optimizing: {config.outer_iterations} outer rounds, "
        f"{config.swarm_iterations} swarm iterations, backend {kernels.active_backend()}"
    )
    result = run_alternating(
        instance,
        alternation_config_from(config),
        workers=args.jobs,
        record_runtime=args.timings,
    )
    trace_path, summary_path = export_results([("joint", seed, result)], args.out)
    _say(f"total latency {result.total_latency:.6f} s")
    _say(f"wrote {trace_path} and {summary_path}")
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    config = _load(args)
    _select_backend(args)
    seed = config.rng_seed
    _say(f"sampling scenario (seed {seed})")
    instance = sample_scenario(config, seed)
    if args.scheme == "local":
        result = run_baseline_local_only(instance, record_runtime=args.timings)
    else:
        result = run_baseline_fixed_antenna(
            instance, alternation_config_from(config), record_runtime=args.timings
        )
    trace_path, summary_path = export_results([(args.scheme, seed, result)], args.out)
    _say(f"{args.scheme} baseline total latency {result.total_latency:.6f} s")
    _say(f"wrote {trace_path} and {summary_path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    _select_backend(args)
    try:
        antenna_counts = [int(part) for part in args.antennas.split(",") if part.strip()]
    except ValueError:
        _say(f"error: --antennas expects comma-separated integers, got {args.antennas!r}")
        return 2
    if not antenna_counts or args.seeds < 1:
        _say("error: sweep needs at least one antenna count and one seed")
        return 2
    base_seed = config.rng_seed
    tagged = []
    for count in antenna_counts:
        config_m = replace(config, antenna_count=count)
        for seed in range(base_seed, base_seed + args.seeds):
            config_run = replace(config_m, rng_seed=seed)
            instance = sample_scenario(config_run, seed)
            _say(f"M={count} seed={seed}: local / fixed / joint")
            tagged.append(
                ("local", seed, run_baseline_local_only(instance, record_runtime=args.timings))
            )
            alt_config = alternation_config_from(config_run)
            tagged.append(
                (
                    "fixed",
                    seed,
                    run_baseline_fixed_antenna(
                        instance, alt_config, record_runtime=args.timings
                    ),
                )
            )
            tagged.append(
                (
                    "joint",
                    seed,
                    run_alternating(
                        instance, alt_config, workers=args.jobs, record_runtime=args.timings
                    ),
                )
            )
    trace_path, summary_path = export_results(tagged, args.out)
    _say(f"wrote {trace_path} and {summary_path}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    _select_backend(args)
    results = validate_mod.run_all(seed=args.seed)
    failures = 0
    for name, passed, detail in results:
        tag = "PASS" if passed else "FAIL"
        _say(f"{tag} {name}: {detail}")
        if not passed:
            failures += 1
    _say(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


def cli_main(arguments: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(arguments)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "baseline":
            return _cmd_baseline(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_validate(args)
    except FamecError as exc:
        _say(f"error: {exc}")
        return 1
    except ValueError as exc:
        _say(f"error: {exc}")
        return 1


def main() -> int:
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
