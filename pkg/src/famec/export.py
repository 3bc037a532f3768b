"""CSV export of optimization traces and per-run summaries.

Two files per export: trace.csv with one row per recorded swarm iteration
(baselines contribute a single row) and summary.csv with one row per run.
Floats are written with repr so re-parsing reproduces them bit for bit, and
rows are sorted, so exporting the same results twice is byte-identical.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .driver import RunResult
from .errors import IoError

TRACE_BASENAME = "trace.csv"
SUMMARY_BASENAME = "summary.csv"


def _fmt(value) -> str:
    return repr(float(value))


def _result_dims(result: RunResult) -> tuple[int, int]:
    return len(result.final_positions), len(result.rates)


def _trace_rows(scheme: str, seed: int, result: RunResult, max_n: int, max_m: int):
    m, n = _result_dims(result)
    beta_pad = [""] * (max_n - n)
    coord_pad = [""] * (max_m - m)

    def row(outer: int, inner: int, fitness, total, betas, vector) -> list[str]:
        xs = [_fmt(vector[2 * i]) for i in range(m)]
        ys = [_fmt(vector[2 * i + 1]) for i in range(m)]
        return (
            [scheme, str(seed), str(outer), str(inner), _fmt(fitness), _fmt(total)]
            + [_fmt(b) for b in betas]
            + beta_pad
            + xs
            + coord_pad
            + ys
            + coord_pad
        )

    if result.inner_traces:
        for k, trace in enumerate(result.inner_traces, start=1):
            betas = result.beta_trace[k - 1]
            latencies = result.inner_latency_traces[k - 1]
            positions = result.inner_position_traces[k - 1]
            for t in range(len(trace)):
                yield row(k, t, trace[t], latencies[t], betas, positions[t])
    else:
        vector = np.empty(2 * m)
        for i, pos in enumerate(result.final_positions):
            vector[2 * i] = pos.x
            vector[2 * i + 1] = pos.y
        yield row(
            1,
            0,
            result.outer_trace[-1],
            result.total_latency,
            result.beta_trace[-1],
            vector,
        )


def export_results(
    results: list[tuple[str, int, RunResult]], out_dir: str
) -> tuple[str, str]:
    """Write trace.csv and summary.csv under out_dir; returns their paths.

    results holds (scheme, seed, run) triples. Rows are ordered by scheme,
    seed, then antenna count (sweeps repeat scheme/seed pairs) and iteration.
    """
    if not results:
        raise IoError("nothing to export")
    ordered = sorted(results, key=lambda item: (item[0], item[1], _result_dims(item[2])[0]))
    max_m = max(_result_dims(r)[0] for _, _, r in ordered)
    max_n = max(_result_dims(r)[1] for _, _, r in ordered)

    trace_header = (
        ["scheme", "seed", "outer_iter", "inner_iter", "global_best_fitness", "total_latency"]
        + [f"beta_{i + 1}" for i in range(max_n)]
        + [f"antenna_x_{i + 1}" for i in range(max_m)]
        + [f"antenna_y_{i + 1}" for i in range(max_m)]
    )
    summary_header = [
        "scheme",
        "seed",
        "M",
        "N",
        "total_latency",
        "mean_rate_bps",
        "runtime_seconds",
    ]

    trace_path = os.path.join(out_dir, TRACE_BASENAME)
    summary_path = os.path.join(out_dir, SUMMARY_BASENAME)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(trace_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(trace_header)
            for scheme, seed, result in ordered:
                for fields in _trace_rows(scheme, seed, result, max_n, max_m):
                    writer.writerow(fields)
        with open(summary_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(summary_header)
            for scheme, seed, result in ordered:
                m, n = _result_dims(result)
                writer.writerow(
                    [
                        scheme,
                        str(seed),
                        str(m),
                        str(n),
                        _fmt(result.total_latency),
                        _fmt(float(np.mean(result.rates))),
                        _fmt(result.runtime_seconds),
                    ]
                )
    except OSError as exc:
        raise IoError(f"cannot write results under {out_dir!r}: {exc}")
    return trace_path, summary_path
