#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python fallback.

The backend is fixed at import time, so each side runs in a child process
with RESALLOC_FORCE_BACKEND set. The parent merges the JSON the children
print and reports medians plus the speedup factor.

    python3 benchmarks/compare_backends.py --sizes 50,100,200 --repeats 5
"""

import argparse
import json
import os
import statistics
import subprocess
import sys
import time

WORKER_FLAG = "--worker-backend"


def worker(backend: str, sizes, repeats: int, seed: int, oracle_budget: int):
    os.environ["RESALLOC_FORCE_BACKEND"] = backend
    import resalloc
    from resalloc import CardinalityBounds, exact_nash_oracle, greedy_nash, seal
    from resalloc.datagen import GenSpec, build_param_grid, generate_synthetic

    assert resalloc.BACKEND == backend, resalloc.BACKEND
    out = []
    for size in sizes:
        inst = generate_synthetic(GenSpec(m=size, n=size, seed=seed))
        entry = next(e for e in build_param_grid(size, size, "real").entries
                     if not e.skip)
        jobs = [
            ("greedy-nash", lambda: greedy_nash(inst, entry.bounds)),
            ("seal", lambda: seal(inst, entry.bounds)),
            ("oracle-budget", lambda: exact_nash_oracle(
                inst, entry.bounds, budget=oracle_budget)),
        ]
        for name, fn in jobs:
            fn()  # warm-up
            samples = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn()
                samples.append((time.perf_counter() - t0) * 1000.0)
            out.append({"size": size, "task": name,
                        "median_ms": statistics.median(samples)})
    json.dump(out, sys.stdout)


def run_side(backend: str, args) -> list:
    cmd = [sys.executable, os.path.abspath(__file__), WORKER_FLAG, backend,
           "--sizes", args.sizes, "--repeats", str(args.repeats),
           "--seed", str(args.seed), "--oracle-budget", str(args.oracle_budget)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        raise SystemExit(f"{backend} worker failed ({proc.returncode})")
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,100,200",
                    help="comma-separated m=n sizes")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--oracle-budget", type=int, default=200000,
                    help="node cap so the exact-search row stays comparable")
    ap.add_argument(WORKER_FLAG, default=None, help=argparse.SUPPRESS)
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if getattr(args, WORKER_FLAG.lstrip("-").replace("-", "_")):
        worker(getattr(args, "worker_backend"), sizes, args.repeats,
               args.seed, args.oracle_budget)
        return

    pure = {(r["size"], r["task"]): r["median_ms"]
            for r in run_side("pure", args)}
    try:
        compiled = {(r["size"], r["task"]): r["median_ms"]
                    for r in run_side("compiled", args)}
    except SystemExit as exc:
        print(exc)
        print("compiled extension unavailable; only the pure timings follow")
        compiled = None

    header = f"{'size':>6} {'task':<14} {'pure ms':>10}"
    if compiled:
        header += f" {'compiled ms':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for key in sorted(pure):
        size, task = key
        line = f"{size:>6} {task:<14} {pure[key]:>10.3f}"
        if compiled:
            ratio = pure[key] / compiled[key] if compiled[key] > 0 else float("inf")
            line += f" {compiled[key]:>12.3f} {ratio:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
