"""Command-line entry point.

Subcommands: generate, solve, compare, audit, bench, export-milp. All runs
are reproducible: outputs depend only on the inputs and flags, multi-instance
runs sort rows before writing, and parallelism never changes bytes.

Exit codes: 0 success, 10 infeasible input bounds, 11 allocation left
violating its bounds (repair incomplete), 12 parse/validation error,
13 I/O error, 2 usage error.
"""

from __future__ import annotations

import csv
import functools
import json
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from .algorithms import (ALGORITHM_NAMES, STATUS_INFEASIBLE, STATUS_REPAIR_INCOMPLETE,
                         exact_nash_oracle, run_algorithm)
from .datagen import GenSpec, build_param_grid, generate_synthetic
from .fairness import check_ef1, check_eq1
from .io import (ParseError, dump_json, parse_bounds, read_allocation,
                 resolve_instance, write_allocation, write_instance,
                 write_report_csv, write_trace)
from .metrics import NEG_INF, approximation_ratio, measure, report_row
from .milp import MilpError, build_nashmax_model, write_lp_file
from .model import InstanceError, is_feasible_allocation

EXIT_INFEASIBLE_INPUT = 10
EXIT_REPAIR_INCOMPLETE = 11
EXIT_PARSE = 12
EXIT_IO = 13

SUMMARY_COLUMNS = ("algorithm", "instances", "oracle_covered", "mean_ratio",
                   "min_ratio", "revenue_dip", "mean_gini", "mean_income_gap",
                   "violation_pct", "mean_runtime_ms")
ORACLE_COLUMNS = ("instance-id", "nash_log", "nodes_expanded", "exhaustive")
BENCH_COLUMNS = ("size", "algorithm", "median_ms", "repeats", "status")


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ParseError, InstanceError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_PARSE)
        except MilpError as exc:
            raise click.ClickException(str(exc)) from None
        except click.ClickException:
            raise
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
    return wrapper


def _load(source: str, bounds_flag):
    inst, embedded = resolve_instance(source)
    if bounds_flag:
        return inst, parse_bounds(bounds_flag)
    if embedded is not None:
        return inst, embedded
    raise click.UsageError(
        "no bounds available: pass --bounds l1,l2,r1,r2 or embed them in the instance file")


def _algo_list(text: str):
    names = [a.strip() for a in text.split(",") if a.strip()]
    if not names:
        raise click.UsageError("no algorithms given")
    for name in names:
        if name not in ALGORITHM_NAMES:
            raise click.UsageError(
                f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHM_NAMES)}")
    return names


def _write_csv(rows, fieldnames, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


@click.group()
def main():
    """Fair product-to-re-seller allocation under two-sided bounds."""


# ---------------------------------------------------------------------------
# generate

@main.command()
@click.option("--m", type=int, default=100, show_default=True, help="re-sellers")
@click.option("--n", type=int, default=100, show_default=True, help="products")
@click.option("--count", type=int, default=1, show_default=True,
              help="number of instances; instance k uses seed+k")
@click.option("--seed", type=int, default=0, show_default=True, help="base seed")
@click.option("--grid", type=click.Choice(["synthetic", "real"]), default=None,
              help="attach this bounds grid to the manifest")
@click.option("--bounds", default=None, help="l1,l2,r1,r2 embedded in each file")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@guarded
def generate(m, n, count, seed, grid, bounds, out):
    """Write seeded synthetic instances and a manifest."""
    if count < 1:
        raise click.UsageError("--count must be >= 1")
    b = parse_bounds(bounds) if bounds else None
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for k in range(count):
        inst = generate_synthetic(GenSpec(m=m, n=n, seed=seed + k))
        fname = f"{inst.instance_id}.json"
        write_instance(inst, outdir / fname, bounds=b)
        entries.append({"id": inst.instance_id, "seed": seed + k, "file": fname})
    manifest = {"m": m, "n": n, "count": count, "base_seed": seed,
                "prng": "PCG64", "instances": entries}
    if grid is not None:
        g = build_param_grid(m, n, grid)
        manifest["grid"] = {"profile": grid, "entries": [
            {"label": e.label,
             "bounds": {"l1": e.bounds.l1, "l2": e.bounds.l2,
                        "r1": e.bounds.r1, "r2": e.bounds.r2},
             "skip": e.skip, "skip_reason": e.skip_reason}
            for e in g.entries]}
    dump_json(manifest, outdir / "manifest.json")
    click.echo(f"wrote {count} instance(s) to {outdir}")


# ---------------------------------------------------------------------------
# solve

@main.command()
@click.argument("instance")
@click.option("--algo", default="greedy-nash", show_default=True)
@click.option("--bounds", default=None, help="l1,l2,r1,r2")
@click.option("--trace", is_flag=True, help="write per-assignment trace.txt")
@click.option("--oracle-budget", type=int, default=10**7, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@guarded
def solve(instance, algo, bounds, trace, oracle_budget, out):
    """Run one algorithm on one instance; write allocation and report row."""
    if algo not in ALGORITHM_NAMES:
        raise click.UsageError(
            f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHM_NAMES)}")
    inst, b = _load(instance, bounds)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = run_algorithm(algo, inst, b, trace=trace, oracle_budget=oracle_budget)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    write_allocation(result.allocation, outdir / "allocation.json")
    rep = measure(inst, result.allocation, b)
    row = report_row(inst.instance_id or instance, algo, rep, runtime_ms, inst.seed)
    write_report_csv([row], outdir / "report.csv")
    if trace:
        write_trace(list(result.trace or ()), outdir / "trace.txt")
    click.echo(f"{algo}: status={result.status} revenue={rep.revenue!r} "
               f"nash_product={rep.nash_product!r}")
    if result.status == STATUS_INFEASIBLE:
        sys.exit(EXIT_INFEASIBLE_INPUT)
    if result.status == STATUS_REPAIR_INCOMPLETE:
        sys.exit(EXIT_REPAIR_INCOMPLETE)


# ---------------------------------------------------------------------------
# compare

def _compare_one(job):
    source, bounds_flag, names, oracle_budget = job
    inst, embedded = resolve_instance(source)
    b = parse_bounds(bounds_flag) if bounds_flag else embedded
    if b is None:
        raise ParseError(f"{source}: no bounds available")
    iid = inst.instance_id or source
    out = {"rows": [], "oracle": None, "per_algo": {}}
    opt_log = None
    if oracle_budget > 0:
        ores = exact_nash_oracle(inst, b, budget=oracle_budget)
        out["oracle"] = {"instance-id": iid,
                         "nash_log": repr(ores.best_nash_log),
                         "nodes_expanded": str(ores.nodes_expanded),
                         "exhaustive": str(ores.exhaustive).lower()}
        if ores.exhaustive and ores.best_allocation is not None:
            opt_log = ores.best_nash_log
    baseline = run_algorithm("greedy-revenue", inst, b)
    baseline_rep = measure(inst, baseline.allocation, b)
    for name in names:
        t0 = time.perf_counter()
        result = run_algorithm(name, inst, b, oracle_budget=oracle_budget)
        runtime_ms = (time.perf_counter() - t0) * 1000.0
        rep = measure(inst, result.allocation, b)
        out["rows"].append(report_row(iid, name, rep, runtime_ms, inst.seed))
        ratio = None
        if opt_log is not None and opt_log != NEG_INF:
            ratio = approximation_ratio(rep.nash_log, opt_log)
        dip = 0.0
        if baseline_rep.revenue > 0.0:
            dip = (baseline_rep.revenue - rep.revenue) / baseline_rep.revenue
        out["per_algo"][name] = {"ratio": ratio, "dip": dip, "gini": rep.gini,
                                 "gap": rep.income_gap,
                                 "violated": not rep.feasible, "ms": runtime_ms}
    return out


@main.command()
@click.argument("instances", nargs=-1, required=True)
@click.option("--algo", "algos", default="greedy-nash,seal", show_default=True,
              help="comma-separated algorithm names")
@click.option("--bounds", default=None, help="l1,l2,r1,r2 applied to every instance")
@click.option("--oracle-budget", type=int, default=10**7, show_default=True,
              help="0 disables the oracle baseline; ratio columns stay empty")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@guarded
def compare(instances, algos, bounds, oracle_budget, workers, out):
    """Run several algorithms across instances; write per-run rows and aggregates."""
    names = _algo_list(algos)
    if workers < 1:
        raise click.UsageError("--workers must be >= 1")
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [(src, bounds, tuple(names), oracle_budget) for src in instances]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_compare_one, jobs))
    else:
        results = [_compare_one(job) for job in jobs]
    rows = [row for res in results for row in res["rows"]]
    rows.sort(key=lambda r: (r["instance-id"], r["algorithm"]))
    write_report_csv(rows, outdir / "report.csv")
    if oracle_budget > 0:
        oracle_rows = sorted((res["oracle"] for res in results),
                             key=lambda r: r["instance-id"])
        _write_csv(oracle_rows, ORACLE_COLUMNS, outdir / "oracle.csv")
    summary = []
    for name in sorted(names):
        datas = [res["per_algo"][name] for res in results]
        ratios = [d["ratio"] for d in datas if d["ratio"] is not None]
        count = len(datas)
        summary.append({
            "algorithm": name,
            "instances": str(count),
            "oracle_covered": str(len(ratios)),
            "mean_ratio": repr(sum(ratios) / len(ratios)) if ratios else "",
            "min_ratio": repr(min(ratios)) if ratios else "",
            "revenue_dip": repr(sum(d["dip"] for d in datas) / count),
            "mean_gini": repr(sum(d["gini"] for d in datas) / count),
            "mean_income_gap": repr(sum(d["gap"] for d in datas) / count),
            "violation_pct": repr(100.0 * sum(1 for d in datas if d["violated"]) / count),
            "mean_runtime_ms": repr(sum(d["ms"] for d in datas) / count),
        })
    _write_csv(summary, SUMMARY_COLUMNS, outdir / "summary.csv")
    click.echo(f"compared {len(names)} algorithm(s) on {len(jobs)} instance(s)")


# ---------------------------------------------------------------------------
# audit

@main.command()
@click.argument("instance")
@click.argument("allocation")
@click.option("--bounds", default=None, help="l1,l2,r1,r2")
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="write the verdict JSON here instead of stdout")
@guarded
def audit(instance, allocation, bounds, out):
    """Check an allocation file: feasibility, envy-freeness, equitability."""
    inst, b = _load(instance, bounds)
    alloc = read_allocation(allocation, m=inst.m, n=inst.n)
    violations = is_feasible_allocation(inst, alloc, b)
    ef1 = check_ef1(inst, alloc)
    eq1 = check_eq1(inst, alloc)
    doc = {
        "feasible": not violations,
        "violations": [v.describe() for v in violations],
        "ef1": {"satisfied": ef1.satisfied,
                "witness": list(ef1.witness) if ef1.witness else None},
        "eq1": {"satisfied": eq1.satisfied,
                "witness": list(eq1.witness) if eq1.witness else None},
    }
    text = json.dumps(doc, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


# ---------------------------------------------------------------------------
# bench

def _bench_bounds(size: int, profile: str):
    grid = build_param_grid(size, size, profile)
    for entry in grid.entries:
        if not entry.skip:
            return entry.label, entry.bounds
    raise click.ClickException(f"no feasible {profile} grid entry at size {size}")


@main.command()
@click.option("--sizes", default="100,200,400", show_default=True,
              help="comma-separated ascending m=n sizes")
@click.option("--algo", "algos", default="greedy-nash,seal", show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--grid", type=click.Choice(["synthetic", "real"]), default="real",
              show_default=True, help="bounds profile; first feasible entry is used")
@click.option("--oracle-budget", type=int, default=10**7, show_default=True)
@click.option("--out", default=None, type=click.Path(file_okay=False),
              help="also write bench.csv to this directory")
@guarded
def bench(sizes, algos, repeats, seed, grid, oracle_budget, out):
    """Time algorithms across instance sizes; report the median of repeats."""
    try:
        size_list = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError:
        raise click.UsageError(f"bad size list {sizes!r}") from None
    if not size_list:
        raise click.UsageError("no sizes given")
    if size_list != sorted(size_list):
        raise click.UsageError("sizes must be ascending")
    if repeats < 1:
        raise click.UsageError("--repeats must be >= 1")
    names = _algo_list(algos)
    rows = []
    for size in size_list:
        inst = generate_synthetic(GenSpec(m=size, n=size, seed=seed))
        label, b = _bench_bounds(size, grid)
        for name in names:
            samples = []
            status = ""
            for _ in range(repeats):
                t0 = time.perf_counter()
                result = run_algorithm(name, inst, b, oracle_budget=oracle_budget)
                samples.append((time.perf_counter() - t0) * 1000.0)
                status = result.status
            median_ms = statistics.median(samples)
            rows.append({"size": str(size), "algorithm": name,
                         "median_ms": repr(median_ms), "repeats": str(repeats),
                         "status": status})
            click.echo(f"size={size} bounds={label} algo={name} "
                       f"median_ms={median_ms:.3f} status={status}")
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        _write_csv(rows, BENCH_COLUMNS, outdir / "bench.csv")


# ---------------------------------------------------------------------------
# export-milp

@main.command("export-milp")
@click.argument("instance")
@click.option("--bounds", default=None, help="l1,l2,r1,r2")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def export_milp(instance, bounds, out):
    """Write the scaled Nash-welfare integer program as a CPLEX-LP file."""
    inst, b = _load(instance, bounds)
    model = build_nashmax_model(inst, b)
    write_lp_file(model, out)
    click.echo(f"wrote {out}: {model.num_binaries} binaries, "
               f"{model.num_continuous} log variables, {model.num_cuts} cuts")


if __name__ == "__main__":
    main()
