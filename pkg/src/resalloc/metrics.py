"""Scalar evaluation measures for allocations and cross-algorithm reports.

All Nash-welfare comparisons inside the package happen in log domain to
avoid overflow with hundreds of factors; the product form is kept for report
readability. Summation orders are fixed (re-seller ascending, then product
ascending) so results are reproducible bit-for-bit across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .model import Allocation, CardinalityBounds, Instance, is_feasible_allocation, utilities

NEG_INF = float("-inf")

REPORT_COLUMNS = ("instance-id", "algorithm", "revenue", "nash_product", "nash_log",
                  "gini", "income_gap", "feasible", "runtime_ms", "seed")


@dataclass(frozen=True)
class MetricsReport:
    revenue: float
    nash_log: float        # -inf when any bundle value is zero
    nash_product: float
    gini: float
    income_gap: float
    feasible: bool


def total_revenue(inst: Instance, alloc: Allocation) -> float:
    """Platform revenue: sum of all bundle values, i ascending then j ascending."""
    total = 0.0
    for u in utilities(inst, alloc):
        total += u
    return total


def nash_welfare(inst: Instance, alloc: Allocation):
    """Return (nash_log, nash_product) of the per-re-seller bundle values.

    nash_log is the sum of natural logs when every bundle value is positive,
    else -inf with nash_product 0.
    """
    vals = utilities(inst, alloc)
    log_sum = 0.0
    for u in vals:
        if u <= 0.0:
            return NEG_INF, 0.0
        log_sum += math.log(u)
    product = 1.0
    for u in vals:
        product *= u
    return log_sum, product


def gini(values: Sequence[float]) -> float:
    """Gini coefficient of a non-negative value vector.

    Mean absolute difference over twice the total, i.e.
    sum_i sum_j |v_i - v_j| / (2 m sum_j v_j); 0 for an all-zero vector
    (equality holds vacuously). Works for any value vector, e.g. per-product
    allocated-copy counts for a product-side inequality reading.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("gini needs at least one value")
    if any(v < 0 for v in vals):
        raise ValueError("gini is undefined for negative values")
    total = 0.0
    for v in vals:
        total += v
    if total == 0.0:
        return 0.0
    m = len(vals)
    diff_sum = 0.0
    for vi in vals:
        for vj in vals:
            diff_sum += abs(vi - vj)
    return diff_sum / (2.0 * m * total)


def income_gap(values: Sequence[float]) -> float:
    """Spread between the best- and worst-off re-seller."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("income_gap needs at least one value")
    return max(vals) - min(vals)


def violation_percentage(results: Sequence[tuple]) -> float:
    """Share of (instance, bounds, allocation-or-None) entries that violate bounds.

    An entry counts as violating when the algorithm failed to produce an
    allocation (None) or the allocation breaks any cardinality constraint.
    """
    if not results:
        raise ValueError("violation_percentage needs at least one entry")
    bad = 0
    for inst, bounds, alloc in results:
        if alloc is None or is_feasible_allocation(inst, alloc, bounds):
            bad += 1
    return 100.0 * bad / len(results)


def approximation_ratio(heuristic_nash_log: float, optimal_nash_log: float) -> float:
    """Ratio of Nash products, computed as exp(heuristic_log - optimal_log).

    A heuristic at -inf (some empty or zero-value bundle) reports ratio 0.
    An optimal at -inf is an error: no meaningful baseline exists.
    """
    if optimal_nash_log == NEG_INF:
        raise ValueError("approximation ratio undefined: optimal Nash welfare is zero")
    if heuristic_nash_log == NEG_INF:
        return 0.0
    return math.exp(heuristic_nash_log - optimal_nash_log)


def measure(inst: Instance, alloc: Allocation, b: CardinalityBounds) -> MetricsReport:
    """Bundle the standard per-allocation measures into one report."""
    vals = utilities(inst, alloc)
    nash_log, nash_product = nash_welfare(inst, alloc)
    return MetricsReport(
        revenue=total_revenue(inst, alloc),
        nash_log=nash_log,
        nash_product=nash_product,
        gini=gini(vals),
        income_gap=income_gap(vals),
        feasible=not is_feasible_allocation(inst, alloc, b),
    )


def report_row(instance_id: str, algorithm: str, report: MetricsReport,
               runtime_ms: float, seed: Optional[int]) -> dict:
    """One delimited-table row in the fixed column order."""
    return {
        "instance-id": instance_id,
        "algorithm": algorithm,
        "revenue": repr(report.revenue),
        "nash_product": repr(report.nash_product),
        "nash_log": repr(report.nash_log),
        "gini": repr(report.gini),
        "income_gap": repr(report.income_gap),
        "feasible": str(report.feasible).lower(),
        "runtime_ms": repr(runtime_ms),
        "seed": "" if seed is None else str(seed),
    }
