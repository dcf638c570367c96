"""Allocation procedures.

Greedy Nash maximization, the sequential egalitarian allocator, a pure
revenue-greedy baseline, round robin, least-happy-first (LPT) and the
re-seller-unconstrained greedy variant, the shared greedy-replacement repair,
and an exact branch-and-bound Nash oracle for small instances.

All procedures are deterministic: every tie breaks to the lowest index, and
identical inputs produce byte-identical results including traces. Trace
events are lines of the form "phase,reseller,product,utility_after".
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .fairness import check_ef1
from .metrics import nash_welfare
from .model import (Allocation, CardinalityBounds, Instance, InstanceError,
                    allocation_from_matrix, check_feasibility, is_feasible_allocation)

NEG_INF = float("-inf")

STATUS_SUCCESS = "success"
STATUS_REPAIR_INCOMPLETE = "repair-incomplete"
STATUS_INFEASIBLE = "infeasible-input"


@dataclass(frozen=True)
class AllocationResult:
    allocation: Allocation
    status: str
    trace: Optional[tuple] = None
    meta: Optional[dict] = None


@dataclass(frozen=True)
class OracleResult:
    best_allocation: Optional[Allocation]
    best_nash_log: float
    nodes_expanded: int
    exhaustive: bool


class _State:
    """Mutable allocation state shared by all procedures."""

    __slots__ = ("w", "m", "n", "u", "owned", "bsize", "copies", "trace")

    def __init__(self, inst: Instance, record_trace: bool):
        self.w = np.ascontiguousarray(inst.w, dtype=np.float64)
        self.m, self.n = inst.m, inst.n
        self.u = np.zeros(self.m, dtype=np.float64)
        self.owned = np.zeros((self.m, self.n), dtype=np.uint8)
        self.bsize = np.zeros(self.m, dtype=np.int64)
        self.copies = np.zeros(self.n, dtype=np.int64)
        self.trace = [] if record_trace else None

    def seed_from(self, alloc: Allocation):
        for i, bundle in enumerate(alloc.bundles):
            for j in bundle:
                self.owned[i, j] = 1
                self.bsize[i] += 1
                self.copies[j] += 1
                self.u[i] = self.u[i] + self.w[i, j]

    def assign(self, i: int, j: int, phase: str):
        self.owned[i, j] = 1
        self.bsize[i] += 1
        self.copies[j] += 1
        self.u[i] = self.u[i] + self.w[i, j]
        if self.trace is not None:
            self.trace.append(f"{phase},{i},{j},{float(self.u[i])!r}")

    def unassign(self, i: int, l: int, phase: str):
        self.owned[i, l] = 0
        self.bsize[i] -= 1
        self.copies[l] -= 1
        self.u[i] = self.u[i] - self.w[i, l]
        if self.trace is not None:
            self.trace.append(f"{phase},{i},{l},{float(self.u[i])!r}")

    def allocation(self) -> Allocation:
        return allocation_from_matrix(self.owned)


def _empty_result(inst: Instance, record_trace: bool) -> AllocationResult:
    empty = Allocation(bundles=tuple(() for _ in range(inst.m)))
    return AllocationResult(empty, STATUS_INFEASIBLE,
                            trace=() if record_trace else None)


def _finalize(inst: Instance, enforce: CardinalityBounds, state: _State,
              meta: Optional[dict] = None) -> AllocationResult:
    alloc = state.allocation()
    ok = not is_feasible_allocation(inst, alloc, enforce)
    return AllocationResult(
        alloc,
        STATUS_SUCCESS if ok else STATUS_REPAIR_INCOMPLETE,
        trace=tuple(state.trace) if state.trace is not None else None,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# shared phases

def _phase_first(state: _State, l2: int, r2: int):
    # every re-seller, in index order, takes its most-preferred product
    # whose copy count is still below r2
    for i in range(state.m):
        if state.bsize[i] < l2:
            j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, r2)
            if j >= 0:
                state.assign(i, j, "first")


def _phase_greedy(state: _State, l2: int, target: int, phase: str):
    # per product in index order, hand out copies to the re-seller with the
    # largest multiplicative Nash gain until `target` copies are placed
    for j in range(state.n):
        while state.copies[j] < target:
            i = _backend.best_gain_candidate(state.w, state.u, state.owned,
                                             state.bsize, j, l2)
            if i < 0:
                break
            state.assign(i, j, phase)


def _phase_fill(state: _State, l1: int, r2: int):
    # top every bundle up to l1; when every unowned product is already at r2
    # copies, rebalance: move a product over from a bundle above l1, or
    # reroute a competitor onto spare copy capacity to free one up
    for i in range(state.m):
        while state.bsize[i] < l1:
            j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, r2)
            if j >= 0:
                state.assign(i, j, "fill")
                continue
            k, q = _fill_donor(state, i, l1)
            if k >= 0:
                state.unassign(k, q, "fill-out")
                state.assign(i, q, "fill")
                continue
            k, q, t = _fill_reroute(state, i, r2)
            if k < 0:
                break
            state.unassign(k, q, "fill-out")
            state.assign(k, t, "fill-over")
            state.assign(i, q, "fill")


def _fill_donor(state: _State, i: int, l1: int) -> tuple:
    # cheapest transfer into bundle i: donor k above l1 giving up q (which i
    # lacks) with the smallest net utility loss w[k][q] - w[i][q], lex ties
    best_loss, best = math.inf, (-1, -1)
    for k in range(state.m):
        if k == i or state.bsize[k] <= l1:
            continue
        for q in range(state.n):
            if not state.owned[k, q] or state.owned[i, q]:
                continue
            loss = float(state.w[k, q]) - float(state.w[i, q])
            if loss < best_loss:
                best_loss, best = loss, (k, q)
    return best


def _fill_reroute(state: _State, i: int, r2: int) -> tuple:
    # two-step rescue: competitor k trades its product q (which i lacks) for
    # a product t with spare copy capacity, and i takes the freed copy of q;
    # k's bundle size is unchanged, the move minimizes k's loss w[k][q]-w[k][t]
    best_loss, best = math.inf, (-1, -1, -1)
    for k in range(state.m):
        if k == i:
            continue
        for q in range(state.n):
            if not state.owned[k, q] or state.owned[i, q]:
                continue
            for t in range(state.n):
                if state.owned[k, t] or state.copies[t] >= r2:
                    continue
                loss = float(state.w[k, q]) - float(state.w[k, t])
                if loss < best_loss:
                    best_loss, best = loss, (k, q, t)
    return best


def _phase_replacement(state: _State, r1: int):
    # swap over-supplied products out of bundles to lift every product to r1
    # copies; each swap minimizes the owner's utility decrease
    for j in range(state.n):
        while state.copies[j] < r1:
            i, l = _backend.best_swap_donor(state.w, state.owned, state.copies, r1, j)
            if i < 0:
                break
            state.unassign(i, l, "swap-out")
            state.assign(i, j, "swap-in")


# ---------------------------------------------------------------------------
# allocation procedures

def greedy_nash(inst: Instance, b: CardinalityBounds, trace: bool = False) -> AllocationResult:
    """Greedy Nash-welfare maximization under two-sided bounds.

    Six phases: empty init; first allocation (one most-preferred product per
    re-seller); per-product greedy gain assignment up to R1 copies; fill each
    bundle to L1; greedy replacement for still-under-allocated products;
    greedy gain assignment continued up to R2 copies.
    """
    return _greedy_nash_with(inst, b, b, trace)


def uncons_greedy_nash(inst: Instance, b: CardinalityBounds, trace: bool = False) -> AllocationResult:
    """Greedy Nash with the re-seller-side constraint disabled (L1=0, L2=n).

    Product-side bounds are kept; bundle sizes are free, so the bundle-size
    variance of the result is generally nonzero.
    """
    effective = CardinalityBounds(0, inst.n, b.r1, b.r2)
    return _greedy_nash_with(inst, effective, effective, trace)


def _greedy_nash_with(inst: Instance, b: CardinalityBounds,
                      enforce: CardinalityBounds, trace: bool) -> AllocationResult:
    if not check_feasibility(inst.m, inst.n, b).feasible:
        return _empty_result(inst, trace)
    state = _State(inst, trace)
    _phase_first(state, b.l2, b.r2)
    _phase_greedy(state, b.l2, b.r1, "greedy-lo")
    _phase_fill(state, b.l1, b.r2)
    _phase_replacement(state, b.r1)
    _phase_greedy(state, b.l2, b.r2, "greedy-hi")
    return _finalize(inst, enforce, state)


def seal(inst: Instance, b: CardinalityBounds, trace: bool = False) -> AllocationResult:
    """Sequential egalitarian allocation.

    L1 rounds, each serving all re-sellers from least to most happy (utility
    at round start, index tie-break); every pick is the most-preferred
    unowned product with copies below R1, falling back to below R2. Then
    greedy replacement, then L2-L1 extra rounds capped only by R2.
    """
    if not check_feasibility(inst.m, inst.n, b).feasible:
        return _empty_result(inst, trace)
    state = _State(inst, trace)
    for _ in range(b.l1):
        order = sorted(range(state.m), key=lambda i: (float(state.u[i]), i))
        for i in order:
            if state.bsize[i] >= b.l2:
                continue
            j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, b.r1)
            if j < 0:
                j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, b.r2)
            if j >= 0:
                state.assign(i, j, "round")
    _phase_replacement(state, b.r1)
    for _ in range(b.l1, b.l2):
        order = sorted(range(state.m), key=lambda i: (float(state.u[i]), i))
        for i in order:
            if state.bsize[i] >= b.l2:
                continue
            j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, b.r2)
            if j >= 0:
                state.assign(i, j, "round-hi")
    return _finalize(inst, b, state)


def greedy_replacement(inst: Instance, b: CardinalityBounds, alloc: Allocation) -> Allocation:
    """Repair pass lifting every product to R1 copies by cheapest swaps.

    For each product j below R1 (ascending), repeatedly swap j in for the
    held product l (with copies above R1) that minimizes W[i][l] - W[i][j],
    lex-smallest (i, l) on ties, until j reaches R1 or no donor remains.
    Incompleteness is the caller's to detect (the result may still be short).
    """
    state = _State(inst, record_trace=False)
    state.seed_from(alloc)
    _phase_replacement(state, b.r1)
    return state.allocation()


def greedy_revenue(inst: Instance, b: CardinalityBounds, trace: bool = False) -> AllocationResult:
    """Revenue-greedy baseline: repeatedly take the largest-utility pair.

    A pair is admissible when both upper bounds stay respected and the
    aggregate capacity screens still allow completing all lower bounds
    afterwards. Stops when no admissible pair improves revenue, then reuses
    the greedy-Nash lower-bound phases (fill, replacement, greedy to R2).
    """
    if not check_feasibility(inst.m, inst.n, b).feasible:
        return _empty_result(inst, trace)
    state = _State(inst, trace)
    m, n = state.m, state.n
    heap = [(-inst.w[i, j], i, j) for i in range(m) for j in range(n)]
    heapq.heapify(heap)
    cap_res = m * b.l2           # sum of remaining bundle capacity
    cap_prod = n * b.r2          # sum of remaining copy capacity
    need_prod = n * b.r1         # copies still required to reach R1 everywhere
    need_res = m * b.l1          # products still required to reach L1 everywhere
    while heap:
        neg_w, i, j = heapq.heappop(heap)
        if -neg_w <= 0.0:
            break
        if state.bsize[i] >= b.l2 or state.copies[j] >= b.r2:
            continue
        helps_prod = 1 if state.copies[j] < b.r1 else 0
        helps_res = 1 if state.bsize[i] < b.l1 else 0
        if cap_res - 1 < need_prod - helps_prod:
            continue
        if cap_prod - 1 < need_res - helps_res:
            continue
        state.assign(i, j, "revenue")
        cap_res -= 1
        cap_prod -= 1
        need_prod -= helps_prod
        need_res -= helps_res
    _phase_fill(state, b.l1, b.r2)
    _phase_replacement(state, b.r1)
    _phase_greedy(state, b.l2, b.r2, "greedy-hi")
    return _finalize(inst, b, state)


def round_robin(inst: Instance, b: CardinalityBounds, order: Sequence[int],
                trace: bool = False) -> AllocationResult:
    """Round-robin picking in a fixed re-seller order.

    Re-sellers take turns picking their most-preferred unowned product with
    copies below R1 (falling back to below R2) until every bundle reaches
    L1; afterwards bundles grow toward L2 only to absorb copies still owed
    to products below R1. The EF1 verdict of the result is attached under
    meta["ef1"].
    """
    order = [int(i) for i in order]
    if sorted(order) != list(range(inst.m)):
        raise InstanceError(f"order must be a permutation of 0..{inst.m - 1}")
    if not check_feasibility(inst.m, inst.n, b).feasible:
        return _empty_result(inst, trace)
    state = _State(inst, trace)
    while any(state.bsize[i] < b.l1 for i in range(state.m)):
        progress = False
        for i in order:
            if state.bsize[i] >= b.l1:
                continue
            j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, b.r1)
            if j < 0:
                j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, b.r2)
            if j >= 0:
                state.assign(i, j, "round")
                progress = True
        if not progress:
            break
    while (state.copies < b.r1).any():
        progress = False
        for i in order:
            if not (state.copies < b.r1).any():
                break
            if state.bsize[i] >= b.l2:
                continue
            j = _backend.best_product_candidate(state.w, state.owned, state.copies, i, b.r1)
            if j >= 0:
                state.assign(i, j, "round")
                progress = True
        if not progress:
            break
    result = _finalize(inst, b, state)
    verdict = check_ef1(inst, result.allocation)
    return AllocationResult(result.allocation, result.status, result.trace,
                            meta={"ef1": verdict})


def lpt_allocate(inst: Instance, b: CardinalityBounds, trace: bool = False) -> AllocationResult:
    """Least-happy-first assignment until every product reaches R1 copies.

    The minimum-utility re-seller (lowest index on ties) repeatedly takes its
    most-preferred unowned product with copies below R1, falling back to
    below R2. No re-seller-side constraint is enforced, so bundle sizes vary;
    status is judged against the product-side bounds only.
    """
    effective = CardinalityBounds(0, inst.n, b.r1, b.r2)
    if not check_feasibility(inst.m, inst.n, effective).feasible:
        return _empty_result(inst, trace)
    state = _State(inst, trace)
    stuck = [False] * state.m
    while (state.copies < b.r1).any():
        best_i, best_u = -1, math.inf
        for i in range(state.m):
            if stuck[i]:
                continue
            ui = float(state.u[i])
            if ui < best_u:
                best_u, best_i = ui, i
        if best_i < 0:
            break
        j = _backend.best_product_candidate(state.w, state.owned, state.copies, best_i, b.r1)
        if j < 0:
            j = _backend.best_product_candidate(state.w, state.owned, state.copies, best_i, b.r2)
        if j < 0:
            stuck[best_i] = True
            continue
        state.assign(best_i, j, "lpt")
    return _finalize(inst, effective, state)


def exact_nash_oracle(inst: Instance, b: CardinalityBounds,
                      budget: int = 10**7) -> OracleResult:
    """Exact maximum-Nash search by branch and bound.

    Intended for small instances; `budget` caps candidate placements, and
    exhaustive=False signals a budget cut (the incumbent is still the best
    allocation seen). The search is warm-started from greedy_nash and seal;
    warm-up does not consume budget. Bounds rejected by check_feasibility
    yield an empty exhaustive result.
    """
    if not check_feasibility(inst.m, inst.n, b).feasible:
        return OracleResult(None, NEG_INF, 0, True)
    warm_alloc, warm_log = None, NEG_INF
    for heur in (greedy_nash(inst, b), seal(inst, b)):
        if heur.status != STATUS_SUCCESS:
            continue
        lg, _ = nash_welfare(inst, heur.allocation)
        if warm_alloc is None or lg > warm_log:
            warm_alloc, warm_log = heur.allocation, lg
    warm_mask = warm_alloc.as_matrix(inst.n) if warm_alloc is not None else None
    mask, best_log, nodes, exhaustive = _backend.oracle_search(
        np.ascontiguousarray(inst.w, dtype=np.float64),
        b.l1, b.l2, b.r1, b.r2, int(budget), warm_mask, warm_log)
    best = allocation_from_matrix(mask) if mask is not None else None
    return OracleResult(best, best_log, int(nodes), bool(exhaustive))


# ---------------------------------------------------------------------------
# registry used by the CLI

ALGORITHM_NAMES = ("greedy-nash", "seal", "greedy-revenue", "round-robin",
                   "lpt", "uncons-greedy-nash", "oracle")


def run_algorithm(name: str, inst: Instance, b: CardinalityBounds,
                  trace: bool = False, oracle_budget: int = 10**7) -> AllocationResult:
    """Dispatch by registered name; the oracle is wrapped as an AllocationResult."""
    if name == "greedy-nash":
        return greedy_nash(inst, b, trace)
    if name == "seal":
        return seal(inst, b, trace)
    if name == "greedy-revenue":
        return greedy_revenue(inst, b, trace)
    if name == "round-robin":
        return round_robin(inst, b, list(range(inst.m)), trace)
    if name == "lpt":
        return lpt_allocate(inst, b, trace)
    if name == "uncons-greedy-nash":
        return uncons_greedy_nash(inst, b, trace)
    if name == "oracle":
        if not check_feasibility(inst.m, inst.n, b).feasible:
            return _empty_result(inst, trace)
        res = exact_nash_oracle(inst, b, budget=oracle_budget)
        meta = {"nodes_expanded": res.nodes_expanded, "exhaustive": res.exhaustive}
        if res.best_allocation is None:
            empty = Allocation(bundles=tuple(() for _ in range(inst.m)))
            return AllocationResult(empty, STATUS_REPAIR_INCOMPLETE,
                                    trace=() if trace else None, meta=meta)
        return AllocationResult(res.best_allocation, STATUS_SUCCESS,
                                trace=() if trace else None, meta=meta)
    raise ValueError(f"unknown algorithm {name!r}; known: {', '.join(ALGORITHM_NAMES)}")
