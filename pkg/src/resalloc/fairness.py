"""Fairness decision procedures: EF1, EQ1, and exhaustive EQ1 existence.

EF1 (envy-freeness up to one item): re-seller i does not envy k once some
single item is removed from k's bundle, valued with i's own utilities.
EQ1 (equitability up to one item): i's bundle value is at least k's bundle
value after removing some single item from k's bundle, each bundle valued by
its owner. Both are checked over ordered pairs and skip pairs whose target
bundle is empty, so a bundle of size 1 always passes against an empty rival
(its remainder value is 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import Allocation, CardinalityBounds, Instance, check_feasibility, utilities


@dataclass(frozen=True)
class FairnessVerdict:
    satisfied: bool
    # (i, k, removed product): the ordered pair violating the criterion and
    # the best single removal considered for k's bundle
    witness: Optional[tuple] = None


def _min_remainder(inst: Instance, bundle, valuer: int):
    """Cheapest single-removal remainder of `bundle` as valued by `valuer`.

    Each remainder is re-summed directly (ascending item order) instead of
    subtracting the removed item from the bundle total; subtraction loses
    precision through cancellation and can flip exact-equality comparisons.
    Returns (removed item, remainder value); remainder ties keep the lowest
    removed index.
    """
    best_j, best_rem = -1, float("inf")
    for j in bundle:
        rem = 0.0
        for l in bundle:
            if l != j:
                rem += float(inst.w[valuer, l])
        if rem < best_rem:
            best_rem, best_j = rem, j
    return best_j, best_rem


def check_ef1(inst: Instance, alloc: Allocation) -> FairnessVerdict:
    """EF1 over all ordered pairs; first violation in (i, k) order wins."""
    vals = utilities(inst, alloc)
    for i in range(inst.m):
        for k in range(inst.m):
            if i == k or not alloc.bundles[k]:
                continue
            best_j, remainder = _min_remainder(inst, alloc.bundles[k], i)
            if vals[i] < remainder:
                return FairnessVerdict(satisfied=False, witness=(i, k, best_j))
    return FairnessVerdict(satisfied=True)


def check_eq1(inst: Instance, alloc: Allocation) -> FairnessVerdict:
    """EQ1 over all ordered pairs; removals are valued by the bundle owner."""
    vals = utilities(inst, alloc)
    for i in range(inst.m):
        for k in range(inst.m):
            if i == k or not alloc.bundles[k]:
                continue
            best_j, remainder = _min_remainder(inst, alloc.bundles[k], k)
            if vals[i] < remainder:
                return FairnessVerdict(satisfied=False, witness=(i, k, best_j))
    return FairnessVerdict(satisfied=True)


@dataclass(frozen=True)
class Eq1SearchResult:
    outcome: str   # exists | not-exists | budget-exhausted
    witness: Optional[Allocation] = None
    nodes: int = 0


def eq1_exists(inst: Instance, b: CardinalityBounds, search_budget: int = 10**7) -> Eq1SearchResult:
    """Exhaustively search the feasible allocations for one satisfying EQ1.

    Backtracking over per-product re-seller subsets in index order (the same
    tuple-lexicographic enumeration the exact oracle uses), pruning only
    branches that cannot be completed feasibly, so a completed search is a
    proof of non-existence. The first witness found is the lexicographically
    smallest one. search_budget caps candidate placements; exceeding it
    yields outcome "budget-exhausted" (a value, not an error).
    """
    m, n = inst.m, inst.n
    if not check_feasibility(m, n, b).feasible:
        return Eq1SearchResult(outcome="not-exists", nodes=0)
    l1, l2, r1, r2 = b.l1, b.l2, b.r1, b.r2
    w = inst.w

    bundles = [[] for _ in range(m)]
    state = {"nodes": 0, "witness": None, "aborted": False}

    def node(j):
        if state["aborted"] or state["witness"] is not None:
            return
        rem = n - j
        for i in range(m):
            if l1 - len(bundles[i]) > rem:
                return
        if j == n:
            alloc = Allocation(bundles=tuple(tuple(bd) for bd in bundles))
            if check_eq1(inst, alloc).satisfied:
                state["witness"] = alloc
            return
        cap_rem = 0
        for i in range(m):
            cap_rem += l2 - len(bundles[i])
        smax = min(r2, m, cap_rem - (n - 1 - j) * r1)
        if smax < r1:
            return

        members = []
        if r1 == 0:
            node(j + 1)
            if state["aborted"] or state["witness"] is not None:
                return
        start = 0
        while True:
            found = -1
            if len(members) < smax:
                i = start
                while i < m:
                    if len(bundles[i]) < l2:
                        found = i
                        break
                    i += 1
            if found >= 0:
                state["nodes"] += 1
                if state["nodes"] > search_budget:
                    state["aborted"] = True
                    return
                bundles[found].append(j)
                members.append(found)
                if len(members) >= r1:
                    node(j + 1)
                    if state["aborted"] or state["witness"] is not None:
                        return
                start = found + 1
            else:
                if not members:
                    break
                last = members.pop()
                bundles[last].pop()
                start = last + 1

    node(0)
    if state["witness"] is not None:
        return Eq1SearchResult(outcome="exists", witness=state["witness"],
                               nodes=state["nodes"])
    if state["aborted"]:
        return Eq1SearchResult(outcome="budget-exhausted", nodes=state["nodes"])
    return Eq1SearchResult(outcome="not-exists", nodes=state["nodes"])
