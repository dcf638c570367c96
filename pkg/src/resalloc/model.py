"""Core data types: instances, cardinality bounds, allocations, feasibility.

An instance is a dense m x n utility matrix W where W[i][j] is the expected
revenue of re-seller i selling product j, optionally decomposed into an
expertise matrix E (probabilities) and a per-product revenue vector rev with
W = E * rev. Bounds constrain bundle sizes on the re-seller side (L1..L2
distinct products each) and copy counts on the product side (R1..R2 copies
each, at most one per re-seller).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

REL_TOL = 1e-9


class InstanceError(ValueError):
    """Raised when instance data violates a structural invariant."""


@dataclass(frozen=True)
class CardinalityBounds:
    """Two-sided cardinality parameters.

    L1/L2 bound the number of distinct products per re-seller; R1/R2 bound
    the number of re-sellers each product is allocated to.
    """

    l1: int
    l2: int
    r1: int
    r2: int

    def __post_init__(self):
        for name in ("l1", "l2", "r1", "r2"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise InstanceError(f"bound {name} must be a non-negative integer, got {v!r}")
        if self.l1 > self.l2:
            raise InstanceError(f"L1 must not exceed L2 (got {self.l1} > {self.l2})")
        if self.r1 > self.r2:
            raise InstanceError(f"R1 must not exceed R2 (got {self.r1} > {self.r2})")


@dataclass(frozen=True)
class Instance:
    """An m-re-seller, n-product utility instance.

    W is stored as a C-contiguous float64 array. E and rev are optional; when
    both are present they must reproduce W within relative tolerance 1e-9.
    """

    w: np.ndarray
    e: Optional[np.ndarray] = None
    rev: Optional[np.ndarray] = None
    seed: Optional[int] = None
    instance_id: Optional[str] = None

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @property
    def n(self) -> int:
        return self.w.shape[1]


def make_instance(w, e=None, rev=None, seed=None, instance_id=None) -> Instance:
    """Build and validate an Instance from array-likes."""
    w = np.ascontiguousarray(np.asarray(w, dtype=np.float64))
    e_arr = None if e is None else np.ascontiguousarray(np.asarray(e, dtype=np.float64))
    rev_arr = None if rev is None else np.ascontiguousarray(np.asarray(rev, dtype=np.float64))
    return validate_instance(Instance(w=w, e=e_arr, rev=rev_arr, seed=seed,
                                      instance_id=instance_id))


def validate_instance(inst: Instance) -> Instance:
    """Return the instance unchanged if all structural invariants hold.

    Raises InstanceError on dimension mismatch, negative or non-finite
    utilities, expertise outside [0,1], non-positive revenue, or an E*rev
    product inconsistent with W beyond relative tolerance 1e-9.
    """
    w = inst.w
    if w.ndim != 2:
        raise InstanceError(f"W must be a 2-d matrix, got ndim={w.ndim}")
    m, n = w.shape
    if m < 1 or n < 1:
        raise InstanceError(f"need at least one re-seller and one product, got {m}x{n}")
    if not np.isfinite(w).all():
        raise InstanceError("W contains non-finite entries")
    if (w < 0).any():
        i, j = np.argwhere(w < 0)[0]
        raise InstanceError(f"negative utility W[{i}][{j}] = {w[i, j]}")
    if inst.e is not None:
        if inst.e.shape != (m, n):
            raise InstanceError(f"expertise shape {inst.e.shape} != W shape {(m, n)}")
        if not np.isfinite(inst.e).all() or (inst.e < 0).any() or (inst.e > 1).any():
            raise InstanceError("expertise entries must lie in [0, 1]")
    if inst.rev is not None:
        if inst.rev.shape != (n,):
            raise InstanceError(f"revenue shape {inst.rev.shape} != ({n},)")
        if not np.isfinite(inst.rev).all() or (inst.rev <= 0).any():
            raise InstanceError("revenue entries must be positive and finite")
    if inst.e is not None and inst.rev is not None:
        prod = inst.e * inst.rev
        tol = REL_TOL * np.maximum(np.abs(prod), np.abs(w))
        bad = np.abs(prod - w) > np.maximum(tol, 0.0)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise InstanceError(
                f"W[{i}][{j}] = {w[i, j]} inconsistent with E*rev = {prod[i, j]}")
    return inst


@dataclass(frozen=True)
class Allocation:
    """Per-re-seller bundles of distinct product indices.

    bundles[i] is a sorted tuple of product indices held by re-seller i.
    Equivalent to the binary matrix A with A[i][j] = 1 iff j in bundles[i].
    """

    bundles: tuple

    @property
    def m(self) -> int:
        return len(self.bundles)

    def as_matrix(self, n: int) -> np.ndarray:
        a = np.zeros((self.m, n), dtype=np.uint8)
        for i, bundle in enumerate(self.bundles):
            for j in bundle:
                a[i, j] = 1
        return a


def make_allocation(bundles: Sequence[Sequence[int]], n: Optional[int] = None) -> Allocation:
    """Build an Allocation, rejecting duplicate or out-of-range indices.

    Duplicates are an error rather than silently deduplicated: bundles hold
    unique products by definition, so a duplicate signals a caller bug.
    """
    out = []
    for i, bundle in enumerate(bundles):
        items = [int(j) for j in bundle]
        if len(set(items)) != len(items):
            raise InstanceError(f"bundle {i} contains duplicate product indices: {sorted(items)}")
        if any(j < 0 for j in items):
            raise InstanceError(f"bundle {i} contains a negative product index")
        if n is not None and any(j >= n for j in items):
            raise InstanceError(f"bundle {i} references a product index >= n={n}")
        out.append(tuple(sorted(items)))
    return Allocation(bundles=tuple(out))


def allocation_from_matrix(a: np.ndarray) -> Allocation:
    bundles = tuple(tuple(int(j) for j in np.flatnonzero(a[i])) for i in range(a.shape[0]))
    return Allocation(bundles=bundles)


def copy_counts(alloc: Allocation, n: int) -> np.ndarray:
    """Number of re-sellers each product is allocated to."""
    counts = np.zeros(n, dtype=np.int64)
    for bundle in alloc.bundles:
        for j in bundle:
            counts[j] += 1
    return counts


def utility(inst: Instance, alloc: Allocation, i: int) -> float:
    """Bundle value of re-seller i: sum of W[i][j] over j in the bundle.

    Summed in ascending product order so results are bit-stable.
    """
    if i < 0 or i >= inst.m:
        raise IndexError(f"re-seller index {i} out of range for m={inst.m}")
    total = 0.0
    for j in alloc.bundles[i]:
        if j < 0 or j >= inst.n:
            raise InstanceError(f"bundle {i} references invalid product {j}")
        total += float(inst.w[i, j])
    return total


def utilities(inst: Instance, alloc: Allocation) -> list:
    return [utility(inst, alloc, i) for i in range(inst.m)]


@dataclass(frozen=True)
class Violation:
    side: str        # "re-seller" or "product"
    index: int
    kind: str        # "below-min" or "above-max"
    count: int
    bound: int

    def describe(self) -> str:
        rel = "<" if self.kind == "below-min" else ">"
        return f"{self.side} {self.index}: {self.count} {rel} bound {self.bound}"


def is_feasible_allocation(inst: Instance, alloc: Allocation, b: CardinalityBounds) -> list:
    """List every violated cardinality constraint; empty list means feasible."""
    if alloc.m != inst.m:
        raise InstanceError(f"allocation has {alloc.m} bundles for m={inst.m} re-sellers")
    out = []
    for i, bundle in enumerate(alloc.bundles):
        size = len(bundle)
        if size < b.l1:
            out.append(Violation("re-seller", i, "below-min", size, b.l1))
        elif size > b.l2:
            out.append(Violation("re-seller", i, "above-max", size, b.l2))
    counts = copy_counts(alloc, inst.n)
    for j in range(inst.n):
        c = int(counts[j])
        if c < b.r1:
            out.append(Violation("product", j, "below-min", c, b.r1))
        elif c > b.r2:
            out.append(Violation("product", j, "above-max", c, b.r2))
    return out


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    witness: Optional[Allocation] = None
    reason: Optional[str] = None   # interval-empty | L2-exceeds-n | R2-exceeds-m | flow-deficit


def check_feasibility(m: int, n: int, b: CardinalityBounds) -> FeasibilityReport:
    """Decide whether any allocation satisfies the two-sided bounds.

    Fast necessary screens first (L2 <= n, R2 <= m, totals interval
    non-empty), then an exact maximum-flow construction with lower bounds
    over the complete bipartite re-seller/product graph, from which a witness
    allocation is decoded.
    """
    if m < 1 or n < 1:
        raise InstanceError("check_feasibility needs m, n >= 1")
    if b.l2 > n:
        return FeasibilityReport(feasible=False, reason="L2-exceeds-n")
    if b.r2 > m:
        return FeasibilityReport(feasible=False, reason="R2-exceeds-m")
    lo = max(m * b.l1, n * b.r1)
    hi = min(m * b.l2, n * b.r2)
    if lo > hi:
        return FeasibilityReport(feasible=False, reason="interval-empty")

    flow, assign = _flow_with_lower_bounds(m, n, b)
    if flow is None:
        return FeasibilityReport(feasible=False, reason="flow-deficit")
    witness = allocation_from_matrix(assign)
    return FeasibilityReport(feasible=True, witness=witness)


def _flow_with_lower_bounds(m: int, n: int, b: CardinalityBounds):
    """Feasibility flow for the bounded bipartite allocation graph.

    Standard reduction: every arc with lower bound lo contributes lo of
    forced flow, routed through a super source/sink pair; the original
    circulation exists iff the super pair's max flow saturates all forced
    flow. Node ids: source 0, re-sellers 1..m, products m+1..m+n, sink
    m+n+1, super source m+n+2, super sink m+n+3.
    """
    src, snk = 0, m + n + 1
    ssrc, ssnk = m + n + 2, m + n + 3
    nodes = m + n + 4
    rows, cols, caps = [], [], []

    def arc(u, v, cap):
        if cap > 0:
            rows.append(u)
            cols.append(v)
            caps.append(cap)

    # source -> re-seller i with bounds [L1, L2]
    for i in range(m):
        arc(src, 1 + i, b.l2 - b.l1)
        arc(ssrc, 1 + i, b.l1)
    arc(src, ssnk, m * b.l1)
    # re-seller i -> product j, capacity 1, lower bound 0
    for i in range(m):
        for j in range(n):
            arc(1 + i, 1 + m + j, 1)
    # product j -> sink with bounds [R1, R2]
    for j in range(n):
        arc(1 + m + j, snk, b.r2 - b.r1)
        arc(1 + m + j, ssnk, b.r1)
    arc(ssrc, snk, n * b.r1)
    # close the circulation
    arc(snk, src, m * b.l2 + 1)

    required = m * b.l1 + n * b.r1
    if required == 0:
        # no lower bounds anywhere: the empty allocation is a witness
        return 0, np.zeros((m, n), dtype=np.uint8)

    graph = csr_matrix((np.asarray(caps, dtype=np.int32), (rows, cols)),
                       shape=(nodes, nodes))
    result = maximum_flow(graph, ssrc, ssnk)
    if result.flow_value != required:
        return None, None

    # Decode the re-seller -> product unit arcs into an assignment matrix.
    flow = result.flow.tocoo()
    assign = np.zeros((m, n), dtype=np.uint8)
    for u, v, f in zip(flow.row, flow.col, flow.data):
        if f > 0 and 1 <= u <= m and m + 1 <= v <= m + n:
            assign[u - 1, v - m - 1] = 1
    return int(result.flow_value), assign
