"""Integer-programming formulation of the Nash-welfare problem.

Utilities are rescaled per re-seller to integers summing to at most 1000,
and each log-utility term is replaced by its piecewise-linear upper envelope
built from secant cuts between consecutive integers. The envelope agrees
with ln(u) exactly at every integer u >= 1, so on the scaled instance the
model optimum coincides with the true Nash optimum.

The module only writes LP files and reads solver output; it does not ship a
solver. For tiny models solve_model_by_enumeration provides a reference
optimum by brute force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import (Allocation, CardinalityBounds, Instance,
                    is_feasible_allocation, make_allocation)

SCALE_TOTAL = 1000
CUT_POINTS = tuple(range(1, SCALE_TOTAL, 2))   # odd anchors 1, 3, ..., 999


class MilpError(ValueError):
    pass


def cut_slope(k: int) -> float:
    """Slope of the secant of ln between k and k+1."""
    return math.log(k + 1) - math.log(k)


def cut_value(u: float, k: int) -> float:
    """Value at u of the cut anchored at k."""
    return math.log(k) + cut_slope(k) * (u - k)


def log_cut_envelope(u: float) -> float:
    """Pointwise minimum of all cuts; equals ln(u) at integers 1..1000.

    At u=0 every cut is finite and the minimum is -ln 2 (the k=1 cut), a
    harmless artifact since scaled utilities of interest are >= 1.
    """
    return min(cut_value(u, k) for k in CUT_POINTS)


@dataclass(frozen=True)
class ScaledInstance:
    v: np.ndarray                # int64, m x n, row sums <= SCALE_TOTAL
    scale_factors: tuple         # per-row multiplier applied to W


def scale_utilities(inst: Instance) -> ScaledInstance:
    """Rescale each re-seller's row of W to integers via floor(w*1000/rowsum)."""
    m, n = inst.m, inst.n
    v = np.zeros((m, n), dtype=np.int64)
    factors = []
    for i in range(m):
        rowsum = 0.0
        for j in range(n):
            rowsum = rowsum + float(inst.w[i, j])
        if rowsum <= 0.0:
            raise MilpError(f"re-seller {i} has zero total utility; cannot scale")
        factors.append(SCALE_TOTAL / rowsum)
        for j in range(n):
            v[i, j] = math.floor(float(inst.w[i, j]) * SCALE_TOTAL / rowsum)
    return ScaledInstance(v=v, scale_factors=tuple(factors))


@dataclass(frozen=True)
class MilpModel:
    m: int
    n: int
    v: np.ndarray
    bounds: CardinalityBounds
    scale_factors: tuple

    @property
    def num_binaries(self) -> int:
        return self.m * self.n

    @property
    def num_continuous(self) -> int:
        return self.m

    @property
    def num_cuts(self) -> int:
        return self.m * len(CUT_POINTS)


def build_nashmax_model(inst: Instance, b: CardinalityBounds) -> MilpModel:
    scaled = scale_utilities(inst)
    return MilpModel(m=inst.m, n=inst.n, v=scaled.v, bounds=b,
                     scale_factors=scaled.scale_factors)


def _fmt_terms(terms) -> str:
    # terms: sequence of (name, coefficient), zero coefficients pre-filtered
    parts = []
    for name, coef in terms:
        mag = -coef if coef < 0 else coef
        body = name if mag == 1 else f"{float(mag)!r} {name}"
        if not parts:
            parts.append(body if coef > 0 else f"- {body}")
        else:
            parts.append(f"{'-' if coef < 0 else '+'} {body}")
    return " ".join(parts)


def _bound_rows(prefix: str, idx: int, terms, lo: int, hi: int, out: list):
    expr = _fmt_terms(terms)
    if lo == hi:
        out.append(f" {prefix}_{idx}: {expr} = {lo}")
    else:
        out.append(f" {prefix}_{idx}_lo: {expr} >= {lo}")
        out.append(f" {prefix}_{idx}_hi: {expr} <= {hi}")


def write_lp_text(model: MilpModel) -> str:
    """Render the model as deterministic CPLEX-LP text."""
    b = model.bounds
    lines = [f"\\ nash welfare cut model: m={model.m} n={model.n} "
             f"bounds={b.l1},{b.l2},{b.r1},{b.r2}"]
    lines.append("Maximize")
    lines.append(" obj: " + _fmt_terms([(f"g_{i}", 1) for i in range(model.m)]))
    lines.append("Subject To")
    for i in range(model.m):
        for k in CUT_POINTS:
            slope = cut_slope(k)
            terms = [(f"g_{i}", 1)]
            for j in range(model.n):
                vij = int(model.v[i, j])
                if vij != 0:
                    terms.append((f"x_{i}_{j}", -slope * vij))
            rhs = math.log(k) - slope * k
            lines.append(f" cut_{i}_{k}: {_fmt_terms(terms)} <= {rhs!r}")
    for i in range(model.m):
        terms = [(f"x_{i}_{j}", 1) for j in range(model.n)]
        _bound_rows("rsl", i, terms, b.l1, b.l2, lines)
    for j in range(model.n):
        terms = [(f"x_{i}_{j}", 1) for i in range(model.m)]
        _bound_rows("prd", j, terms, b.r1, b.r2, lines)
    lines.append("Bounds")
    for i in range(model.m):
        lines.append(f" g_{i} free")
    lines.append("Binary")
    for i in range(model.m):
        for j in range(model.n):
            lines.append(f" x_{i}_{j}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp_file(model: MilpModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_lp_text(model))


BINARY_TOLERANCE = 1e-6


def read_solution(text: str, m: int, n: int,
                  bounds: Optional[CardinalityBounds] = None) -> Allocation:
    """Parse "name value" solver output back into an allocation.

    Only x_{i}_{j} entries are consumed; anything else (g variables,
    objective rows) is ignored. Values must be within 1e-6 of 0 or 1;
    values >= 0.5 mean assigned. Missing variables default to 0. When
    bounds are given the decoded allocation is validated against them.
    """
    picked = np.zeros((m, n), dtype=np.uint8)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("\\"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise MilpError(f"line {lineno}: expected 'name value', got {raw!r}")
        name, token = fields
        if not name.startswith("x_"):
            continue
        pieces = name.split("_")
        try:
            i, j = int(pieces[1]), int(pieces[2])
        except (IndexError, ValueError):
            raise MilpError(f"line {lineno}: malformed variable name {name!r}") from None
        if not (0 <= i < m and 0 <= j < n):
            raise MilpError(f"line {lineno}: variable {name!r} out of range")
        try:
            value = float(token)
        except ValueError:
            raise MilpError(f"line {lineno}: bad value {token!r}") from None
        if abs(value) > BINARY_TOLERANCE and abs(value - 1.0) > BINARY_TOLERANCE:
            raise MilpError(f"line {lineno}: {name} = {value} is not binary")
        if value >= 0.5:
            picked[i, j] = 1
    bundles = [tuple(j for j in range(n) if picked[i, j]) for i in range(m)]
    alloc = make_allocation(bundles, n)
    if bounds is not None:
        violations = is_feasible_allocation_for(picked, bounds)
        if violations:
            raise MilpError("solution violates bounds: " + "; ".join(violations))
    return alloc


def is_feasible_allocation_for(mask: np.ndarray, b: CardinalityBounds):
    msgs = []
    bsize = mask.sum(axis=1)
    copies = mask.sum(axis=0)
    for i, s in enumerate(bsize):
        if not (b.l1 <= int(s) <= b.l2):
            msgs.append(f"re-seller {i} holds {int(s)} products")
    for j, c in enumerate(copies):
        if not (b.r1 <= int(c) <= b.r2):
            msgs.append(f"product {j} has {int(c)} copies")
    return msgs


def solve_model_by_enumeration(model: MilpModel):
    """Brute-force reference optimum over all binary matrices.

    Guarded to m*n <= 20 variables. Returns (mask, objective) for the best
    feasible assignment, first one found on ties (masks enumerated as
    ascending integers, bit i*n+j), or (None, -inf) when none is feasible.
    """
    m, n, b = model.m, model.n, model.bounds
    if m * n > 20:
        raise MilpError(f"enumeration limited to 20 binaries, got {m * n}")
    best_mask, best_obj = None, float("-inf")
    for code in range(1 << (m * n)):
        mask = np.zeros((m, n), dtype=np.uint8)
        for bit in range(m * n):
            if code >> bit & 1:
                mask[bit // n, bit % n] = 1
        bsize = mask.sum(axis=1)
        if int(bsize.min()) < b.l1 or int(bsize.max()) > b.l2:
            continue
        copies = mask.sum(axis=0)
        if int(copies.min()) < b.r1 or int(copies.max()) > b.r2:
            continue
        obj = 0.0
        for i in range(m):
            u = 0
            for j in range(n):
                if mask[i, j]:
                    u += int(model.v[i, j])
            obj += log_cut_envelope(float(u))
        if best_mask is None or obj > best_obj:
            best_mask, best_obj = mask, obj
    return best_mask, best_obj
