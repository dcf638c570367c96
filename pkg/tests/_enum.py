"""Plain enumeration reference used to validate the branch-and-bound oracle.

Deliberately written with a different strategy than the library search:
per-product re-seller subsets are enumerated with itertools.combinations,
bundle-size pruning is the only speedup, and the objective is accumulated
with math.log per leaf. Keep it dumb; it is the ground truth.
"""

import itertools
import math
import random

import numpy as np

from resalloc.model import Allocation, CardinalityBounds, Instance, check_feasibility


def enumerate_best(inst, b):
    """Return (best_log, best_allocation_or_None, feasible_count).

    feasible_count is the number of feasible allocations seen (so existence
    can be asserted even when every allocation has a zero-utility bundle).
    """
    m, n = inst.m, inst.n
    cols = []
    for _ in range(n):
        opts = []
        for k in range(b.r1, min(b.r2, m) + 1):
            opts.extend(itertools.combinations(range(m), k))
        cols.append(opts)

    best_log = -math.inf
    best_cols = None
    feasible_count = 0
    bsize = [0] * m
    util = [0.0] * m
    chosen = []

    def rec(j):
        nonlocal best_log, best_cols, feasible_count
        if j == n:
            if all(b.l1 <= s <= b.l2 for s in bsize):
                feasible_count += 1
                lg = 0.0
                for x in util:
                    if x <= 0.0:
                        lg = -math.inf
                        break
                    lg += math.log(x)
                if lg > best_log:
                    best_log = lg
                    best_cols = list(chosen)
            return
        rem = n - j - 1
        for sub in cols[j]:
            ok = True
            for i in sub:
                if bsize[i] + 1 > b.l2:
                    ok = False
                    break
            if ok:
                for i in range(m):
                    extra = 1 if i in sub else 0
                    if bsize[i] + extra + rem < b.l1:
                        ok = False
                        break
            if not ok:
                continue
            for i in sub:
                bsize[i] += 1
                util[i] += float(inst.w[i, j])
            chosen.append(sub)
            rec(j + 1)
            chosen.pop()
            for i in sub:
                bsize[i] -= 1
                util[i] -= float(inst.w[i, j])

    rec(0)

    alloc = None
    if best_cols is not None:
        bundles = [[] for _ in range(m)]
        for j, sub in enumerate(best_cols):
            for i in sub:
                bundles[i].append(j)
        alloc = Allocation(bundles=tuple(tuple(x) for x in bundles))
    return best_log, alloc, feasible_count


def random_feasible_case(pyrng, rng, max_m=5, max_n=5, w_hi=50):
    """Small random instance plus feasible bounds, or None if unlucky."""
    m = pyrng.randint(1, max_m)
    n = pyrng.randint(1, max_n)
    w = np.asarray(rng.integers(0, w_hi, size=(m, n)), dtype=np.float64)
    inst = Instance(w=w, instance_id="rnd-%dx%d" % (m, n))
    for _ in range(30):
        l1 = pyrng.randint(0, n)
        l2 = pyrng.randint(l1, n)
        r1 = pyrng.randint(0, m)
        r2 = pyrng.randint(max(r1, 1), m)
        b = CardinalityBounds(l1, l2, r1, r2)
        if check_feasibility(m, n, b).feasible:
            return inst, b
    return None


def random_cases(seed, count, **kw):
    rng = np.random.default_rng(seed)
    pyrng = random.Random(seed)
    out = []
    while len(out) < count:
        case = random_feasible_case(pyrng, rng, **kw)
        if case is not None:
            out.append(case)
    return out
