"""Pure numpy/Python kernels: the fallback backend.

Mirrors the compiled extension (resalloc._kernels) operation for operation.
Both backends must return identical results bit for bit, so every expression
here uses the same IEEE-754 operations in the same order as the C code, and
every tie breaks to the lowest index.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "pure"

NEG_INF = float("-inf")


def best_gain_candidate(w, u, owned, bsize, j, l2):
    """Re-seller with the largest multiplicative Nash gain for product j.

    Candidates must not own j and must have bundle size below l2.
    Zero-utility candidates count as infinite gain and rank among themselves
    by W[i][j] descending; all other candidates rank by (U_i + W[i][j]) / U_i.
    Ties break to the lowest index. Returns -1 if no candidate exists.
    """
    cand = (owned[:, j] == 0) & (bsize < l2)
    if not cand.any():
        return -1
    col = w[:, j]
    zero = cand & (u == 0.0)
    if zero.any():
        key = np.where(zero, col, -np.inf)
        return int(np.argmax(key))
    key = np.full(u.shape[0], -np.inf)
    idx = np.flatnonzero(cand)
    key[idx] = (u[idx] + col[idx]) / u[idx]
    return int(np.argmax(key))


def best_product_candidate(w, owned, copies, i, cap):
    """Most-preferred unowned product for re-seller i with copies below cap.

    Ties break to the lowest product index; -1 when nothing qualifies.
    """
    avail = (owned[i] == 0) & (copies < cap)
    if not avail.any():
        return -1
    key = np.where(avail, w[i], -np.inf)
    return int(np.argmax(key))


def best_swap_donor(w, owned, copies, r1, j):
    """Cheapest swap that frees a copy for under-allocated product j.

    Scans re-sellers i not holding j and products l they hold whose copy
    count exceeds r1, minimizing the utility decrease W[i][l] - W[i][j].
    Ties break to the lexicographically smallest (i, l). Returns (-1, -1)
    when no donor exists.
    """
    m = w.shape[0]
    best_i, best_l, best_cost = -1, -1, math.inf
    for i in range(m):
        if owned[i, j]:
            continue
        mask = (owned[i] == 1) & (copies > r1)
        if not mask.any():
            continue
        cost = np.where(mask, w[i] - w[i, j], np.inf)
        l = int(np.argmin(cost))
        c = float(cost[l])
        if c < best_cost:
            best_cost, best_i, best_l = c, i, l
    return best_i, best_l


def _suffix_top_sums(wl, m, n, rmax):
    """sums[i][j][r] = sum of the r largest entries of row i over columns j..n-1.

    Built right to left keeping a descending top-rmax list; prefix sums are
    accumulated in descending-value order (the compiled backend does the
    same, so the floats agree bit for bit).
    """
    sums = []
    for i in range(m):
        row = wl[i]
        per_j = [None] * (n + 1)
        per_j[n] = [0.0] * (rmax + 1)
        top = []
        for j in range(n - 1, -1, -1):
            v = row[j]
            pos = 0
            while pos < len(top) and top[pos] >= v:
                pos += 1
            top.insert(pos, v)
            if len(top) > rmax:
                top.pop()
            pref = [0.0] * (rmax + 1)
            acc = 0.0
            for r, tv in enumerate(top):
                acc += tv
                pref[r + 1] = acc
            for r in range(len(top) + 1, rmax + 1):
                pref[r] = acc
            per_j[j] = pref
        sums.append(per_j)
    return sums


def oracle_search(w, l1, l2, r1, r2, budget, warm_mask, warm_log):
    """Exact branch-and-bound for the maximum log-Nash feasible allocation.

    Products are decided in index order; at each level the subset of
    re-sellers receiving that product is enumerated in tuple-lexicographic
    order (build first, then extend). Pruning is sound: bundle caps, subset
    size window from the capacity balance, per-re-seller reachability of l1,
    and an optimistic log-Nash completion bound (sum of the largest remaining
    utilities each bundle could still absorb).

    budget caps candidate placements (each tentative addition of a re-seller
    to a product's subset counts once). Returns
    (best_mask | None, best_log, nodes, exhaustive).
    """
    m, n = w.shape
    wl = w.tolist()
    rmax = min(l2, n)
    sums = _suffix_top_sums(wl, m, n, rmax)

    U = [0.0] * m
    bsize = [0] * m
    curmask = bytearray(m * n)

    state = {
        "best_log": float(warm_log) if warm_mask is not None else NEG_INF,
        "best_mask": np.ascontiguousarray(warm_mask, dtype=np.uint8).tobytes()
                     if warm_mask is not None else None,
        "nodes": 0,
        "aborted": False,
    }
    log = math.log

    def node(j):
        if state["aborted"]:
            return
        rem = n - j
        for i in range(m):
            if l1 - bsize[i] > rem:
                return
        if j == n:
            val = 0.0
            for i in range(m):
                ui = U[i]
                if ui <= 0.0:
                    val = NEG_INF
                    break
                val += log(ui)
            if val > state["best_log"] or state["best_mask"] is None:
                state["best_log"] = val
                state["best_mask"] = bytes(curmask)
            return

        cap_rem = 0
        for i in range(m):
            cap_rem += l2 - bsize[i]
        smax = min(r2, m, cap_rem - (n - 1 - j) * r1)
        if smax < r1:
            return
        smin = r1

        # optimistic completion pieces, fixed for this node
        jj = j + 1
        rem_after = n - jj
        base_fin = 0.0      # sum of logs over positive base terms
        base_neg = 0        # count of non-positive base terms
        posflag = [False] * m
        delta = [0.0] * m
        for i in range(m):
            ri = l2 - bsize[i]
            if ri > rem_after:
                ri = rem_after
            base_i = U[i] + sums[i][jj][ri]
            rm = l2 - bsize[i] - 1
            if rm > rem_after:
                rm = rem_after
            if rm >= 0:
                member_val = U[i] + wl[i][j] + sums[i][jj][rm]
            else:
                member_val = -1.0   # not addable; enumeration skips i anyway
            member_ln = log(member_val) if member_val > 0.0 else NEG_INF
            if base_i > 0.0:
                bln = log(base_i)
                base_fin += bln
                posflag[i] = True
                delta[i] = member_ln - bln
            else:
                base_neg += 1
                delta[i] = member_ln

        # iterative tuple-lex enumeration of this product's subset
        members = []
        saved_u = []
        saved_sum = []
        saved_neg = []
        cur_sum = 0.0
        neg_in_s = 0

        def descend_ok():
            if base_neg - neg_in_s > 0:
                bound = NEG_INF
            else:
                bound = base_fin + cur_sum
            return bound > state["best_log"] or state["best_mask"] is None

        if smin == 0 and descend_ok():
            node(jj)
            if state["aborted"]:
                return
        start = 0
        while True:
            found = -1
            if len(members) < smax:
                i = start
                while i < m:
                    if bsize[i] < l2:
                        found = i
                        break
                    i += 1
            if found >= 0:
                state["nodes"] += 1
                if state["nodes"] > budget:
                    state["aborted"] = True
                    return
                saved_u.append(U[found])
                saved_sum.append(cur_sum)
                saved_neg.append(neg_in_s)
                U[found] = U[found] + wl[found][j]
                bsize[found] += 1
                curmask[found * n + j] = 1
                cur_sum = cur_sum + delta[found]
                if not posflag[found]:
                    neg_in_s += 1
                members.append(found)
                if len(members) >= smin and descend_ok():
                    node(jj)
                    if state["aborted"]:
                        return
                start = found + 1
            else:
                if not members:
                    break
                last = members.pop()
                U[last] = saved_u.pop()
                cur_sum = saved_sum.pop()
                neg_in_s = saved_neg.pop()
                bsize[last] -= 1
                curmask[last * n + j] = 0
                start = last + 1

    node(0)

    best_mask = state["best_mask"]
    mask_arr = None
    if best_mask is not None:
        mask_arr = np.frombuffer(best_mask, dtype=np.uint8).reshape(m, n).copy()
    return mask_arr, state["best_log"], state["nodes"], not state["aborted"]
