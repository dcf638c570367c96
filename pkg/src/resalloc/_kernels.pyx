# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: the fast backend.

Mirrors resalloc._kernels_py operation for operation. Every expression uses
the same IEEE-754 operations in the same order as the pure backend, and every
tie breaks to the lowest index, so both backends return identical bits.
"""

from libc.math cimport log, INFINITY

import numpy as np

BACKEND_NAME = "compiled"


def best_gain_candidate(double[:, ::1] w, double[::1] u,
                        unsigned char[:, ::1] owned, long[::1] bsize,
                        int j, int l2):
    """Re-seller with the largest multiplicative Nash gain for product j."""
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t i
    cdef int best = -1, zbest = -1
    cdef double key = -INFINITY, zkey = -INFINITY, g, ui
    for i in range(m):
        if owned[i, j] == 0 and bsize[i] < l2:
            ui = u[i]
            if ui == 0.0:
                if w[i, j] > zkey:
                    zkey = w[i, j]
                    zbest = <int>i
            else:
                g = (ui + w[i, j]) / ui
                if g > key:
                    key = g
                    best = <int>i
    if zbest >= 0:
        return zbest
    return best


def best_product_candidate(double[:, ::1] w, unsigned char[:, ::1] owned,
                           long[::1] copies, int i, int cap):
    """Most-preferred unowned product for re-seller i with copies below cap."""
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t j
    cdef int best = -1
    cdef double key = -INFINITY
    for j in range(n):
        if owned[i, j] == 0 and copies[j] < cap:
            if w[i, j] > key:
                key = w[i, j]
                best = <int>j
    return best


def best_swap_donor(double[:, ::1] w, unsigned char[:, ::1] owned,
                    long[::1] copies, int r1, int j):
    """Cheapest swap freeing a copy for product j; lex-smallest (i, l) tie."""
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t i, l
    cdef int best_i = -1, best_l = -1
    cdef double best_cost = INFINITY, cost
    for i in range(m):
        if owned[i, j]:
            continue
        for l in range(n):
            if owned[i, l] == 1 and copies[l] > r1:
                cost = w[i, l] - w[i, j]
                if cost < best_cost:
                    best_cost = cost
                    best_i = <int>i
                    best_l = <int>l
    return best_i, best_l


cdef void _build_sums(double[:, ::1] w, double[:, :, ::1] sums,
                      double[::1] top, int m, int n, int rmax):
    # sums[i, j, r] = sum of the r largest of w[i, j:], accumulated in
    # descending-value order (same construction as the pure backend).
    cdef int i, j, r, pos, ln
    cdef double v, acc
    for i in range(m):
        ln = 0
        for r in range(rmax + 1):
            sums[i, n, r] = 0.0
        for j in range(n - 1, -1, -1):
            v = w[i, j]
            pos = 0
            while pos < ln and top[pos] >= v:
                pos += 1
            if ln < rmax:
                for r in range(ln, pos, -1):
                    top[r] = top[r - 1]
                top[pos] = v
                ln += 1
            elif pos < rmax:
                for r in range(rmax - 1, pos, -1):
                    top[r] = top[r - 1]
                top[pos] = v
            acc = 0.0
            sums[i, j, 0] = 0.0
            for r in range(ln):
                acc += top[r]
                sums[i, j, r + 1] = acc
            for r in range(ln + 1, rmax + 1):
                sums[i, j, r] = acc


cdef class _Searcher:
    cdef double[:, ::1] w
    cdef double[:, :, ::1] sums
    cdef double[::1] U
    cdef long[::1] bsize
    cdef unsigned char[::1] curmask
    cdef unsigned char[::1] bestmask
    cdef double[:, ::1] delta
    cdef unsigned char[:, ::1] posflag
    cdef long[:, ::1] stack_members
    cdef long[:, ::1] stack_sn
    cdef double[:, ::1] stack_su
    cdef double[:, ::1] stack_ss
    cdef int m, n, l1, l2, r1, r2
    cdef long long budget, nodes
    cdef bint aborted, have_best
    cdef double best_log

    cdef int node(self, int j):
        # returns 1 when the node budget aborted the search
        cdef int m = self.m, n = self.n
        cdef int i, rem = n - j
        cdef double val, ui
        cdef long cap_rem
        cdef long smax_l
        cdef int smax, smin, jj, rem_after, ri, rm, found, last, depth, start
        cdef double base_fin, base_i, member_val, member_ln, bln
        cdef int base_neg, neg_in_s
        cdef double cur_sum, bound

        for i in range(m):
            if self.l1 - self.bsize[i] > rem:
                return 0
        if j == n:
            val = 0.0
            for i in range(m):
                ui = self.U[i]
                if ui <= 0.0:
                    val = -INFINITY
                    break
                val += log(ui)
            if val > self.best_log or not self.have_best:
                self.best_log = val
                self.bestmask[:] = self.curmask
                self.have_best = True
            return 0

        cap_rem = 0
        for i in range(m):
            cap_rem += self.l2 - self.bsize[i]
        smax_l = cap_rem - (<long>(n - 1 - j)) * self.r1
        smax = self.r2
        if m < smax:
            smax = m
        if smax_l < smax:
            smax = <int>smax_l
        if smax < self.r1:
            return 0
        smin = self.r1

        jj = j + 1
        rem_after = n - jj
        base_fin = 0.0
        base_neg = 0
        for i in range(m):
            ri = self.l2 - <int>self.bsize[i]
            if ri > rem_after:
                ri = rem_after
            base_i = self.U[i] + self.sums[i, jj, ri]
            rm = self.l2 - <int>self.bsize[i] - 1
            if rm > rem_after:
                rm = rem_after
            if rm >= 0:
                member_val = self.U[i] + self.w[i, j] + self.sums[i, jj, rm]
            else:
                member_val = -1.0
            if member_val > 0.0:
                member_ln = log(member_val)
            else:
                member_ln = -INFINITY
            if base_i > 0.0:
                bln = log(base_i)
                base_fin += bln
                self.posflag[j, i] = 1
                self.delta[j, i] = member_ln - bln
            else:
                base_neg += 1
                self.posflag[j, i] = 0
                self.delta[j, i] = member_ln

        cur_sum = 0.0
        neg_in_s = 0
        depth = 0
        start = 0

        if smin == 0:
            if base_neg - neg_in_s > 0:
                bound = -INFINITY
            else:
                bound = base_fin + cur_sum
            if bound > self.best_log or not self.have_best:
                if self.node(jj):
                    return 1
        while True:
            found = -1
            if depth < smax:
                i = start
                while i < m:
                    if self.bsize[i] < self.l2:
                        found = i
                        break
                    i += 1
            if found >= 0:
                self.nodes += 1
                if self.nodes > self.budget:
                    self.aborted = True
                    return 1
                self.stack_su[j, depth] = self.U[found]
                self.stack_ss[j, depth] = cur_sum
                self.stack_sn[j, depth] = neg_in_s
                self.stack_members[j, depth] = found
                self.U[found] = self.U[found] + self.w[found, j]
                self.bsize[found] += 1
                self.curmask[found * n + j] = 1
                cur_sum = cur_sum + self.delta[j, found]
                if self.posflag[j, found] == 0:
                    neg_in_s += 1
                depth += 1
                if depth >= smin:
                    if base_neg - neg_in_s > 0:
                        bound = -INFINITY
                    else:
                        bound = base_fin + cur_sum
                    if bound > self.best_log or not self.have_best:
                        if self.node(jj):
                            return 1
                start = found + 1
            else:
                if depth == 0:
                    break
                depth -= 1
                last = <int>self.stack_members[j, depth]
                self.U[last] = self.stack_su[j, depth]
                cur_sum = self.stack_ss[j, depth]
                neg_in_s = <int>self.stack_sn[j, depth]
                self.bsize[last] -= 1
                self.curmask[last * n + j] = 0
                start = last + 1
        return 0


def oracle_search(object w_in, int l1, int l2, int r1, int r2, object budget,
                  object warm_mask, double warm_log):
    """Exact branch-and-bound; see the pure backend for the full contract."""
    w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef int m = w.shape[0]
    cdef int n = w.shape[1]
    cdef int rmax = l2 if l2 < n else n

    cdef _Searcher s = _Searcher()
    s.w = w
    s.m = m
    s.n = n
    s.l1 = l1
    s.l2 = l2
    s.r1 = r1
    s.r2 = r2
    s.budget = <long long>budget
    s.nodes = 0
    s.aborted = False

    sums = np.zeros((m, n + 1, rmax + 1), dtype=np.float64)
    top = np.zeros(rmax if rmax > 0 else 1, dtype=np.float64)
    _build_sums(s.w, sums, top, m, n, rmax)
    s.sums = sums

    s.U = np.zeros(m, dtype=np.float64)
    s.bsize = np.zeros(m, dtype=np.int64)
    s.curmask = np.zeros(m * n, dtype=np.uint8)
    best = np.zeros(m * n, dtype=np.uint8)
    s.bestmask = best
    s.delta = np.zeros((n if n > 0 else 1, m), dtype=np.float64)
    s.posflag = np.zeros((n if n > 0 else 1, m), dtype=np.uint8)
    s.stack_members = np.zeros((n if n > 0 else 1, m), dtype=np.int64)
    s.stack_sn = np.zeros((n if n > 0 else 1, m), dtype=np.int64)
    s.stack_su = np.zeros((n if n > 0 else 1, m), dtype=np.float64)
    s.stack_ss = np.zeros((n if n > 0 else 1, m), dtype=np.float64)

    if warm_mask is not None:
        wm = np.ascontiguousarray(warm_mask, dtype=np.uint8).reshape(m * n)
        best[:] = wm
        s.have_best = True
        s.best_log = warm_log
    else:
        s.have_best = False
        s.best_log = -INFINITY

    s.node(0)

    mask_arr = None
    if s.have_best:
        mask_arr = best.reshape(m, n).copy()
    return mask_arr, s.best_log, s.nodes, not s.aborted
