import math
import os
import subprocess
import sys

import numpy as np
import pytest

import resalloc
from resalloc import CardinalityBounds, exact_nash_oracle, greedy_nash, seal
from resalloc import _kernels_py as pure
from resalloc.datagen import GenSpec, generate_synthetic

from _enum import random_cases

try:
    from resalloc import _kernels as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None,
                                    reason="compiled extension not built")


def test_selected_backend_is_reported():
    assert resalloc.BACKEND in ("pure", "compiled")
    if compiled is not None:
        assert resalloc.BACKEND == "compiled"


@needs_compiled
def test_kernel_parity_best_gain_candidate():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        w = np.ascontiguousarray(rng.random((m, n)) * 100)
        owned = np.ascontiguousarray(rng.integers(0, 2, (m, n)).astype(np.uint8))
        bsize = owned.sum(axis=1).astype(np.int64)
        u = (w * owned).sum(axis=1)
        # sprinkle exact-zero utilities to hit the infinite-gain branch
        if rng.random() < 0.3 and m > 1:
            owned[0, :] = 0
            bsize[0] = 0
            u[0] = 0.0
        j = int(rng.integers(0, n))
        l2 = int(rng.integers(1, n + 1))
        assert pure.best_gain_candidate(w, u, owned, bsize, j, l2) == \
            compiled.best_gain_candidate(w, u, owned, bsize, j, l2)


@needs_compiled
def test_kernel_parity_best_product_candidate():
    rng = np.random.default_rng(4)
    for _ in range(200):
        m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        w = np.ascontiguousarray(rng.random((m, n)) * 100)
        owned = np.ascontiguousarray(rng.integers(0, 2, (m, n)).astype(np.uint8))
        copies = owned.sum(axis=0).astype(np.int64)
        i = int(rng.integers(0, m))
        cap = int(rng.integers(0, m + 1))
        assert pure.best_product_candidate(w, owned, copies, i, cap) == \
            compiled.best_product_candidate(w, owned, copies, i, cap)


@needs_compiled
def test_kernel_parity_best_swap_donor():
    rng = np.random.default_rng(5)
    for _ in range(200):
        m, n = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        w = np.ascontiguousarray(rng.random((m, n)) * 100)
        owned = np.ascontiguousarray(rng.integers(0, 2, (m, n)).astype(np.uint8))
        copies = owned.sum(axis=0).astype(np.int64)
        r1 = int(rng.integers(0, m + 1))
        j = int(rng.integers(0, n))
        assert pure.best_swap_donor(w, owned, copies, r1, j) == \
            compiled.best_swap_donor(w, owned, copies, r1, j)


@needs_compiled
def test_kernel_parity_oracle_search():
    for inst, b in random_cases(seed=1234, count=40, max_m=4, max_n=4):
        warm = np.zeros((inst.m, inst.n), dtype=np.uint8)
        args = (inst.w, b.l1, b.l2, b.r1, b.r2, 10**6, warm, float("-inf"))
        p_mask, p_log, p_nodes, p_done = pure.oracle_search(*args)
        c_mask, c_log, c_nodes, c_done = compiled.oracle_search(*args)
        assert p_nodes == c_nodes
        assert p_done == c_done
        if p_mask is None:
            assert c_mask is None
            assert p_log == c_log == float("-inf")
        else:
            assert math.isclose(p_log, c_log, rel_tol=0, abs_tol=1e-12)
            assert np.array_equal(p_mask, c_mask)


@needs_compiled
def test_full_algorithms_identical_across_backends():
    # same module-level entry points driven by each kernel set must produce
    # identical allocations; exercised via a subprocess with the override set
    code = (
        "import numpy as np\n"
        "from resalloc import greedy_nash, seal, exact_nash_oracle, "
        "CardinalityBounds, BACKEND\n"
        "from resalloc.datagen import GenSpec, generate_synthetic\n"
        "out = [BACKEND]\n"
        "for s in range(6):\n"
        "    inst = generate_synthetic(GenSpec(m=8, n=8, seed=s))\n"
        "    b = CardinalityBounds(2, 8, 1, 2)\n"
        "    g = greedy_nash(inst, b); t = seal(inst, b)\n"
        "    o = exact_nash_oracle(inst, b, budget=200000)\n"
        "    out.append((g.status, g.allocation.bundles, t.status,\n"
        "                t.allocation.bundles, repr(o.best_nash_log),\n"
        "                o.nodes_expanded, o.exhaustive))\n"
        "print(repr(out[1:]))\n"
    )
    results = {}
    for backend in ("pure", "compiled"):
        env = dict(os.environ, RESALLOC_FORCE_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", code], env=env,
                              capture_output=True, text=True, check=True)
        results[backend] = proc.stdout
    assert results["pure"] == results["compiled"]


def test_force_backend_rejects_unknown_value():
    env = dict(os.environ, RESALLOC_FORCE_BACKEND="gpu")
    proc = subprocess.run([sys.executable, "-c", "import resalloc"], env=env,
                          capture_output=True, text=True)
    assert proc.returncode != 0
    assert "RESALLOC_FORCE_BACKEND" in proc.stderr


def test_force_pure_is_honoured():
    env = dict(os.environ, RESALLOC_FORCE_BACKEND="pure")
    proc = subprocess.run(
        [sys.executable, "-c", "import resalloc; print(resalloc.BACKEND)"],
        env=env, capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "pure"


def test_pure_backend_solves_goldens():
    # the fallback path must work end to end even when the extension exists
    env = dict(os.environ, RESALLOC_FORCE_BACKEND="pure")
    code = (
        "from resalloc import paper_instance, greedy_nash, seal, nash_welfare\n"
        "inst, b = paper_instance('table-C')\n"
        "g = greedy_nash(inst, b); s = seal(inst, b)\n"
        "print(g.allocation.bundles, nash_welfare(inst, g.allocation)[1],\n"
        "      s.allocation.bundles, nash_welfare(inst, s.allocation)[1])\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == \
        "((0, 2), (0, 1), (1, 2)) 337.5 ((0, 1), (0, 2), (1, 2)) 320.0"
