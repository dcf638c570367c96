import numpy as np
import pytest

from resalloc import (
    CardinalityBounds,
    check_ef1,
    check_eq1,
    check_feasibility,
    eq1_exists,
    greedy_nash,
    greedy_revenue,
    is_feasible_allocation,
    make_allocation,
    make_instance,
    paper_instance,
    round_robin,
    seal,
)

SEAL_C = [[0, 1], [0, 2], [1, 2]]


def test_ef1_theorem3_violation():
    inst, b = paper_instance("theorem-3", eps=0.2)
    alloc = make_allocation([[0, 1], [2, 3]], n=4)
    verdict = check_ef1(inst, alloc)
    assert not verdict.satisfied
    assert verdict.witness[:2] == (0, 1)


def test_ef1_identical_bundles_satisfied():
    inst = make_instance([[2.0, 3.0], [2.0, 3.0]])
    alloc = make_allocation([[0, 1], [0, 1]], n=2)
    assert check_ef1(inst, alloc).satisfied


def test_ef1_table_c_seal_satisfied():
    inst, _ = paper_instance("table-C")
    assert check_ef1(inst, make_allocation(SEAL_C, n=3)).satisfied


def test_ef1_empty_envied_bundle_skipped():
    # envy toward an empty bundle is vacuous; empty enviers use utility 0
    inst = make_instance([[5.0, 1.0], [5.0, 1.0]])
    alloc = make_allocation([[], [0]], n=2)
    verdict = check_ef1(inst, alloc)
    # removing the single item from u2's bundle leaves value 0 >= 0
    assert verdict.satisfied


def test_eq1_equal_utilities_satisfied():
    inst = make_instance([[4.0, 1.0], [1.0, 4.0]])
    alloc = make_allocation([[0], [1]], n=2)
    assert check_eq1(inst, alloc).satisfied


def test_eq1_table_c_seal_satisfied():
    inst, _ = paper_instance("table-C")
    assert check_eq1(inst, make_allocation(SEAL_C, n=3)).satisfied


def test_eq1_table_a_feasible_allocation_violated():
    inst, b = paper_instance("table-A", alpha=4)
    rep = check_feasibility(inst.m, inst.n, b)
    assert rep.feasible
    assert is_feasible_allocation(inst, rep.witness, b) == []
    assert not check_eq1(inst, rep.witness).satisfied


def test_witness_reproducible():
    inst, _ = paper_instance("theorem-3", eps=0.2)
    alloc = make_allocation([[0, 1], [2, 3]], n=4)
    verdict = check_ef1(inst, alloc)
    i, k, removed = verdict.witness
    # the pair on its own still shows the violation: u_i values its bundle
    # below u_k's bundle even after dropping the best single item
    ui = sum(float(inst.w[i, j]) for j in alloc.bundles[i])
    rest = [sum(float(inst.w[i, j]) for j in alloc.bundles[k] if j != drop)
            for drop in alloc.bundles[k]]
    assert ui < min(rest)
    assert removed in alloc.bundles[k]


def test_eq1_exists_table_a_alpha4_not_exists():
    inst, b = paper_instance("table-A", alpha=4)
    res = eq1_exists(inst, b)
    assert res.outcome == "not-exists"
    assert res.witness is None
    assert res.nodes > 0


def test_eq1_exists_table_a_alpha8_exists():
    inst, b = paper_instance("table-A", alpha=8)
    res = eq1_exists(inst, b)
    assert res.outcome == "exists"
    assert is_feasible_allocation(inst, res.witness, b) == []
    assert check_eq1(inst, res.witness).satisfied


def test_eq1_exists_diagonal():
    inst = make_instance([[1.0, 0.0], [0.0, 1.0]])
    b = CardinalityBounds(1, 1, 1, 1)
    res = eq1_exists(inst, b)
    assert res.outcome == "exists"
    assert res.witness.bundles == ((0,), (1,))


def test_eq1_exists_budget_exhausted():
    inst, b = paper_instance("table-A", alpha=4)
    res = eq1_exists(inst, b, search_budget=10)
    assert res.outcome == "budget-exhausted"


def test_eq1_exists_infeasible_bounds():
    inst = make_instance([[1.0, 1.0]])
    res = eq1_exists(inst, CardinalityBounds(2, 2, 2, 2))
    assert res.outcome == "not-exists"


def test_checks_scale_invariant():
    # power-of-two factors keep the scaling exact in IEEE doubles, so the
    # homogeneous inequalities must flip identically
    rng = np.random.default_rng(3)
    for _ in range(20):
        m, n = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        w = rng.random((m, n)) * 10
        bundles = [sorted(rng.choice(n, size=rng.integers(0, n + 1), replace=False).tolist())
                   for _ in range(m)]
        alloc = make_allocation(bundles, n=n)
        for c in (4.0, 0.25, 1024.0):
            a = make_instance(w)
            b_ = make_instance(w * c)
            assert check_ef1(a, alloc).satisfied == check_ef1(b_, alloc).satisfied
            assert check_eq1(a, alloc).satisfied == check_eq1(b_, alloc).satisfied


def test_single_reseller_always_fair():
    inst = make_instance([[1.0, 2.0, 3.0]])
    alloc = make_allocation([[0, 2]], n=3)
    assert check_ef1(inst, alloc).satisfied
    assert check_eq1(inst, alloc).satisfied


def test_not_exists_implies_all_algorithms_violate():
    inst, b = paper_instance("table-A", alpha=4)
    assert eq1_exists(inst, b).outcome == "not-exists"
    produced = [
        greedy_nash(inst, b),
        seal(inst, b),
        greedy_revenue(inst, b),
        round_robin(inst, b, list(range(inst.m))),
    ]
    for res in produced:
        if res.status == "success":
            assert not check_eq1(inst, res.allocation).satisfied
