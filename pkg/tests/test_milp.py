import math

import numpy as np
import pytest

from resalloc import (
    CardinalityBounds,
    exact_nash_oracle,
    make_instance,
    paper_instance,
)
from resalloc.milp import (
    CUT_POINTS,
    MilpError,
    SCALE_TOTAL,
    build_nashmax_model,
    cut_slope,
    cut_value,
    log_cut_envelope,
    read_solution,
    scale_utilities,
    solve_model_by_enumeration,
    write_lp_text,
)


def test_cut_points_are_odd_integers_covering_scale():
    assert CUT_POINTS[0] == 1
    assert CUT_POINTS[-1] == SCALE_TOTAL - 1
    assert all(k % 2 == 1 for k in CUT_POINTS)
    assert len(CUT_POINTS) == SCALE_TOTAL // 2


def test_cut_is_secant_between_consecutive_integers():
    # each cut is the chord of ln through (k, ln k) and (k+1, ln(k+1)): exact
    # at both endpoints, below the (concave) curve strictly in between
    for k in (1, 3, 7, 99, 999):
        assert cut_slope(k) == math.log(k + 1) - math.log(k)
        assert math.isclose(cut_value(float(k), k), math.log(k), abs_tol=1e-12)
        assert math.isclose(cut_value(float(k + 1), k), math.log(k + 1),
                            abs_tol=1e-12)
        mid = k + 0.5
        assert cut_value(mid, k) < math.log(mid)


def test_envelope_exact_at_every_integer_utility():
    worst = max(abs(log_cut_envelope(float(u)) - math.log(u))
                for u in range(1, SCALE_TOTAL + 1))
    assert worst <= 1e-9


def test_envelope_error_pattern_between_integers():
    # chords anchor at odd k, so inside a chord span [odd, odd+1] the envelope
    # sits below the concave curve, while in the uncovered spans [even,
    # even+1] the nearest chords extend past their endpoints and sit above;
    # either way the gap is small and irrelevant at the integers the model
    # actually evaluates
    for u in (1.5, 3.5, 499.5, 999.5):
        assert log_cut_envelope(u) < math.log(u)
        assert math.log(u) - log_cut_envelope(u) < 0.06
    for u in (2.5, 4.5, 500.5):
        assert log_cut_envelope(u) > math.log(u)
        assert log_cut_envelope(u) - math.log(u) < 0.04


def test_envelope_zero_utility_artifact():
    # an empty bundle hits the k=1 secant at u=0, giving -ln 2 rather than
    # -inf; the model relies on bundle lower bounds to keep this off-path
    assert math.isclose(log_cut_envelope(0.0), -math.log(2), rel_tol=1e-15)


def test_scale_utilities_table_c():
    inst, _ = paper_instance("table-C")
    sc = scale_utilities(inst)
    assert sc.v.tolist() == [[700, 100, 200], [550, 200, 250], [500, 400, 100]]
    assert sc.scale_factors == (100.0, 100.0, 100.0)


def test_scale_utilities_floors_to_integers():
    sc = scale_utilities(make_instance([[1.0, 2.0], [4.0, 4.0]]))
    assert sc.v.tolist() == [[333, 666], [500, 500]]
    assert sc.scale_factors == (1000.0 / 3.0, 125.0)
    assert np.issubdtype(sc.v.dtype, np.integer)


def test_scale_utilities_rejects_zero_row():
    with pytest.raises(MilpError):
        scale_utilities(make_instance([[0.0, 0.0], [1.0, 1.0]]))


def test_model_dimensions_table_c():
    inst, b = paper_instance("table-C")
    text = write_lp_text(build_nashmax_model(inst, b))
    lines = [l.strip() for l in text.splitlines()]
    assert sum(1 for l in lines if l.startswith("cut_")) == 3 * len(CUT_POINTS)
    binaries = text.split("Binary")[1].split("End")[0].split()
    assert binaries == [f"x_{i}_{j}" for i in range(3) for j in range(3)]
    assert "obj: g_0 + g_1 + g_2" in text
    for name in ("rsl_0", "rsl_1", "rsl_2", "prd_0", "prd_1", "prd_2"):
        assert any(l.startswith(name + ":") for l in lines)
    assert " g_0 free" in text


def test_lp_text_first_cut_golden():
    inst, b = paper_instance("table-C")
    text = write_lp_text(build_nashmax_model(inst, b))
    assert ("cut_0_1: g_0 - 485.2030263919617 x_0_0 - 69.31471805599453 x_0_1"
            " - 138.62943611198907 x_0_2 <= -0.6931471805599453") in text


def test_lp_equality_rows_use_exact_bounds():
    inst, _ = paper_instance("table-C")
    b = CardinalityBounds(1, 2, 1, 3)
    text = write_lp_text(build_nashmax_model(inst, b))
    assert "x_0_0 + x_0_1 + x_0_2 >= 1" in text
    assert "x_0_0 + x_0_1 + x_0_2 <= 2" in text
    assert "x_0_0 + x_1_0 + x_2_0 >= 1" in text
    assert "x_0_0 + x_1_0 + x_2_0 <= 3" in text


def test_read_solution_roundtrip():
    inst, b = paper_instance("table-C")
    on = {(0, 0), (0, 2), (1, 0), (1, 1), (2, 1), (2, 2)}
    text = "\n".join(f"x_{i}_{j} {1.0 if (i, j) in on else 0.0}"
                     for i in range(3) for j in range(3))
    alloc = read_solution(text, 3, 3, bounds=b)
    assert alloc.bundles == ((0, 2), (0, 1), (1, 2))


def test_read_solution_tolerates_near_binary_values():
    alloc = read_solution("x_0_0 0.9999995\nx_0_1 1e-7", 1, 2,
                          bounds=CardinalityBounds(1, 1, 0, 1))
    assert alloc.bundles == ((0,),)


@pytest.mark.parametrize("text,fragment", [
    ("x_0_0 0.5", "not binary"),
    ("x_9_9 1", "out of range"),
    ("x_0_0 one", "bad value"),
])
def test_read_solution_rejects_malformed(text, fragment):
    with pytest.raises(MilpError, match=fragment):
        read_solution(text, 3, 3)


def test_read_solution_checks_bounds_when_given():
    inst, b = paper_instance("table-C")
    with pytest.raises(MilpError, match="violates bounds"):
        read_solution("", 3, 3, bounds=b)
    # without bounds the empty solution is just an empty allocation
    alloc = read_solution("", 3, 3)
    assert alloc.bundles == ((), (), ())


def test_enumeration_guard():
    model = build_nashmax_model(make_instance(np.ones((5, 5))),
                                CardinalityBounds(1, 5, 1, 5))
    with pytest.raises(MilpError, match="20 binaries"):
        solve_model_by_enumeration(model)


def test_enumeration_matches_oracle_up_to_scale_offset():
    # the model objective is sum_i ln(u_i * factor_i); subtracting the
    # constant sum of log factors must recover the true optimal nash log
    cases = [
        ([[3.0, 1.0], [2.0, 2.0]], (1, 1, 1, 1)),
        ([[5.0, 2.0, 1.0], [1.0, 4.0, 2.0]], (1, 2, 1, 2)),
        ([[7.0, 1.0, 2.0], [5.5, 2.0, 2.5], [5.0, 4.0, 1.0]], (2, 2, 2, 2)),
    ]
    for w, bb in cases:
        inst = make_instance(w)
        b = CardinalityBounds(*bb)
        model = build_nashmax_model(inst, b)
        mask, obj = solve_model_by_enumeration(model)
        offset = sum(math.log(f) for f in model.scale_factors)
        orc = exact_nash_oracle(inst, b)
        assert abs((obj - offset) - orc.best_nash_log) <= 5e-3
        got = tuple(tuple(np.flatnonzero(mask[i]).tolist())
                    for i in range(inst.m))
        assert got == orc.best_allocation.bundles


def test_enumeration_table_c_recovers_optimum():
    inst, b = paper_instance("table-C")
    mask, obj = solve_model_by_enumeration(build_nashmax_model(inst, b))
    assert math.isclose(obj, math.log(364.5) + 3 * math.log(100.0),
                        rel_tol=1e-12)


def test_enumeration_infeasible_bounds():
    model = build_nashmax_model(make_instance([[1.0, 1.0]]),
                                CardinalityBounds(2, 2, 2, 2))
    mask, obj = solve_model_by_enumeration(model)
    assert mask is None and obj == float("-inf")


def test_write_lp_file_matches_text(tmp_path):
    inst, b = paper_instance("table-C")
    model = build_nashmax_model(inst, b)
    from resalloc.milp import write_lp_file
    p = tmp_path / "model.lp"
    write_lp_file(model, p)
    assert p.read_text() == write_lp_text(model)
