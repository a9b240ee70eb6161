"""Linear functions: evaluation, moments, distances, projection, EFP."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from snfkn import (
    LinearFunction,
    ValueTable,
    all_permutations,
    centered_sq_norm,
    closeness_to_linear,
    degree_le1_projection,
    dist_to_boolean,
    distance_l2_between,
    efp_dictator,
    evaluate,
    evaluate_many,
    gen_dictator,
    is_boolean,
    pair_covariance,
    recenter,
    value_range,
    value_table,
)
from snfkn.linear import dist01, round01, round_int, round_pm1


def coeff_grids(n: int):
    return arrays(
        np.float64,
        (n, n),
        elements=st.floats(-2.0, 2.0, allow_nan=False, width=32),
    )


# ---------------------------------------------------------------------------
# construction and evaluation


def test_from_cells_and_evaluate():
    f = LinearFunction.from_cells(3, {(0, 1): 2.0, (2, 0): -1.0}, constant=0.5)
    assert evaluate(f, [1, 2, 0]) == pytest.approx(0.5 + 2.0 - 1.0)
    assert evaluate(f, [2, 1, 0]) == pytest.approx(0.5 - 1.0)
    assert evaluate(f, [1, 0, 2]) == pytest.approx(0.5 + 2.0)


def test_evaluate_many_matches_scalar():
    f = LinearFunction.from_cells(4, {(0, 0): 1.0, (1, 2): 0.5, (3, 3): -0.25})
    perms = all_permutations(4)
    vals = evaluate_many(f, perms)
    for k in (0, 5, 11, 23):
        assert vals[k] == pytest.approx(evaluate(f, perms[k]))


def test_mean_is_constant_plus_rowsum_over_n():
    f = LinearFunction.from_cells(5, {(0, 0): 1.0, (1, 1): 2.0, (2, 4): -0.5}, constant=0.25)
    assert f.mean() == pytest.approx(0.25 + 2.5 / 5)
    assert f.mean() == pytest.approx(float(value_table(f).values.mean()))


def test_arithmetic_closes_over_linear_functions():
    f = gen_dictator(4, "row", 0, (0, 1))
    g = gen_dictator(4, "col", 2, (3,))
    perms = all_permutations(4)
    for h, op in [
        (f + g, lambda a, b: a + b),
        (f - g, lambda a, b: a - b),
        (1.0 - f, lambda a, b: 1.0 - a),
        (-f, lambda a, b: -a),
    ]:
        want = [op(evaluate(f, p), evaluate(g, p)) for p in perms]
        assert np.allclose(evaluate_many(h, perms), want)


def test_json_round_trip_is_exact():
    f = LinearFunction.from_cells(6, {(0, 3): 0.125, (5, 5): -1.75}, constant=2.5)
    g = LinearFunction.from_json_dict(f.to_json_dict())
    assert g.constant == f.constant
    assert np.array_equal(g.coeff, f.coeff)


def test_json_dict_is_one_based():
    f = LinearFunction.from_cells(2, {(0, 1): 3.0})
    d = f.to_json_dict()
    assert d["n"] == 2
    assert d["coeffs"] == [{"i": 1, "j": 2, "c": 3.0}]


def test_from_json_rejects_bad_cells():
    with pytest.raises(ValueError):
        LinearFunction.from_json_dict({"n": 2, "constant": 0.0, "coeffs": [{"i": 3, "j": 1, "c": 1.0}]})
    with pytest.raises(ValueError):
        LinearFunction.from_json_dict({"n": 0, "constant": 0.0, "coeffs": []})


# ---------------------------------------------------------------------------
# covariance: closed forms frozen from enumeration


@pytest.mark.parametrize(
    "n,a,b,want",
    [
        (2, (0, 0), (0, 0), 0.25),  # (n-1)/n^2
        (2, (0, 0), (0, 1), -0.25),  # shared row: -1/n^2
        (2, (0, 0), (1, 0), -0.25),  # shared column
        (3, (0, 0), (1, 1), 1 / 18),  # disjoint lines: 1/(n^2 (n-1))
        (4, (1, 2), (1, 2), 3 / 16),
        (4, (1, 2), (3, 2), -1 / 16),
    ],
)
def test_pair_covariance_closed_forms(n, a, b, want):
    assert pair_covariance(n, a, b) == pytest.approx(want, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 5), data=st.data())
def test_pair_covariance_matches_enumeration(n, data):
    a = (data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1)))
    b = (data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1)))
    perms = np.asarray(all_permutations(n), dtype=np.int64)
    xa = (perms[:, a[0]] == a[1]).astype(float)
    xb = (perms[:, b[0]] == b[1]).astype(float)
    want = float((xa * xb).mean() - xa.mean() * xb.mean())
    assert pair_covariance(n, a, b) == pytest.approx(want, abs=1e-12)


# ---------------------------------------------------------------------------
# centered second moment and L2 distance


@pytest.mark.parametrize(
    "n,cells,want",
    [
        (2, {(0, 0): 1.0}, 0.25),  # Var[x_{1,1}] at n=2
        (3, {(0, 0): 1.0, (0, 1): 1.0, (0, 2): 1.0}, 0.0),  # full row is constant
        (2, {(0, 0): 1.0, (1, 1): -1.0}, 0.0),  # row/col relation: x11 = x22
    ],
)
def test_centered_sq_norm_oracles(n, cells, want):
    f = LinearFunction.from_cells(n, cells)
    assert centered_sq_norm(f.coeff) == pytest.approx(want, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 6), data=st.data())
def test_centered_sq_norm_matches_brute_force(n, data):
    grid = data.draw(coeff_grids(n))
    f = LinearFunction(0.0, grid)
    vals = value_table(f).values
    want = float(((vals - vals.mean()) ** 2).mean())
    assert centered_sq_norm(grid) == pytest.approx(want, abs=1e-10)


def test_distance_l2_between_oracles():
    f = LinearFunction.from_cells(2, {(0, 0): 1.0})
    zero = LinearFunction.from_cells(2, {})
    other = LinearFunction.from_cells(2, {(1, 1): 1.0})
    assert distance_l2_between(f, zero) == pytest.approx(0.5)  # E[x^2] = 1/2 at n=2
    assert distance_l2_between(f, other) == 0.0  # same function, different grids


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 5), data=st.data())
def test_distance_l2_between_matches_enumeration(n, data):
    f = LinearFunction(data.draw(st.floats(-1, 1)), data.draw(coeff_grids(n)))
    g = LinearFunction(data.draw(st.floats(-1, 1)), data.draw(coeff_grids(n)))
    diff = value_table(f).values - value_table(g).values
    want = float((diff * diff).mean())
    assert distance_l2_between(f, g) == pytest.approx(want, abs=1e-9)


# ---------------------------------------------------------------------------
# recentering


def test_recenter_spec_example():
    f = LinearFunction.from_cells(2, {(0, 0): 1.0})
    g = recenter(f, (0, 0))
    assert g.constant == pytest.approx(0.0)
    assert g.coeff[0, 0] == 0.0
    assert g.coeff[0, 1] == 0.0 and g.coeff[1, 0] == 0.0
    assert g.coeff[1, 1] == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 5), data=st.data())
def test_recenter_preserves_the_function(n, data):
    f = LinearFunction(data.draw(st.floats(-1, 1)), data.draw(coeff_grids(n)))
    anchor = (data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1)))
    g = recenter(f, anchor)
    assert distance_l2_between(f, g) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(g.coeff[anchor[0], :], 0.0)
    assert np.allclose(g.coeff[:, anchor[1]], 0.0)


# ---------------------------------------------------------------------------
# rounding helpers


def test_rounding_helpers():
    assert np.array_equal(round01(np.array([0.4, 0.5, -3.0])), [0.0, 1.0, 0.0])
    assert np.array_equal(round_pm1(np.array([0.4, 0.6, -0.6, -0.5])), [0, 1, -1, 0])
    assert np.array_equal(round_int(np.array([0.5, -0.5, 1.49])), [1, 0, 1])
    assert np.array_equal(dist01(np.array([-0.25, 0.25, 0.75, 1.5])), [0.25, 0.25, 0.25, 0.5])


# ---------------------------------------------------------------------------
# distance to Boolean-ness


def test_dist_to_boolean_constant_half():
    half = LinearFunction(0.5, np.zeros((3, 3)))
    assert dist_to_boolean(half, "l2sq").value == pytest.approx(0.25)
    assert dist_to_boolean(half, "l0").value == pytest.approx(1.0)
    assert dist_to_boolean(half, "linf").value == pytest.approx(0.5)


def test_dist_to_boolean_boolean_function_is_zero():
    f = gen_dictator(5, "col", 1, (0, 2))
    for metric in ("l2sq", "l0", "linf"):
        rep = dist_to_boolean(f, metric)
        assert rep.value == 0.0
        assert rep.regime == "exact"


def test_dist_to_boolean_mc_tracks_exact():
    f = LinearFunction(0.1, np.zeros((8, 8)))
    exact = dist_to_boolean(f, "l2sq")
    mc = dist_to_boolean(f, "l2sq", samples=5000, seed=2, exact_threshold=4)
    assert mc.regime == "mc"
    assert mc.value == pytest.approx(exact.value, abs=1e-9)  # constant: zero variance


def test_dist_to_boolean_linf_mc_is_lower_bound():
    f = LinearFunction(0.3, np.zeros((12, 12)))
    rep = dist_to_boolean(f, "linf", samples=2000, seed=0)
    assert rep.lower_bound_only
    assert rep.value == pytest.approx(0.3)


def test_dist_to_boolean_l2_lower_bounds_integer_grid_distance():
    rng = np.random.default_rng(4)
    f = LinearFunction(0.2, rng.uniform(-0.3, 0.3, (5, 5)))
    d = dist_to_boolean(f, "l2sq").value
    for _ in range(20):
        g = LinearFunction(
            float(rng.integers(-1, 2)),
            rng.integers(-1, 2, (5, 5)).astype(np.float64),
        )
        assert d <= distance_l2_between(f, g) + 1e-12


def test_dist_to_boolean_table_input():
    tab = value_table(gen_dictator(4, "row", 0, (1,)))
    assert dist_to_boolean(tab, "l0").value == 0.0


# ---------------------------------------------------------------------------
# degree-at-most-1 projection


@pytest.mark.parametrize("n", [3, 4, 5])
def test_projection_is_idempotent_and_orthogonal(n):
    rng = np.random.default_rng(n)
    vals = rng.uniform(0.0, 1.0, math.factorial(n))
    tab = ValueTable(n, vals)
    proj = degree_le1_projection(tab)
    pvals = value_table(proj).values
    # orthogonality: residual is orthogonal to every degree-<=1 function
    resid = vals - pvals
    assert abs(resid.mean()) < 1e-10
    perms = np.asarray(all_permutations(n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            x = (perms[:, i] == j).astype(float)
            assert abs(float((resid * x).mean())) < 1e-10
    # idempotence
    proj2 = degree_le1_projection(ValueTable(n, pvals))
    assert np.allclose(value_table(proj2).values, pvals, atol=1e-10)


def test_projection_fixes_linear_functions():
    f = gen_dictator(5, "row", 2, (0, 1))
    tab = value_table(f)
    assert closeness_to_linear(tab) == pytest.approx(0.0, abs=1e-12)
    proj = degree_le1_projection(tab)
    assert np.allclose(value_table(proj).values, tab.values, atol=1e-10)


# ---------------------------------------------------------------------------
# value range / Boolean-ness certificates


def test_value_range_matches_enumeration():
    rng = np.random.default_rng(9)
    f = LinearFunction(0.1, rng.uniform(-1, 1, (5, 5)))
    lo, hi = value_range(f)
    vals = value_table(f).values
    assert lo == pytest.approx(float(vals.min()), abs=1e-12)
    assert hi == pytest.approx(float(vals.max()), abs=1e-12)


def test_value_range_scales_past_enumeration():
    f = gen_dictator(50, "row", 7, tuple(range(10)))
    lo, hi = value_range(f)
    assert (lo, hi) == (0.0, 1.0)


def test_is_boolean_on_large_boards():
    assert is_boolean(gen_dictator(40, "col", 3, (0, 5, 9)))
    assert not is_boolean(LinearFunction(0.5, np.zeros((40, 40))))
    bad = gen_dictator(40, "row", 0, (0,)) + LinearFunction.from_cells(40, {(1, 1): 0.5})
    assert not is_boolean(bad)


def test_is_boolean_small_boards_by_enumeration():
    assert is_boolean(gen_dictator(4, "row", 1, (2, 3)))
    assert not is_boolean(LinearFunction.from_cells(4, {(0, 0): 0.5}))


# ---------------------------------------------------------------------------
# EFP dictator checker


@pytest.mark.parametrize("orientation", ["row", "col"])
def test_efp_dictator_recovers_planted(orientation):
    f = gen_dictator(6, orientation, 4, (1, 3, 5))
    assert efp_dictator(f) == (orientation, 4, (1, 3, 5))


def test_efp_dictator_rejects_non_boolean_and_sums():
    assert efp_dictator(LinearFunction(0.5, np.zeros((5, 5)))) is None
    two_rows = gen_dictator(5, "row", 0, (1,)) + gen_dictator(5, "row", 1, (2,))
    assert efp_dictator(two_rows) is None


def test_efp_dictator_prefers_rows_and_lower_index():
    # the constant-0 function is the empty-target dictator on row 0
    zero = LinearFunction(0.0, np.zeros((5, 5)))
    got = efp_dictator(zero)
    assert got is not None and got[0] == "row" and got[1] == 0


def test_efp_dictator_on_equivalent_grid():
    # x_{1,1} written via the complement relation: 1 - sum_{j>=2} x_{1,j}
    n = 4
    cells = {(0, j): -1.0 for j in range(1, n)}
    f = LinearFunction.from_cells(n, cells, constant=1.0)
    assert efp_dictator(f) == ("row", 0, (0,))
