import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import constraint_matrix_loops, simplex_min_residual
from rotopulsator.errors import SingularDenominator
from rotopulsator.rotopulse import RotopulsatorShape, criterion_residuals
from rotopulsator.solver import (
    FEASIBLE,
    INFEASIBLE,
    UNDERDETERMINED,
    SolverOptions,
    build_constraint_matrix,
    default_grid,
    solve_masses,
)

TWO_PI = 2 * np.pi


def regular(n, step=0):
    sh = RotopulsatorShape.regular(n, beta_step=step)
    return sh.alphas, sh.betas


@given(st.integers(0, 2**32 - 1))
def test_matrix_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    a, b = rng.uniform(0, TWO_PI, n), rng.uniform(0, TWO_PI, n)
    grid = default_grid()
    try:
        A = build_constraint_matrix(a, b, grid)
    except SingularDenominator:
        return
    ref = constraint_matrix_loops(list(a), list(b), list(grid))
    scale = np.abs(ref).max(axis=0)
    np.testing.assert_allclose(A / scale, ref / scale, rtol=0, atol=1e-12)


def test_regular_triangle_null_vector():
    a, b = regular(3)
    A = build_constraint_matrix(a, b, [0.3, 0.5, 0.7])
    assert np.abs(A @ np.full(3, 1 / 3)).max() < 1e-13


@pytest.mark.parametrize("n", range(3, 9))
def test_regular_polygons_equal_masses(n):
    res = solve_masses(*regular(n))
    assert res.status == FEASIBLE
    assert np.abs(res.masses - 1.0 / n).max() < 1e-10
    assert res.max_violation < 1e-10


def test_irregular_quad_infeasible_and_oracle_agrees():
    a, b = [0, np.pi / 3, np.pi, 4 * np.pi / 3], np.zeros(4)
    res = solve_masses(a, b)
    assert res.status == INFEASIBLE
    A = build_constraint_matrix(a, b, default_grid())
    assert simplex_min_residual(A) > 1e-3


def test_two_bodies_opposite():
    # the delta row is proportional to m1 - m0, which pins the masses
    res = solve_masses([0, np.pi], [0, 0])
    assert res.status == FEASIBLE
    assert res.rank == 1 and res.null_dim == 1
    np.testing.assert_allclose(res.masses, [0.5, 0.5], atol=1e-12)
    A = build_constraint_matrix([0, np.pi], [0, 0], default_grid())
    rows = A.reshape(len(default_grid()), -1, 2)
    assert np.abs(rows[:, :4]).max() < 1e-13


def test_alpha_equals_beta_has_no_delta_rows():
    # ca == cb kills every size-dependent term; the sine sums still pin the masses
    pent = TWO_PI * np.arange(5) / 5
    A = build_constraint_matrix(pent, pent, default_grid())
    assert np.abs(A.reshape(len(default_grid()), -1, 5)[:, 10:]).max() == 0.0
    res = solve_masses(pent, pent)
    assert res.status == FEASIBLE
    np.testing.assert_allclose(res.masses, 0.2, atol=1e-12)


def test_underdetermined_when_null_space_is_wide():
    # a coarse rank threshold widens the numerical null space of the square
    a, b = regular(4)
    res = solve_masses(a, b, SolverOptions(rank_tol=0.5))
    assert res.status == UNDERDETERMINED and res.null_dim >= 2 and res.feasible
    assert solve_masses(a, b).status == FEASIBLE


def test_inconclusive_band_warns():
    a, b = regular(3)
    a = a + np.array([0, 0, 1e-10])
    res = solve_masses(a, b, SolverOptions(feas_tol=solve_masses(a, b).max_violation / 5))
    assert res.status == INFEASIBLE and res.warning.startswith("inconclusive")


def test_antipodal_pair_is_singular_on_any_grid():
    with pytest.raises(SingularDenominator):
        solve_masses([0, np.pi], [0, np.pi])
    with pytest.raises(SingularDenominator):
        solve_masses([0, np.pi], [0, np.pi], SolverOptions(r_grid=[0.2, 0.4, 0.6]))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_status_stable_under_grid_refinement(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    a, b = rng.uniform(0, TWO_PI, n), rng.uniform(0, TWO_PI, n)
    try:
        coarse = solve_masses(a, b)
        fine = solve_masses(a, b, SolverOptions(r_grid=np.linspace(0.05, 0.95, 13)))
    except SingularDenominator:
        return
    assert coarse.status == fine.status


@pytest.mark.parametrize("n,step", [(3, 0), (3, 1), (4, 2), (5, 2), (6, 2), (7, 3)])
def test_grid_refinement_regular(n, step):
    a, b = regular(n, step)
    coarse = solve_masses(a, b)
    fine = solve_masses(a, b, SolverOptions(r_grid=np.linspace(0.05, 0.95, 13)))
    assert coarse.status == fine.status
    assert coarse.feasible


@pytest.mark.parametrize("n,step", [(3, 0), (4, 0), (5, 2), (6, 0), (7, 3)])
def test_solution_holds_at_fresh_radii(n, step):
    a, b = regular(n, step)
    res = solve_masses(a, b)
    sh = RotopulsatorShape(a, b, res.masses)
    for r in np.random.default_rng(n).uniform(0.02, 0.98, 20):
        assert criterion_residuals(sh, r).max_residual < 10 * 1e-10


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(3, 6))
def test_status_invariant_under_rotation(c, d, n):
    a, b = regular(n)
    assert solve_masses(a + c, b + d).status == FEASIBLE
    irregular = np.array([0, 0.4, 2.0, 4.1, 5.0][: n - 1] + [5.9])
    assert solve_masses(irregular + c, b[: len(irregular)] + d).status == INFEASIBLE


def test_result_serializes():
    d = solve_masses(*regular(3)).to_dict()
    assert d["status"] == FEASIBLE and len(d["masses"]) == 3
