import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import criterion_loops, five_point_derivatives
from rotopulsator.dynamics import integrate
from rotopulsator.errors import (
    BadParameter,
    CoincidentBodies,
    CriterionViolated,
    FiberSingular,
    SingularConfiguration,
    SingularDenominator,
)
from rotopulsator.manifold import on_clifford_torus
from rotopulsator.rotopulse import (
    FiberState,
    RotopulsatorShape,
    criterion_denominators,
    criterion_residuals,
    embed,
    integrate_reduced,
    reduced_rhs,
)

TWO_PI = 2 * np.pi
# brute-force 50-digit evaluation at r = 0.5, masses 1/3, alphas (0, 2pi/3, 3pi/2), betas 0
IRREGULAR_RES1 = [-0.54504023054117932, -0.33140361538757793, 0.87644384592875725]
IRREGULAR_DELTA = [-0.82612100709119945, -0.77965616736209347, -0.81745395572055626]

angles = st.lists(st.floats(0, TWO_PI, exclude_max=True), min_size=2, max_size=6)


def random_shape(data_alphas, data_betas):
    n = min(len(data_alphas), len(data_betas))
    return RotopulsatorShape.equal_masses(data_alphas[:n], data_betas[:n])


def test_shape_validation_and_normalization():
    sh = RotopulsatorShape([-np.pi / 2, 3 * np.pi], [0, 0], [1, 1])
    np.testing.assert_allclose(sh.alphas, [1.5 * np.pi, np.pi])
    with pytest.raises(CoincidentBodies):
        RotopulsatorShape([0, 0], [1, 1], [1, 1])
    with pytest.raises(BadParameter):
        RotopulsatorShape([0, 1], [0, 0], [1, 0])
    with pytest.raises(BadParameter):
        RotopulsatorShape([0], [0], [1])
    with pytest.raises(BadParameter):
        FiberState(1.0)


def test_embed_two_body_example():
    sh = RotopulsatorShape([0, np.pi], [0, 0], [1, 1])
    state = embed(sh, FiberState(0.6))
    np.testing.assert_allclose(state.q, [[0.6, 0, 0.8, 0], [-0.6, 0, 0.8, 0]], atol=1e-16)
    for q in state.q:
        assert on_clifford_torus(q, 0.6, 0.8, 1e-12)


def test_embed_velocities_match_finite_differences():
    sh = RotopulsatorShape([0.1, 2.0, 4.0], [0.3, 1.0, 5.0], [1, 2, 3])
    f = FiberState(0.4, 0.2, 0.5, -0.3, 0.25, -0.15)
    h = 1e-6

    def pos(t):
        r = f.r + f.rdot * t
        # theta and phi advance at rates fixed by the conserved quantities
        return embed(sh, FiberState(r, f.rdot, f.theta + f.thetadot * t, f.phi + f.phidot * t, 0, 0)).q

    fd = (pos(h) - pos(-h)) / (2 * h)
    np.testing.assert_allclose(embed(sh, f).v, fd, atol=1e-8)


def test_embed_rejects_antipodal():
    sh = RotopulsatorShape([0, np.pi], [0, np.pi], [1, 1])
    with pytest.raises(SingularConfiguration):
        embed(sh, FiberState(0.5))


def test_criterion_regular_triangle_zero():
    rep = criterion_residuals(RotopulsatorShape.regular(3), 0.5)
    assert np.abs(rep.res1).max() < 1e-14
    assert np.abs(rep.res2).max() < 1e-14
    assert rep.spread < 1e-14


@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
def test_criterion_square_zero(r):
    rep = criterion_residuals(RotopulsatorShape.regular(4), r)
    assert rep.max_residual < 1e-13


def test_criterion_irregular_triangle_frozen():
    sh = RotopulsatorShape.equal_masses([0, TWO_PI / 3, 1.5 * np.pi])
    rep = criterion_residuals(sh, 0.5)
    np.testing.assert_allclose(rep.res1, IRREGULAR_RES1, rtol=1e-13)
    np.testing.assert_allclose(rep.delta_rhs, IRREGULAR_DELTA, rtol=1e-13)
    assert np.abs(rep.res1).max() > 0.1


@given(angles, angles, st.floats(0.05, 0.95))
def test_criterion_matches_loop_oracle(a, b, r):
    try:
        sh = random_shape(a, b)
        rep = criterion_residuals(sh, r, eps_sing=1e-6)
    except SingularConfiguration:
        return
    res1, res2, delta = criterion_loops(sh.alphas, sh.betas, sh.masses, r)
    scale = np.max(1 / np.where(np.isinf(criterion_denominators(sh, r)), 1, criterion_denominators(sh, r)) ** 1.5)
    np.testing.assert_allclose(rep.res1, res1, atol=1e-12 * scale)
    np.testing.assert_allclose(rep.res2, res2, atol=1e-12 * scale)
    np.testing.assert_allclose(rep.delta_rhs, delta, atol=1e-12 * scale)


@given(angles, angles, st.floats(0.05, 0.95), st.floats(-10, 10), st.floats(-10, 10))
def test_criterion_depends_only_on_differences(a, b, r, c, d):
    try:
        sh = random_shape(a, b)
        shifted = RotopulsatorShape(sh.alphas + c, sh.betas + d, sh.masses)
        rep0 = criterion_residuals(sh, r, eps_sing=1e-6)
    except SingularConfiguration:
        return
    rep1 = criterion_residuals(shifted, r, eps_sing=1e-6)
    scale = 1 + np.abs(rep0.delta_rhs).max() + np.abs(rep0.res1).max() + np.abs(rep0.res2).max()
    tol = 1e-9 * scale
    np.testing.assert_allclose(rep1.res1, rep0.res1, atol=tol)
    np.testing.assert_allclose(rep1.res2, rep0.res2, atol=tol)


@given(angles, angles, st.floats(0.05, 0.95))
def test_criterion_reversal_flips_sines(a, b, r):
    try:
        sh = random_shape(a, b)
        rev = RotopulsatorShape(-sh.alphas, -sh.betas, sh.masses)
        rep0 = criterion_residuals(sh, r, eps_sing=1e-6)
    except SingularConfiguration:
        return
    rep1 = criterion_residuals(rev, r, eps_sing=1e-6)
    scale = 1 + np.abs(rep0.res1).max() + np.abs(rep0.res2).max()
    np.testing.assert_allclose(rep1.res1, -rep0.res1, atol=1e-14 * scale * 10)
    np.testing.assert_allclose(rep1.res2, -rep0.res2, atol=1e-14 * scale * 10)


@given(angles, angles, st.floats(0.05, 0.95))
def test_denominators_symmetric(a, b, r):
    sh = None
    try:
        sh = random_shape(a, b)
    except SingularConfiguration:
        return
    D = criterion_denominators(sh, r)
    np.testing.assert_array_equal(D, D.T)


@pytest.mark.parametrize(
    "n, beta_step",
    # odd steps with even n put bodies i and i + n/2 at antipodal points
    [(n, k) for n in range(3, 9) for k in (0, 1, 2, 3) if not (n % 2 == 0 and k % 2 == 1)],
)
def test_single_orbit_shapes_have_zero_spread(n, beta_step):
    sh = RotopulsatorShape.regular(n, beta_step=beta_step)
    for r in (0.3, 0.5, 0.7):
        assert criterion_residuals(sh, r).spread < 1e-13


def test_singular_denominator_reports_pair():
    sh = RotopulsatorShape([0, np.pi, 1.0], [0, np.pi, 2.0], [1, 1, 1])
    with pytest.raises(SingularDenominator) as err:
        criterion_residuals(sh, 0.5)
    assert err.value.pair in ((0, 1), (1, 0))


def test_reduced_rhs_examples():
    sh = RotopulsatorShape.equal_masses([0.0, 1.0, 2.5], [0.0, 1.0, 2.5])
    f = FiberState(0.4, 0.3, 0, 0, 0.2, 0.1)
    rdot, rddot, wt, wp = reduced_rhs(sh, f)
    r, rho2 = 0.4, 1 - 0.16
    expected = -r * rho2 * ((0.1 / rho2) ** 2 - (0.2 / r**2) ** 2) - r * 0.3**2 / rho2
    assert rddot == pytest.approx(expected, rel=1e-14)
    assert (rdot, wt, wp) == pytest.approx((0.3, 0.2 / r**2, 0.1 / rho2))
    # equilibrium in r
    sq = RotopulsatorShape.equal_masses([0, 1, 2], [0, 1, 2])
    assert reduced_rhs(sq, FiberState(0.5))[1] == 0.0
    with pytest.raises(FiberSingular):
        reduced_rhs(sh, FiberState(1e-7))


def test_reduced_matches_full_dynamics():
    sh = RotopulsatorShape.regular(3)
    f0 = FiberState(0.3, 0.1, 0.0, 0.0, 0.3, 0.0)
    red = integrate_reduced(sh, f0, 0.01, 1.0)
    full = integrate(embed(sh, f0), 0.01, 1.0)
    assert np.abs(red.positions(sh) - full.q).max() < 1e-6


def test_reduced_size_is_nonconstant_and_invariants_held():
    sh = RotopulsatorShape.regular(3)
    red = integrate_reduced(sh, FiberState(0.3, 0.1, 0.0, 0.0, 0.3, 0.0), 0.01, 1.0)
    assert np.ptp(red.r) > 0.05
    thetadot = np.array([f.thetadot for _, f in red])
    np.testing.assert_allclose(red.r**2 * thetadot, 0.3, atol=1e-10)
    assert red.max_spread < 1e-13


def test_reduced_lemma1_residuals_finite_differences():
    # h = 2e-3 balances stencil truncation (h^4) against round-off (eps / h^2);
    # the 1e-10 bound leaves no room for larger or smaller spacings
    sh = RotopulsatorShape.regular(3)
    h = 2e-3
    red = integrate_reduced(sh, FiberState(0.5, 0.1, 0.0, 0.0, 0.3, 0.2), h, 1.0)
    rho = np.sqrt(1 - red.r**2)
    dr, _ = five_point_derivatives(red.r, h)
    drho, _ = five_point_derivatives(rho, h)
    dth, ddth = five_point_derivatives(red.theta, h)
    dph, ddph = five_point_derivatives(red.phi, h)
    assert np.abs(2 * dr * dth + red.r[2:-2] * ddth).max() < 1e-10
    assert np.abs(2 * drho * dph + rho[2:-2] * ddph).max() < 1e-10


def test_integrate_reduced_rejects_irregular_shape():
    sh = RotopulsatorShape.equal_masses([0, TWO_PI / 3, 1.5 * np.pi])
    with pytest.raises(CriterionViolated):
        integrate_reduced(sh, FiberState(0.5, 0.1, 0, 0, 0.3, 0), 0.01, 1.0)


def test_fiber_singular_when_r_escapes():
    sh = RotopulsatorShape.regular(3)
    with pytest.raises(FiberSingular):
        integrate_reduced(sh, FiberState(0.9, 5.0, 0, 0, 0.0, 0.0), 0.01, 1.0)
