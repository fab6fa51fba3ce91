import math

import numpy as np
import pytest

from anisolab import stability
from anisolab.grid import Grid, GridField
from anisolab.solver import BoundarySpec, residual, shift, solve
from anisolab.weights import nonlinearity, weight_preset

import oracles

AC = nonlinearity("allen-cahn")
UNIT1 = weight_preset("unit", 0, 1)


@pytest.fixture(scope="module")
def profile():
    g = Grid(0, 1, 10.0, 401)
    u, rep = solve(UNIT1, AC, g, BoundarySpec.tanh_profile([1.0], 0, 1))
    return u, rep


def test_profile_converges_and_is_odd(profile):
    u, rep = profile
    assert rep.converged and rep.monotone
    assert np.max(np.abs(u.values + u.values[::-1])) < 1e-12
    x = u.grid.axes[0]
    exact = np.array([oracles.tanh_profile(v) for v in x])
    assert np.max(np.abs(u.values - exact)) <= 5e-4


def test_residual_field_matches_report(profile):
    u, rep = profile
    assert np.max(np.abs(residual(UNIT1, AC, u).values)) == pytest.approx(rep.residual, rel=1e-12)


def test_zero_start_reaches_profile():
    g = Grid(0, 1, 10.0, 201)
    u, rep = solve(UNIT1, AC, g, BoundarySpec.tanh_profile([1.0], 0, 1), init="zero")
    assert rep.converged and rep.flow_steps > 0


def test_harmonic_dirichlet_is_exact():
    g = Grid(1, 1, 1.0, 21)
    bc = BoundarySpec.dirichlet("x1 + 2*x2", 1, 1)
    u, rep = solve(weight_preset("unit", 1, 1), nonlinearity("zero"), g, bc, init="zero", tol=1e-12)
    x1, x2 = g.coords()
    assert rep.converged
    assert np.max(np.abs(u.values - (x1 + 2 * x2))) < 1e-10


def test_boundary_spec_validation():
    with pytest.raises(ValueError):
        BoundarySpec.tanh_profile([1.0, -1.0], 0, 2)
    with pytest.raises(ValueError):
        BoundarySpec.tanh_profile([1.0], 1, 1, periodic=(1,))
    assert BoundarySpec.parse("tanh-profile(0.3,1)", 1, 1).k[0] > 0


def test_shift_moves_by_grid_steps(profile):
    u, _ = profile
    h = u.grid.h[0]
    v = shift(u, 2 * h)
    assert np.array_equal(v.values[:-2], u.values[2:])
    assert v.values[-1] == 1.0
    with pytest.raises(ValueError):
        shift(u, 0.3 * h)


def test_min_eigenpair_matches_dense_oracle(profile):
    u, _ = profile
    rep = stability.min_eigenpair(UNIT1, AC, u)
    x = u.grid.axes[0]
    vals = u.values
    dense = oracles.dense_eigen_1d(lambda xi: 3 * np.interp(xi, x, vals) ** 2 - 1, x[0], x[-1], x.size)
    assert rep.converged
    assert abs(rep.mu1 - dense[0]) < 1e-8
    assert -1e-4 <= rep.mu1 <= 5e-2
    kern = 1 / np.cosh(x / math.sqrt(2)) ** 2
    e = rep.eigenfield.values
    assert e @ kern / (np.linalg.norm(e) * np.linalg.norm(kern)) >= 0.999


def test_control_eigenvalue_on_zero_to_pi():
    g = Grid(0, 1, math.pi / 2, 201)
    rep = stability.min_eigenpair(UNIT1, nonlinearity("constant(0)"), GridField(g, 0.0))
    dense = oracles.dense_eigen_1d(0.0, 0.0, math.pi, 201)
    assert abs(rep.mu1 - 1.0) <= 1e-3
    assert abs(rep.mu1 - dense[0]) < 1e-8


def test_quadratic_form_is_stable_for_random_fields(profile):
    u, _ = profile
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = np.zeros(u.grid.shape)
        p[1:-1] = rng.standard_normal(u.grid.N[0] - 2)
        lhs, rhs = stability.quadratic_form(UNIT1, AC, u, GridField(u.grid, p))
        assert lhs <= rhs


def test_quadratic_form_requires_vanishing_boundary(profile):
    u, _ = profile
    with pytest.raises(ValueError):
        stability.quadratic_form(UNIT1, AC, u, GridField(u.grid, 1.0))


def test_certificate(profile):
    u, rep = profile
    assert stability.pointwise_certificate(UNIT1, AC, u, tol=1e-8).certified
    flipped = GridField(u.grid, -u.values)
    cert = stability.pointwise_certificate(UNIT1, AC, flipped, tol=1e-8)
    assert not cert.certified and "positive" in cert.reason


def test_unstable_constant_state():
    g = Grid(0, 1, 10.0, 201)
    rep = stability.min_eigenpair(UNIT1, AC, GridField(g, 0.0))
    assert rep.mu1 < 0
