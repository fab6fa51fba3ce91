import math

import numpy as np
import pytest

from anisolab import geometry, liouville
from anisolab.grid import Grid, GridField
from anisolab.solver import BoundarySpec, solve
from anisolab.weights import nonlinearity, weight_preset

import oracles

AC = nonlinearity("allen-cahn")
SECH = weight_preset("sech", 1, 1)


@pytest.fixture(scope="module")
def sech2d():
    g = Grid(1, 1, 10.0, 201)
    u, rep = solve(SECH, AC, g, BoundarySpec.tanh_profile([1.0], 1, 1))
    assert rep.converged and rep.monotone
    return u


def test_sz_identity_radial_quadratic_converges():
    res = []
    for N in (101, 201):
        g = Grid(0, 2, 2.0, N)
        x, y = g.coords()
        sz = geometry.sz_decomposition(GridField(g, 0.5 * (x * x + y * y)))
        r = g.radius()
        res.append(np.max(np.abs(sz.residual[(r >= 0.5) & (r <= 1.5)])))
    assert res[1] < res[0] / 2


def test_sz_identity_exact_for_axis_planar_field():
    g = Grid(0, 2, 2.0, 51)
    x, y = g.coords()
    sz = geometry.sz_decomposition(GridField(g, np.tanh(y / math.sqrt(2)) + 0 * x))
    assert np.max(np.abs(sz.residual)) < 1e-20


def test_sz_identity_oblique_planar_field_converges():
    res = []
    for N in (51, 101):
        g = Grid(0, 2, 2.0, N)
        x, y = g.coords()
        sz = geometry.sz_decomposition(GridField(g, np.tanh((x + 2 * y) / 3)))
        res.append(np.max(np.abs(sz.residual)))
    assert res[1] < res[0] / 2


def test_s_quantity_nonnegative_and_zero_on_products():
    g = Grid(1, 2, 2.0, 31)
    x1, x2, x3 = g.coords()
    u = GridField(g, np.tanh(x3) * (1 + 0.3 * np.sin(x1)) + 0.2 * np.cos(x1 + x2))
    assert np.min(geometry.s_quantity(u).values) >= -1e-8
    g2 = Grid(1, 1, 2.0, 41)
    a, b = g2.coords()
    assert np.max(np.abs(geometry.s_quantity(GridField(g2, a * b)).values)) < 1e-10


@pytest.mark.parametrize("name", sorted(geometry.TEST_FUNCTIONS))
def test_poincare_holds_on_stable_solution(sech2d, name):
    phi = geometry.TEST_FUNCTIONS[name](sech2d.grid)
    rep = geometry.poincare_sides(SECH, sech2d, phi)
    assert rep.verdict == "holds"
    assert rep.slack >= -1e-6 * (1 + rep.rhs)


def test_poincare_rejects_nonvanishing_test_function(sech2d):
    with pytest.raises(ValueError):
        geometry.poincare_sides(SECH, sech2d, GridField(sech2d.grid, 1.0))


def test_profile_energy_matches_oracle():
    g = Grid(0, 1, 10.0, 401)
    u, _ = solve(weight_preset("unit", 0, 1), AC, g, BoundarySpec.tanh_profile([1.0], 0, 1))
    assert abs(liouville.energy(weight_preset("unit", 0, 1), AC, u, 10.0) - oracles.profile_energy()) <= 1e-3


def test_energy_scan_modes(sech2d):
    a = liouville.energy_bound_scan(SECH, AC, sech2d, [4, 5, 6, 7, 8, 9], "A")
    assert a.verdict == "bounded" and a.k <= 1.1 * a.k_proof
    b = liouville.energy_bound_scan(SECH, AC, sech2d, [4, 5, 6, 7, 8, 9], "B")
    assert b.verdict == "bounded"
    with pytest.raises(ValueError):
        liouville.energy_bound_scan(SECH, AC, GridField(sech2d.grid, -sech2d.values), [4], "A")


def test_shifted_energy(sech2d):
    h = sech2d.grid.h[-1]
    se = liouville.shifted_energy_check(SECH, AC, sech2d, [h, 5.0, 10.0], 8.0)
    assert se.holds and se.monotone_decrease
    assert se.derivative_rel_error <= 0.02


def test_reflect_negate_is_an_involution(sech2d):
    twice = liouville.reflect_negate(liouville.reflect_negate(sech2d))
    assert np.array_equal(twice.values, sech2d.values)


def test_ratio_diagnostic_constructed_field():
    g = Grid(0, 3, 5.0, 31)
    k = np.array([0.3, -0.5, 1.0])
    k /= np.linalg.norm(k)
    x = g.coords()
    z = sum(ki * xi for ki, xi in zip(k, x))
    dz = 1 / np.cosh(z) ** 2
    rep = liouville.ratio_diagnostic(weight_preset("unit", 0, 3), GridField(g, np.tanh(z)),
                                     grads=[ki * dz for ki in k])
    assert rep.m == 1
    assert all(d["spread"] <= 1e-6 for d in rep.directions)
    assert math.acos(min(1.0, abs(float(np.dot(rep.k, k))))) <= 1e-3


def test_ratio_diagnostic_counts_varied_x_prime(sech2d):
    assert liouville.ratio_diagnostic(SECH, sech2d).m == 1
    g = sech2d.grid
    x1, x2 = g.coords()
    bent = GridField(g, np.tanh((x2 + 0.1 * np.sin(x1)) / math.sqrt(2)))
    rep = liouville.ratio_diagnostic(SECH, bent)
    assert rep.varied_x_prime == ["x1"] and rep.m == 2


def test_moschini():
    rep = liouville.moschini_verify(3.0)
    assert rep["value_residual"] <= 1e-12 and rep["slope_residual"] <= 1e-12
    assert rep["subsolution"] and rep["laplacian_outside_max_abs"] < 1e-12
    assert rep["stable"]
    with pytest.raises(ValueError):
        liouville.moschini_verify(2.0)


@pytest.mark.parametrize("n", [4, 5])
def test_remark(n):
    rep = liouville.remark_verify(n)
    assert rep["exponent_identity"] and rep["subsolution"] and rep["stable"]
