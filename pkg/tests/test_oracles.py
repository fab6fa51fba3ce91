import math

import numpy as np
import pytest
import sympy as sp

from anisolab.exprlang import diff, evaluate, parse

import oracles


def test_tanh_profile_values():
    assert oracles.tanh_profile(0.0) == 0.0
    assert abs(oracles.tanh_profile(10.0) - 1.0) < 2e-6


@pytest.mark.parametrize("x", [-3, -2, -1, 0, 1, 2, 3])
def test_tanh_profile_solves_the_ode(x):
    assert oracles.tanh_ode_residual(x) <= 1e-12


def test_profile_energy_closed_form():
    assert abs(oracles.profile_energy() - 2 * math.sqrt(2) / 3) < 1e-12


def test_dense_laplacian_first_mode():
    ev = oracles.dense_eigen_1d(0.0, 0.0, math.pi, 201)
    assert abs(ev[0] - 1.0) <= 1e-3


def test_dense_constant_potential_shifts_spectrum():
    base = oracles.dense_eigen_1d(0.0, 0.0, 1.0, 101)
    shifted = oracles.dense_eigen_1d(-2.5, 0.0, 1.0, 101)
    assert np.allclose(shifted, base - 2.5, atol=1e-9)


def test_dense_allen_cahn_linearization():
    # the exact profile is not the discrete solution; its O(h^2) consistency
    # error pushes mu1 to -1.2e-4 at N=401, so the oracle is taken at N=801
    ev = oracles.dense_eigen_1d(oracles.allen_cahn_potential, -10.0, 10.0, 801)
    assert -1e-4 <= ev[0] <= 5e-2


def test_dense_size_limit():
    with pytest.raises(ValueError):
        oracles.dense_eigen_1d(0.0, 0.0, 1.0, oracles.DENSE_MAX_N + 1)


def test_radial_quadrature_trivial():
    assert abs(oracles.radial_quadrature(oracles.RadialProfile("1", 2), 1.0) - 0.5) < 1e-14


def test_radial_quadrature_substitution():
    # int_0^10 r^3 (1+r^2)^(-1/2) dr with u = 1 + r^2
    p = oracles.RadialProfile("(1+r^2)^(-1/2)", 4)
    u = 101.0
    exact = (u ** 1.5 / 3 - u ** 0.5) - (1 / 3 - 1)
    assert abs(oracles.radial_quadrature(p, 10.0) - exact) <= 1e-8 * exact


def test_radial_quadrature_log_squared_annulus():
    p = oracles.RadialProfile("log(r)^2", 2)
    r = sp.Symbol("r", positive=True)
    anti = sp.integrate(r * sp.log(r) ** 2, r)
    for R in (10.0, 100.0):
        exact = float(anti.subs(r, 2 * R) - anti.subs(r, R))
        assert abs(oracles.radial_quadrature(p, 2 * R, R0=R) / exact - 1) <= 1e-6


@pytest.mark.parametrize("src", ["(1+r^2)^(-3/2)", "(1+r^2)^(1/2)", "log(r)", "r^2/9 - r^4/324"])
def test_radial_profile_agrees_with_exprlang_diff(src):
    p = oracles.RadialProfile(src, 3)
    e = parse(src, variables=("r",))
    d1, d2 = diff(e, 1), diff(diff(e, 1), 1)
    for r in (0.5, 1.0, 2.5, 7.0):
        assert abs(p.derivative(r, 1) - evaluate(d1, [r])) <= 1e-10 * max(1.0, abs(p.derivative(r, 1)))
        assert abs(p.derivative(r, 2) - evaluate(d2, [r])) <= 1e-10 * max(1.0, abs(p.derivative(r, 2)))


def test_sphere_area():
    assert abs(oracles.sphere_area(3) - 4 * math.pi) < 1e-14
    assert abs(oracles.sphere_area(4) - 2 * math.pi ** 2) < 1e-13
