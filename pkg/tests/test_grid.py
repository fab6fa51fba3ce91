import math

import numpy as np
import pytest

from anisolab.exprlang import parse
from anisolab.grid import (Grid, GridField, field_csv, read_field, sphere_integral, surface_integral,
                           surface_lemma_scan, volume_integral, weighted_div, write_field)
from anisolab.quadrature import ball_integral
from anisolab.scans import EnergyScan
from anisolab.weights import weight_preset

import oracles


def test_grid_basics():
    g = Grid(1, 1, 2.0, 5)
    assert g.shape == (5, 5)
    assert g.h == (1.0, 1.0)
    assert g.refine().N == (9, 9)
    with pytest.raises(ValueError):
        Grid(0, 1, 1.0, 2)


def test_gridfield_is_read_only_and_finite():
    g = Grid(0, 1, 1.0, 5)
    u = GridField(g, np.zeros(5))
    with pytest.raises(ValueError):
        u.values[0] = 1.0
    with pytest.raises(ValueError):
        GridField(g, np.full(5, np.nan))


def test_weighted_div_against_closed_form():
    g = Grid(1, 1, 5.0, 101)
    w = weight_preset("sech", 1, 1)
    x1, x2 = g.coords()
    u = GridField(g, np.sin(x1) * np.cos(x2))
    # div(sech(x1) grad u) = -sech tanh cos x1 cos x2 - 2 sech sin x1 cos x2
    sech, tanh = 1 / np.cosh(x1), np.tanh(x1)
    exact = -sech * tanh * np.cos(x1) * np.cos(x2) - 2 * sech * np.sin(x1) * np.cos(x2)
    got = weighted_div(w, u).values
    inner = (slice(1, -1), slice(1, -1))
    assert np.max(np.abs(got[inner] - np.broadcast_to(exact, g.shape)[inner])) < 5e-3


def test_ball_volume_integrals():
    g = Grid(0, 2, 2.0, 201)
    one = GridField(g, 1.0)
    assert abs(volume_integral(one, 1.5) / (math.pi * 2.25) - 1) < 1e-3
    gauss = GridField(g, np.exp(-g.radius() ** 2 * 8))
    assert abs(volume_integral(gauss, 1.9) / (math.pi / 8) - 1) < 1e-4
    assert volume_integral(one, 3.0).truncated


def test_half_disk_within_one_percent():
    g = Grid(0, 2, 2.0, 201)
    half = GridField(g, (g.coords()[1] > 0).astype(float) * np.ones(g.shape))
    assert abs(volume_integral(half, 1.5) / (math.pi * 2.25 / 2) - 1) < 1e-2


@pytest.mark.parametrize("R", [0.5, 2.0, 7.0])
def test_sphere_integrals_closed_form(R):
    assert abs(sphere_integral(1.0, R, 1, 2) / (4 * math.pi * R ** 2) - 1) < 1e-12
    assert abs(sphere_integral(1.0, R, 2, 2) / (2 * math.pi ** 2 * R ** 3) - 1) < 1e-12
    assert abs(surface_integral(1.0, R, 1, 1) / (2 * math.pi * R) - 1) < 1e-12


def test_sphere_integral_against_radial_oracle():
    # gamma = exp(-x1^2) on |x| = R in R^3: 2 pi R int_{-R}^{R} exp(-t^2) dt
    R = 1.7
    gamma = parse("exp(-x1^2)", d=1)
    p = oracles.RadialProfile("exp(-r^2)", 1)
    exact = 2 * math.pi * R * 2 * oracles.radial_quadrature(p, R)
    assert abs(sphere_integral(gamma, R, 1, 2) / exact - 1) < 1e-10


def test_ball_integral_vectorized_matches_scalar():
    w = weight_preset("sech", 2, 1)
    for R in (1.0, 10.0):
        a = ball_integral(w.gamma_point, R, 2, epsrel=1e-10)
        b = ball_integral(w.gamma_at, R, 2, vectorized=True)
        assert abs(a / b - 1) < 1e-9


@pytest.mark.parametrize("preset", ["unit", "sech", "rational"])
def test_surface_lemma_bounded(preset):
    sc = surface_lemma_scan(weight_preset(preset, 1, 2), (1, 2, 5, 10, 20, 50, 100))
    assert sc.verdict == "bounded"
    assert abs(sc.k - 2 * math.pi) < 1e-9


def test_field_round_trip(tmp_path):
    g = Grid(1, 2, (1.0, 2.0, 3.0), (3, 4, 5))
    u = GridField(g, np.arange(60, dtype=float).reshape(g.shape) / 7)
    p = tmp_path / "u.aniso"
    write_field(p, u)
    v = read_field(p)
    assert v.grid == g
    assert np.array_equal(v.values, u.values)
    lines = field_csv(v).splitlines()
    assert lines[0] == "x1,x2,x3,value"
    assert len(lines) == 61


def test_read_field_rejects_garbage(tmp_path):
    p = tmp_path / "bad.aniso"
    p.write_bytes(b"nope")
    with pytest.raises(ValueError):
        read_field(p)


def test_scan_verdicts():
    radii = [1, 2, 4, 8, 16, 32]
    flat = EnergyScan("flat", radii, [1.0] * 6, [1.0] * 6)
    assert flat.verdict == "bounded"
    rising = EnergyScan("rising", radii, [r for r in radii], [1.0] * 6)
    assert rising.verdict == "unbounded"
    far = [20 * r for r in radii]
    approaching = EnergyScan("approach", far, [1 - 1 / r for r in far], [1.0] * 6)
    assert approaching.verdict == "bounded"
    assert flat.to_csv().splitlines()[0] == "R,value,bound,ratio"
