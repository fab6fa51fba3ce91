import math

import numpy as np
import pytest

from anisolab.exprlang import parse
from anisolab.weights import (WeightSpec, double_well_condition, from_advection, gclass_check, growth_scan,
                              nonlinearity, sign_condition, weight_preset, weight_ratio_bounds)


def test_advection_tanh_gives_sech():
    w = from_advection(["tanh(x1)"])
    x = np.linspace(-5, 5, 11)
    assert np.allclose(w.gamma_at([x]), 1 / np.cosh(x), atol=1e-12)
    assert np.allclose(w.lambda_at([x]), 1 / np.cosh(x), atol=1e-12)


def test_advection_rational():
    w = from_advection(["2*x1/(1+x1^2)"], b="2")
    x = np.array([0.0, 1.0, 3.0])
    assert np.allclose(w.gamma_at([x]), 1 / (1 + x * x), atol=1e-12)
    assert np.allclose(w.lambda_at([x]), 2 / (1 + x * x), atol=1e-12)


def test_presets_match_their_closed_forms():
    x = np.linspace(-3, 3, 7)
    assert np.allclose(weight_preset("sech", 1, 1).gamma_at([x]), 1 / np.cosh(x))
    assert np.allclose(weight_preset("rational", 1, 1).gamma_at([x]), 1 / (1 + x * x))
    two = weight_preset("sech", 2, 1)
    assert np.isclose(two.gamma_point((1.0, 2.0)), 1 / (math.cosh(1) * math.cosh(2)))


def test_shifted_tanh_preset_requires_t_above_shift():
    weight_preset("shifted-tanh(2,1)", 1, 1)
    with pytest.raises(ValueError):
        weight_preset("shifted-tanh(1,2)", 1, 1)


def test_weight_must_not_depend_on_flat_coordinates():
    with pytest.raises(ValueError):
        WeightSpec(1, 1, parse("x2", d=2), parse("1", d=2))


def test_negative_gamma_rejected_on_grid():
    from anisolab.grid import Grid
    w = WeightSpec(1, 1, parse("x1", d=1), parse("1", d=1))
    with pytest.raises(ValueError):
        w.on_grid(Grid(1, 1, 1.0, 5))


def test_nonlinearity_catalog():
    ac = nonlinearity("allen-cahn")
    assert ac(0.5) == pytest.approx(0.375)
    assert ac.df(0.0) == pytest.approx(1.0)
    assert ac.primitive(1.0) == pytest.approx(0.0)
    assert nonlinearity("lane-emden(3)")(2.0) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        nonlinearity("no-such")


def test_sign_conditions():
    assert sign_condition(nonlinearity("gelfand")).kind == "nonnegative"
    assert sign_condition(nonlinearity("linear(-1)")).kind == "t_f_nonpositive"
    rep = sign_condition(nonlinearity("allen-cahn"))
    assert rep.kind == "neither"
    assert rep.witness


def test_double_well():
    dw = double_well_condition(nonlinearity("allen-cahn"))
    assert dw["holds"]
    assert dw["F(1)"] == pytest.approx(0.0)
    assert not double_well_condition(nonlinearity("constant(1)"))["holds"]


@pytest.mark.parametrize("g,status", [("log(1+r)", "member"), ("log(1+r)^2", "non-member"), ("1", "member")])
def test_gclass(g, status):
    assert gclass_check(g, 1e8).status == status


def test_gclass_borderline_is_inconclusive():
    assert gclass_check("log(1+r)^1.2", 1e8).status == "inconclusive"


def test_gclass_rejects_decreasing():
    with pytest.raises(ValueError):
        gclass_check("1/(1+r)", 1e8)


def test_growth_scan_verdicts():
    radii = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000)
    bounded = growth_scan(weight_preset("rational", 1, 1), "1", "g", radii=radii)
    assert bounded.verdict == "bounded"
    assert abs(bounded.ratios[-1] - 2 * math.atan(1000)) < 1e-9
    unit_rg = growth_scan(weight_preset("unit", 1, 1), "1", "Rg", radii=radii)
    assert unit_rg.verdict == "bounded" and abs(unit_rg.k - 2) < 1e-9
    grows = growth_scan(WeightSpec(1, 1, parse("exp(x1)", d=1), parse("exp(x1)", d=1)), "1", "g",
                        radii=(1, 2, 5, 10, 20))
    assert grows.verdict == "unbounded"


def test_weight_ratio_bounds_sech():
    r = weight_ratio_bounds(weight_preset("sech", 1, 1))
    assert all(abs(v - 1) < 1e-6 for v in r["grad_ratio"])
    assert all(abs(v - 1) < 1e-12 for v in r["lambda_ratio"])
