"""Named experiment pipelines run by the command line.

Each pipeline takes a :class:`RunConfig` and returns an :class:`Outcome`
holding JSON-ready report blocks, fields to persist and CSV scans.  The
status is ``ok`` or ``violated`` (a hypothesis or verdict failed).
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import geometry, liouville, stability
from .exprlang import ExprError, parse
from .grid import Grid, GridField, k_s, sphere_integral, surface_lemma_scan
from .solver import BoundarySpec, solve
from .weights import (Nonlinearity, WeightSpec, double_well_condition, from_advection, gclass_check,
                      growth_scan, nonlinearity, sign_condition, weight_preset, weight_ratio_bounds)


class ConfigError(ValueError):
    pass


SECTIONS = ("experiment", "weights", "nonlinearity", "grid", "boundary", "solver", "scan")


class RunConfig:
    """Sectioned key=value configuration with typed, key-naming accessors."""

    def __init__(self, sections: dict[str, dict[str, str]]):
        unknown = set(sections) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown section(s) {sorted(unknown)}; known: {list(SECTIONS)}")
        self.sections = {s: dict(sections.get(s, {})) for s in SECTIONS}

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config does not parse: {exc}") from None
        return cls({s: dict(cp[s]) for s in cp.sections()})

    @property
    def experiment(self) -> str:
        name = self.sections["experiment"].get("name")
        if not name:
            raise ConfigError("[experiment] name is required")
        return name.strip()

    def echo(self) -> dict:
        return {s: dict(v) for s, v in self.sections.items() if v}

    def with_defaults(self, defaults: dict) -> "RunConfig":
        merged = {s: dict(defaults.get(s, {})) for s in SECTIONS}
        for s, v in self.sections.items():
            merged[s].update(v)
        return RunConfig(merged)

    def raw(self, section: str, key: str, default=None):
        v = self.sections[section].get(key)
        if v is None or v.strip() == "":
            if default is None:
                raise ConfigError(f"[{section}] {key} is required")
            return default
        return v.strip()

    def has(self, section: str, key: str) -> bool:
        return bool(self.sections[section].get(key, "").strip())

    def _typed(self, section, key, default, conv, what):
        v = self.raw(section, key, None if default is None else str(default))
        try:
            return conv(v)
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key}: expected {what}, got {v!r}") from None

    def int(self, section, key, default=None) -> int:
        return self._typed(section, key, default, int, "an integer")

    def float(self, section, key, default=None) -> float:
        return self._typed(section, key, default, float, "a number")

    def bool(self, section, key, default=None) -> bool:
        def conv(v):
            low = v.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(v)
        return self._typed(section, key, default, conv, "a boolean")

    def floats(self, section, key, default=None) -> list[float]:
        return self._typed(section, key, default, lambda v: [float(x) for x in v.split(",") if x.strip()],
                           "a comma-separated list of numbers")

    def ints(self, section, key, default=None) -> list[int]:
        return self._typed(section, key, default, lambda v: [int(x) for x in v.split(",") if x.strip()],
                           "a comma-separated list of integers")

    def strings(self, section, key, default=None) -> list[str]:
        return [x.strip() for x in self.raw(section, key, default).split(",") if x.strip()]

    def seed(self) -> int:
        return self.int("experiment", "seed", 0)

    # -- domain objects

    def grid(self) -> Grid:
        d = self.int("grid", "d", 0)
        s = self.int("grid", "s", 1)
        L = self.floats("grid", "L", "10")
        N = self.ints("grid", "N", "201")
        L = L * (d + s) if len(L) == 1 else L
        N = N * (d + s) if len(N) == 1 else N
        try:
            return Grid(d, s, tuple(L), tuple(N))
        except ValueError as exc:
            raise ConfigError(f"[grid] {exc}") from None

    def weights(self, d: int, s: int) -> WeightSpec:
        sec = self.sections["weights"]
        if self.has("weights", "gamma"):
            exprs = {}
            for key in ("gamma", "lambda"):
                try:
                    exprs[key] = parse(sec.get(key) or sec["gamma"], d=d)
                except ExprError as exc:
                    raise ConfigError(f"[weights] {key}: {exc}") from None
            return WeightSpec(d, s, exprs["gamma"], exprs["lambda"], name="expressions")
        if self.has("weights", "a"):
            a = [x for x in sec["a"].split(";") if x.strip()]
            if len(a) != d:
                raise ConfigError(f"[weights] a: expected {d} expressions separated by ';'")
            return from_advection(a, sec.get("b", "1") or "1", s=s)
        return weight_preset(self.raw("weights", "preset", "unit"), d, s)

    def nonlinearity(self) -> Nonlinearity:
        if self.has("nonlinearity", "f"):
            sec = self.sections["nonlinearity"]
            return Nonlinearity.from_expressions(sec["f"], sec.get("F") or None, name="custom")
        return nonlinearity(self.raw("nonlinearity", "name", "allen-cahn"))

    def boundary(self, grid: Grid) -> BoundarySpec:
        periodic = [int(x) - 1 for x in self.strings("boundary", "periodic", " ")] \
            if self.has("boundary", "periodic") else []
        return BoundarySpec.parse(self.raw("boundary", "kind", "tanh-profile"), grid.d, grid.s, periodic)

    def solver_kwargs(self) -> dict:
        return {"tol": self.float("solver", "tol", 1e-8), "max_iter": self.int("solver", "max_iter", 200)}

    def init(self) -> str:
        init = self.raw("solver", "init", "tanh-profile")
        if init == "random":
            init = f"random({self.seed()})"
        return init


@dataclass
class Outcome:
    blocks: dict
    violated: bool = False
    fields: dict = field(default_factory=dict)
    csv: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Experiment:
    name: str
    anchor: str
    summary: str
    defaults: dict
    run: Callable[[RunConfig], Outcome]


def _solve(cfg: RunConfig, grid: Grid | None = None):
    grid = grid or cfg.grid()
    w = cfg.weights(grid.d, grid.s)
    f = cfg.nonlinearity()
    bc = cfg.boundary(grid)
    u, rep = solve(w, f, grid, bc, init=cfg.init(), **cfg.solver_kwargs())
    return w, f, grid, bc, u, rep


def _tanh_error(u: GridField) -> float:
    x = u.grid.axes[-1]
    return float(np.max(np.abs(u.values - np.tanh(x / math.sqrt(2)))))


# ---------------------------------------------------------------- pipelines

def run_tanh_1d(cfg: RunConfig) -> Outcome:
    w, f, grid, _, u, rep = _solve(cfg)
    err = _tanh_error(u)
    block = {"max_error": err}
    fields = {"u": u}
    if cfg.bool("scan", "refine", True):
        fine = grid.refine()
        _, _, _, _, uf, repf = _solve(cfg, fine)
        errf = _tanh_error(uf)
        block.update({"refined_N": list(fine.N), "refined_max_error": errf,
                      "refinement_ratio": err / errf if errf > 0 else math.inf,
                      "refined_residual": repf.residual})
    block["symmetry_defect"] = float(np.max(np.abs(u.values + u.values[::-1])))
    return Outcome({"grid": grid.describe(), "solver": rep.to_dict(), "profile": block},
                   violated=not rep.converged, fields=fields)


def run_stability_tanh(cfg: RunConfig) -> Outcome:
    w, f, grid, bc, u, rep = _solve(cfg)
    st = stability.min_eigenpair(w, f, u)
    x = grid.axes[-1]
    kern = 1.0 / np.cosh(x / math.sqrt(2)) ** 2
    e = st.eigenfield.values.ravel() if grid.n == 1 else None
    cos = float(e @ kern / (np.linalg.norm(e) * np.linalg.norm(kern))) if e is not None else None
    cert = stability.pointwise_certificate(w, f, u, tol=cfg.solver_kwargs()["tol"])

    # random boundary-vanishing test fields: every Rayleigh quotient must sit above mu1
    rng = np.random.default_rng(cfg.seed())
    count = cfg.int("scan", "psi_samples", 200)
    inner = tuple(slice(1, -1) for _ in range(grid.n))
    worst, stable_all = math.inf, True
    for _ in range(count):
        p = np.zeros(grid.shape)
        p[inner] = rng.standard_normal(tuple(N - 2 for N in grid.N))
        psi = GridField(grid, p)
        worst = min(worst, stability.rayleigh(w, f, u, psi, normalization=st.normalization))
        lhs, rhs = stability.quadratic_form(w, f, u, psi)
        stable_all &= lhs <= rhs
    # control: f' = 0 on (0, pi) against the first Dirichlet mode
    cN = cfg.int("scan", "control_N", 201)
    cgrid = Grid(0, 1, math.pi / 2, cN)
    ctrl = stability.min_eigenpair(weight_preset("unit", 0, 1), nonlinearity("constant(0)"), GridField(cgrid, 0.0))
    boxes = []
    for L in cfg.floats("scan", "box_lengths", "6,8,10,12"):
        N = int(round(2 * L / grid.h[-1])) + 1
        bgrid = Grid(grid.d, grid.s, (L,) * grid.n, (N,) * grid.n)
        ub, _ = solve(w, f, bgrid, BoundarySpec.tanh_profile(bc.k or [1.0], grid.d, grid.s), **cfg.solver_kwargs())
        boxes.append({"L": L, "N": N, "mu1": stability.min_eigenpair(w, f, ub).mu1})
    block = st.to_dict()
    block.update({"cosine_to_sech2": cos, "min_random_rayleigh": worst,
                  "random_rayleigh_above_mu1": bool(worst >= st.mu1 - 1e-6),
                  "random_forms_stable": bool(stable_all), "random_samples": count})
    return Outcome({"solver": rep.to_dict(), "stability": block, "certificate": cert.to_dict(),
                    "control": {"box": [0.0, math.pi], "N": cN, "mu1": ctrl.mu1, "exact": 1.0},
                    "box_sensitivity": boxes},
                   violated=st.mu1 < -1e-4, fields={"u": u, "eigenfield": st.eigenfield})


def _analytic_sz(kind: str, N: int) -> float:
    grid = Grid(0, 2, 2.0, N)
    x = grid.coords()
    if kind == "radial-quadratic":
        vals = 0.5 * (x[0] ** 2 + x[1] ** 2)
    else:
        vals = np.tanh(x[1] / math.sqrt(2)) + 0 * x[0]
    sz = geometry.sz_decomposition(GridField(grid, vals))
    r = grid.radius()
    region = (r >= 0.5) & (r <= 1.5)
    return float(np.max(np.abs(sz.residual[region])))


def run_poincare_2d(cfg: RunConfig) -> Outcome:
    w, f, grid, _, u, rep = _solve(cfg)
    S = geometry.s_quantity(u)
    rows = {}
    violated = False
    for name in cfg.strings("scan", "test_functions", "log-cutoff,bump,tensor-cosine"):
        if name not in geometry.TEST_FUNCTIONS:
            raise ConfigError(f"[scan] test_functions: unknown {name!r}; known: {sorted(geometry.TEST_FUNCTIONS)}")
        pr = geometry.poincare_sides(w, u, geometry.TEST_FUNCTIONS[name](grid))
        rows[name] = pr.to_dict()
        violated |= pr.verdict != "holds"
    sz = {}
    for kind in ("radial-quadratic", "planar-tanh"):
        res = [(N, _analytic_sz(kind, N)) for N in cfg.ints("scan", "sz_N", "101,201,401")]
        decay = [a[1] / b[1] if b[1] > 0 else math.inf for a, b in zip(res, res[1:])]
        sz[kind] = {"N": [r[0] for r in res], "max_residual": [r[1] for r in res], "decay": decay}
    return Outcome({"solver": rep.to_dict(), "poincare": rows,
                    "s_quantity": {"min": float(np.min(S.values)), "max": float(np.max(S.values))},
                    "sz_identity": sz},
                   violated=violated or not rep.converged, fields={"u": u, "S": S})


def run_energy_scan(cfg: RunConfig) -> Outcome:
    w, f, grid, _, u, rep = _solve(cfg)
    radii = cfg.floats("scan", "radii", "4,5,6,7,8,9")
    a = liouville.energy_bound_scan(w, f, u, radii, "A")
    b = liouville.energy_bound_scan(w, f, u, radii, "B")
    ka = {"k": a.k, "k_proof": a.k_proof, "k_within": bool(a.k <= 1.1 * a.k_proof)}
    return Outcome({"solver": rep.to_dict(), "mode_A": {**a.to_dict(), **ka}, "mode_B": b.to_dict()},
                   violated=a.verdict != "bounded" or not ka["k_within"] or b.verdict != "bounded",
                   fields={"u": u}, csv={"mode_A": a.to_csv(), "mode_B": b.to_csv()})


def run_gclass(cfg: RunConfig) -> Outcome:
    gs = cfg.strings("scan", "g", "log(1+r)")
    rmax = cfg.float("scan", "rmax", 1e8)
    thr = cfg.float("scan", "threshold", 0.05)
    rows = {}
    violated = False
    for g in gs:
        v = gclass_check(g, rmax, thr)
        rows[g] = v.to_dict()
        violated |= v.status == "non-member"
    return Outcome({"gclass": rows}, violated=violated)


def run_growth_scan(cfg: RunConfig) -> Outcome:
    d, s = cfg.int("grid", "d", 1), cfg.int("grid", "s", 1)
    w = cfg.weights(d, s)
    scan = growth_scan(w, cfg.raw("scan", "g", "1"), cfg.raw("scan", "mode", "g"),
                       cfg.float("scan", "epsilon", 0.0),
                       cfg.floats("scan", "radii", "1,2,5,10,20,50,100,200,500,1000"))
    return Outcome({"weights": w.describe(), "growth": scan.to_dict()},
                   violated=scan.verdict != "bounded", csv={"growth": scan.to_csv()})


def lifted_instance(w3: WeightSpec, f, grid: Grid, tilt: float, tol: float = 1e-8):
    """3D field that depends on (x1, x2 + x3) only, up to discretization.

    A 2D problem in (x1, xi) with xi = (x2 + x3)/sqrt 2 is solved first; its
    solution, interpolated at (x1, (x2 + x3)/sqrt 2), is the Dirichlet data
    and initial guess of the 3D solve.
    """
    if (grid.d, grid.s) != (1, 2):
        raise ValueError("the lifted instance needs d = 1, s = 2")
    L1, L2, L3 = grid.L
    h = min(grid.h) / 2
    Lxi = (L2 + L3) / math.sqrt(2) + 2 * h
    g2 = Grid(1, 1, (L1, Lxi), (2 * (grid.N[0] - 1) + 1, int(math.ceil(2 * Lxi / h)) + 1))
    w2 = WeightSpec(1, 1, w3.gamma, w3.lam, w3.advection, w3.name)
    U, rep2 = solve(w2, f, g2, BoundarySpec.tanh_profile([tilt, 1.0], 1, 1), tol=tol)
    interp = RegularGridInterpolator(g2.axes, U.values, method="cubic")

    def lift(x1, x2, x3):
        a, b = np.broadcast_arrays(x1, (x2 + x3) / math.sqrt(2))
        return interp(np.stack([a.ravel(), b.ravel()], axis=-1)).reshape(a.shape)

    bc = BoundarySpec.tabulated(lift, 1, 2, label=f"2D solution at (x1, (x2+x3)/sqrt2), tilt {tilt}")
    u, rep = solve(w3, f, grid, bc, init="boundary", tol=tol)
    return u, rep, rep2


def run_ratio_dim(cfg: RunConfig) -> Outcome:
    # constructed planar fields with exact derivatives
    cgrid = Grid(0, 3, 5.0, cfg.int("scan", "constructed_N", 41))
    constructed = []
    for kv in ([0.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.3, -0.5, 1.0]):
        k = np.asarray(kv) / np.linalg.norm(kv)
        x = cgrid.coords()
        z = sum(ki * xi for ki, xi in zip(k, x)) / math.sqrt(2)
        vals = np.tanh(z)
        dz = 1 / np.cosh(z) ** 2 / math.sqrt(2)
        grads = [ki * dz for ki in k]
        rr = liouville.ratio_diagnostic(weight_preset("unit", 0, 3), GridField(cgrid, vals), grads=grads)
        kk = np.asarray(rr.k)
        angle = float(np.arccos(min(1.0, abs(float(kk @ k)) / np.linalg.norm(kk))))
        constructed.append({"k": list(k), "spreads": [dd["spread"] for dd in rr.directions], "m": rr.m,
                            "k_detected": rr.k, "angle": angle})
    grid = cfg.grid()
    w = cfg.weights(grid.d, grid.s)
    f = cfg.nonlinearity()
    u, rep, rep2 = lifted_instance(w, f, grid, cfg.float("scan", "tilt", 0.3), cfg.solver_kwargs()["tol"])
    rr = liouville.ratio_diagnostic(w, u)
    return Outcome({"constructed": constructed, "solver": rep.to_dict(),
                    "reduced_solver": {"residual": rep2.residual, "converged": rep2.converged},
                    "ratio": rr.to_dict()},
                   violated=rr.unreliable or not rep.converged, fields={"u": u})


def run_moschini(cfg: RunConfig) -> Outcome:
    rep = liouville.moschini_verify(cfg.float("scan", "R0", 3.0))
    ok = rep["subsolution"] and rep["stable"] and rep["value_residual"] <= 1e-12 and rep["slope_residual"] <= 1e-12
    return Outcome({"moschini": rep}, violated=not ok)


def run_remark_ce(cfg: RunConfig) -> Outcome:
    rows = {}
    ok = True
    for n in cfg.ints("scan", "n", "4,5"):
        r = liouville.remark_verify(n)
        rows[str(n)] = r
        ok &= r["exponent_identity"] and r["subsolution"] and r["stable"]
    return Outcome({"remark": rows}, violated=not ok)


def run_surface_lemma(cfg: RunConfig) -> Outcome:
    R = cfg.float("scan", "R", 2.0)
    closed = {
        "n3": {"value": sphere_integral(1.0, R, 1, 2), "exact": 4 * math.pi * R ** 2},
        "n4": {"value": sphere_integral(1.0, R, 2, 2), "exact": 2 * math.pi ** 2 * R ** 3},
    }
    for v in closed.values():
        v["rel_error"] = abs(v["value"] / v["exact"] - 1)
    radii = cfg.floats("scan", "radii", "1,2,5,10,20,50,100")
    scans = {}
    csv = {}
    violated = any(v["rel_error"] > 5e-3 for v in closed.values())
    for preset in cfg.strings("weights", "presets", "unit,sech,rational"):
        for shape in cfg.strings("scan", "shapes", "1x2,1x3,2x2"):
            d, s = (int(t) for t in shape.split("x"))
            w = weight_preset(preset, d, s)
            sc = surface_lemma_scan(w, radii)
            key = f"{preset}-d{d}-s{s}"
            scans[key] = {**sc.to_dict(), "k_s": k_s(s) if s >= 2 else None}
            csv[key] = sc.to_csv()
            violated |= sc.verdict != "bounded"
    return Outcome({"closed_form": closed, "lemma": scans}, violated=violated, csv=csv)


def _t_values(cfg: RunConfig, h: float) -> list[float]:
    out = []
    for tok in cfg.strings("scan", "t", "h,5,10"):
        out.append(h if tok == "h" else float(tok))
    return out


def run_shifted_energy(cfg: RunConfig) -> Outcome:
    w, f, grid, bc, u, rep = _solve(cfg)
    t = _t_values(cfg, grid.h[-1])
    se = liouville.shifted_energy_check(w, f, u, t, cfg.float("scan", "R", 8.0),
                                        fill=bc.limits, t0=cfg.float("scan", "t0", 2.0))
    ok = se.holds and (se.derivative_rel_error is None or se.derivative_rel_error <= 0.02)
    return Outcome({"solver": rep.to_dict(), "shifted": se.to_dict()}, violated=not ok, fields={"u": u})


def run_theorem_gate(cfg: RunConfig) -> Outcome:
    d, s = cfg.int("grid", "d", 1), cfg.int("grid", "s", 1)
    n = d + s
    w = cfg.weights(d, s)
    f = cfg.nonlinearity()
    g = cfg.raw("scan", "g", "log(1+r)")
    radii = cfg.floats("scan", "radii", "1,2,5,10,20,50,100,200,500,1000")
    lo, hi = cfg.floats("scan", "range", "-1,1")
    sign = sign_condition(f, (lo, hi))
    member = gclass_check(g, cfg.float("scan", "rmax", 1e8), cfg.float("scan", "threshold", 0.05))
    sg = growth_scan(w, g, "g", radii=radii)
    srg = growth_scan(w, g, "Rg", radii=radii)
    liou3_growth = (sg.verdict == "bounded" and n <= d + 4) or (srg.verdict == "bounded" and n <= d + 3)
    liou3 = {"sign_condition": sign.to_dict(), "g_member": member.status,
             "growth_g": sg.verdict, "growth_Rg": srg.verdict, "dimension_ok": n <= d + 4,
             "holds": bool(sign.kind != "neither" and member.member and liou3_growth),
             "conclusion": "0-Liouville"}
    dw = double_well_condition(f) if f.F is not None else {"holds": False, "reason": "no primitive"}
    ratios = weight_ratio_bounds(w, cfg.floats("scan", "ratio_radii", "10,20,40"))
    ratios_ok = all(math.isfinite(v) for v in ratios["grad_ratio"] + ratios["lambda_ratio"]) and \
        ratios["grad_ratio"][-1] <= 1.05 * max(ratios["grad_ratio"][0], 1e-12) + 1e-12 and \
        ratios["lambda_ratio"][-1] <= 1.05 * max(ratios["lambda_ratio"][0], 1e-12) + 1e-12
    liou2_growth = (sg.verdict == "bounded" and n <= d + 3) or (srg.verdict == "bounded" and n <= d + 2)
    liou2 = {"double_well": dw, "weight_ratios": ratios, "weight_ratios_bounded": bool(ratios_ok),
             "g_member": member.status, "growth_g": sg.verdict, "growth_Rg": srg.verdict,
             "holds": bool(dw["holds"] and ratios_ok and member.member and liou2_growth),
             "conclusion": f"at most {d + 1}-Liouville"}
    return Outcome({"instance": {"weights": w.describe(), "nonlinearity": f.name, "g": g, "n": n},
                    "liou3": liou3, "liou2": liou2,
                    "scans": {"g": sg.to_dict(), "Rg": srg.to_dict()}},
                   violated=not (liou3["holds"] or liou2["holds"]))


_SECH_2D = {"grid": {"d": "1", "s": "1", "L": "10", "N": "201"}, "weights": {"preset": "sech"},
            "nonlinearity": {"name": "allen-cahn"}, "boundary": {"kind": "tanh-profile(1)"}}
_TANH_1D = {"grid": {"d": "0", "s": "1", "L": "10", "N": "401"}, "weights": {"preset": "unit"},
            "nonlinearity": {"name": "allen-cahn"}, "boundary": {"kind": "tanh-profile(1)"}}

EXPERIMENTS: dict[str, Experiment] = {e.name: e for e in [
    Experiment("tanh-1d", "heteroclinic profile tanh(x/sqrt2) of -w'' = w - w^3",
               "solve the 1D Allen-Cahn profile, report error and refinement order", _TANH_1D, run_tanh_1d),
    Experiment("stability-tanh", "stability inequality and linearized operator at the profile",
               "lowest eigenpair of the linearization, random quadratic forms, box sensitivity",
               _TANH_1D, run_stability_tanh),
    Experiment("poincare-2d", "weighted geometric Poincare inequality and the Sternberg-Zumbrun identity",
               "both sides of the inequality for three test functions on a sech-weight solution",
               _SECH_2D, run_poincare_2d),
    Experiment("energy-scan", "energy bound E_R <= k int over the sphere of gamma; gradient bound with lambda + R^-2 gamma",
               "energy and gradient growth scans on a sech-weight solution", _SECH_2D, run_energy_scan),
    Experiment("gclass", "class G: nondecreasing g with divergent int dr/(r g(r))",
               "decide class G membership by a tail-slope scan", {}, run_gclass),
    Experiment("growth-scan", "integral growth of gamma over balls in x'",
               "ratio of int_B_R gamma to g, R g or R^(1-eps) g",
               {"grid": {"d": "1", "s": "1"}, "weights": {"preset": "rational"}}, run_growth_scan),
    Experiment("ratio-dim", "ratio fields sigma_i = d_i u / d_n u and dimensional reduction",
               "m-estimate for constructed planar fields and a 3D sech-weight solution",
               {"grid": {"d": "1", "s": "2", "L": "10", "N": "101"}, "weights": {"preset": "sech"},
                "nonlinearity": {"name": "allen-cahn"}}, run_ratio_dim),
    Experiment("moschini", "piecewise radial subsolution with log growth (R0 > e^(3/4))",
               "C^1 matching, Laplacian sign, annulus growth of sigma^2", {}, run_moschini),
    Experiment("remark-ce", "counterexample h = (1+r^2)^(-(2n-5)/2), sigma = (1+r^2)^((n-3)/2)",
               "exponent identity, subsolution sign, growth of int h sigma^2", {}, run_remark_ce),
    Experiment("surface-lemma", "surface weight k_s R (R^2 - |x'|^2)^((s-2)/2)",
               "sphere integrals against closed forms and the surface inequality scan", {}, run_surface_lemma),
    Experiment("shifted-energy", "energy comparison E_R(u) <= E_R(u^t) + k int over the sphere of gamma",
               "shifted energies and the boundary formula for d/dt E_R(u^t)", _SECH_2D, run_shifted_energy),
    Experiment("theorem-gate", "hypotheses of the 0-Liouville and (d+1)-Liouville theorems",
               "sign condition, class G and growth scans for the configured instance",
               {"grid": {"d": "1", "s": "1"}, "weights": {"preset": "sech"},
                "nonlinearity": {"name": "allen-cahn"}}, run_theorem_gate),
]}


def get_experiment(name: str) -> Experiment:
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise ConfigError(f"unknown experiment {name!r}; valid: {', '.join(EXPERIMENTS)}") from None


def run_config(cfg: RunConfig) -> tuple[Experiment, RunConfig, Outcome]:
    exp = get_experiment(cfg.experiment)
    full = cfg.with_defaults(exp.defaults)
    return exp, full, exp.run(full)


__all__ = ["ConfigError", "RunConfig", "Outcome", "Experiment", "EXPERIMENTS", "get_experiment",
           "run_config", "lifted_instance"]
