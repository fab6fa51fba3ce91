"""Liouville diagnostics: energies and their growth, shifted-energy
comparisons, ratio fields sigma_i = d_i u / d_n u, and the closed-form
radial examples (a C^1 piecewise subsolution and the weighted
counterexample)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exprlang import as_expr, diff, evaluate, parse
from .grid import (GridField, annulus_integral, field_surface_integral, gradient,
                   surface_integral, volume_integral)
from .quadrature import ball_integral, quad, sphere_area
from .scans import EnergyScan
from .solver import monotone_in_xn, shift


# ---------------------------------------------------------------- energies

def energy_density(w, f, u: GridField) -> np.ndarray:
    """1/2 gamma |grad u|^2 - lambda (F(u) - F(1))."""
    grid = u.grid
    gamma, lam = w.on_grid(grid)
    grad2 = sum(g * g for g in gradient(u))
    F = np.asarray(f.primitive(u.values), dtype=float) * np.ones(grid.shape)
    F1 = float(f.primitive(1.0))
    return 0.5 * gamma * grad2 - lam * (F - F1)


def energy(w, f, u: GridField, R: float):
    """E_R(u) over the n-ball B_R; carries ``.truncated`` when B_R leaves the box."""
    return volume_integral(GridField(u.grid, energy_density(w, f, u)), R)


def _sup_grad_times_sup(u: GridField) -> float:
    grad = np.sqrt(sum(g * g for g in gradient(u)))
    return float(np.max(grad)) * float(np.max(np.abs(u.values)))


def energy_bound_scan(w, f, u: GridField, radii: Sequence[float], mode: str = "A") -> EnergyScan:
    """Mode A: E_R / int_{dB_R} gamma dS.  Mode B: int_{B_R} gamma |grad u|^2 / (R^s int_{B_R^d} (lambda + R^-2 gamma)).

    Mode A refuses fields that are not monotone in x_n.  The scan gets an
    extra attribute ``k_proof = sup|grad u| sup|u|`` for comparison with its fitted k.
    """
    grid = u.grid
    radii = [float(r) for r in radii]
    values, bounds, trunc = [], [], []
    if mode == "A":
        mono, _ = monotone_in_xn(u.values, grid)
        if not mono:
            raise ValueError("mode A needs a field monotone in x_n")
        for R in radii:
            e = energy(w, f, u, R)
            values.append(float(e))
            trunc.append(e.truncated)
            bounds.append(surface_integral(w, R, grid.d, grid.s))
        label = "E_R / int_{dB_R} gamma dS"
    elif mode == "B":
        gamma, _ = w.on_grid(grid)
        q = GridField(grid, gamma * sum(g * g for g in gradient(u)))
        for R in radii:
            v = volume_integral(q, R)
            values.append(float(v))
            trunc.append(v.truncated)
            bounds.append(R ** grid.s * ball_integral(
                lambda x, R=R: w.lambda_at(x) + w.gamma_at(x) / R ** 2, R, grid.d, vectorized=True))
        label = "int_{B_R} gamma |grad u|^2 / R^s int (lambda + R^-2 gamma)"
    else:
        raise ValueError("mode must be 'A' or 'B'")
    scan = EnergyScan(label, radii, values, bounds, trunc)
    scan.k_proof = _sup_grad_times_sup(u)
    return scan


@dataclass
class ShiftedEnergy:
    R: float
    k: float
    surface: float
    rows: list  # dicts with t, E_t, bound, slack
    monotone_decrease: bool
    t0: float | None = None
    derivative_fd: float | None = None
    derivative_surface: float | None = None
    derivative_rel_error: float | None = None
    flags: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(r["slack"] >= 0 for r in self.rows)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["holds"] = self.holds
        return d


def shifted_energy_check(w, f, u: GridField, t_list: Sequence[float], R: float,
                         fill: tuple | None = (-1.0, 1.0), t0: float = 2.0) -> ShiftedEnergy:
    """Compare E_R(u) with E_R(u^t) + k int_{dB_R} gamma dS, k = sup|grad u| sup|u|.

    Also checks that E_R(u^t) decreases in t and compares the central
    difference of t -> E_R(u^t) at ``t0`` (rounded to the grid) with
    int_{dB_R} gamma d_nu u^t0 d_n u^t0 dS.  For odd profiles both vanish at
    t = 0, which is why the default t0 is 2.
    """
    grid = u.grid
    mono, _ = monotone_in_xn(u.values, grid)
    flags = []
    if not mono:
        raise ValueError("shifted energies need a field monotone in x_n")
    if fill is None:
        flags.append("shifts past the box repeat the edge value (no asymptotic data)")
    k = _sup_grad_times_sup(u)
    S = surface_integral(w, R, grid.d, grid.s)
    E0 = float(energy(w, f, u, R))
    rows = []
    for t in t_list:
        Et = float(energy(w, f, shift(u, t, fill), R))
        bound = Et + k * S
        rows.append({"t": float(t), "E_t": Et, "bound": bound, "slack": bound - E0})
    pos = sorted((r for r in rows if r["t"] >= 0), key=lambda r: r["t"])
    decreasing = all(b["E_t"] <= a["E_t"] + 1e-12 for a, b in zip(pos, pos[1:]))

    out = ShiftedEnergy(float(R), k, S, rows, decreasing, flags=flags)
    if grid.n <= 3 and R < min(grid.L):
        h = grid.h[-1]
        t0 = round(t0 / h) * h
        Ep = float(energy(w, f, shift(u, t0 + h, fill), R))
        Em = float(energy(w, f, shift(u, t0 - h, fill), R))
        fd = (Ep - Em) / (2 * h)
        G = gradient(shift(u, t0, fill))
        gamma, _ = w.on_grid(grid)
        x = grid.coords()
        dnu = sum(xi * gi for xi, gi in zip(x, G)) / R
        q = np.broadcast_to(gamma, grid.shape) * dnu * G[-1]
        surf = field_surface_integral(q, grid, R)
        out.t0 = t0
        out.derivative_fd = fd
        out.derivative_surface = surf
        out.derivative_rel_error = abs(fd - surf) / max(abs(surf), 1e-300)
    return out


def gradient_growth_scan(w, u: GridField, g, radii: Sequence[float], mode: str = "annulus") -> EnergyScan:
    """``annulus``: int_{B_2R minus B_R} gamma |grad'' u|^2 against R^2 g(R).
    ``ball``: int_{B_R} |grad u|^2 against R^(n-1)."""
    grid = u.grid
    G = gradient(u)
    gamma, _ = w.on_grid(grid)
    radii = [float(r) for r in radii]
    values, bounds, trunc = [], [], []
    if mode == "annulus":
        ge = as_expr(g, variables=("r",))
        q = GridField(grid, gamma * sum(G[k] ** 2 for k in range(grid.d, grid.n)))
        for R in radii:
            v = annulus_integral(q, R, 2 * R)
            values.append(float(v))
            trunc.append(v.truncated)
            bounds.append(R * R * float(evaluate(ge, [R])))
        label = "int_{B_2R - B_R} gamma |grad'' u|^2 / R^2 g(R)"
    elif mode == "ball":
        q = GridField(grid, sum(gk * gk for gk in G))
        for R in radii:
            v = volume_integral(q, R)
            values.append(float(v))
            trunc.append(v.truncated)
            bounds.append(R ** (grid.n - 1))
        label = "int_{B_R} |grad u|^2 / R^(n-1)"
    else:
        raise ValueError("mode must be 'annulus' or 'ball'")
    return EnergyScan(label, radii, values, bounds, trunc)


def reflect_negate(u: GridField) -> GridField:
    """x -> -u(x''', -x_n); swaps the roles of the wells at -1 and +1."""
    return GridField(u.grid, -u.values[..., ::-1])


# ---------------------------------------------------------------- ratio fields

@dataclass
class RatioReport:
    directions: list  # per i in x'' minus x_n: dict(axis, spread, divergence_residual, median)
    trusted_fraction: float
    m: int
    k: list
    eps_m: float
    theta: float
    varied_x_prime: list
    unreliable: bool
    eps_x: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _div_coeff(a: np.ndarray, s: np.ndarray, grid) -> np.ndarray:
    """div(a grad s) with half-node arithmetic means; NaN where the stencil is incomplete."""
    out = np.zeros(grid.shape)
    for k in range(grid.n):
        sl_lo = [slice(None)] * grid.n
        sl_hi = [slice(None)] * grid.n
        sl_lo[k] = slice(None, -1)
        sl_hi[k] = slice(1, None)
        ah = 0.5 * (a[tuple(sl_lo)] + a[tuple(sl_hi)])
        flux = ah * np.diff(s, axis=k) / grid.h[k] ** 2
        tgt = [slice(None)] * grid.n
        tgt[k] = slice(1, -1)
        out[tuple(tgt)] += flux[tuple(sl_hi)] - flux[tuple(sl_lo)]
        edge = [slice(None)] * grid.n
        edge[k] = [0, -1]
        out[tuple(edge)] = np.nan
    return out


def ratio_diagnostic(w, u: GridField, eps_m: float | None = None, theta: float | None = None,
                     grads: Sequence[np.ndarray] | None = None, margin: int = 1,
                     eps_x: float = 1e-2) -> RatioReport:
    """sigma_i = d_i u / d_n u for the x'' directions, on nodes where d_n u > eps_m.

    ``grads`` may supply exact derivative fields; otherwise finite differences
    are used.  m = (x' axes along which u varies) + 1 + (x'' directions
    whose sigma spread exceeds theta).  An x' axis counts as varied when
    max |d_i u| exceeds ``eps_x`` times max |grad u|; the default sits well
    above the O(h^2) drift a discretized x'-independent solution shows.
    """
    grid = u.grid
    G = list(grads) if grads is not None else gradient(u)
    G = [np.broadcast_to(np.asarray(g, dtype=float), grid.shape) for g in G]
    dn = G[-1]
    eps = 1e-3 * float(np.max(np.abs(dn))) if eps_m is None else float(eps_m)
    th = 10.0 * max(grid.h) if theta is None else float(theta)
    trusted = dn > eps
    if margin:
        inner = np.zeros(grid.shape, dtype=bool)
        inner[tuple(slice(margin, -margin) for _ in range(grid.n))] = True
        trusted &= inner
    frac = float(np.mean(trusted))
    gamma, _ = w.on_grid(grid)
    a = np.broadcast_to(gamma, grid.shape) * dn * dn
    directions = []
    kvec = []
    for i in range(grid.d, grid.n - 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            sig = np.where(trusted, G[i] / np.where(trusted, dn, 1.0), 0.0)
        vals = sig[trusted]
        spread = float(np.max(vals) - np.min(vals)) if vals.size else 0.0
        med = float(np.median(vals)) if vals.size else 0.0
        div = _div_coeff(a, sig, grid)
        ok = trusted.copy()
        for k in range(grid.n):
            for off in (1, -1):
                ok &= np.roll(trusted, off, axis=k)
        ok &= np.isfinite(div)
        divres = float(np.max(np.abs(div[ok]))) if ok.any() else 0.0
        directions.append({"axis": f"x{i + 1}", "spread": spread, "median": med,
                           "divergence_residual": divres})
        kvec.append(med)
    kvec.append(1.0)
    knorm = math.sqrt(sum(v * v for v in kvec))
    kvec = [v / knorm for v in kvec]
    scale = max(float(np.max(np.sqrt(sum(g * g for g in G)))), 1e-300)
    varied = [f"x{i + 1}" for i in range(grid.d) if float(np.max(np.abs(G[i]))) > eps_x * scale]
    m = len(varied) + 1 + sum(1 for d in directions if d["spread"] > th)
    return RatioReport(directions, frac, m, kvec, eps, th, varied, frac < 0.5, eps_x * scale)


# ---------------------------------------------------------------- closed-form examples

def _stability_spread(vals: Sequence[float]) -> float:
    v = np.asarray(vals, dtype=float)
    return float((np.max(v) - np.min(v)) / np.max(np.abs(v)))


def moschini_sigma(R0: float):
    """Inner and outer branches as expressions in ``r``."""
    inner = parse(f"log({R0!r}) + r^2/{R0!r}^2 - r^4/(4*{R0!r}^4) - 3/4", variables=("r",))
    outer = parse("log(r)", variables=("r",))
    return inner, outer


def moschini_verify(R0: float = 3.0, radii: Sequence[float] | None = None, samples: int = 1000) -> dict:
    """C^1 matching at r = R0, sign of the planar Laplacian, and annulus growth of sigma^2."""
    if not R0 > math.exp(0.75):
        raise ValueError("need R0 > e^(3/4)")
    inner, outer = moschini_sigma(R0)
    di, do = diff(inner, 1), diff(outer, 1)
    ddi, ddo = diff(di, 1), diff(do, 1)
    value_res = abs(float(evaluate(inner, [R0])) - float(evaluate(outer, [R0])))
    slope_res = abs(float(evaluate(di, [R0])) - float(evaluate(do, [R0])))

    r_in = np.linspace(0.0, R0, samples + 1)[1:-1]
    lap_in = evaluate(ddi, [r_in]) + evaluate(di, [r_in]) / r_in
    formula = 4 / R0 ** 2 - 4 * r_in ** 2 / R0 ** 4
    lap_at_0 = 2.0 * float(evaluate(ddi, [0.0]))
    r_out = np.geomspace(R0 * (1 + 1e-9), 1e3 * R0, samples)
    lap_out = evaluate(ddo, [r_out]) + evaluate(do, [r_out]) / r_out

    fi, fo = inner.compiled(), outer.compiled()

    def sig(r):
        return float(fi((r,))) if r < R0 else float(fo((r,)))

    radii = list(np.geomspace(10, 1e3, 21)) if radii is None else [float(r) for r in radii]
    vals, bounds = [], []
    for R in radii:
        v = 2 * math.pi * quad(lambda r: r * sig(r) ** 2, R, 2 * R, points=(R0,))
        vals.append(v)
        bounds.append(R * R * math.log(R) ** 2)
    scan = EnergyScan("int_{B_2R - B_R} sigma^2 / R^2 log^2 R", radii, vals, bounds)
    rad = np.asarray(radii)
    tail = np.asarray(scan.ratios)[rad >= rad[-1] / 10 * (1 - 1e-12)]
    return {
        "R0": R0,
        "value_residual": value_res,
        "slope_residual": slope_res,
        "laplacian_inside_min": float(np.min(lap_in)),
        "laplacian_inside_formula_error": float(np.max(np.abs(lap_in - formula))),
        "laplacian_at_0": lap_at_0,
        "laplacian_outside_max_abs": float(np.max(np.abs(lap_out))),
        "subsolution": bool(np.min(lap_in) >= 0 and lap_at_0 > 0),
        "scan": scan.to_dict(),
        "tail_spread": _stability_spread(tail),
        "stable": bool(_stability_spread(tail) <= 0.10),
    }


def remark_fields(n: int):
    """h = (1+r^2)^(-(2n-5)/2) and sigma = (1+r^2)^((n-3)/2) as expressions in ``r``."""
    h = parse(f"(1+r^2)^(-({2 * n - 5})/2)", variables=("r",))
    sigma = parse(f"(1+r^2)^(({n - 3})/2)", variables=("r",))
    return h, sigma


def remark_verify(n: int, radii: Sequence[float] | None = None, samples: int = 1000) -> dict:
    """Exponent identity h sigma^2 = (1+r^2)^(-1/2), sign of sigma div(h grad sigma),
    and growth of int_{B_R} h sigma^2 against R^(n-1)."""
    if n < 4:
        raise ValueError("need n >= 4")
    exponent = -Fraction(2 * n - 5, 2) + 2 * Fraction(n - 3, 2)
    h, sigma = remark_fields(n)
    r = np.geomspace(1e-3, 1e3, samples)
    prod = evaluate(h, [r]) * evaluate(sigma, [r]) ** 2
    prod_err = float(np.max(np.abs(prod / (1 + r * r) ** -0.5 - 1)))
    flux = as_expr(h) * parse(f"r^{n - 1}", variables=("r",)) * diff(sigma, 1)
    radial = evaluate(sigma, [r]) * evaluate(diff(flux, 1), [r]) / r ** (n - 1)

    radii = list(np.geomspace(10, 1e3, 21)) if radii is None else [float(v) for v in radii]
    hs = (h * sigma * sigma).compiled()
    area = sphere_area(n)
    vals, bounds = [], []
    prev_R, acc = 0.0, 0.0
    for R in radii:
        acc += area * quad(lambda t: t ** (n - 1) * float(hs((t,))), prev_R, R)
        prev_R = R
        vals.append(acc)
        bounds.append(R ** (n - 1))
    scan = EnergyScan("int_{B_R} h sigma^2 / R^(n-1)", radii, vals, bounds)
    return {
        "n": n,
        "exponent": str(exponent),
        "exponent_identity": exponent == Fraction(-1, 2),
        "product_rel_error": prod_err,
        "h_sigma2_at_0": float(evaluate(h, [0.0]) * evaluate(sigma, [0.0]) ** 2),
        "sigma_div_min": float(np.min(radial)),
        "subsolution": bool(np.min(radial) >= -1e-10),
        "scan": scan.to_dict(),
        "spread": _stability_spread(scan.ratios),
        "stable": bool(_stability_spread(scan.ratios) <= 0.05),
    }
