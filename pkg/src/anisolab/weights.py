"""Weight pairs (gamma, lambda), nonlinearities and the integral growth hypotheses.

Weights depend on the first ``d`` coordinates only.  They come either as
closed-form expressions or from an advection pair ``(a, b)`` through
``gamma = exp(-c)``, ``lambda = exp(-c) * b`` with ``grad c = a``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exprlang import Const, Expr, as_expr, diff, evaluate, parse
from .quadrature import ball_integral, quad
from .scans import EnergyScan

__all__ = [
    "AxisPotential", "AdvectionWeight", "WeightSpec", "from_advection", "weight_preset",
    "WEIGHT_PRESETS", "Nonlinearity", "nonlinearity", "NONLINEARITIES",
    "GClassVerdict", "gclass_check", "growth_scan", "growth_bound", "GROWTH_MODES",
    "SignReport", "sign_condition", "double_well_condition", "weight_ratio_bounds",
]


class AxisPotential:
    """``C(x) = int_0^x a(t) dt`` by adaptive quadrature, memoized per node."""

    def __init__(self, a: Expr):
        self.a = a
        self._fn = a.compiled()
        self._memo: dict[float, float] = {0.0: 0.0}

    def _integrand(self, t: float) -> float:
        return float(self._fn((t,)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.unique(x)
        missing = [v for v in flat.tolist() if v not in self._memo]
        if missing:
            self._fill(missing)
        memo = self._memo
        out = np.fromiter((memo[v] for v in x.ravel().tolist()), dtype=float, count=x.size)
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def _fill(self, missing: list[float]) -> None:
        memo = self._memo
        known = np.array(sorted(memo))
        for side in (1.0, -1.0):
            pts = sorted((v for v in missing if v * side > 0), key=abs)
            for v in pts:
                # integrate from the nearest already-known node on the same side of 0
                same_side = known[(known * side >= 0) & (np.abs(known) <= abs(v))]
                start = float(same_side[np.argmax(np.abs(same_side))]) if same_side.size else 0.0
                memo[v] = memo[start] + quad(self._integrand, start, v) if start < v else \
                    memo[start] - quad(self._integrand, v, start)
                known = np.append(known, v)


class AdvectionWeight:
    """exp(-sum_i C_i(x_i)) times an optional factor b(x')."""

    def __init__(self, potentials: Sequence[AxisPotential], b: Expr | None = None):
        self.potentials = list(potentials)
        self.b = b

    def __call__(self, xp: Sequence):
        c = 0.0
        for i, pot in enumerate(self.potentials):
            c = c + pot(xp[i])
        out = np.exp(-np.asarray(c, dtype=float))
        if self.b is not None:
            bv = evaluate(self.b, xp)
            if np.any(np.asarray(bv) < 0):
                raise ValueError("b is negative somewhere, so lambda = exp(-c) b would be negative")
            out = out * bv
        return out if np.ndim(out) else float(out)


def _eval_weight(w, xp):
    if isinstance(w, Expr):
        return evaluate(w, xp)
    return w(xp)


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """Weights gamma(x'), lambda(x') over the first ``d`` of ``n = d + s`` coordinates."""

    d: int
    s: int
    gamma: Expr | Callable
    lam: Expr | Callable
    advection: tuple | None = None
    name: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 0 or self.s < 1:
            raise ValueError("need d >= 0 and s >= 1")
        for w in (self.gamma, self.lam):
            if isinstance(w, Expr) and w.variables() and max(w.variables()) > self.d:
                raise ValueError(f"weight depends on a coordinate beyond x{self.d}")

    @property
    def n(self) -> int:
        return self.d + self.s

    def gamma_at(self, xp: Sequence):
        return _eval_weight(self.gamma, xp)

    def lambda_at(self, xp: Sequence):
        return _eval_weight(self.lam, xp)

    def gamma_point(self, x: tuple) -> float:
        return float(self.gamma_at(x))

    def lambda_point(self, x: tuple) -> float:
        return float(self.lambda_at(x))

    def on_grid(self, grid) -> tuple[np.ndarray, np.ndarray]:
        """gamma and lambda at the grid nodes, shaped to broadcast against ``grid.shape``."""
        key = (grid.d, grid.s, grid.L, grid.N)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if grid.d != self.d:
            raise ValueError(f"grid has d={grid.d} weighted axes, weights expect d={self.d}")
        xp = np.meshgrid(*grid.axes[: self.d], indexing="ij") if self.d else []
        shape = tuple(grid.N[: self.d]) + (1,) * grid.s
        g = np.broadcast_to(np.asarray(self.gamma_at(xp), dtype=float), grid.N[: self.d]).reshape(shape)
        lam = np.broadcast_to(np.asarray(self.lambda_at(xp), dtype=float), grid.N[: self.d]).reshape(shape)
        if not np.all(np.isfinite(g)) or np.any(g <= 0):
            raise ValueError("gamma must be finite and positive at every grid node")
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise ValueError("lambda must be finite and non-negative at every grid node")
        g = np.ascontiguousarray(g)
        lam = np.ascontiguousarray(lam)
        g.flags.writeable = False
        lam.flags.writeable = False
        self._cache[key] = (g, lam)
        return g, lam

    def scaled(self, c: float) -> "WeightSpec":
        if c <= 0:
            raise ValueError("scale must be positive")
        gamma = self.gamma * c if isinstance(self.gamma, Expr) else _Scaled(self.gamma, c)
        lam = self.lam * c if isinstance(self.lam, Expr) else _Scaled(self.lam, c)
        return WeightSpec(self.d, self.s, gamma, lam, self.advection, f"{c}*{self.name}")

    def with_s(self, s: int) -> "WeightSpec":
        return WeightSpec(self.d, s, self.gamma, self.lam, self.advection, self.name)

    def describe(self) -> dict:
        out = {"name": self.name, "d": self.d, "s": self.s}
        if isinstance(self.gamma, Expr):
            out["gamma"] = str(self.gamma)
        if isinstance(self.lam, Expr):
            out["lambda"] = str(self.lam)
        if self.advection is not None:
            a, b = self.advection
            out["advection"] = {"a": [str(x) for x in a], "b": str(b)}
        return out


class _Scaled:
    def __init__(self, fn, c):
        self.fn, self.c = fn, c

    def __call__(self, xp):
        return self.c * self.fn(xp)


def from_advection(a: Sequence, b="1", s: int = 1) -> WeightSpec:
    """Divergence-form weights for ``-Lap u + a . grad u = b f(u)``.

    ``a[i]`` may depend on ``x_{i+1}`` only (separable potential).
    """
    d = len(a)
    a_exprs = [as_expr(ai, d=d) for ai in a]
    for i, ai in enumerate(a_exprs, start=1):
        others = ai.variables() - {i}
        if others:
            raise ValueError(f"a{i} must depend on x{i} only, found x{min(others)}")
    b_expr = as_expr(b, d=d)
    pots = [AxisPotential(_as_univariate(ai, i)) for i, ai in enumerate(a_exprs, start=1)]
    gamma = AdvectionWeight(pots)
    lam = AdvectionWeight(pots, None if (isinstance(b_expr, Const) and b_expr.value == 1.0) else b_expr)
    if isinstance(b_expr, Const) and b_expr.value < 0:
        raise ValueError("b must be non-negative")
    return WeightSpec(d, s, gamma, lam, advection=(tuple(a_exprs), b_expr), name="advection")


def _as_univariate(e: Expr, i: int) -> Expr:
    # rename x_i to the first variable so the potential integrates a scalar function
    return parse(str(e).replace(f"x{i}", "t"), variables=("t",)) if i != 1 else \
        parse(str(e), variables=("x1",))


def _preset_args(spec: str) -> tuple[str, list[float]]:
    m = re.fullmatch(r"\s*([A-Za-z][\w-]*)\s*(?:\((.*)\))?\s*", spec)
    if not m:
        raise ValueError(f"bad preset {spec!r}")
    args = [float(x) for x in m.group(2).split(",")] if m.group(2) else []
    return m.group(1), args


def _product(term: str, d: int) -> str:
    return "*".join("(" + term.replace("X", f"x{i}") + ")" for i in range(1, d + 1)) or "1"


def weight_preset(spec: str, d: int = 1, s: int = 1) -> WeightSpec:
    """Named weights: ``unit``, ``sech``, ``rational``, ``shifted-tanh(t,shift)``.

    The advection profile is applied on every weighted axis; gamma is the
    closed form of exp(-c) and lambda = gamma (b = 1).
    """
    name, args = _preset_args(spec)
    if name == "unit":
        a_term, g_term = "0", "1"
    elif name == "sech":
        a_term, g_term = "tanh(X)", "1/cosh(X)"
    elif name == "rational":
        a_term, g_term = "2*X/(1+X^2)", "1/(1+X^2)"
    elif name == "shifted-tanh":
        if len(args) != 2:
            raise ValueError("shifted-tanh needs (t, shift)")
        t, sh = args
        if not t > abs(sh):
            raise ValueError("shifted-tanh(t, shift) requires t > |shift|")
        a_term = f"{t!r}*tanh(X)+{sh!r}" if sh >= 0 else f"{t!r}*tanh(X)-{-sh!r}"
        g_term = f"exp(-({sh!r})*X)/cosh(X)^{t!r}"
    else:
        raise ValueError(f"unknown weight preset {name!r}; known: {sorted(WEIGHT_PRESETS)}")
    gamma = parse(_product(g_term, d), d=d)
    a = tuple(parse(a_term.replace("X", f"x{i}"), d=d) for i in range(1, d + 1))
    return WeightSpec(d, s, gamma, gamma, advection=(a, Const(1.0)), name=spec.strip())


WEIGHT_PRESETS = ("unit", "sech", "rational", "shifted-tanh")


# ---------------------------------------------------------------- nonlinearities

@dataclass(frozen=True)
class Nonlinearity:
    """f, f' and a primitive F, as expressions in ``u``."""

    name: str
    f: Expr
    fprime: Expr
    F: Expr | None
    domain: tuple[float, float] = (-math.inf, math.inf)

    def __call__(self, u):
        return evaluate(self.f, [u])

    def df(self, u):
        return evaluate(self.fprime, [u])

    def primitive(self, u):
        if self.F is None:
            raise ValueError(f"nonlinearity {self.name!r} has no primitive")
        return evaluate(self.F, [u])

    @classmethod
    def from_expressions(cls, f: str | Expr, F: str | Expr | None = None, name: str = "custom",
                         domain=(-math.inf, math.inf)) -> "Nonlinearity":
        fe = as_expr(f, variables=("u",))
        Fe = as_expr(F, variables=("u",)) if F is not None else None
        return cls(name, fe, diff(fe, 1), Fe, domain)


def _nl(name, f, fp, F, domain=(-math.inf, math.inf)):
    p = lambda s: parse(s, variables=("u",))  # noqa: E731
    return Nonlinearity(name, p(f), p(fp), p(F) if F else None, domain)


def nonlinearity(spec: str) -> Nonlinearity:
    """Catalog: allen-cahn, gelfand, lane-emden(p), negative-exponent(p), zero, linear(c), constant(c)."""
    name, args = _preset_args(spec)
    if name == "allen-cahn":
        return _nl(spec, "u-u^3", "1-3*u^2", "-(1-u^2)^2/4")
    if name == "gelfand":
        return _nl(spec, "exp(u)", "exp(u)", "exp(u)")
    if name == "lane-emden":
        p = args[0] if args else 3.0
        if p <= 1:
            raise ValueError("lane-emden needs p > 1")
        dom = (-math.inf, math.inf) if float(p).is_integer() else (0.0, math.inf)
        return _nl(spec, f"u^{p!r}", f"{p!r}*u^{p - 1!r}", f"u^{p + 1!r}/{p + 1!r}", dom)
    if name == "negative-exponent":
        p = args[0] if args else 2.0
        if p <= 0:
            raise ValueError("negative-exponent needs p > 0")
        F = "-log(u)" if p == 1 else f"-u^{1 - p!r}/{1 - p!r}"
        return _nl(spec, f"-u^(-{p!r})", f"{p!r}*u^(-{p + 1!r})", F, (0.0, math.inf))
    if name == "zero":
        return _nl(spec, "0", "0", "0")
    if name == "linear":
        c = args[0] if args else -1.0
        return _nl(spec, f"{c!r}*u", f"{c!r}", f"{c!r}*u^2/2") if c >= 0 else \
            _nl(spec, f"-{-c!r}*u", f"-{-c!r}", f"-{-c!r}*u^2/2")
    if name == "constant":
        c = args[0] if args else 0.0
        cs = f"{c!r}" if c >= 0 else f"(-{-c!r})"
        return _nl(spec, cs, "0", f"{cs}*u")
    raise ValueError(f"unknown nonlinearity {name!r}; known: {NONLINEARITIES}")


NONLINEARITIES = ("allen-cahn", "gelfand", "lane-emden", "negative-exponent", "zero", "linear", "constant")


@dataclass
class SignReport:
    kind: str  # "nonnegative" | "t_f_nonpositive" | "neither"
    interval: tuple[float, float]
    resolution: float
    witness: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "interval": list(self.interval),
                "resolution": self.resolution, "witness": self.witness}


def sign_condition(f: Nonlinearity, interval=(-1.0, 1.0), samples: int = 2001) -> SignReport:
    """Which of ``f >= 0`` or ``t f(t) <= 0`` holds on the sampled interval.

    ``neither`` is only as reliable as the sampling step reported in ``resolution``.
    """
    a, b = map(float, interval)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError("interval must be finite with a < b")
    t = np.linspace(a, b, samples)
    ft = np.asarray(f(t), dtype=float) * np.ones_like(t)
    res = (b - a) / (samples - 1)
    if np.all(ft >= 0):
        return SignReport("nonnegative", (a, b), res, {})
    if np.all(t * ft <= 0):
        return SignReport("t_f_nonpositive", (a, b), res, {})
    wit = {"f_negative_at": float(t[np.argmin(ft)]), "t_f_positive_at": float(t[np.argmax(t * ft)])}
    return SignReport("neither", (a, b), res, wit)


def double_well_condition(f: Nonlinearity, samples: int = 2001) -> dict:
    """Check F(t) <= min(F(-1), F(1)) on (-1, 1)."""
    t = np.linspace(-1.0, 1.0, samples)[1:-1]
    F = np.asarray(f.primitive(t), dtype=float) * np.ones_like(t)
    Fm, Fp = float(f.primitive(-1.0)), float(f.primitive(1.0))
    cap = min(Fm, Fp)
    excess = float(np.max(F - cap))
    return {"holds": bool(excess <= 1e-12 * (1 + abs(cap))), "F(-1)": Fm, "F(1)": Fp,
            "max_excess": excess, "reflect": bool(Fm < Fp)}


# ---------------------------------------------------------------- class G

@dataclass
class GClassVerdict:
    member: bool
    status: str  # "member" | "non-member" | "inconclusive"
    partial_integrals: list[tuple[float, float]]
    growth_exponent_estimate: float
    tail_slope: float
    tail_increment: float

    def to_dict(self) -> dict:
        return {"member": self.member, "status": self.status,
                "partial_integrals": [list(p) for p in self.partial_integrals],
                "growth_exponent_estimate": self.growth_exponent_estimate,
                "tail_slope": self.tail_slope, "tail_increment": self.tail_increment}


def gclass_check(g, Rmax: float = 1e8, threshold: float = 0.05, per_decade: int = 10) -> GClassVerdict:
    """Scan I(R) = int_1^R dr / (r g(r)) on geometric radii up to ``Rmax``.

    member: the slope of I against log R over the last decade is at least
    ``threshold``.  non-member: the last-decade increment is below
    ``threshold`` and smaller than the one before.  Anything else is
    ``inconclusive``.
    """
    g = as_expr(g, variables=("r",))
    if Rmax < 100:
        raise ValueError("Rmax must span at least two decades")
    gf = g.compiled()
    decades = math.log10(Rmax)
    probe = np.logspace(0.0, decades, int(per_decade * decades * 10) + 1)
    vals = np.asarray(evaluate(g, [probe]), dtype=float) * np.ones_like(probe)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError("g must be positive on [1, Rmax]")
    if np.any(np.diff(vals) < -1e-12 * np.abs(vals[1:])):
        raise ValueError("g must be nondecreasing on [1, Rmax]")

    radii = np.logspace(0.0, decades, int(round(per_decade * decades)) + 1)
    t = np.log(radii)

    def integrand(tt: float) -> float:
        return 1.0 / float(gf((math.exp(tt),)))

    partial = [0.0]
    for a, b in zip(t[:-1], t[1:]):
        partial.append(partial[-1] + quad(integrand, float(a), float(b)))
    partial = np.array(partial)

    i_dec = int(np.searchsorted(radii, radii[-1] / 10.0 * (1 - 1e-12)))
    i_prev = int(np.searchsorted(radii, radii[-1] / 100.0 * (1 - 1e-12)))
    inc_last = float(partial[-1] - partial[i_dec])
    inc_prev = float(partial[i_dec] - partial[i_prev])
    slope = inc_last / math.log(radii[-1] / radii[i_dec])
    if slope >= threshold:
        status = "member"
    elif inc_last < threshold and inc_last < inc_prev:
        status = "non-member"
    else:
        status = "inconclusive"
    g_hi, g_lo = float(gf((radii[-1],))), float(gf((radii[i_dec],)))
    ll_hi, ll_lo = math.log(math.log(radii[-1])), math.log(math.log(radii[i_dec]))
    exponent = math.log(g_hi / g_lo) / (ll_hi - ll_lo)
    return GClassVerdict(status == "member", status, [(float(r), float(v)) for r, v in zip(radii, partial)],
                         float(exponent), float(slope), inc_last)


# ---------------------------------------------------------------- growth hypotheses

GROWTH_MODES = ("g", "Rg", "R1-eps-g")


def growth_bound(g: Expr, mode: str, R: float, epsilon: float = 0.0) -> float:
    gv = float(evaluate(g, [R]))
    if mode == "g":
        return gv
    if mode == "Rg":
        return R * gv
    if mode == "R1-eps-g":
        return R ** (1.0 - epsilon) * gv
    raise ValueError(f"unknown growth mode {mode!r}; known: {GROWTH_MODES}")


def growth_scan(w: WeightSpec, g, mode: str = "g", epsilon: float = 0.0,
                radii: Sequence[float] = (1, 2, 5, 10, 20, 50, 100)) -> EnergyScan:
    """Ratios of int_{B_R} gamma dx' (d-ball) to g(R), R g(R) or R^(1-eps) g(R)."""
    g = as_expr(g, variables=("r",))
    radii = [float(r) for r in radii]
    if w.d == 0:
        raise ValueError("growth hypotheses need at least one weighted coordinate")
    values = [ball_integral(w.gamma_at, R, w.d, vectorized=True) for R in radii]
    bounds = [growth_bound(g, mode, R, epsilon) for R in radii]
    label = f"int_B_R gamma dx' / {mode}"
    return EnergyScan(label, radii, values, bounds)


def weight_ratio_bounds(w: WeightSpec, radii: Sequence[float] = (10.0, 20.0, 40.0),
                        samples: int = 64) -> dict:
    """Sup of |grad gamma|/gamma and lambda/gamma on spheres |x'| = R (finite differences)."""
    if w.d == 0:
        return {"grad_ratio": [0.0 for _ in radii], "lambda_ratio": [float(w.lambda_point(()) / w.gamma_point(()))
                                                                     for _ in radii], "radii": list(radii)}
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(samples, w.d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    if w.d == 1:
        dirs = np.array([[1.0], [-1.0]])
    grad_r, lam_r = [], []
    for R in radii:
        pts = R * dirs
        xp = [pts[:, i] for i in range(w.d)]
        g0 = np.asarray(w.gamma_at(xp), dtype=float) * np.ones(len(pts))
        lam = np.asarray(w.lambda_at(xp), dtype=float) * np.ones(len(pts))
        grad2 = np.zeros(len(pts))
        for i in range(w.d):
            h = 1e-5 * max(1.0, R)
            xp_p = [c + (h if j == i else 0.0) for j, c in enumerate(xp)]
            xp_m = [c - (h if j == i else 0.0) for j, c in enumerate(xp)]
            gp = np.asarray(w.gamma_at(xp_p), dtype=float)
            gm = np.asarray(w.gamma_at(xp_m), dtype=float)
            grad2 += ((gp - gm) / (2 * h)) ** 2
        grad_r.append(float(np.max(np.sqrt(grad2) / g0)))
        lam_r.append(float(np.max(lam / g0)))
    return {"radii": list(map(float, radii)), "grad_ratio": grad_r, "lambda_ratio": lam_r}
