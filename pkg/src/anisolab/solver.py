"""Box solutions of -div(gamma(x') grad u) = lambda(x') f(u).

Semi-implicit gradient flow finds the basin, then an inexact Newton
iteration with Jacobi-preconditioned CG polishes the residual.
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .exprlang import Expr, as_expr, evaluate
from .grid import Grid, GridField, weighted_div
from .linalg import Breakdown, free_mask, pcg, split, stiffness

SQRT2 = math.sqrt(2.0)

# Initial Newton forcing term: relative CG tolerance of each linear solve.
# It is tightened only when Newton stalls, because needlessly tight solves amplify roundoff along the near-zero translation mode of the
# linearization and break the reflection symmetry of the iterate.
NEWTON_FORCING = 1e-3


@dataclass(frozen=True)
class BoundarySpec:
    """Dirichlet data on every non-periodic face; periodic faces only on x' axes."""

    n: int
    d: int = 0
    periodic: tuple = ()
    data: Expr | None = None
    k: tuple | None = None
    # alternative to ``data``: a callable of the open coordinate mesh
    table: object = None
    label: str = ""

    def __post_init__(self):
        for ax in self.periodic:
            if not 0 <= ax < self.d:
                raise ValueError(f"axis x{ax + 1} cannot be periodic: only x' axes may be")
        if sum(v is not None for v in (self.data, self.k, self.table)) != 1:
            raise ValueError("give exactly one of dirichlet data, a tabulated function or a tanh-profile direction")
        if self.k is not None:
            if len(self.k) != self.n:
                raise ValueError("profile direction needs n components")
            if not self.k[-1] > 0:
                raise ValueError("profile direction needs k_n > 0")

    @classmethod
    def tanh_profile(cls, k: Sequence[float], d: int, s: int, periodic=()) -> "BoundarySpec":
        """u = tanh(k.x / sqrt 2) with k normalized; ``k`` has s entries (x'') or d+s entries."""
        k = [float(v) for v in k]
        if len(k) == s:
            k = [0.0] * d + k
        norm = math.sqrt(sum(v * v for v in k))
        if norm == 0:
            raise ValueError("profile direction must be non-zero")
        return cls(d + s, d, tuple(periodic), None, tuple(v / norm for v in k))

    @classmethod
    def dirichlet(cls, data, d: int, s: int, periodic=()) -> "BoundarySpec":
        return cls(d + s, d, tuple(periodic), as_expr(data, d=d + s), None)

    @classmethod
    def tabulated(cls, fn, d: int, s: int, label: str = "tabulated", periodic=()) -> "BoundarySpec":
        """Dirichlet data from a Python callable ``fn(*coords)`` on the open mesh."""
        return cls(d + s, d, tuple(periodic), None, None, fn, label)

    @classmethod
    def parse(cls, text: str, d: int, s: int, periodic=()) -> "BoundarySpec":
        """``tanh-profile(k1,...)`` or a Dirichlet expression in x1..xn."""
        m = re.fullmatch(r"\s*tanh-profile\s*(?:\((.*)\))?\s*", text)
        if m:
            k = [float(v) for v in m.group(1).split(",")] if m.group(1) else [1.0] * 1
            if len(k) == 1 and s > 1 and not m.group(1):
                k = [0.0] * (s - 1) + [1.0]
            return cls.tanh_profile(k, d, s, periodic)
        return cls.dirichlet(text, d, s, periodic)

    @property
    def limits(self) -> tuple[float, float] | None:
        return (-1.0, 1.0) if self.k is not None else None

    def values(self, grid: Grid) -> np.ndarray:
        x = grid.coords()
        if self.k is not None:
            arg = sum(kv * xi for kv, xi in zip(self.k, x))
            return np.broadcast_to(np.tanh(arg / SQRT2), grid.shape).copy()
        if self.table is not None:
            return np.broadcast_to(np.asarray(self.table(*x), dtype=float), grid.shape).copy()
        return np.broadcast_to(np.asarray(evaluate(self.data, x), dtype=float), grid.shape).copy()

    def describe(self) -> dict:
        out = {"periodic": [f"x{a + 1}" for a in self.periodic]}
        if self.k is not None:
            out["tanh_profile"] = list(self.k)
        elif self.table is not None:
            out["tabulated"] = self.label
        else:
            out["dirichlet"] = str(self.data)
        return out


@dataclass
class SolveReport:
    residual: float
    iterations: int
    converged: bool
    monotone: bool
    min_dn_u: float
    min: float
    max: float
    flow_steps: int = 0
    newton_steps: int = 0
    cg_iterations: int = 0
    breakdowns: int = 0
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def initial_field(grid: Grid, bc: BoundarySpec, init) -> np.ndarray:
    if isinstance(init, GridField):
        return np.array(init.values)
    if isinstance(init, np.ndarray):
        return np.array(np.broadcast_to(init, grid.shape), dtype=float)
    name = str(init).strip()
    if name == "boundary":
        return bc.values(grid)
    if name == "tanh-profile":
        if bc.k is not None:
            return bc.values(grid)
        return np.broadcast_to(np.tanh(grid.coords()[-1] / SQRT2), grid.shape).copy()
    if name == "zero":
        return np.zeros(grid.shape)
    m = re.fullmatch(r"random\((\d+)\)", name)
    if m:
        return np.random.default_rng(int(m.group(1))).uniform(-1.0, 1.0, grid.shape)
    raise ValueError(f"unknown init preset {name!r}; known: tanh-profile, boundary, zero, random(seed)")


def monotone_in_xn(u: np.ndarray, grid: Grid) -> tuple[bool, float]:
    """Minimum of the central x_n-difference over interior nodes."""
    if u.shape[-1] < 3:
        return False, 0.0
    dn = (u[..., 2:] - u[..., :-2]) / (2 * grid.h[-1])
    inner = tuple(slice(1, -1) for _ in range(grid.n - 1))
    dn = dn[inner] if inner else dn
    m = float(np.min(dn)) if dn.size else 0.0
    return m > 0.0, m


def residual(w, f, u: GridField, periodic=()) -> GridField:
    """div(gamma grad u) + lambda f(u) on the free nodes, 0 on Dirichlet faces."""
    grid = u.grid
    _, lam = w.on_grid(grid)
    r = weighted_div(w, u, periodic).values + lam * np.asarray(f(u.values), dtype=float)
    return GridField(grid, np.where(free_mask(grid, periodic), r, 0.0))


class _Problem:
    def __init__(self, w, f, grid: Grid, bc: BoundarySpec):
        self.w, self.f, self.grid = w, f, grid
        self.mask = free_mask(grid, bc.periodic)
        K = stiffness(w, grid, bc.periodic)
        self.K, self.Kb, self.fi, self.bi = split(K, self.mask)
        _, lam = w.on_grid(grid)
        self.lam = np.broadcast_to(lam, grid.shape).ravel()[self.fi]
        self.has_F = f.F is not None

    def full(self, uf, ub):
        out = np.empty(self.grid.size)
        out[self.fi] = uf
        out[self.bi] = ub
        return out.reshape(self.grid.shape)

    def F(self, uf, g):
        return self.K @ uf + g - self.lam * np.asarray(self.f(uf), dtype=float)

    def energy(self, uf, g):
        # discrete energy up to a constant from the boundary data
        if not self.has_F:
            return None
        Fu = np.asarray(self.f.primitive(uf), dtype=float) * np.ones_like(uf)
        return 0.5 * float(uf @ (self.K @ uf)) + float(uf @ g) - float(self.lam @ Fu)


def solve(w, f, grid: Grid, bc: BoundarySpec, init="tanh-profile", tol: float = 1e-8,
          max_iter: int = 200, flow_switch: float = 1e-2, max_flow: int | None = None):
    """Return ``(GridField, SolveReport)``; on failure the best iterate with ``converged=False``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if bc.n != grid.n:
        raise ValueError("boundary spec and grid disagree on n")
    pb = _Problem(w, f, grid, bc)
    u0 = initial_field(grid, bc, init).ravel()
    ub = bc.values(grid).ravel()[pb.bi]
    uf = u0[pb.fi].copy()
    g = pb.Kb @ ub

    def rnorm(v):
        return float(np.max(np.abs(pb.F(v, g)))) if v.size else 0.0

    res = rnorm(uf)
    best = (res, uf.copy())
    history = [res]
    flow_steps = newton_steps = cg_total = breakdowns = 0
    tau = 1.0
    forcing = NEWTON_FORCING
    max_flow = max_iter if max_flow is None else max_flow
    I = sp.identity(uf.size, format="csr")
    it = 0

    def flow_step(v, tau):
        A = (I / tau + pb.K).tocsr()
        rhs = v / tau - g + pb.lam * np.asarray(pb.f(v), dtype=float)
        sol = pcg(A, rhs, v, rtol=1e-12)
        return sol.x, sol.iterations

    while res > tol and it < max_iter:
        it += 1
        use_flow = res > flow_switch and flow_steps < max_flow
        if not use_flow:
            J = (pb.K - sp.diags(pb.lam * np.asarray(pb.f.df(uf), dtype=float) * np.ones_like(uf))).tocsr()
            try:
                sol = pcg(J, -pb.F(uf, g), rtol=forcing, maxiter=20 * max(uf.size, 10))
                cg_total += sol.iterations
                step = sol.x
                alpha, accepted = 1.0, False
                for _ in range(30):
                    trial = uf + alpha * step
                    try:
                        r_new = rnorm(trial)
                    except ArithmeticError:
                        r_new = math.inf
                    if r_new < res:
                        accepted = True
                        break
                    alpha *= 0.5
                if accepted:
                    # slow contraction means the forcing term hides a soft mode: tighten it
                    if r_new > 0.5 * res:
                        forcing = max(forcing * 0.1, 1e-12)
                    uf, res = trial, r_new
                    newton_steps += 1
                    history.append(res)
                    if res < best[0]:
                        best = (res, uf.copy())
                    continue
            except Breakdown:
                breakdowns += 1
            use_flow = True
        if use_flow:
            e0 = pb.energy(uf, g)
            while True:
                trial, k = flow_step(uf, tau)
                cg_total += k
                try:
                    r_new = rnorm(trial)
                    e1 = pb.energy(trial, g)
                except ArithmeticError:
                    r_new, e1 = math.inf, None
                ok = math.isfinite(r_new) and (e1 <= e0 + 1e-14 * abs(e0) if e0 is not None else r_new < res)
                if ok or tau < 1e-8:
                    break
                tau *= 0.5
            uf, res = trial, r_new
            tau = min(tau * 1.5, 1e3)
            flow_steps += 1
            history.append(res)
            if res < best[0]:
                best = (res, uf.copy())

    res, uf = best
    u = pb.full(uf, ub)
    mono, mind = monotone_in_xn(u, grid)
    rep = SolveReport(residual=res, iterations=it, converged=res <= tol, monotone=mono, min_dn_u=mind,
                      min=float(u.min()), max=float(u.max()), flow_steps=flow_steps,
                      newton_steps=newton_steps, cg_iterations=cg_total, breakdowns=breakdowns,
                      history=[float(h) for h in history])
    return GridField(grid, u), rep


def shift(u: GridField, t: float, fill: tuple[float, float] | None = (-1.0, 1.0)) -> GridField:
    """u^t(x''', x_n) = u(x''', x_n + t) for grid-aligned ``t``.

    Nodes pulled from beyond the box take ``fill`` (bottom, top); ``None``
    repeats the edge value instead.
    """
    grid = u.grid
    h = grid.h[-1]
    m = round(t / h)
    if abs(m * h - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"shift {t} is not a multiple of h_n = {h}")
    v = u.values
    N = grid.N[-1]
    if m == 0:
        return GridField(grid, v)
    src = np.arange(N) + m
    out = v[..., np.clip(src, 0, N - 1)].copy()
    if fill is not None:
        out[..., src > N - 1] = fill[1]
        out[..., src < 0] = fill[0]
    return GridField(grid, out)
