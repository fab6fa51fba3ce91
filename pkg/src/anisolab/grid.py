"""Tensor-product box grids split into weighted (x') and flat (x'') axes.

Holds the discrete operators used everywhere else: the conservative
weighted divergence, split gradients, cut-cell ball quadrature and the
surface quadratures over spheres centred at the origin.
"""
from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exprlang import Expr, evaluate
from .quadrature import ball_integral, sphere_area
from .scans import EnergyScan

MAGIC = b"ANISO1"


@dataclass(frozen=True)
class Grid:
    """Box ``prod_i [-L_i, L_i]`` with ``N_i`` nodes per axis; axes 0..d-1 are x'."""

    d: int
    s: int
    L: tuple
    N: tuple

    def __post_init__(self):
        n = self.d + self.s
        L = (float(self.L),) * n if np.isscalar(self.L) else tuple(float(v) for v in self.L)
        N = (int(self.N),) * n if np.isscalar(self.N) else tuple(int(v) for v in self.N)
        if self.d < 0 or self.s < 1:
            raise ValueError("need d >= 0 and s >= 1")
        if len(L) != n or len(N) != n:
            raise ValueError(f"expected {n} extents and node counts")
        if any(v < 3 for v in N):
            raise ValueError("every axis needs at least 3 nodes")
        if any(not (v > 0 and math.isfinite(v)) for v in L):
            raise ValueError("half-lengths must be positive")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "N", N)

    @property
    def n(self) -> int:
        return self.d + self.s

    @property
    def shape(self) -> tuple:
        return self.N

    @property
    def size(self) -> int:
        return int(np.prod(self.N))

    @cached_property
    def h(self) -> tuple:
        return tuple(2.0 * L / (N - 1) for L, N in zip(self.L, self.N))

    @cached_property
    def axes(self) -> list:
        return [np.linspace(-L, L, N) for L, N in zip(self.L, self.N)]

    def coords(self) -> list:
        """Sparse open mesh, one broadcastable array per axis."""
        return np.meshgrid(*self.axes, indexing="ij", sparse=True)

    def radius(self) -> np.ndarray:
        r2 = sum(c * c for c in self.coords())
        return np.sqrt(r2)

    def refine(self) -> "Grid":
        return Grid(self.d, self.s, self.L, tuple(2 * N - 1 for N in self.N))

    def describe(self) -> dict:
        return {"d": self.d, "s": self.s, "L": list(self.L), "N": list(self.N), "h": list(self.h)}


class GridField:
    """Node values on a grid (row-major over x1..xn)."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        v = np.asarray(values, dtype=float)
        if v.shape != grid.shape:
            v = np.broadcast_to(v, grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = np.array(v, dtype=float)
        v.flags.writeable = False
        self.grid = grid
        self.values = v

    @classmethod
    def from_expr(cls, grid: Grid, e: Expr) -> "GridField":
        return cls(grid, evaluate(e, grid.coords()))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "GridField":
        return cls(grid, fn(*grid.coords()))

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __repr__(self):
        return f"GridField(shape={self.values.shape}, min={self.values.min():.4g}, max={self.values.max():.4g})"


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, GridField) else np.asarray(u, dtype=float)


# ---------------------------------------------------------------- operators

def half_gamma(gamma: np.ndarray, axis: int, periodic: bool = False) -> np.ndarray:
    """gamma at half nodes along ``axis`` by the arithmetic mean of neighbours."""
    if gamma.shape[axis] == 1:
        return gamma
    if periodic:
        return 0.5 * (gamma + np.roll(gamma, -1, axis))
    lo = [slice(None)] * gamma.ndim
    hi = [slice(None)] * gamma.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return 0.5 * (gamma[tuple(lo)] + gamma[tuple(hi)])


def weighted_div(w, u, periodic: Sequence[int] = ()) -> GridField:
    """div(gamma grad u) in conservative flux form; non-periodic boundary nodes are 0."""
    grid = u.grid
    vals = u.values
    gamma, _ = w.on_grid(grid)
    out = np.zeros(grid.shape)
    interior = [slice(None)] * grid.n
    for k in range(grid.n):
        h2 = grid.h[k] ** 2
        if k in periodic:
            flux = half_gamma(gamma, k, True) * (np.roll(vals, -1, k) - vals)
            out += (flux - np.roll(flux, 1, k)) / h2
            continue
        flux = half_gamma(gamma, k) * np.diff(vals, axis=k)
        hi = [slice(None)] * grid.n
        lo = [slice(None)] * grid.n
        hi[k] = slice(1, None)
        lo[k] = slice(None, -1)
        tgt = [slice(None)] * grid.n
        tgt[k] = slice(1, -1)
        out[tuple(tgt)] += (flux[tuple(hi)] - flux[tuple(lo)]) / h2
        interior[k] = slice(1, -1)
    res = np.zeros(grid.shape)
    res[tuple(interior)] = out[tuple(interior)]
    return GridField(grid, res)


def gradient(u) -> list:
    """Per-axis derivatives: central in the interior, second-order one-sided at the edges."""
    grid = u.grid
    return [np.gradient(u.values, grid.h[k], axis=k, edge_order=2) for k in range(grid.n)]


def split_gradients(u) -> tuple[list, list]:
    g = gradient(u)
    d = u.grid.d
    return g[:d], g[d:]


# ---------------------------------------------------------------- volume quadrature

class Integral(float):
    """A float that remembers whether the ball left the box."""

    truncated: bool

    def __new__(cls, value, truncated=False):
        obj = super().__new__(cls, value)
        obj.truncated = bool(truncated)
        return obj


def _cell_range_sq(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = edges[:-1], edges[1:]
    lo = np.where((a <= 0) & (b >= 0), 0.0, np.minimum(a * a, b * b))
    hi = np.maximum(a * a, b * b)
    return lo, hi


@lru_cache(maxsize=64)
def ball_weights(grid: Grid, R: float, sub: int = 3) -> np.ndarray:
    """Node weights for int_{|x| <= R} q dx by cut-cell trapezoid rule.

    Each cell contributes its volume times the fraction of its ``sub**n``
    midpoint subsamples inside the ball, shared equally by its corners.
    """
    n = grid.n
    R2 = R * R
    lo_sum = np.zeros([N - 1 for N in grid.N])
    hi_sum = np.zeros_like(lo_sum)
    for k, ax in enumerate(grid.axes):
        lo, hi = _cell_range_sq(ax)
        shape = [1] * n
        shape[k] = -1
        lo_sum = lo_sum + lo.reshape(shape)
        hi_sum = hi_sum + hi.reshape(shape)
    frac = np.where(hi_sum <= R2, 1.0, 0.0)
    cut = np.argwhere((hi_sum > R2) & (lo_sum < R2))
    if cut.size:
        offs = (np.arange(sub) + 0.5) / sub
        mesh = np.stack(np.meshgrid(*([offs] * n), indexing="ij"), axis=-1).reshape(-1, n)
        r2 = np.zeros((len(cut), len(mesh)))
        for k in range(n):
            x0 = grid.axes[k][cut[:, k]]
            pts = x0[:, None] + mesh[None, :, k] * grid.h[k]
            r2 += pts * pts
        frac[tuple(cut.T)] = np.mean(r2 <= R2, axis=1)
    vol = float(np.prod(grid.h))
    cellw = frac * vol / 2 ** n
    wts = np.zeros(grid.shape)
    for corner in np.ndindex(*([2] * n)):
        sl = tuple(slice(c, c + N - 1) for c, N in zip(corner, grid.N))
        wts[sl] += cellw
    wts.flags.writeable = False
    return wts


def box_weights(grid: Grid) -> np.ndarray:
    """Plain trapezoid weights over the whole box."""
    w = np.ones(())
    for k, N in enumerate(grid.N):
        wk = np.full(N, grid.h[k])
        wk[[0, -1]] *= 0.5
        w = np.multiply.outer(w, wk)
    return w


def volume_integral(q, R: float | None = None) -> Integral:
    """int_{B_R} q over the n-ball (whole box when ``R`` is None)."""
    grid = q.grid
    if R is None:
        return Integral(float(np.sum(box_weights(grid) * q.values)))
    if R < 0:
        raise ValueError("radius must be non-negative")
    wts = ball_weights(grid, float(R))
    return Integral(float(np.sum(wts * q.values)), R > min(grid.L) * (1 + 1e-12))


def annulus_integral(q, R1: float, R2: float) -> Integral:
    outer = volume_integral(q, R2)
    inner = volume_integral(q, R1)
    return Integral(outer - inner, outer.truncated or inner.truncated)


# ---------------------------------------------------------------- spheres

def _gamma_point(gamma):
    """(callable on coordinate tuples, whether it accepts array entries)."""
    if gamma is None:
        return (lambda x: 1.0), True
    if hasattr(gamma, "gamma_at"):
        return gamma.gamma_at, True
    if isinstance(gamma, Expr):
        return (lambda x: evaluate(gamma, list(x))), True
    if np.isscalar(gamma):
        c = float(gamma)
        return (lambda x: c), True
    return gamma, False


@lru_cache(maxsize=None)
def k_s(s: int) -> float:
    """int over the unit (s-1)-ball of (1-|z|^2)^(-1/2)."""
    if s < 2:
        raise ValueError("k_s needs s >= 2")
    return ball_integral(lambda z: 1.0, 1.0, s - 1, power=-0.5)


def sphere_integral(gamma, R: float, d: int, s: int) -> float:
    """int_{|x|=R} gamma(x') dS over the sphere in R^(d+s), s >= 2.

    Both hemispheres x_n > 0 and x_n < 0 are counted: twice
    int_{|x'|<R} gamma k_s R (R^2-|x'|^2)^((s-2)/2) dx'.
    """
    if s < 2:
        raise ValueError("sphere_integral needs s >= 2")
    fn, vec = _gamma_point(gamma)
    return 2.0 * k_s(s) * R * ball_integral(fn, R, d, power=(s - 2) / 2.0, vectorized=vec)


def surface_integral(gamma, R: float, d: int, s: int) -> float:
    """Same surface integral for any s >= 1, using |S^(s-1)| in closed form."""
    if s < 1:
        raise ValueError("need s >= 1")
    fn, vec = _gamma_point(gamma)
    return sphere_area(s) * R * ball_integral(fn, R, d, power=(s - 2) / 2.0, vectorized=vec)


def surface_lemma_scan(w, radii: Sequence[float]) -> EnergyScan:
    """sphere_integral(gamma, R) against R^(s-1) int_{B_R^d} gamma dx'."""
    values, bounds = [], []
    for R in radii:
        values.append(sphere_integral(w, R, w.d, w.s))
        bounds.append(R ** (w.s - 1) * ball_integral(w.gamma_at, R, w.d, vectorized=True))
    return EnergyScan(f"surface / R^{w.s - 1} int gamma", list(map(float, radii)), values, bounds)


def sphere_nodes(n: int, R: float, m: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Points on |x| = R in R^n and quadrature weights summing to the sphere area."""
    if n == 1:
        return np.array([[-R], [R]]), np.ones(2)
    if n == 2:
        th = 2 * np.pi * np.arange(m) / m
        pts = R * np.stack([np.cos(th), np.sin(th)], axis=1)
        return pts, np.full(m, 2 * np.pi * R / m)
    if n == 3:
        z, wz = np.polynomial.legendre.leggauss(m // 2)
        ph = 2 * np.pi * np.arange(m) / m
        Z, P = np.meshgrid(z, ph, indexing="ij")
        rho = np.sqrt(1 - Z ** 2)
        pts = R * np.stack([rho * np.cos(P), rho * np.sin(P), Z], axis=-1).reshape(-1, 3)
        wts = (R * R * np.outer(wz, np.full(m, 2 * np.pi / m))).ravel()
        return pts, wts
    raise ValueError("surface quadrature of grid fields supports n <= 3")


def field_surface_integral(values: np.ndarray, grid: Grid, R: float, m: int = 256) -> float:
    """int_{|x|=R} of a node field, interpolated by cubic splines."""
    if R >= min(grid.L):
        raise ValueError("sphere leaves the box")
    pts, wts = sphere_nodes(grid.n, R, m)
    method = "cubic" if all(N >= 4 for N in grid.N) else "linear"
    interp = RegularGridInterpolator(grid.axes, values, method=method)
    return float(np.dot(interp(pts), wts))


# ---------------------------------------------------------------- persistence

def write_field(path, u: GridField) -> None:
    """Binary container: magic, uint32 d and s, uint32 N_i, float64 L_i, row-major float64 values."""
    g = u.grid
    head = MAGIC + struct.pack("<II", g.d, g.s) + struct.pack(f"<{g.n}I", *g.N) + struct.pack(f"<{g.n}d", *g.L)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_field(path) -> GridField:
    data = Path(path).read_bytes()
    if data[:6] != MAGIC:
        raise ValueError(f"{path}: not an {MAGIC.decode()} field file")
    d, s = struct.unpack_from("<II", data, 6)
    n = d + s
    off = 14
    N = struct.unpack_from(f"<{n}I", data, off)
    off += 4 * n
    L = struct.unpack_from(f"<{n}d", data, off)
    off += 8 * n
    grid = Grid(d, s, L, N)
    count = grid.size
    if len(data) - off != 8 * count:
        raise ValueError(f"{path}: expected {count} values, found {(len(data) - off) // 8}")
    vals = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(grid.shape)
    return GridField(grid, vals)


def field_csv(u: GridField) -> str:
    """One row per node: coordinates x1..xn then the value."""
    g = u.grid
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow([f"x{i}" for i in range(1, g.n + 1)] + ["value"])
    for idx in np.ndindex(*g.shape):
        wr.writerow([repr(float(g.axes[k][i])) for k, i in enumerate(idx)] + [repr(float(u.values[idx]))])
    return buf.getvalue()
