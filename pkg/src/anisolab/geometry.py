"""Level-set geometry of a grid field: the Sternberg-Zumbrun identity, the
cross-term quantity S and both sides of the weighted geometric Poincare
inequality."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridField, gradient, volume_integral


def _hessian(grads: list, grid, rows, cols) -> np.ndarray:
    """Finite-difference Hessian block, symmetrized; shape (..., len(rows), len(cols))."""
    H = np.empty(grid.shape + (len(rows), len(cols)))
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            H[..., a, b] = np.gradient(grads[i], grid.h[j], axis=j, edge_order=2)
    if list(rows) == list(cols):
        H = 0.5 * (H + np.swapaxes(H, -1, -2))
    return H


def _default_eps(grads) -> float:
    mag = np.sqrt(sum(g * g for g in grads))
    return 1e-6 * float(np.max(mag)) if mag.size else 0.0


@dataclass
class SZFields:
    lhs: np.ndarray  # sum_k |grad d_k w|^2 - |grad |grad w||^2 over the chosen axes
    curvature: np.ndarray  # |grad w|^2 sum kappa_l^2
    tangential: np.ndarray  # |grad_T |grad w||^2
    kappa: np.ndarray  # principal curvatures, shape (..., m-1)
    active: np.ndarray
    eps_g: float

    @property
    def residual(self) -> np.ndarray:
        return np.where(self.active, self.lhs - self.curvature - self.tangential, 0.0)

    @property
    def excluded(self) -> int:
        return int(np.size(self.active) - np.count_nonzero(self.active))


def sz_decomposition(u: GridField, axes=None, eps_g: float | None = None) -> SZFields:
    """Both sides of the Sternberg-Zumbrun identity over ``axes`` (default: the x'' axes).

    The left side differentiates |grad w| numerically; the right side takes
    principal curvatures from the eigenvalues of P H P / |grad w| with
    P = I - nu nu^T, and the tangential term from P H nu.
    """
    grid = u.grid
    axes = list(range(grid.d, grid.n)) if axes is None else list(axes)
    G = gradient(u)
    Gs = [G[k] for k in axes]
    eps = _default_eps(G) if eps_g is None else eps_g
    H = _hessian(G, grid, axes, axes)
    mag = np.sqrt(sum(g * g for g in Gs))
    active = mag > eps
    dmag = [np.gradient(mag, grid.h[k], axis=k, edge_order=2) for k in axes]
    lhs = np.sum(H * H, axis=(-1, -2)) - sum(g * g for g in dmag)

    safe = np.where(active, mag, 1.0)
    nu = np.stack(Gs, axis=-1) / safe[..., None]
    m = len(axes)
    P = np.eye(m) - nu[..., :, None] * nu[..., None, :]
    PHP = P @ H @ P
    ev = np.linalg.eigvalsh(0.5 * (PHP + np.swapaxes(PHP, -1, -2)))
    # drop the eigenvalue closest to zero in the normal direction
    order = np.argsort(np.abs(ev), axis=-1)
    kappa = np.take_along_axis(ev, np.sort(order[..., 1:], axis=-1), axis=-1) / safe[..., None] if m > 1 \
        else np.zeros(grid.shape + (0,))
    curvature = np.sum(ev * ev, axis=-1)
    tang = P @ (H @ nu[..., None])
    tangential = np.sum(tang[..., 0] ** 2, axis=-1)
    zero = np.zeros(grid.shape)
    return SZFields(np.where(active, lhs, 0.0), np.where(active, curvature, zero),
                    np.where(active, tangential, zero), kappa, active, eps)


def s_quantity(u: GridField, eps_g: float | None = None) -> GridField:
    """S = sum_{i in x', j in x''} (d_i d_j u)^2 - |grad_{x'} |grad_{x''} u||^2.

    Uses d_i |grad'' u| = sum_j d_j u d_i d_j u / |grad'' u|, so S >= 0 by
    Cauchy-Schwarz; nodes with |grad'' u| <= eps_g are set to 0.
    """
    grid = u.grid
    if grid.d == 0:
        return GridField(grid, 0.0)
    G = gradient(u)
    flat = list(range(grid.d, grid.n))
    Gs = [G[j] for j in flat]
    mag = np.sqrt(sum(g * g for g in Gs))
    eps = (1e-6 * float(np.max(mag)) if eps_g is None else eps_g)
    active = mag > eps
    M = _hessian(G, grid, list(range(grid.d)), flat)
    M = 0.5 * (M + np.swapaxes(_hessian(G, grid, flat, list(range(grid.d))), -1, -2))
    safe = np.where(active, mag, 1.0)
    nu = np.stack(Gs, axis=-1) / safe[..., None]
    proj = np.sum(M * nu[..., None, :], axis=-1)  # d_i |grad'' u|
    S = np.sum(M * M, axis=(-1, -2)) - np.sum(proj * proj, axis=-1)
    return GridField(grid, np.where(active, S, 0.0))


@dataclass
class PoincareReport:
    lhs_curvature: float
    lhs_s: float
    rhs: float
    slack: float
    active_set_measure: float
    eps_g: float
    verdict: str
    min_s: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def poincare_sides(w, u: GridField, phi: GridField, eps_g: float | None = None,
                   tol: float = 1e-6) -> PoincareReport:
    """Integrals of the geometric Poincare inequality for test function ``phi``.

    lhs_curvature = int gamma phi^2 (|grad'' u|^2 K^2 + |grad_T |grad'' u||^2) over
    the x'' level sets, lhs_s = int gamma phi^2 S, rhs = int gamma |grad'' u|^2 |grad phi|^2.
    """
    grid = u.grid
    p = phi.values
    scale = max(1.0, float(np.max(np.abs(p))))
    for k in range(grid.n):
        if np.any(np.abs(np.take(p, [0, -1], axis=k)) > 1e-12 * scale):
            raise ValueError("test function must vanish on the boundary")
    gamma, _ = w.on_grid(grid)
    G = gradient(u)
    if eps_g is None:
        eps_g = _default_eps(G)
    sz = sz_decomposition(u, eps_g=eps_g)
    S = s_quantity(u, eps_g=eps_g).values
    grad2 = sum(G[k] ** 2 for k in range(grid.d, grid.n))
    dphi2 = sum(g * g for g in gradient(phi))
    wgt = gamma * p * p
    lc = volume_integral(GridField(grid, wgt * (sz.curvature + sz.tangential)))
    ls = volume_integral(GridField(grid, wgt * S))
    rhs = volume_integral(GridField(grid, gamma * grad2 * dphi2))
    slack = float(rhs - lc - ls)
    if not sz.active.any():
        return PoincareReport(0.0, 0.0, 0.0, 0.0, 0.0, eps_g, "degenerate", 0.0)
    verdict = "holds" if slack >= -tol * (1.0 + float(rhs)) else "fails"
    return PoincareReport(float(lc), float(ls), float(rhs), slack, float(np.mean(sz.active)), eps_g,
                          verdict, float(np.min(S)))


# ---------------------------------------------------------------- test functions

def log_cutoff(grid, R: float | None = None) -> GridField:
    """1/2 on |x| <= sqrt R, (log R - log|x|)/log R up to |x| = R, then 0."""
    R = min(grid.L) if R is None else float(R)
    if R <= 1:
        raise ValueError("log cutoff needs R > 1")
    r = grid.radius()
    with np.errstate(divide="ignore"):
        ramp = (np.log(R) - np.log(np.maximum(r, 1e-300))) / np.log(R)
    phi = np.where(r <= np.sqrt(R), 0.5, np.where(r < R, ramp, 0.0))
    return GridField(grid, _zero_faces(phi))


def bump(grid, R: float | None = None) -> GridField:
    """exp(1 - 1/(1 - |x|^2/R^2)) inside B_R."""
    R = min(grid.L) if R is None else float(R)
    t = (grid.radius() / R) ** 2
    with np.errstate(divide="ignore", over="ignore"):
        phi = np.where(t < 1, np.exp(1.0 - 1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return GridField(grid, _zero_faces(phi))


def tensor_cosine(grid) -> GridField:
    phi = np.ones(())
    for ax, L in zip(grid.axes, grid.L):
        phi = np.multiply.outer(phi, np.cos(0.5 * np.pi * ax / L))
    return GridField(grid, _zero_faces(phi))


def _zero_faces(phi: np.ndarray) -> np.ndarray:
    phi = np.array(np.broadcast_to(phi, phi.shape), dtype=float)
    for k in range(phi.ndim):
        sl = [slice(None)] * phi.ndim
        sl[k] = [0, -1]
        phi[tuple(sl)] = 0.0
    return phi


TEST_FUNCTIONS = {"log-cutoff": log_cutoff, "bump": bump, "tensor-cosine": tensor_cosine}
