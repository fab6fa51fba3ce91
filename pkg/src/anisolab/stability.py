"""Stability of a computed solution: the second-variation form, its lowest
eigenpair, and the pointwise certificate from monotonicity in x_n."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .grid import GridField, weighted_div
from .linalg import free_mask, pcg, split, stiffness

MAX_ITER = 10_000


@dataclass
class StabilityReport:
    mu1: float
    eigenfield: GridField
    iterations: int
    converged: bool
    stagnated: bool
    positive: bool
    normalization: str  # "lambda" or "l2"
    shift: float
    eig_residual: float
    form_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"mu1": self.mu1, "iterations": self.iterations, "converged": self.converged,
                "stagnated": self.stagnated, "eigenfield_positive": self.positive,
                "normalization": self.normalization, "shift": self.shift,
                "eig_residual": self.eig_residual, "form_values": self.form_values}


def _cell_volume(grid) -> float:
    return float(np.prod(grid.h))


def _check_vanishes(psi: GridField, periodic=()) -> None:
    mask = free_mask(psi.grid, periodic)
    scale = max(1.0, float(np.max(np.abs(psi.values))))
    if np.any(np.abs(psi.values[~mask]) > 1e-12 * scale):
        raise ValueError("test field must vanish on the Dirichlet boundary")


def quadratic_form(w, f, u: GridField, psi: GridField, periodic=()) -> tuple[float, float]:
    """(int lambda f'(u) psi^2, int gamma |grad psi|^2) on the box.

    Both sides use the same edge differences and node volumes as the
    solver's matrix, so rhs - lhs is exactly the discrete second variation.
    """
    _check_vanishes(psi, periodic)
    grid = u.grid
    _, lam = w.on_grid(grid)
    vol = _cell_volume(grid)
    p = psi.values
    fp = np.asarray(f.df(u.values), dtype=float) * np.ones(grid.shape)
    lhs = vol * float(np.sum(lam * fp * p * p))
    K = stiffness(w, grid, periodic)
    pv = p.ravel()
    rhs = vol * float(pv @ (K @ pv))
    return lhs, rhs


def rayleigh(w, f, u: GridField, psi: GridField, periodic=(), normalization: str | None = None) -> float:
    """Quotient (rhs - lhs) / int lambda psi^2 (or / int psi^2 for the l2 normalization)."""
    lhs, rhs = quadratic_form(w, f, u, psi, periodic)
    _, lam = w.on_grid(u.grid)
    mask = free_mask(u.grid, periodic)
    norm = normalization or ("lambda" if np.all(np.broadcast_to(lam, u.grid.shape)[mask] > 0) else "l2")
    weight = lam if norm == "lambda" else 1.0
    den = _cell_volume(u.grid) * float(np.sum(weight * psi.values ** 2))
    return (rhs - lhs) / den


def min_eigenpair(w, f, u: GridField, periodic=(), tol: float = 1e-11, test_fields=()) -> StabilityReport:
    """Smallest mu in -div(gamma grad psi) - lambda f'(u) psi = mu m psi, psi = 0 on the boundary.

    ``m = lambda`` when lambda > 0 at every free node, otherwise ``m = 1``.
    Shifted inverse iteration with a Gershgorin lower bound as shift and CG
    inner solves.
    """
    grid = u.grid
    mask = free_mask(grid, periodic)
    K = stiffness(w, grid, periodic)
    Kff, _, fi, _ = split(K, mask)
    _, lam = w.on_grid(grid)
    lam_f = np.broadcast_to(lam, grid.shape).ravel()[fi]
    fp = (np.asarray(f.df(u.values), dtype=float) * np.ones(grid.shape)).ravel()[fi]
    A = (Kff - sp.diags(lam_f * fp)).tocsr()
    if np.all(lam_f > 0):
        norm, m = "lambda", lam_f
    else:
        norm, m = "l2", np.ones_like(lam_f)
    s = 1.0 / np.sqrt(m)
    B = sp.diags(s) @ A @ sp.diags(s)
    B = B.tocsr()
    diag = B.diagonal()
    off = np.asarray(abs(B).sum(axis=1)).ravel() - np.abs(diag)
    shift = float(np.min(diag - off))
    shift -= 1e-3 * (1.0 + abs(shift))
    C = (B - shift * sp.identity(B.shape[0], format="csr")).tocsr()

    x = np.ones(B.shape[0]) / np.sqrt(B.shape[0])
    mu_old = np.inf
    converged = False
    it = 0
    res = np.inf
    mu = float(x @ (B @ x))
    while it < MAX_ITER:
        it += 1
        y = pcg(C, x, x0=x / max(mu - shift, 1e-300), rtol=1e-13).x
        x = y / np.linalg.norm(y)
        Bx = B @ x
        mu = float(x @ Bx)
        res = float(np.linalg.norm(Bx - mu * x))
        if res <= tol * (1.0 + abs(mu)) or (abs(mu - mu_old) <= 1e-15 * (1 + abs(mu)) and res <= 1e-8):
            converged = True
            break
        mu_old = mu
    psi = s * x
    vol = _cell_volume(grid)
    psi /= np.sqrt(vol * float(np.sum(m * psi * psi)))
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    full = np.zeros(grid.size)
    full[fi] = psi
    ef = GridField(grid, full.reshape(grid.shape))
    positive = bool(np.all(psi > -1e-10 * np.max(np.abs(psi))))
    forms = []
    for t in test_fields:
        lhs, rhs = quadratic_form(w, f, u, t, periodic)
        forms.append({"lhs": lhs, "rhs": rhs, "stable": lhs <= rhs})
    return StabilityReport(mu, ef, it, converged, not converged and it >= MAX_ITER, positive, norm,
                           shift, res, forms)


@dataclass
class Certificate:
    verdict: str  # "certified" | "not-certified"
    min_dn_u: float
    linearized_residual: float
    threshold: float
    violating_node: list | None = None
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "min_dn_u": self.min_dn_u,
                "linearized_residual": self.linearized_residual, "threshold": self.threshold,
                "violating_node": self.violating_node, "reason": self.reason}


def pointwise_certificate(w, f, u: GridField, tol: float | None = None, periodic=()) -> Certificate:
    """Check that v = D_n u is positive and solves the x_n-differenced equation.

    D_n is the central difference along x_n.  Because gamma and lambda do not
    depend on x_n, differencing the discrete equation gives
    div(gamma grad v) + lambda D_n f(u) = D_n(residual), where D_n f(u) is
    f' at the chord slope times v.  That residual must stay below 10 tol;
    ``tol=None`` uses the field's own max residual.
    """
    from .solver import residual

    grid = u.grid
    if grid.N[-1] < 5:
        raise ValueError("need at least 5 nodes along x_n")
    vals = u.values
    h = grid.h[-1]
    v = np.zeros(grid.shape)
    v[..., 1:-1] = (vals[..., 2:] - vals[..., :-2]) / (2 * h)
    fu = np.asarray(f(vals), dtype=float) * np.ones(grid.shape)
    dnf = np.zeros(grid.shape)
    dnf[..., 1:-1] = (fu[..., 2:] - fu[..., :-2]) / (2 * h)
    _, lam = w.on_grid(grid)
    lin = weighted_div(w, GridField(grid, v), periodic).values + lam * dnf

    mask = free_mask(grid, periodic)
    mask[..., 1] = False
    mask[..., -2] = False
    inner = free_mask(grid, periodic)
    if tol is None:
        tol = float(np.max(np.abs(residual(w, f, u, periodic).values)))
    thr = 10.0 * tol
    vmin_idx = np.unravel_index(np.argmin(np.where(inner, v, np.inf)), grid.shape)
    vmin = float(v[vmin_idx])
    lin_res = float(np.max(np.abs(lin[mask]))) if mask.any() else 0.0

    def node(idx):
        return [float(grid.axes[k][i]) for k, i in enumerate(idx)]

    if not vmin > 0:
        return Certificate("not-certified", vmin, lin_res, thr, node(vmin_idx), "D_n u is not positive")
    if lin_res > thr:
        bad = np.unravel_index(np.argmax(np.where(mask, np.abs(lin), -1.0)), grid.shape)
        return Certificate("not-certified", vmin, lin_res, thr, node(bad), "linearized residual too large")
    return Certificate("certified", vmin, lin_res, thr)
