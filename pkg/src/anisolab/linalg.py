"""Sparse assembly of -div(gamma grad .) and a Jacobi-preconditioned CG."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import Grid, half_gamma


class Breakdown(ArithmeticError):
    """CG met a direction of non-positive curvature: the matrix is not positive definite."""


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    converged: bool
    relres: float


def pcg(A, b: np.ndarray, x0: np.ndarray | None = None, rtol: float = 1e-10,
        maxiter: int | None = None, diag: np.ndarray | None = None) -> CGResult:
    """Preconditioned CG for symmetric ``A``; raises :class:`Breakdown` on p'Ap <= 0."""
    n = b.shape[0]
    maxiter = maxiter or 10 * n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    inv = 1.0 / (A.diagonal() if diag is None else diag)
    if not np.all(np.isfinite(inv)) or np.any(inv <= 0):
        inv = np.ones(n)
    r = b - A @ x if x0 is not None else b.copy()
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return CGResult(np.zeros(n), 0, True, 0.0)
    z = inv * r
    p = z.copy()
    rz = float(r @ z)
    k = 0
    res = float(np.linalg.norm(r))
    while res > rtol * nb and k < maxiter:
        Ap = A @ p
        pAp = float(p @ Ap)
        if not pAp > 0.0:
            raise Breakdown(f"p'Ap = {pAp:.3e} at CG iteration {k}")
        a = rz / pAp
        x += a * p
        r -= a * Ap
        z = inv * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        k += 1
        res = float(np.linalg.norm(r))
    return CGResult(x, k, res <= rtol * nb, res / nb)


def stiffness(w, grid: Grid, periodic=()) -> sp.csr_matrix:
    """Edge-assembled matrix with (K u)_p = -div(gamma grad u)_p at interior nodes.

    ``u' K u`` is the edge sum of gamma_half (u_q - u_p)^2 / h^2, so K is
    symmetric positive semidefinite.
    """
    gamma, _ = w.on_grid(grid)
    idx = np.arange(grid.size).reshape(grid.shape)
    rows, cols, vals = [], [], []
    for k in range(grid.n):
        per = k in periodic
        gh = np.broadcast_to(half_gamma(gamma, k, per), _edge_shape(grid, k, per)) / grid.h[k] ** 2
        if per:
            p, q = idx, np.roll(idx, -1, k)
        else:
            lo = [slice(None)] * grid.n
            hi = [slice(None)] * grid.n
            lo[k] = slice(None, -1)
            hi[k] = slice(1, None)
            p, q = idx[tuple(lo)], idx[tuple(hi)]
        p, q, c = p.ravel(), q.ravel(), np.ascontiguousarray(gh).ravel()
        rows += [p, q, p, q]
        cols += [p, q, q, p]
        vals += [c, c, -c, -c]
    K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(grid.size, grid.size))
    return K.tocsr()


def _edge_shape(grid: Grid, k: int, periodic: bool) -> tuple:
    shape = list(grid.shape)
    if not periodic:
        shape[k] -= 1
    return tuple(shape)


def free_mask(grid: Grid, periodic=()) -> np.ndarray:
    """Nodes not on a Dirichlet face."""
    mask = np.ones(grid.shape, dtype=bool)
    for k in range(grid.n):
        if k in periodic:
            continue
        sl = [slice(None)] * grid.n
        sl[k] = 0
        mask[tuple(sl)] = False
        sl[k] = -1
        mask[tuple(sl)] = False
    return mask


def split(K: sp.csr_matrix, mask: np.ndarray):
    """Blocks (K_ff, K_fb) for free and fixed nodes."""
    f = np.flatnonzero(mask.ravel())
    b = np.flatnonzero(~mask.ravel())
    Kf = K[f]
    return Kf[:, f].tocsr(), Kf[:, b].tocsr(), f, b
