"""Independent reference values for the test suite.

Nothing here imports the package's numerical routines: profiles come from
mpmath and sympy, spectra from a dense tridiagonal eigensolver, radial
integrals from mpmath's adaptive quadrature.  The package is only used to
parse expressions so ``RadialProfile`` can be compared with ``exprlang.diff``.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
import sympy as sp
from scipy.linalg import eigh_tridiagonal

mpmath.mp.dps = 40

DENSE_MAX_N = 1001


def tanh_profile(x: float) -> float:
    """tanh(x / sqrt 2) evaluated in 40-digit arithmetic."""
    return float(mpmath.tanh(mpmath.mpf(x) / mpmath.sqrt(2)))


def tanh_ode_residual(x: float) -> float:
    """|-w'' - w + w^3| at x for w = tanh(x / sqrt 2), differentiated symbolically."""
    t = sp.Symbol("t")
    w = sp.tanh(t / sp.sqrt(2))
    res = -sp.diff(w, t, 2) - w + w ** 3
    return abs(float(res.subs(t, sp.Float(x, 40)).evalf(40)))


def profile_energy() -> float:
    """int (1/2 w'^2 + (1 - w^2)^2 / 4) over R for the tanh profile: 2 sqrt 2 / 3."""
    def dens(t):
        w = mpmath.tanh(t / mpmath.sqrt(2))
        return (1 - w * w) ** 2 / 4 + (1 - w * w) ** 2 / 4  # w' = (1 - w^2) / sqrt 2

    return float(mpmath.quad(dens, [-mpmath.inf, 0, mpmath.inf]))


def dense_eigen_1d(potential, a: float, b: float, N: int) -> np.ndarray:
    """All eigenvalues of -d^2/dx^2 + V on (a, b), Dirichlet, N nodes including the ends.

    ``potential`` is a callable of the interior node coordinates (or a constant).
    """
    if N > DENSE_MAX_N:
        raise ValueError(f"dense oracle limited to N <= {DENSE_MAX_N}")
    if N < 3:
        raise ValueError("need at least one interior node")
    x = np.linspace(a, b, N)[1:-1]
    h = (b - a) / (N - 1)
    V = np.broadcast_to(np.asarray(potential(x) if callable(potential) else potential, dtype=float), x.shape)
    diag = 2.0 / h ** 2 + V
    off = np.full(x.size - 1, -1.0 / h ** 2)
    return eigh_tridiagonal(diag, off, eigvals_only=True)


def allen_cahn_potential(x: np.ndarray) -> np.ndarray:
    """-f'(w) = 3 w^2 - 1 at the tanh profile."""
    w = np.tanh(x / math.sqrt(2))
    return 3 * w * w - 1


class RadialProfile:
    """p(r) as a sympy expression, with symbolic first and second derivatives."""

    def __init__(self, source: str, n: int):
        self.r = sp.Symbol("r", nonnegative=True)
        self.source = source
        self.expr = sp.sympify(source.replace("^", "**"), locals={"r": self.r})
        self.n = n
        self.d1 = sp.diff(self.expr, self.r)
        self.d2 = sp.diff(self.d1, self.r)
        self._f = sp.lambdify(self.r, self.expr, "mpmath")

    def __call__(self, r):
        return self._f(r)

    def derivative(self, r: float, order: int = 1) -> float:
        e = self.d1 if order == 1 else self.d2
        return float(e.subs(self.r, sp.Float(r, 40)).evalf(30))


def radial_quadrature(p: RadialProfile, R: float, R0: float = 0.0, breakpoints=()) -> float:
    """int_{R0}^{R} r^(n-1) p(r) dr by adaptive mpmath quadrature (no sphere area)."""
    pts = [mpmath.mpf(R0)] + [mpmath.mpf(b) for b in breakpoints if R0 < b < R] + [mpmath.mpf(R)]
    return float(mpmath.quad(lambda r: r ** (p.n - 1) * p(r), pts))


def sphere_area(m: int) -> float:
    """|S^(m-1)| from the Gamma function, in 40-digit arithmetic."""
    return float(2 * mpmath.pi ** (mpmath.mpf(m) / 2) / mpmath.gamma(mpmath.mpf(m) / 2))
