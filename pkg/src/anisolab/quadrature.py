"""Adaptive integrals over balls in R^d, with optional (R^2-|x|^2)^p weights."""
from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn


class QuadratureError(RuntimeError):
    pass


def quad(f: Callable[[float], float], a: float, b: float, *, points=None,
         epsrel: float = 1e-10, epsabs: float = 1e-14, limit: int = 400) -> float:
    """scipy ``quad`` that raises instead of warning when the error estimate is poor."""
    if a == b:
        return 0.0
    kw = {}
    if points is not None:
        pts = [p for p in points if a < p < b]
        if pts:
            kw["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        with np.errstate(all="ignore"):
            val, err = integrate.quad(f, a, b, epsrel=epsrel, epsabs=epsabs, limit=limit, **kw)
    if not (math.isfinite(val) and math.isfinite(err)):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    if err > max(1e-7 * abs(val), 1e3 * epsabs):
        raise QuadratureError(f"quadrature did not converge on [{a}, {b}]: {val} +- {err}")
    return float(val)


def sphere_area(m: int) -> float:
    """Area of the unit sphere S^{m-1} in R^m (m=1 counts the two points +-1)."""
    return 2.0 * math.pi ** (m / 2) / float(gamma_fn(m / 2))


@lru_cache(maxsize=None)
def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _panel_gauss(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, epsrel: float,
                 order: int = 16, max_panels: int = 1 << 14) -> float:
    """Composite Gauss-Legendre on a vectorized integrand, doubling panels until two passes agree."""
    z, wz = _gauss_nodes(order)
    panels = 8
    prev = None
    while True:
        edges = np.linspace(a, b, panels + 1)
        mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
        x = (mid[:, None] + half[:, None] * z[None, :]).ravel()
        val = float(np.sum(np.asarray(f(x), dtype=float).reshape(panels, order) * wz[None, :] * half[:, None]))
        if not math.isfinite(val):
            raise QuadratureError(f"non-finite integral on [{a}, {b}]")
        if prev is not None and abs(val - prev) <= max(epsrel * abs(val), 1e-300):
            return val
        if panels >= max_panels:
            raise QuadratureError(f"panel quadrature did not converge on [{a}, {b}]: {val} vs {prev}")
        prev, panels = val, panels * 2


def ball_integral(fn: Callable[[tuple], float], R: float, d: int, power: float = 0.0,
                  epsrel: float = 1e-10, vectorized: bool = False) -> float:
    """Integral of ``fn(x) * (R^2 - |x|^2)^power`` over the d-ball of radius R.

    Each coordinate is integrated as ``x_k = r sin(theta)`` with ``r`` the radius
    left over by the outer coordinates, which removes the square-root endpoint
    behaviour and makes ``power >= -1/2`` weights bounded.  With
    ``vectorized=True``, ``fn`` accepts a tuple whose last entry is an array and
    the innermost coordinate uses composite Gauss-Legendre instead of scalar calls.
    """
    if R < 0:
        raise ValueError("radius must be non-negative")
    if d == 0:
        return float(fn(())) * (R * R) ** power if power else float(fn(()))
    if R == 0:
        return 0.0

    def level(prefix: tuple, r: float, k: int) -> float:
        if k == d:
            val = float(fn(prefix))
            return val * r ** (2.0 * power) if power else val
        # an inner level already carries one factor of cos from the outer substitution
        tol = epsrel if k == 0 else epsrel * 0.1
        if vectorized and k == d - 1:
            def vec(theta):
                c = np.cos(theta)
                rc = r * c
                vals = np.asarray(fn(prefix + (r * np.sin(theta),)), dtype=float) * np.ones_like(theta)
                return vals * rc ** (2.0 * power + 1.0) if power else vals * rc
            return _panel_gauss(vec, -0.5 * math.pi, 0.5 * math.pi, tol)

        def integrand(theta: float) -> float:
            c = math.cos(theta)
            rc = r * c
            if rc <= 0.0:
                return 0.0
            return level(prefix + (r * math.sin(theta),), rc, k + 1) * rc

        return quad(integrand, -0.5 * math.pi, 0.5 * math.pi, points=(0.0,), epsrel=tol)

    return level((), float(R), 0)
