"""Numerics for weighted semilinear elliptic equations -div(gamma grad u) = lambda f(u)."""

__version__ = "0.1.0"
