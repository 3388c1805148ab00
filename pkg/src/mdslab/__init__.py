"""Numerics for the sixteen quadratic double Dirichlet series Z(s, w; psi, psi2)."""

__version__ = "0.1.0"
