"""Jacobi-Galerkin spectral solver for fractional Sturm-Liouville eigenproblems."""

__version__ = "0.1.0"
