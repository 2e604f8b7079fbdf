"""Numerical laboratory for low-rank perturbations of random matrix polynomials."""

__version__ = "0.1.0"
