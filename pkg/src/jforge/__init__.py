"""Affine Jacobi structures, Lie algebroids and their correspondences in exact arithmetic."""

__version__ = "0.1.0"
