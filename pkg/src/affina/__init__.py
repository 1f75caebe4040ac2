"""Finite-algebra tools for extensions realizing affine datum."""

__version__ = "0.1.0"
