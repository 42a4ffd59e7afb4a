"""Numerical laboratory for Carleman estimates and unique continuation of polyharmonic equations."""

__version__ = "0.1.0"
