"""Spectral toolkit for zonal operators and sharp inequalities on S^(2n+1)."""
__version__ = "0.1.0"
