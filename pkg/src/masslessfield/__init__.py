"""Numerical toolkit for the quantum massless scalar field in 1+1 dimensions."""

__version__ = "0.1.0"
