"""Numerical toolkit for general-kernel nonlocal gradients."""

__version__ = "0.1.0"
