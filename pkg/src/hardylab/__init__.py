"""Numerical laboratory for the two-weight Hardy inequality."""

__version__ = "0.1.0"
