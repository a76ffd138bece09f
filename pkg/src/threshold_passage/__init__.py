"""Bound-state survival in a trap brought quadratically near the continuum threshold."""

__version__ = "0.1.0"
