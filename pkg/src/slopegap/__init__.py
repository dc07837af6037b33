"""Slope-gap statistics on the square torus and lattice surfaces via the BCZ map."""

__version__ = "0.1.0"
