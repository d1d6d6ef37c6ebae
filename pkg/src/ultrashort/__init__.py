"""Bound-state bounds for ultra-short 1D potentials, with exact and
finite-difference reference solvers."""

__version__ = "0.1.0"
