"""Interpolant and definition existence for Q1S5, Q1K and S5 x ALC^u."""

__version__ = "0.1.0"
