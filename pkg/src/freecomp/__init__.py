"""Executable free-probability calculus: non-crossing combinatorics, moments of
free products with a semicircular element, exact free-dimension rewriting, and
a random-matrix Monte Carlo oracle."""

__version__ = "0.1.0"
