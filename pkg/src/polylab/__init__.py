"""Verification laboratory for undirected first-passage percolation on the hypercube.

Four engines: exact walk combinatorics (pathcount), the closed-form K-slab
geometry of optimal paths (geometry), probability kernels for overlapping
energy sums (stochastics) and a seeded ground-state simulator (simulator);
the cli module fronts them all.
"""

from .constants import E, L, SQRT2

__all__ = ["E", "L", "SQRT2"]
__version__ = "0.1.0"
