"""Numerical laboratory for sup-norms of sparse homogeneous polynomials,
commuting contraction tuples built from block designs, and lower bounds for
the associated von Neumann-type inequality constants."""

__version__ = "0.1.0"
