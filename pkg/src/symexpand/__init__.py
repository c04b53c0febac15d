"""Exact symbolic expansion of orientation-dependent interaction kernels.

The package works with symmetric traceless Cartesian tensors, polynomials in
rotation-matrix entries integrated exactly against the Haar measure, and the
term families that span rotation-invariant pair, triple and quadruple
interaction kernels.
"""

__version__ = "0.1.0"
