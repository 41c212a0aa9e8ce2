"""Finite measured simplicial models of foliated surfaces.

Obstruction cocycles of direction fields, Poincare-Hopf indices, cancellation
of top cocycles along typed dual paths, and weighted Betti numbers.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .cochain import Chain, Cochain, boundary, coboundary, fundamental_cycle, kronecker, l1_norm
from .errors import MeasfolError
from .measure import MeasuredComplex, TransverseMeasure, chi_mu, mu, subdivide
from .simplicial import LeafComplex, OrientedSimplex, SurfaceGeometry, barycentric_subdivision, build_complex

__all__ = [
    "Chain", "Cochain", "LeafComplex", "MeasfolError", "MeasuredComplex", "OrientedSimplex",
    "SurfaceGeometry", "TransverseMeasure", "barycentric_subdivision", "boundary", "build_complex",
    "chi_mu", "coboundary", "fundamental_cycle", "kronecker", "l1_norm", "mu", "subdivide",
]
