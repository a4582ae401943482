"""Precision tracking for p-adic linear algebra."""

from .errors import *  # noqa: F401,F403
from .padic import INF, PAdic, from_rational
from .linalg import PMatrix, lu_decompose, row_reduce, smith_decompose
from .lattice import Lattice, lattice_from_generators
from .polygons import GrowthFunction, Polygon
from .grassmann import Subspace

__version__ = "0.1.0"

__all__ = ["INF", "PAdic", "from_rational", "PMatrix", "lu_decompose", "row_reduce",
           "smith_decompose", "Lattice", "lattice_from_generators", "GrowthFunction",
           "Polygon", "Subspace"]
