"""Laplacian eigenvalues on polygons and boxes under Dirichlet, Neumann and
mixed boundary conditions, with uncertainty-aware inequality checks."""

from .analytic import axis_factor, separable_spectrum
from .assembly import assemble
from .eigensolve import smallest_eigs
from .geometry import (
    BoxDomain,
    PolygonDomain,
    box,
    build_polygon,
    is_convex,
    refine_partition,
    tangent_space_dim,
)
from .inequalities import (
    Spectrum,
    analytic_spectrum,
    check_chain,
    check_dirichlet_mixed,
    check_levine_weinberger,
    check_monotonicity,
    check_neumann_mixed,
    fem_spectrum,
    richardson,
)
from .meshing import Mesh, refine, triangulate

__version__ = "0.1.0"

__all__ = [
    "BoxDomain",
    "Mesh",
    "PolygonDomain",
    "Spectrum",
    "analytic_spectrum",
    "assemble",
    "axis_factor",
    "box",
    "build_polygon",
    "check_chain",
    "check_dirichlet_mixed",
    "check_levine_weinberger",
    "check_monotonicity",
    "check_neumann_mixed",
    "fem_spectrum",
    "is_convex",
    "refine",
    "refine_partition",
    "richardson",
    "separable_spectrum",
    "smallest_eigs",
    "tangent_space_dim",
    "triangulate",
]
