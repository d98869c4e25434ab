"""P1 stiffness and mass matrices with Dirichlet elimination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateTriangle
from .geometry import DIRICHLET
from .meshing import Mesh

CONSTRAINED = -1

KIND_ALIASES = {
    "d": "dirichlet",
    "dirichlet": "dirichlet",
    "pure-d": "dirichlet",
    "n": "neumann",
    "neumann": "neumann",
    "pure-n": "neumann",
    "mixed": "mixed",
}

_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def normalize_kind(kind: str) -> str:
    try:
        return KIND_ALIASES[kind.lower()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown problem kind {kind!r}") from None


@dataclass(frozen=True, eq=False)
class DofMap:
    """``index[node]`` is the free dof number, or ``CONSTRAINED``."""

    index: np.ndarray
    n_free: int

    def free_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.index != CONSTRAINED)

    def constrained_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.index == CONSTRAINED)

    def expand(self, u: np.ndarray) -> np.ndarray:
        """Nodal vector with zeros at constrained nodes."""
        full = np.zeros(len(self.index), dtype=u.dtype)
        free = self.index != CONSTRAINED
        full[free] = u[self.index[free]]
        return full


def dof_map(mesh: Mesh, kind: str, labels=None) -> DofMap:
    """Constrain every node on the closure of a Dirichlet boundary edge."""
    kind = normalize_kind(kind)
    constrained = np.zeros(mesh.n_nodes, dtype=bool)
    if kind == "dirichlet":
        constrained[mesh.boundary_nodes()] = True
    elif kind == "mixed":
        if labels is None:
            raise ValueError("mixed problems need boundary labels")
        is_d = np.array([lab == DIRICHLET for lab in labels])
        d_edges = mesh.boundary_edges[is_d[mesh.boundary_segment]]
        constrained[d_edges.ravel()] = True
    index = np.full(mesh.n_nodes, CONSTRAINED, dtype=np.int64)
    free = ~constrained
    index[free] = np.arange(int(free.sum()))
    return DofMap(index, int(free.sum()))


def element_matrices(mesh: Mesh):
    """Per-triangle 3x3 stiffness and mass blocks, shape ``(T, 3, 3)``."""
    p = mesh.nodes[mesh.triangles]
    area = mesh.areas()
    total = float(np.abs(area).sum())
    bad = np.flatnonzero(area <= 1e-14 * total)
    if bad.size:
        raise DegenerateTriangle(f"triangle {int(bad[0])} has area {area[bad[0]]:.3e}")
    # rotated opposite edges: grad(lambda_i) = rot(p_{i+2} - p_{i+1}) / (2A)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2 * area[:, None, None])
    stiff = area[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    mass = area[:, None, None] * _MASS_REF
    return stiff, mass


def _scatter(mesh: Mesh, blocks: np.ndarray, dofs: DofMap) -> sp.csr_matrix:
    loc = dofs.index[mesh.triangles]
    rows = np.repeat(loc, 3, axis=1).ravel()
    cols = np.tile(loc, (1, 3)).ravel()
    vals = blocks.reshape(-1)
    keep = (rows != CONSTRAINED) & (cols != CONSTRAINED)
    n = dofs.n_free
    # coo -> csr sums duplicates in a fixed (sorted) order
    mat = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def assemble(mesh: Mesh, kind: str, labels=None):
    """Assemble ``(K, M, dofs)`` for the P1 space on ``mesh``.

    Parameters
    ----------
    mesh : Mesh
        Conforming triangulation.
    kind : {"dirichlet", "neumann", "mixed"}
        Boundary condition; ``"mixed"`` reads the Dirichlet part from
        ``labels`` (one label per polygon segment).

    Returns
    -------
    K, M : scipy.sparse.csr_matrix
        Stiffness and mass restricted to the free dofs.
    dofs : DofMap
    """
    dofs = dof_map(mesh, kind, labels)
    stiff, mass = element_matrices(mesh)
    return _scatter(mesh, stiff, dofs), _scatter(mesh, mass, dofs), dofs


def upper_triplets(mat):
    """``(row, col, value)`` entries with ``row <= col``."""
    coo = sp.triu(sp.csr_matrix(mat)).tocoo()
    order = np.lexsort((coo.col, coo.row))
    return [(int(coo.row[i]), int(coo.col[i]), float(coo.data[i])) for i in order]


def write_matrix(mat, path) -> None:
    """Coordinate text dump of the upper triangle, 17 significant digits."""
    with open(path, "w") as fh:
        for r, c, v in upper_triplets(mat):
            fh.write(f"{r} {c} {v:.17g}\n")
