"""Conforming triangulations of labeled polygons and uniform red refinement."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EarClippingFailed
from .geometry import PolygonDomain, is_convex


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangle mesh.

    ``boundary_edges[i]`` is a node pair lying on polygon segment
    ``boundary_segment[i]``.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_segment: np.ndarray
    level: int = 0

    def __post_init__(self):
        for arr in (self.nodes, self.triangles, self.boundary_edges, self.boundary_segment):
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted node pairs, in first-seen order."""
        return _unique_edges(self.triangles)[0]

    def diameters(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        lengths = [np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1) for i in range(3)]
        return np.max(lengths, axis=0)

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_edges)


def _unique_edges(triangles: np.ndarray):
    """Return ``(edges, tri_edge)``; ``tri_edge[t, i]`` indexes the edge from
    local vertex ``i`` to ``i + 1`` of triangle ``t``."""
    index: dict[tuple[int, int], int] = {}
    edges = []
    tri_edge = np.empty((len(triangles), 3), dtype=np.int64)
    for t, tri in enumerate(triangles.tolist()):
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            key = (a, b) if a < b else (b, a)
            e = index.get(key)
            if e is None:
                e = index[key] = len(edges)
                edges.append(key)
            tri_edge[t, i] = e
    return np.array(edges, dtype=np.int64).reshape(-1, 2), tri_edge


def _point_in_triangle(p, a, b, c, eps) -> bool:
    """Closed containment test for a counterclockwise triangle."""
    d1 = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    d2 = (c[0] - b[0]) * (p[1] - b[1]) - (c[1] - b[1]) * (p[0] - b[0])
    d3 = (a[0] - c[0]) * (p[1] - c[1]) - (a[1] - c[1]) * (p[0] - c[0])
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


def ear_clip(points) -> list[tuple[int, int, int]]:
    """Ear clipping of a simple counterclockwise polygon.

    Always clips the ear whose apex has the smallest remaining index.
    Apexes with a straight angle are never ears.
    """
    pts = [tuple(p) for p in points]
    scale = max(max(abs(c) for c in p) for p in pts) or 1.0
    eps = 1e-13 * scale * scale
    remaining = list(range(len(pts)))
    tris = []
    while len(remaining) > 3:
        m = len(remaining)
        for pos in range(m):
            ia, ib, ic = remaining[pos - 1], remaining[pos], remaining[(pos + 1) % m]
            a, b, c = pts[ia], pts[ib], pts[ic]
            turn = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if turn <= eps:
                continue
            if any(
                _point_in_triangle(pts[j], a, b, c, eps)
                for j in remaining
                if j not in (ia, ib, ic)
            ):
                continue
            tris.append((ia, ib, ic))
            del remaining[pos]
            break
        else:
            raise EarClippingFailed(f"no ear found among {m} remaining vertices")
    a, b, c = (pts[i] for i in remaining)
    if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) <= eps:
        raise EarClippingFailed("final triangle is degenerate")
    tris.append(tuple(remaining))
    return tris


def _area_centroid(p: np.ndarray) -> np.ndarray:
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    area = 0.5 * cross.sum()
    cx = np.sum((p[:, 0] + q[:, 0]) * cross) / (6 * area)
    cy = np.sum((p[:, 1] + q[:, 1]) * cross) / (6 * area)
    return np.array([cx, cy])


def triangulate(domain: PolygonDomain) -> Mesh:
    """Level-0 mesh of ``domain``.

    Triangles use the polygon itself; convex polygons with more than three
    vertices get a fan around the area centroid, all others ear clipping.
    """
    p = domain.points()
    n = len(p)
    if n == 3:
        nodes = p.copy()
        tris = np.array([[0, 1, 2]])
    elif is_convex(domain):
        nodes = np.vstack([p, _area_centroid(p)])
        tris = np.array([[i, (i + 1) % n, n] for i in range(n)])
    else:
        nodes = p.copy()
        tris = np.array(ear_clip(p))
    bedges = np.array([[i, (i + 1) % n] for i in range(n)], dtype=np.int64)
    return Mesh(nodes, tris.astype(np.int64), bedges, np.arange(n, dtype=np.int64), 0)


def refine(mesh: Mesh) -> Mesh:
    """Red refinement: split every triangle into four through its edge midpoints."""
    edges, tri_edge = _unique_edges(mesh.triangles)
    n = mesh.n_nodes
    mids = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    nodes = np.vstack([mesh.nodes, mids])
    t = mesh.triangles
    m = tri_edge + n  # m[:, i] is the midpoint of edge (i, i+1)
    children = np.stack(
        [
            np.column_stack([t[:, 0], m[:, 0], m[:, 2]]),
            np.column_stack([m[:, 0], t[:, 1], m[:, 1]]),
            np.column_stack([m[:, 2], m[:, 1], t[:, 2]]),
            np.column_stack([m[:, 0], m[:, 1], m[:, 2]]),
        ],
        axis=1,
    ).reshape(-1, 3)

    edge_id = {tuple(e): k for k, e in enumerate(edges.tolist())}
    bedges = []
    bseg = []
    for (a, b), seg in zip(mesh.boundary_edges.tolist(), mesh.boundary_segment.tolist()):
        mid = n + edge_id[(a, b) if a < b else (b, a)]
        bedges += [(a, mid), (mid, b)]
        bseg += [seg, seg]
    return Mesh(
        nodes,
        children,
        np.array(bedges, dtype=np.int64),
        np.array(bseg, dtype=np.int64),
        mesh.level + 1,
    )


@lru_cache(maxsize=64)
def _cached_level(domain_vertices, level: int, labels) -> Mesh:
    domain = PolygonDomain(domain_vertices, labels)
    if level == 0:
        return triangulate(domain)
    return refine(_cached_level(domain_vertices, level - 1, labels))


def mesh_hierarchy(domain: PolygonDomain, levels: int) -> list[Mesh]:
    """Meshes at refinement levels ``0 .. levels - 1``.

    Cached by vertex list, so spectra of different labelings of one polygon
    share the identical hierarchy.
    """
    # labels do not influence the mesh; key on a neutral labeling
    neutral = ("D",) * domain.n_segments
    return [_cached_level(domain.vertices, lvl, neutral) for lvl in range(levels)]


def write_mesh(mesh: Mesh, path, labels=None) -> None:
    """Plain-text dump: counts, node coordinates, triangles, labeled boundary edges."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_nodes} {mesh.n_triangles} {len(mesh.boundary_edges)}\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        for (a, b), seg in zip(mesh.boundary_edges, mesh.boundary_segment):
            tag = labels[seg] if labels is not None else ""
            fh.write(f"{a} {b} {seg} {tag}".rstrip() + "\n")
