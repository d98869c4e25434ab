"""Polygonal and box domains with Dirichlet/Neumann boundary labels.

Boundary segments are relatively open; vertices belong to neither part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    ClockwiseOrDegenerate,
    DomainError,
    EmptyPart,
    HypothesisViolated,
    LabelCountMismatch,
    NothingToShrink,
    SelfIntersecting,
)

DIRICHLET = "D"
NEUMANN = "N"
LABELS = (DIRICHLET, NEUMANN)
AXES = ("x", "y", "z")

RANK_TOL = 1e-12
CONVEX_TOL = 1e-12


def _check_label(label):
    if label not in LABELS:
        raise DomainError(f"boundary label must be 'D' or 'N', got {label!r}")
    return label


def _other(label):
    return NEUMANN if label == DIRICHLET else DIRICHLET


@dataclass(frozen=True)
class PolygonDomain:
    """Simple counterclockwise polygon; segment ``i`` joins vertex ``i`` to ``i + 1``."""

    vertices: tuple[tuple[float, float], ...]
    labels: tuple[str, ...]

    @property
    def dim(self) -> int:
        return 2

    @property
    def n_segments(self) -> int:
        return len(self.vertices)

    @property
    def segments(self) -> list[tuple[int, int, str]]:
        n = len(self.vertices)
        return [(i, (i + 1) % n, self.labels[i]) for i in range(n)]

    def points(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def edge_vectors(self) -> np.ndarray:
        p = self.points()
        return np.roll(p, -1, axis=0) - p

    def segment_lengths(self) -> np.ndarray:
        return np.hypot(*self.edge_vectors().T)

    def normals(self) -> np.ndarray:
        """Outward unit normal per segment (rows)."""
        e = self.edge_vectors()
        lengths = np.hypot(e[:, 0], e[:, 1])
        # counterclockwise orientation: outward normal is the edge rotated clockwise
        return np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]

    def area(self) -> float:
        return _signed_area(self.points())

    def boundary_length(self) -> float:
        return float(self.segment_lengths().sum())

    def part_length(self, part: str) -> float:
        lengths = self.segment_lengths()
        return float(sum(lengths[i] for i, lab in enumerate(self.labels) if lab == part))

    def has_part(self, part: str) -> bool:
        return part in self.labels

    def with_labels(self, labels: Sequence[str]) -> "PolygonDomain":
        return build_polygon(self.vertices, labels)

    @property
    def geometry_key(self):
        return ("polygon", self.vertices)

    def to_dict(self) -> dict:
        return {
            "type": "polygon",
            "vertices": [list(v) for v in self.vertices],
            "labels": list(self.labels),
        }


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``[0, L_1] x ... x [0, L_d]``.

    ``faces[a]`` holds the labels of the faces ``x_a = 0`` and ``x_a = L_a``.
    """

    lengths: tuple[float, ...]
    faces: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if len(self.lengths) not in (2, 3):
            raise DomainError("box dimension must be 2 or 3")
        if len(self.faces) != len(self.lengths):
            raise LabelCountMismatch(
                f"{len(self.lengths)} axes but {len(self.faces)} face label pairs"
            )
        for length in self.lengths:
            if not (length > 0 and math.isfinite(length)):
                raise ClockwiseOrDegenerate(f"side length must be positive, got {length}")
        for pair in self.faces:
            if len(pair) != 2:
                raise LabelCountMismatch("each axis needs exactly two face labels")
            for lab in pair:
                _check_label(lab)

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for pair in self.faces for lab in pair)

    def has_part(self, part: str) -> bool:
        return part in self.labels

    def all_pi(self) -> bool:
        return all(length == math.pi for length in self.lengths)

    def with_faces(self, faces) -> "BoxDomain":
        return BoxDomain(self.lengths, tuple(tuple(p) for p in faces))

    @property
    def geometry_key(self):
        return ("box", self.lengths)

    def to_dict(self) -> dict:
        return {
            "type": "box",
            "lengths": list(self.lengths),
            "faces": {AXES[a]: list(pair) for a, pair in enumerate(self.faces)},
        }


Domain = Union[PolygonDomain, BoxDomain]


@dataclass(frozen=True)
class TangentSpaceInfo:
    part: str
    normals: tuple[tuple[float, ...], ...]
    dim: int


def box(d: int = 2, faces=None, lengths=None) -> BoxDomain:
    """Convenience constructor; defaults to the pure Dirichlet ``[0, pi]^d``.

    ``faces`` is a sequence of label pairs or a mapping ``{"x": "DN", ...}``.
    """
    if lengths is None:
        lengths = (math.pi,) * d
    if faces is None:
        faces = ((DIRICHLET, DIRICHLET),) * d
    elif isinstance(faces, dict):
        faces = [faces.get(a, ()) for a in AXES[:d]]
    return BoxDomain(tuple(float(x) for x in lengths), tuple(tuple(p) for p in faces))


def _signed_area(p: np.ndarray) -> float:
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p, eps) -> bool:
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def segments_intersect(a, b, c, d, eps: float = 0.0) -> bool:
    """Closed segments ``ab`` and ``cd`` share at least one point."""
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > eps and o2 < -eps) or (o1 < -eps and o2 > eps)) and (
        (o3 > eps and o4 < -eps) or (o3 < -eps and o4 > eps)
    ):
        return True
    if abs(o1) <= eps and _on_segment(a, b, c, eps):
        return True
    if abs(o2) <= eps and _on_segment(a, b, d, eps):
        return True
    if abs(o3) <= eps and _on_segment(c, d, a, eps):
        return True
    if abs(o4) <= eps and _on_segment(c, d, b, eps):
        return True
    return False


def build_polygon(points, labels) -> PolygonDomain:
    """Validate a labeled polygon.

    Raises
    ------
    LabelCountMismatch
        ``len(labels) != len(points)``.
    ClockwiseOrDegenerate
        Zero-length edge, or nonpositive signed area.
    SelfIntersecting
        Two boundary segments meet away from their shared vertex.
    """
    pts = [tuple(float(c) for c in p) for p in points]
    labels = [_check_label(lab) for lab in labels]
    n = len(pts)
    if n < 3:
        raise DomainError("a polygon needs at least 3 vertices")
    if any(len(p) != 2 for p in pts):
        raise DomainError("polygon vertices must be 2D points")
    if len(labels) != n:
        raise LabelCountMismatch(f"{n} edges but {len(labels)} labels")
    arr = np.asarray(pts)
    scale = float(np.max(np.abs(arr))) or 1.0
    eps = 1e-13 * scale * scale
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        if math.hypot(b[0] - a[0], b[1] - a[1]) <= 1e-14 * scale:
            raise ClockwiseOrDegenerate(f"edge {i} has zero length")
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = pts[j], pts[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges may only share their common vertex
                shared = b if j == i + 1 else a
                other_end = d if j == i + 1 else c
                far = a if j == i + 1 else b
                if abs(_orient(far, shared, other_end)) <= eps:
                    u = (shared[0] - far[0], shared[1] - far[1])
                    w = (other_end[0] - shared[0], other_end[1] - shared[1])
                    if u[0] * w[0] + u[1] * w[1] < 0:
                        raise SelfIntersecting(f"edges {i} and {j} fold back onto each other")
                continue
            if segments_intersect(a, b, c, d, eps):
                raise SelfIntersecting(f"edges {i} and {j} intersect")
    if _signed_area(arr) <= 0:
        raise ClockwiseOrDegenerate("vertices must be ordered counterclockwise")
    return PolygonDomain(tuple(pts), tuple(labels))


def validate_mixed(domain: Domain) -> None:
    """Both boundary parts must be present for a mixed problem."""
    if not domain.has_part(DIRICHLET):
        raise HypothesisViolated("mixed problem needs at least one Dirichlet segment")
    if not domain.has_part(NEUMANN):
        raise HypothesisViolated("mixed problem needs at least one Neumann segment")


def _distinct_rows(rows: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    kept: list[np.ndarray] = []
    for r in rows:
        if not any(np.max(np.abs(r - k)) <= tol for k in kept):
            kept.append(r)
    return np.array(kept)


def tangent_space_dim(domain: Domain, part: str) -> TangentSpaceInfo:
    """Dimension of the space of vectors tangential to every face of ``part``.

    Equal to ``d`` minus the rank of the outward normals of the part.
    """
    _check_label(part)
    if not domain.has_part(part):
        raise EmptyPart(f"boundary part {part!r} is empty")
    if isinstance(domain, BoxDomain):
        normals = []
        axes = set()
        for a, pair in enumerate(domain.faces):
            for side, lab in zip((-1, 1), pair):
                if lab == part:
                    v = [0] * domain.dim
                    v[a] = side
                    normals.append(tuple(v))
                    axes.add(a)
        return TangentSpaceInfo(part, tuple(normals), domain.dim - len(axes))
    nrm = domain.normals()[[i for i, lab in enumerate(domain.labels) if lab == part]]
    nrm = _distinct_rows(nrm)
    sv = np.linalg.svd(nrm, compute_uv=False)
    rank = int(np.sum(sv > RANK_TOL))
    return TangentSpaceInfo(part, tuple(tuple(map(float, r)) for r in nrm), 2 - rank)


def is_convex(domain: Domain) -> bool:
    if isinstance(domain, BoxDomain):
        return True
    e = domain.edge_vectors()
    lengths = np.hypot(e[:, 0], e[:, 1])
    u = e / lengths[:, None]
    cross = u[:, 0] * np.roll(u[:, 1], -1) - u[:, 1] * np.roll(u[:, 0], -1)
    return bool(np.all(cross >= -CONVEX_TOL))


def refine_partition(domain: PolygonDomain, part: str = DIRICHLET, shrink: float = 0.5) -> PolygonDomain:
    """Shrink ``part`` by splitting its first segment.

    The segment is split at fraction ``shrink`` of its length; the head keeps
    its label and the tail takes the other one.
    """
    _check_label(part)
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie strictly between 0 and 1")
    try:
        i = domain.labels.index(part)
    except ValueError:
        raise NothingToShrink(f"no {part!r} segment to shrink") from None
    n = domain.n_segments
    a = np.asarray(domain.vertices[i])
    b = np.asarray(domain.vertices[(i + 1) % n])
    new = tuple(float(c) for c in a + shrink * (b - a))
    vertices = list(domain.vertices[: i + 1]) + [new] + list(domain.vertices[i + 1 :])
    labels = list(domain.labels[:i]) + [part, _other(part)] + list(domain.labels[i + 1 :])
    return build_polygon(vertices, labels)


def split_partition_pair(domain: PolygonDomain, shrink: float = 0.5):
    """Return ``(smaller, larger)`` Dirichlet partitions on the same vertex list.

    ``smaller`` comes from :func:`refine_partition`; ``larger`` keeps the
    original labeling on the refined vertex list so both share one mesh.
    """
    small = refine_partition(domain, DIRICHLET, shrink)
    i = domain.labels.index(DIRICHLET)
    labels = list(small.labels)
    labels[i + 1] = DIRICHLET
    return small, small.with_labels(labels)


def regular_polygon(n: int, radius: float = 1.0, labels=None) -> PolygonDomain:
    """Regular ``n``-gon centered at the origin with one edge parallel to the x-axis."""
    start = -math.pi / 2 - math.pi / n
    pts = [
        (radius * math.cos(start + 2 * math.pi * i / n), radius * math.sin(start + 2 * math.pi * i / n))
        for i in range(n)
    ]
    return build_polygon(pts, labels or [DIRICHLET] * n)


def square(side: float = math.pi, labels=None) -> PolygonDomain:
    """Square ``[0, side]^2``; segment order is bottom, right, top, left."""
    pts = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)]
    return build_polygon(pts, labels or [DIRICHLET] * 4)


def domain_from_dict(data: dict) -> Domain:
    """Parse the domain JSON form (``{"type": "polygon" | "box", ...}``)."""
    kind = data.get("type")
    if kind == "polygon":
        return build_polygon(data["vertices"], data["labels"])
    if kind == "box":
        lengths = data.get("lengths")
        faces = data["faces"]
        d = len(lengths) if lengths is not None else (3 if "z" in faces else 2)
        if lengths is None:
            lengths = [math.pi] * d
        lengths = [math.pi if x == "pi" else x for x in lengths]
        pairs = []
        for a in range(d):
            if AXES[a] not in faces:
                raise LabelCountMismatch(f"missing face labels for axis {AXES[a]!r}")
            pairs.append(tuple(faces[AXES[a]]))
        return BoxDomain(tuple(float(x) for x in lengths), tuple(pairs))
    raise DomainError(f"unknown domain type {kind!r}")
