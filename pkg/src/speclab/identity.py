"""Second-derivative integral identity on convex polygons, and its failure on the disk.

For ``u`` vanishing on the boundary of a convex polygon,

    int (d_km u)(d_kj u) dx == int (d_mj u)(d_kk u) dx

for all axis indices. Polynomial test functions and exact quadrature turn the
residual into a round-off-level certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import BoundaryConditionViolated, DegreeOverflow, NotConvex
from .geometry import PolygonDomain, is_convex
from .meshing import triangulate

MAX_DEGREE = 12
DISK = "disk"


class PolynomialField:
    """Bivariate polynomial ``sum c[i, j] x^i y^j`` with exact rational coefficients.

    Float inputs are converted exactly, so derivatives commute exactly.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        clean = {}
        for (i, j), c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                clean[(int(i), int(j))] = c
        self.coeffs = clean

    @classmethod
    def constant(cls, c=1):
        return cls({(0, 0): c})

    @classmethod
    def affine(cls, a, b, c):
        """``a x + b y + c``."""
        return cls({(1, 0): a, (0, 1): b, (0, 0): c})

    @classmethod
    def x(cls):
        return cls({(1, 0): 1})

    @classmethod
    def y(cls):
        return cls({(0, 1): 1})

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=0)

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0) + c
        return PolynomialField(out)

    __radd__ = __add__

    def __neg__(self):
        return PolynomialField({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        out: dict = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return PolynomialField(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = PolynomialField.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, PolynomialField) and self.coeffs == other.coeffs

    def __repr__(self):
        terms = " + ".join(f"{float(c):g}*x^{i}*y^{j}" for (i, j), c in sorted(self.coeffs.items()))
        return f"PolynomialField({terms or '0'})"

    def partial(self, *axes: int) -> "PolynomialField":
        """Partial derivative along 0-based ``axes`` (0 = x, 1 = y)."""
        nx = sum(1 for a in axes if a == 0)
        ny = sum(1 for a in axes if a == 1)
        if nx + ny != len(axes):
            raise ValueError("axes must be 0 or 1")
        out = {}
        for (i, j), c in self.coeffs.items():
            if i < nx or j < ny:
                continue
            out[(i - nx, j - ny)] = c * math.perm(i, nx) * math.perm(j, ny)
        return PolynomialField(out)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast(x, y).shape)
        for (i, j), c in sorted(self.coeffs.items()):
            total = total + float(c) * x**i * y**j
        return total


def _as_poly(p) -> PolynomialField:
    return p if isinstance(p, PolynomialField) else PolynomialField.constant(p)


def side_functionals(domain: PolygonDomain) -> list[PolynomialField]:
    """Affine ``l_i(x) = nu_i . (v_i - x)``: zero on side ``i``, positive inside."""
    out = []
    normals = domain.normals()
    for i, v in enumerate(domain.vertices):
        nx, ny = (float(c) for c in normals[i])
        out.append(PolynomialField.affine(-nx, -ny, nx * v[0] + ny * v[1]))
    return out


def bubble(domain: PolygonDomain, extra: PolynomialField | None = None) -> PolynomialField:
    """``extra`` times the product of all side functionals of a convex polygon."""
    if not is_convex(domain):
        raise NotConvex("bubble functions need a convex polygon")
    extra = PolynomialField.constant(1) if extra is None else _as_poly(extra)
    degree = domain.n_segments + extra.degree
    if degree > MAX_DEGREE:
        raise DegreeOverflow(f"degree {degree} exceeds {MAX_DEGREE}")
    u = extra
    for ell in side_functionals(domain):
        u = u * ell
    return u


# ---------------------------------------------------------------- quadrature


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Collapsed Gauss rule on the reference triangle, exact for ``degree``.

    ``x = s``, ``y = t (1 - s)``; the Jacobian ``1 - s`` adds one degree in ``s``.
    Returns ``(points (n, 2), weights (n,))`` with weights summing to 1/2.
    """
    n = max(1, math.ceil((degree + 2) / 2))
    g, w = np.polynomial.legendre.leggauss(n)
    g = 0.5 * (g + 1)
    w = 0.5 * w
    s, t = np.meshgrid(g, g, indexing="ij")
    ws, wt = np.meshgrid(w, w, indexing="ij")
    x = s.ravel()
    y = (t * (1 - s)).ravel()
    weights = (ws * wt * (1 - s)).ravel()
    return np.column_stack([x, y]), weights


@lru_cache(maxsize=None)
def disk_rule(degree: int):
    """Polar tensor rule on the unit disk, exact for polynomials up to ``degree``.

    Gauss-Legendre in ``r`` for the degree ``degree + 1`` radial factor and
    the uniform rule in the angle, exact for trigonometric degree ``degree``.
    """
    nr = max(1, math.ceil((degree + 2) / 2))
    nt = degree + 2
    g, w = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * (g + 1)
    wr = 0.5 * w * r
    theta = 2 * np.pi * np.arange(nt) / nt
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    weights = np.outer(wr, np.full(nt, 2 * np.pi / nt)).ravel()
    return np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()]), weights


def quadrature_nodes(domain, degree: int):
    """Points and weights integrating degree-``degree`` polynomials exactly over ``domain``."""
    if isinstance(domain, str):
        if domain != DISK:
            raise ValueError(f"unknown curved domain {domain!r}")
        return disk_rule(degree)
    ref, w = triangle_rule(degree)
    mesh = triangulate(domain)
    pts, wts = [], []
    for tri in mesh.triangles:
        a, b, c = mesh.nodes[tri]
        jac = np.column_stack([b - a, c - a])
        det = abs(np.linalg.det(jac))
        pts.append(a + ref @ jac.T)
        wts.append(w * det)
    return np.vstack(pts), np.concatenate(wts)


def integrate(poly: PolynomialField, domain) -> float:
    pts, w = quadrature_nodes(domain, max(poly.degree, 0))
    return float(np.dot(w, poly(pts[:, 0], pts[:, 1])))


def _boundary_samples(domain: PolygonDomain, count: int = 100) -> np.ndarray:
    p = domain.points()
    e = domain.edge_vectors()
    lengths = domain.segment_lengths()
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    s = (np.arange(count) + 0.5) * cum[-1] / count
    seg = np.searchsorted(cum, s, side="right") - 1
    frac = (s - cum[seg]) / lengths[seg]
    return p[seg] + frac[:, None] * e[seg]


def check_boundary(u: PolynomialField, domain: PolygonDomain, count: int = 100) -> float:
    """Relative boundary size of ``u``; raises when it does not vanish."""
    pts, _ = quadrature_nodes(domain, max(2 * u.degree, 1))
    scale = float(np.max(np.abs(u(pts[:, 0], pts[:, 1])))) or 1.0
    b = _boundary_samples(domain, count)
    worst = float(np.max(np.abs(u(b[:, 0], b[:, 1]))))
    if worst >= 1e-10 * scale:
        raise BoundaryConditionViolated(
            f"|u| reaches {worst:.3e} on the boundary (interior scale {scale:.3e})"
        )
    return worst / scale


@dataclass(frozen=True)
class IdentityTerms:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative(self) -> float:
        scale = abs(self.lhs) + abs(self.rhs)
        return abs(self.residual) / scale if scale else abs(self.residual)


def identity_terms(u: PolynomialField, j: int, k: int, m: int, domain: Union[PolygonDomain, str]) -> IdentityTerms:
    """Both sides of the identity; ``j, k, m`` are 1-based axis indices."""
    for idx in (j, k, m):
        if idx not in (1, 2):
            raise ValueError("axis indices must be 1 or 2")
    if not isinstance(domain, str):
        check_boundary(u, domain)
    j0, k0, m0 = j - 1, k - 1, m - 1
    lhs_poly = u.partial(k0, m0) * u.partial(k0, j0)
    rhs_poly = u.partial(m0, j0) * u.partial(k0, k0)
    degree = max(2 * u.degree - 4, 0)
    pts, w = quadrature_nodes(domain, degree)
    x, y = pts[:, 0], pts[:, 1]
    return IdentityTerms(float(np.dot(w, lhs_poly(x, y))), float(np.dot(w, rhs_poly(x, y))))


def identity_residual(u: PolynomialField, j: int, k: int, m: int, domain) -> float:
    """``LHS - RHS`` of the identity for ``u`` on ``domain`` (a polygon or ``"disk"``)."""
    return identity_terms(u, j, k, m, domain).residual


def default_extras() -> list[PolynomialField]:
    x, y = PolynomialField.x(), PolynomialField.y()
    return [
        PolynomialField.constant(1),
        x,
        y + 2,
        1 + x * y,
        x * x - Fraction(1, 2) * y + 3,
    ]


def disk_counterexample() -> PolynomialField:
    """``(1 - x^2 - y^2) x``: vanishes on the unit circle, breaks the identity."""
    x, y = PolynomialField.x(), PolynomialField.y()
    return (1 - x * x - y * y) * x


def identity_table(domain, extras=None):
    """Rows ``(j, k, m, extra_id, lhs, rhs, residual)`` over all index triples."""
    if isinstance(domain, str):
        fields = [disk_counterexample()]
    else:
        fields = [bubble(domain, e) for e in (extras or default_extras())]
    rows = []
    for eid, u in enumerate(fields):
        for j in (1, 2):
            for k in (1, 2):
                for m in (1, 2):
                    t = identity_terms(u, j, k, m, domain)
                    rows.append((j, k, m, eid, t.lhs, t.rhs, t.residual))
    return rows
