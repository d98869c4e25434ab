"""Exact Laplacian spectra of boxes with per-face Dirichlet/Neumann labels.

Each axis contributes a one-dimensional factor ``(pi/L)^2 c_n^2`` with
``c_n = n`` (DD), ``n - 1`` (NN) or ``n - 1/2`` (DN, ND). When every side
equals pi the factors are quarter integers and the whole enumeration runs in
integer arithmetic (values scaled by 4).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .geometry import DIRICHLET, NEUMANN, BoxDomain, _check_label


def _twice_c(pair, n: int) -> int:
    """``2 c_n`` as an integer."""
    a, b = (_check_label(x) for x in pair)
    if n < 1:
        raise ValueError("mode index starts at 1")
    if a == DIRICHLET and b == DIRICHLET:
        return 2 * n
    if a == NEUMANN and b == NEUMANN:
        return 2 * (n - 1)
    return 2 * n - 1


def axis_factor(pair, length: float = math.pi, n: int = 1):
    """The ``n``-th eigenvalue of ``-u''`` on ``[0, length]`` with end labels ``pair``.

    Exact (a ``Fraction``) when ``length`` is pi, float otherwise.
    """
    tc = _twice_c(pair, n)
    if length == math.pi:
        return Fraction(tc * tc, 4)
    return (math.pi / length) ** 2 * (tc / 2) ** 2


@dataclass(frozen=True)
class SeparableSpectrum:
    """First ``K`` eigenvalues of a box with their mode index tuples."""

    domain: BoxDomain
    values: tuple
    indices: tuple[tuple[int, ...], ...]
    exact: bool
    cutoff: object  # every omitted eigenvalue is strictly above this

    def __len__(self):
        return len(self.values)

    def multiplicity(self, k: int) -> int:
        """Multiplicity of the ``k``-th (1-based) value within the returned list."""
        v = self.values[k - 1]
        return sum(1 for x in self.values if x == v)


def _axis_values(domain: BoxDomain, axis: int, cap: int, exact: bool):
    pair = domain.faces[axis]
    if exact:
        return [_twice_c(pair, n) ** 2 for n in range(1, cap + 2)]
    return [axis_factor(pair, domain.lengths[axis], n) for n in range(1, cap + 2)]


def separable_spectrum(domain: BoxDomain, K: int) -> SeparableSpectrum:
    """Enumerate the ``K`` smallest eigenvalues with a cutoff certificate.

    Per-axis index caps grow until, for every axis, the smallest value that
    uses an index above the cap exceeds the ``K``-th enumerated sum. Ties at
    the ``K``-th value are therefore always complete.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    exact = domain.all_pi()
    d = domain.dim
    caps = [K] * d
    while True:
        # each list holds cap + 1 entries: the last is the first excluded one
        per_axis = [_axis_values(domain, a, caps[a], exact) for a in range(d)]
        entries = []
        for idx in itertools.product(*(range(c) for c in caps)):
            total = sum(per_axis[a][i] for a, i in enumerate(idx))
            entries.append((total, tuple(i + 1 for i in idx)))
        entries.sort()
        kth = entries[K - 1][0]
        base = [per_axis[a][0] for a in range(d)]
        bounds = [per_axis[a][caps[a]] + sum(base) - base[a] for a in range(d)]
        if all(b > kth for b in bounds):
            break
        caps = [2 * c if b <= kth else c for c, b in zip(caps, bounds)]

    chosen = entries[:K]
    cutoff = min(bounds)
    if exact:
        values = tuple(Fraction(v, 4) for v, _ in chosen)
        cutoff = Fraction(cutoff, 4)
    else:
        values = tuple(float(v) for v, _ in chosen)
    return SeparableSpectrum(domain, values, tuple(i for _, i in chosen), exact, cutoff)


def kind_faces(domain: BoxDomain, kind: str) -> BoxDomain:
    """The box with all faces relabeled for ``kind`` (mixed keeps its labels)."""
    if kind == "dirichlet":
        return domain.with_faces(((DIRICHLET, DIRICHLET),) * domain.dim)
    if kind == "neumann":
        return domain.with_faces(((NEUMANN, NEUMANN),) * domain.dim)
    return domain
