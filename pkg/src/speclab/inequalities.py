"""Spectra with uncertainties, Richardson extrapolation and inequality verdicts.

Every comparison ``lhs <= rhs`` produces a row with ``margin = rhs - lhs`` and
a combined uncertainty ``u`` (sum of both sides). The verdict is

* ``HOLDS`` if ``margin > u``,
* ``VIOLATED`` if ``margin < -u``,
* ``EQUALITY_WITHIN_TOL`` otherwise (for ``u == 0`` this means ``margin == 0``),
* ``INCONCLUSIVE`` if a margin or uncertainty is not finite.
"""

from __future__ import annotations

import csv
import io
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .analytic import kind_faces, separable_spectrum
from .assembly import assemble, normalize_kind
from .eigensolve import smallest_eigs
from .errors import DomainMismatch, NotConvex
from .geometry import BoxDomain, Domain, PolygonDomain, is_convex, validate_mixed
from .meshing import mesh_hierarchy

HOLDS = "HOLDS"
EQUALITY = "EQUALITY_WITHIN_TOL"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

REL_FLOOR = 1e-6
ORDER_SLACK = 0.5
CSV_HEADER = ("claim", "k", "lhs", "rhs", "margin", "uncertainty", "verdict")


@dataclass(frozen=True)
class RichardsonResult:
    extrapolated: float
    uncertainty: float
    observed_order: Optional[float]
    monotone: bool
    low_order: bool = False


def richardson(values_by_level: Sequence[float], order: float = 2) -> RichardsonResult:
    """Extrapolate a sequence computed on meshes refined by a factor of 2.

    Uses the two finest levels. With three or more levels the observed
    order comes from the three finest. The uncertainty is inflated to the
    last difference when the sequence is not monotone, or when the observed
    order falls more than ``ORDER_SLACK`` below ``order``.
    """
    v = [float(x) for x in values_by_level]
    if len(v) < 2:
        raise ValueError("richardson needs at least two levels")
    coarse, fine = v[-2], v[-1]
    r = 2.0**order
    extrapolated = (r * fine - coarse) / (r - 1)
    uncertainty = max(abs(extrapolated - fine), REL_FLOOR * abs(extrapolated))

    diffs = np.diff(v)
    signs = {int(s) for s in np.sign(diffs) if s != 0}
    monotone = len(signs) <= 1

    observed = None
    if len(v) >= 3:
        d0, d1 = v[-3] - v[-2], v[-2] - v[-1]
        if d0 != 0 and d1 != 0 and d0 / d1 > 0:
            observed = math.log2(d0 / d1)

    low_order = observed is not None and observed < order - ORDER_SLACK
    if not monotone or low_order:
        uncertainty = max(uncertainty, abs(fine - coarse))
    return RichardsonResult(extrapolated, uncertainty, observed, monotone, low_order)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """First ``K`` eigenvalues of one problem, with per-value uncertainty."""

    domain: Domain
    kind: str
    values: tuple
    uncertainties: tuple
    provenance: str
    level_values: Optional[np.ndarray] = None  # (levels, K) raw FEM eigenvalues
    diagnostics: tuple = field(default=())

    def __post_init__(self):
        if len(self.values) < 1 or len(self.values) != len(self.uncertainties):
            raise ValueError("spectrum needs matching, nonempty values and uncertainties")
        if any(u < 0 for u in self.uncertainties):
            raise ValueError("uncertainties must be nonnegative")

    def __len__(self):
        return len(self.values)

    @property
    def descriptor(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "kind": self.kind,
            "provenance": self.provenance,
        }


def analytic_spectrum(domain: BoxDomain, kind: str, K: int) -> Spectrum:
    kind = normalize_kind(kind)
    if kind == "mixed":
        validate_mixed(domain)
    spec = separable_spectrum(kind_faces(domain, kind), K)
    if spec.exact:
        unc = (0,) * K
    else:
        # floating point sums carry rounding only
        unc = tuple(4 * sys.float_info.epsilon * abs(v) for v in spec.values)
    return Spectrum(domain, kind, spec.values, unc, "analytic")


def default_base_level(domain: PolygonDomain, K: int) -> int:
    """Coarsest level whose interior node count exceeds ``4 K``.

    Interior nodes are free for every boundary kind, so all kinds of one
    domain pick the same level and share one mesh hierarchy.
    """
    level = 1
    while True:
        mesh = mesh_hierarchy(domain, level + 1)[-1]
        if mesh.n_nodes - len(mesh.boundary_nodes()) > 4 * K:
            return level
        level += 1


def fem_eigenvalues(mesh, domain: PolygonDomain, kind: str, K: int) -> np.ndarray:
    Kmat, Mmat, dofs = assemble(mesh, kind, domain.labels)
    shift = 1.0 if kind == "neumann" else 0.0
    vals = smallest_eigs(Kmat, Mmat, K, shift=shift).eigenvalues.copy()
    if shift:
        # round-off of the constant mode after shifting back
        vals[np.abs(vals) <= 1e-10 * (shift + np.abs(vals).max())] = 0.0
    return vals


def fem_spectrum(
    domain: PolygonDomain,
    kind: str,
    K: int,
    levels: int = 4,
    base_level: Optional[int] = None,
) -> Spectrum:
    """P1 eigenvalues on ``levels`` uniform refinements, extrapolated per index."""
    kind = normalize_kind(kind)
    if kind == "mixed":
        validate_mixed(domain)
    if levels < 2:
        raise ValueError("fem_spectrum needs at least two levels")
    if base_level is None:
        base_level = default_base_level(domain, K)
    meshes = mesh_hierarchy(domain, base_level + levels)[base_level:]
    table = np.array([fem_eigenvalues(mesh, domain, kind, K) for mesh in meshes])
    results = tuple(richardson(table[:, i]) for i in range(K))
    values = [r.extrapolated for r in results]
    # keep the extrapolated list sorted; ties from crossing levels are rare
    order = np.argsort(values, kind="stable")
    values = tuple(float(values[i]) for i in order)
    uncs = tuple(float(results[i].uncertainty) for i in order)
    return Spectrum(
        domain,
        kind,
        values,
        uncs,
        f"fem-extrapolated(levels={base_level}..{base_level + levels - 1})",
        level_values=table,
        diagnostics=tuple(results[i] for i in order),
    )


def compute_spectrum(domain: Domain, kind: str, K: int, levels: int = 4, base_level=None) -> Spectrum:
    """Analytic spectrum for boxes, extrapolated FEM spectrum for polygons."""
    if isinstance(domain, BoxDomain):
        return analytic_spectrum(domain, kind, K)
    return fem_spectrum(domain, kind, K, levels, base_level)


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class Row:
    k: int
    relation: str
    lhs: object
    rhs: object
    margin: object
    uncertainty: object
    verdict: str


def verdict(margin, uncertainty) -> str:
    try:
        finite = math.isfinite(margin) and math.isfinite(uncertainty)
    except (TypeError, OverflowError):
        finite = False
    if not finite:
        return INCONCLUSIVE
    if margin > uncertainty:
        return HOLDS
    if margin < -uncertainty:
        return VIOLATED
    return EQUALITY


@dataclass(frozen=True)
class InequalityReport:
    claim: str
    rows: tuple
    hypothesis_satisfied: bool = True
    probe: bool = False
    strict: bool = False
    note: str = ""

    @property
    def overall(self) -> str:
        verdicts = {r.verdict for r in self.rows}
        for v in (VIOLATED, INCONCLUSIVE, EQUALITY):
            if v in verdicts:
                return v
        return HOLDS

    @property
    def strict_holds(self) -> bool:
        return all(r.verdict == HOLDS for r in self.rows)

    @property
    def counts(self) -> dict:
        out = {v: 0 for v in (HOLDS, EQUALITY, VIOLATED, INCONCLUSIVE)}
        for r in self.rows:
            out[r.verdict] += 1
        return out

    @property
    def expected(self) -> bool:
        """Probe or unmet hypothesis: a violation here is not a failure."""
        return self.probe or not self.hypothesis_satisfied

    @property
    def failed(self) -> bool:
        if self.expected:
            return False
        if self.strict:
            return not self.strict_holds
        return self.overall == VIOLATED

    def summary(self) -> dict:
        return {
            "claim": self.claim,
            "overall": self.overall,
            "counts": self.counts,
            "hypothesis_satisfied": self.hypothesis_satisfied,
            "probe": self.probe,
            "strict": self.strict,
            "strict_holds": self.strict_holds if self.strict else None,
            "failed": self.failed,
            "note": self.note,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_report_csv(self, buf)
        return buf.getvalue()


def format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_report_csv(report: InequalityReport, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in report.rows:
        writer.writerow(
            [
                f"{report.claim}:{r.relation}",
                r.k,
                format_value(r.lhs),
                format_value(r.rhs),
                format_value(r.margin),
                format_value(r.uncertainty),
                r.verdict,
            ]
        )


def _row(k, relation, lhs: Spectrum, i, rhs: Spectrum, j) -> Row:
    a, b = lhs.values[i], rhs.values[j]
    if isinstance(a, Fraction) != isinstance(b, Fraction):
        a, b = float(a), float(b)
    margin = b - a
    unc = lhs.uncertainties[i] + rhs.uncertainties[j]
    return Row(k, relation, a, b, margin, unc, verdict(margin, unc))


def _same_domain(*spectra: Spectrum) -> None:
    keys = {s.domain.geometry_key for s in spectra}
    if len(keys) != 1:
        raise DomainMismatch("spectra belong to different domains")


def _need(spec: Spectrum, count: int, name: str) -> None:
    if len(spec) < count:
        raise ValueError(f"{name} has {len(spec)} values, {count} needed")


def _require_convex(spec: Spectrum) -> None:
    if not is_convex(spec.domain):
        raise NotConvex("this inequality is only established on convex domains")


def check_chain(mu: Spectrum, mixed: Spectrum, dirichlet: Spectrum, K: int) -> InequalityReport:
    """``mu_k <= lam^G_k <= lam_k`` for ``k <= K``."""
    _same_domain(mu, mixed, dirichlet)
    for s, name in ((mu, "mu"), (mixed, "mixed"), (dirichlet, "dirichlet")):
        _need(s, K, name)
    rows = []
    for k in range(1, K + 1):
        rows.append(_row(k, "mu_k<=lamG_k", mu, k - 1, mixed, k - 1))
        rows.append(_row(k, "lamG_k<=lam_k", mixed, k - 1, dirichlet, k - 1))
    return InequalityReport("chain", tuple(rows))


def check_neumann_mixed(mu: Spectrum, mixed: Spectrum, dimS_N: int, K: int) -> InequalityReport:
    """``mu_{k+1} <= lam^G_k``, valid when the Neumann part has a joint tangent."""
    _same_domain(mu, mixed)
    _need(mu, K + 1, "mu")
    _need(mixed, K, "mixed")
    rows = tuple(_row(k, "mu_{k+1}<=lamG_k", mu, k, mixed, k - 1) for k in range(1, K + 1))
    ok = dimS_N >= 1
    note = "" if ok else "dim S(Gamma_N) = 0: hypothesis unsatisfied, probe only"
    return InequalityReport("neumann_mixed", rows, hypothesis_satisfied=ok, note=note)


def check_dirichlet_mixed(
    mixed: Spectrum, dirichlet: Spectrum, dimS_D: int, K: int, shift: Optional[int] = None
) -> InequalityReport:
    """``lam^G_{k+s} <= lam_k`` with ``s = dim S(Gamma_D)`` on convex domains.

    A ``shift`` larger than ``dimS_D`` turns the report into a probe.
    """
    _same_domain(mixed, dirichlet)
    _require_convex(mixed)
    s = dimS_D if shift is None else shift
    _need(mixed, K + s, "mixed")
    _need(dirichlet, K, "dirichlet")
    rows = tuple(
        _row(k, f"lamG_{{k+{s}}}<=lam_k", mixed, k - 1 + s, dirichlet, k - 1) for k in range(1, K + 1)
    )
    probe = s > dimS_D
    note = f"shift {s} exceeds dim S(Gamma_D) = {dimS_D}: probe" if probe else ""
    return InequalityReport("dirichlet_mixed", rows, probe=probe, note=note)


def check_levine_weinberger(
    mu: Spectrum, dirichlet: Spectrum, d: int, K: int, shift: Optional[int] = None
) -> InequalityReport:
    """``mu_{k+d} <= lam_k`` on convex domains; larger shifts are probes."""
    _same_domain(mu, dirichlet)
    _require_convex(mu)
    s = d if shift is None else shift
    _need(mu, K + s, "mu")
    _need(dirichlet, K, "dirichlet")
    rows = tuple(_row(k, f"mu_{{k+{s}}}<=lam_k", mu, k - 1 + s, dirichlet, k - 1) for k in range(1, K + 1))
    probe = s > d
    note = f"shift {s} exceeds dimension {d}: beyond-theorem probe" if probe else ""
    return InequalityReport("levine_weinberger", rows, probe=probe, note=note)


def check_monotonicity(mixed_small: Spectrum, mixed_large: Spectrum, K: int) -> InequalityReport:
    """Strict ``lam^G_k < lam^{G'}_k`` for a Dirichlet part ``G`` inside ``G'``."""
    _same_domain(mixed_small, mixed_large)
    _need(mixed_small, K, "mixed_small")
    _need(mixed_large, K, "mixed_large")
    rows = tuple(_row(k, "lamG_k<lamG'_k", mixed_small, k - 1, mixed_large, k - 1) for k in range(1, K + 1))
    return InequalityReport("monotonicity", rows, strict=True)
