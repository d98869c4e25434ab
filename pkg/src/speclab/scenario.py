"""Scenario files: schema validation, prerequisite checks and execution."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from jsonschema import Draft202012Validator

from .errors import NotConvex, SchemaError, SpecLabError
from .geometry import (
    DIRICHLET,
    NEUMANN,
    Domain,
    PolygonDomain,
    domain_from_dict,
    is_convex,
    split_partition_pair,
    tangent_space_dim,
    validate_mixed,
)
from .identity import identity_table
from .inequalities import (
    HOLDS,
    VIOLATED,
    check_chain,
    check_dirichlet_mixed,
    check_levine_weinberger,
    check_monotonicity,
    check_neumann_mixed,
    compute_spectrum,
    default_base_level,
    format_value,
)

log = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9
IDENTITY_HEADER = ("domain", "j", "k", "m", "extra_id", "lhs", "rhs", "residual")


def load_schema() -> dict:
    return json.loads(resources.files("speclab").joinpath("scenario_schema.json").read_text())


_VALIDATOR = Draft202012Validator(load_schema())


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: Domain
    checks: tuple
    k_max: int = 6
    levels: int = 4
    base_level: Optional[int] = None
    kinds: tuple = ()
    out_dir: Optional[str] = None
    raw: dict = field(default_factory=dict, compare=False)

    def check_ids(self) -> list[str]:
        ids, seen = [], {}
        for chk in self.checks:
            base = chk.get("label") or chk["type"]
            seen[base] = seen.get(base, 0) + 1
            ids.append(base if seen[base] == 1 else f"{base}-{seen[base]}")
        return ids


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def validate_dict(data) -> None:
    """Raise ``SchemaError`` for the first schema violation (deterministic order)."""
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if not errors:
        return
    err = errors[0]
    # descend into anyOf/oneOf/if-then failures for a more specific message
    while err.context:
        err = sorted(err.context, key=lambda e: len(e.absolute_path))[-1]
    pointer = _pointer(err.absolute_path)
    if err.validator == "required":
        missing = [name for name in err.validator_value if name not in err.instance]
        if missing:
            pointer = f"{pointer}/{missing[0]}"
    raise SchemaError(err.message, pointer)


def scenario_from_dict(data: dict, source: str = "<dict>") -> Scenario:
    validate_dict(data)
    try:
        domain = domain_from_dict(data["domain"])
    except SpecLabError as exc:
        raise SchemaError(str(exc), "/domain") from exc
    return Scenario(
        name=data["name"],
        domain=domain,
        checks=tuple(data["checks"]),
        k_max=data.get("k_max", 6),
        levels=data.get("levels", 4),
        base_level=data.get("base_level"),
        kinds=tuple(data.get("kinds", ())),
        out_dir=data.get("outputs", {}).get("dir"),
        raw=data,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from exc
    return scenario_from_dict(data, str(path))


def with_overrides(scenario: Scenario, levels=None, k_max=None) -> Scenario:
    """Command-line values win over scenario fields."""
    if levels is not None and levels < 2:
        raise SchemaError("levels must be at least 2", "/levels")
    if k_max is not None and k_max < 1:
        raise SchemaError("k_max must be at least 1", "/k_max")
    return replace(
        scenario,
        levels=scenario.levels if levels is None else levels,
        k_max=scenario.k_max if k_max is None else k_max,
    )


def bundled_scenarios() -> list[Path]:
    root = resources.files("speclab").joinpath("scenarios")
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))


# ---------------------------------------------------------------- execution


def validate_prerequisites(sc: Scenario) -> None:
    """Fail fast on every check whose hypotheses cannot be set up."""
    d = sc.domain
    for i, chk in enumerate(sc.checks):
        where = f"/checks/{i}"
        kind = chk["type"]
        try:
            if kind in ("chain", "neumann_mixed", "dirichlet_mixed", "monotonicity"):
                validate_mixed(d)
            if kind == "neumann_mixed":
                tangent_space_dim(d, NEUMANN)
            if kind == "dirichlet_mixed":
                tangent_space_dim(d, DIRICHLET)
            if kind in ("dirichlet_mixed", "levine_weinberger") and not is_convex(d):
                raise NotConvex(f"{kind} needs a convex domain")
            if kind in ("monotonicity", "identity") and not isinstance(d, PolygonDomain):
                raise SchemaError(f"{kind} needs a polygon domain", where)
            if kind == "identity" and not is_convex(d):
                raise NotConvex("identity needs a convex polygon")
            if kind != "monotonicity" and "shrink" in chk:
                raise SchemaError("shrink only applies to monotonicity", f"{where}/shrink")
        except SchemaError:
            raise
        except SpecLabError as exc:
            exc.pointer = where
            raise


def _shift_for(sc: Scenario, chk: dict) -> int:
    if chk["type"] == "dirichlet_mixed":
        return chk.get("shift", tangent_space_dim(sc.domain, DIRICHLET).dim)
    if chk["type"] == "levine_weinberger":
        return chk.get("shift", sc.domain.dim)
    return 0


def required_counts(sc: Scenario) -> dict:
    K = sc.k_max
    need: dict[str, int] = {k: K for k in sc.kinds}

    def want(kind, count):
        need[kind] = max(need.get(kind, 0), count)

    for chk in sc.checks:
        t = chk["type"]
        if t == "chain":
            for kind in ("neumann", "mixed", "dirichlet"):
                want(kind, K)
        elif t == "neumann_mixed":
            want("neumann", K + 1)
            want("mixed", K)
        elif t == "dirichlet_mixed":
            want("mixed", K + _shift_for(sc, chk))
            want("dirichlet", K)
        elif t == "levine_weinberger":
            want("neumann", K + _shift_for(sc, chk))
            want("dirichlet", K)
    return need


@dataclass
class CheckOutcome:
    check_id: str
    kind: str
    summary: dict
    csv_text: str
    failed: bool


@dataclass
class ScenarioResult:
    scenario: Scenario
    spectra: dict
    outcomes: list
    timings: dict

    @property
    def exit_code(self) -> int:
        return 2 if any(o.failed for o in self.outcomes) else 0

    def summary(self) -> dict:
        return {
            "scenario": self.scenario.name,
            "domain": self.scenario.domain.to_dict(),
            "k_max": self.scenario.k_max,
            "levels": self.scenario.levels,
            "spectra": {
                kind: {
                    "provenance": s.provenance,
                    "values": [format_value(v) for v in s.values],
                    "uncertainties": [format_value(u) for u in s.uncertainties],
                }
                for kind, s in self.spectra.items()
            },
            "verdicts": {o.check_id: o.summary for o in self.outcomes},
            "exit_code": self.exit_code,
            "timings": self.timings,
        }


def _identity_outcome(check_id: str, domain: PolygonDomain, name: str) -> CheckOutcome:
    rows = identity_table(domain)
    worst = 0.0
    lines = [",".join(IDENTITY_HEADER)]
    for j, k, m, eid, lhs, rhs, res in rows:
        scale = abs(lhs) + abs(rhs)
        rel = abs(res) / scale if scale else abs(res)
        worst = max(worst, rel)
        lines.append(f"{name},{j},{k},{m},{eid},{lhs:.17g},{rhs:.17g},{res:.17g}")
    verdict = HOLDS if worst < IDENTITY_TOL else VIOLATED
    summary = {"claim": "identity", "overall": verdict, "max_relative_residual": worst, "rows": len(rows), "failed": verdict != HOLDS}
    return CheckOutcome(check_id, "identity", summary, "\n".join(lines) + "\n", verdict != HOLDS)


def run_scenario(sc: Scenario) -> ScenarioResult:
    validate_prerequisites(sc)
    timings: dict[str, float] = {}
    need = required_counts(sc)
    base = sc.base_level
    if base is None and isinstance(sc.domain, PolygonDomain) and need:
        base = default_base_level(sc.domain, max(need.values()))

    spectra = {}
    for kind in ("neumann", "mixed", "dirichlet"):
        if kind in need:
            t0 = time.perf_counter()
            spectra[kind] = compute_spectrum(sc.domain, kind, need[kind], sc.levels, base)
            timings[f"spectrum:{kind}"] = time.perf_counter() - t0

    K = sc.k_max
    outcomes = []
    for check_id, chk in zip(sc.check_ids(), sc.checks):
        t0 = time.perf_counter()
        t = chk["type"]
        if t == "identity":
            outcomes.append(_identity_outcome(check_id, sc.domain, sc.name))
            timings[f"check:{check_id}"] = time.perf_counter() - t0
            continue
        if t == "chain":
            rep = check_chain(spectra["neumann"], spectra["mixed"], spectra["dirichlet"], K)
        elif t == "neumann_mixed":
            dim_n = tangent_space_dim(sc.domain, NEUMANN).dim
            rep = check_neumann_mixed(spectra["neumann"], spectra["mixed"], dim_n, K)
        elif t == "dirichlet_mixed":
            dim_d = tangent_space_dim(sc.domain, DIRICHLET).dim
            rep = check_dirichlet_mixed(spectra["mixed"], spectra["dirichlet"], dim_d, K, _shift_for(sc, chk))
        elif t == "levine_weinberger":
            rep = check_levine_weinberger(spectra["neumann"], spectra["dirichlet"], sc.domain.dim, K, _shift_for(sc, chk))
        elif t == "monotonicity":
            small, large = split_partition_pair(sc.domain, chk.get("shrink", 0.5))
            mono_base = sc.base_level if sc.base_level is not None else default_base_level(small, K)
            a = compute_spectrum(small, "mixed", K, sc.levels, mono_base)
            b = compute_spectrum(large, "mixed", K, sc.levels, mono_base)
            rep = check_monotonicity(a, b, K)
        else:  # pragma: no cover - schema forbids it
            raise SchemaError(f"unknown check {t!r}", "/checks")
        timings[f"check:{check_id}"] = time.perf_counter() - t0
        outcomes.append(CheckOutcome(check_id, t, rep.summary(), rep.to_csv(), rep.failed))
    return ScenarioResult(sc, spectra, outcomes, timings)


def write_outputs(result: ScenarioResult, out_dir) -> list[Path]:
    """Per-check CSV files plus ``<name>.summary.json``; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for o in result.outcomes:
        path = out / f"{result.scenario.name}.{o.check_id}.csv"
        path.write_text(o.csv_text)
        written.append(path)
    summary = out / f"{result.scenario.name}.summary.json"
    summary.write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
    written.append(summary)
    return written


def spectrum_csv(spec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("k", "value", "uncertainty"))
    for k, (v, u) in enumerate(zip(spec.values, spec.uncertainties), start=1):
        w.writerow((k, format_value(v), format_value(u)))
    return buf.getvalue()
