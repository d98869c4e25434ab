"""Command-line front end.

Exit status: 0 when no check with satisfied hypotheses is violated, 2 when
one is, 1 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .assembly import normalize_kind
from .errors import SpecLabError
from .geometry import domain_from_dict
from .identity import DISK, identity_table
from .inequalities import compute_spectrum
from .scenario import (
    IDENTITY_HEADER,
    bundled_scenarios,
    load_scenario,
    run_scenario,
    spectrum_csv,
    with_overrides,
    write_outputs,
)

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATED = 0, 1, 2

log = logging.getLogger("speclab")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SPECLAB_THREADS", "1")))
    except ValueError:
        return 1


def _status(name: str, outcome) -> str:
    s = outcome.summary
    tag = ""
    if s.get("probe") or s.get("hypothesis_satisfied") is False:
        tag = " (expected probe)"
    elif outcome.failed:
        tag = " FAILED"
    return f"{name}:{outcome.check_id}: {s['overall']}{tag}"


def cmd_check(args) -> int:
    sc = with_overrides(load_scenario(args.scenario), levels=args.levels, k_max=args.kmax)
    result = run_scenario(sc)
    out = args.out or sc.out_dir
    if args.format == "json":
        payload = result.summary()
        payload["reports"] = {o.check_id: o.csv_text for o in result.outcomes}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if out:
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
    elif out:
        for path in write_outputs(result, out):
            log.info("wrote %s", path)
    else:
        for o in result.outcomes:
            sys.stdout.write(o.csv_text)
    for o in result.outcomes:
        print(_status(sc.name, o), file=sys.stderr)
    return result.exit_code


def cmd_spectrum(args) -> int:
    sc = with_overrides(load_scenario(args.scenario), levels=args.levels, k_max=args.kmax)
    spec = compute_spectrum(sc.domain, normalize_kind(args.kind), sc.k_max, sc.levels, sc.base_level)
    text = spectrum_csv(spec)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"provenance: {spec.provenance}", file=sys.stderr)
    return EXIT_OK


def cmd_identity(args) -> int:
    if args.domain == DISK:
        domain, name = DISK, DISK
    else:
        data = json.loads(Path(args.domain).read_text())
        if "domain" in data:
            data = data["domain"]
        domain, name = domain_from_dict(data), Path(args.domain).stem
    lines = [",".join(IDENTITY_HEADER)]
    for j, k, m, eid, lhs, rhs, res in identity_table(domain):
        lines.append(f"{name},{j},{k},{m},{eid},{lhs:.17g},{rhs:.17g},{res:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_one(path, out):
    sc = load_scenario(path)
    result = run_scenario(sc)
    write_outputs(result, out)
    return sc.name, result


def cmd_suite(args) -> int:
    paths = bundled_scenarios()
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda p: _run_one(p, args.out), paths))
    index = {}
    code = EXIT_OK
    for name, result in results:
        index[name] = {o.check_id: o.summary["overall"] for o in result.outcomes}
        for o in result.outcomes:
            print(_status(name, o))
        code = max(code, result.exit_code)
    Path(args.out, "suite.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="speclab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("suite", help="run every bundled scenario")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_suite)

    c = sub.add_parser("check", help="run the checks of one scenario")
    c.add_argument("--scenario", required=True)
    c.add_argument("--levels", type=int, help="override the scenario's FEM levels")
    c.add_argument("--kmax", type=int, help="override the scenario's k_max")
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.add_argument("--out", help="directory (csv) or file (json); default stdout")
    c.set_defaults(func=cmd_check)

    sp = sub.add_parser("spectrum", help="print one spectrum of a scenario's domain")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--kind", required=True, choices=("d", "n", "mixed"))
    sp.add_argument("--levels", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spectrum)

    i = sub.add_parser("identity", help="second-derivative identity table")
    i.add_argument("--domain", required=True, help="domain/scenario JSON file, or 'disk'")
    i.add_argument("--out")
    i.set_defaults(func=cmd_identity)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except SpecLabError as exc:
        pointer = getattr(exc, "pointer", "")
        print(f"error: {type(exc).__name__}: {exc}" + (f" [at {pointer}]" if pointer and pointer not in str(exc) else ""), file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
