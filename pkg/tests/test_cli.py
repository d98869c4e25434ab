import json
import subprocess
import sys
from pathlib import Path

import pytest

from speclab.cli import main
from speclab.errors import SchemaError
from speclab.scenario import bundled_scenarios, load_scenario, scenario_from_dict, with_overrides

ROOT = Path(__file__).resolve().parents[1]
SCEN = {p.stem: p for p in bundled_scenarios()}


def read(path):
    return json.loads(Path(path).read_text())


def test_bundled_square_one_dirichlet_side(tmp_path, capsys):
    assert main(["check", "--scenario", str(SCEN["square_one_dirichlet_side"]), "--out", str(tmp_path)]) == 0
    summary = read(tmp_path / "square_one_dirichlet_side.summary.json")
    nm = summary["verdicts"]["neumann_mixed"]
    assert nm["overall"] == "VIOLATED"
    assert nm["hypothesis_satisfied"] is False and nm["failed"] is False
    assert set(summary) >= {"scenario", "verdicts", "timings"}
    rows = (tmp_path / "square_one_dirichlet_side.neumann_mixed.csv").read_text().splitlines()
    assert rows[1] == "neumann_mixed:mu_{k+1}<=lamG_k,1,1,1/4,-3/4,0,VIOLATED"


def test_bundled_cube(tmp_path):
    assert main(["check", "--scenario", str(SCEN["cube_two_neumann_faces"]), "--out", str(tmp_path)]) == 0
    v = read(tmp_path / "cube_two_neumann_faces.summary.json")["verdicts"]
    assert v["dirichlet_mixed"]["counts"]["VIOLATED"] == 0
    assert v["dirichlet_mixed_probe"]["overall"] == "VIOLATED"
    assert v["dirichlet_mixed_probe"]["probe"] is True


def _write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_missing_labels_is_config_error(tmp_path, capsys):
    data = read(SCEN["fem_square_one_dirichlet_side"])
    del data["domain"]["labels"]
    assert main(["check", "--scenario", str(_write(tmp_path, data))]) == 1
    err = capsys.readouterr().err
    assert "SchemaError" in err and "labels" in err
    with pytest.raises(SchemaError) as exc:
        scenario_from_dict(data)
    assert exc.value.pointer == "/domain/labels"


@pytest.mark.parametrize(
    "mutate, pointer",
    [
        (lambda d: d.update(k_max=0), "/k_max"),
        (lambda d: d.update(levels=1), "/levels"),
        (lambda d: d["checks"].append({"type": "nope"}), "/checks/3/type"),
        (lambda d: d["domain"].update(labels=["D", "N", "X", "N"]), "/domain/labels/2"),
        (lambda d: d.update(extra=1), ""),
    ],
)
def test_schema_pointers(mutate, pointer):
    data = read(SCEN["fem_square_one_dirichlet_side"])
    mutate(data)
    with pytest.raises(SchemaError) as exc:
        scenario_from_dict(data)
    assert exc.value.pointer == pointer


def test_prerequisites_checked_before_computation(tmp_path, capsys):
    data = read(SCEN["fem_square_one_dirichlet_side"])
    data["domain"] = {
        "type": "polygon",
        "vertices": [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]],
        "labels": ["D", "N", "N", "N", "N", "N"],
    }
    data["levels"] = 40  # would never finish if anything were computed
    assert main(["check", "--scenario", str(_write(tmp_path, data))]) == 1
    assert "NotConvex" in capsys.readouterr().err

    data["domain"]["labels"] = ["N"] * 6
    assert main(["check", "--scenario", str(_write(tmp_path, data))]) == 1
    assert "HypothesisViolated" in capsys.readouterr().err


def test_invalid_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", "--scenario", str(bad)]) == 1
    assert main(["check", "--scenario", str(tmp_path / "absent.json")]) == 1


def test_monotonicity_needs_polygon(tmp_path, capsys):
    data = read(SCEN["square_one_dirichlet_side"])
    data["checks"] = [{"type": "monotonicity"}]
    assert main(["check", "--scenario", str(_write(tmp_path, data))]) == 1
    assert "/checks/0" in capsys.readouterr().err


def test_strict_failure_exits_two(monkeypatch):
    import speclab.scenario as scenario_mod

    # identical partitions: every row is an equality, so strictness fails
    monkeypatch.setattr(scenario_mod, "split_partition_pair", lambda d, shrink: (d, d))
    sc = with_overrides(load_scenario(SCEN["square_monotonicity"]), levels=2, k_max=2)
    assert scenario_mod.run_scenario(sc).exit_code == 2


def test_reruns_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert main(["check", "--scenario", str(SCEN["fem_square_one_dirichlet_side"]), "--levels", "3", "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    assert outs[0] == outs[1] and outs[0]


def test_flag_precedence(tmp_path):
    sc = load_scenario(SCEN["fem_square_one_dirichlet_side"])
    assert (sc.levels, sc.k_max) == (4, 4)
    assert with_overrides(sc).levels == 4
    sc2 = with_overrides(sc, levels=2, k_max=3)
    assert (sc2.levels, sc2.k_max) == (2, 3)
    out = tmp_path / "r.json"
    assert main(["check", "--scenario", str(SCEN["fem_square_one_dirichlet_side"]), "--levels", "2", "--kmax", "3", "--format", "json", "--out", str(out)]) == 0
    payload = read(out)
    assert (payload["levels"], payload["k_max"]) == (2, 3)
    assert payload["reports"]["chain"].count("\n") == 1 + 2 * 3
    with pytest.raises(SchemaError):
        with_overrides(sc, levels=1)


def test_spectrum_subcommand(tmp_path, capsys):
    assert main(["spectrum", "--scenario", str(SCEN["square_one_dirichlet_side"]), "--kind", "mixed", "--kmax", "3"]) == 0
    out = capsys.readouterr()
    assert out.out.splitlines() == ["k,value,uncertainty", "1,1/4,0", "2,5/4,0", "3,9/4,0"]
    assert "analytic" in out.err

    path = tmp_path / "n.csv"
    assert main(["spectrum", "--scenario", str(SCEN["fem_square_one_dirichlet_side"]), "--kind", "n", "--kmax", "2", "--levels", "3", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[1].startswith("1,0,")
    assert abs(float(lines[2].split(",")[1]) - 1) < 1e-3


def test_identity_subcommand(tmp_path, capsys):
    assert main(["identity", "--domain", "disk"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "domain,j,k,m,extra_id,lhs,rhs,residual"
    row = next(r for r in lines[1:] if r.startswith("disk,2,1,2,"))
    assert float(row.split(",")[-1]) == pytest.approx(-6.283185307179586, rel=1e-8)

    out = tmp_path / "hex.csv"
    assert main(["identity", "--domain", str(SCEN["hexagon_identity"]), "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 40
    for r in rows:
        *_, lhs, rhs, res = map(float, r.split(",")[1:])
        assert abs(res) < 1e-9 * (abs(lhs) + abs(rhs))


def test_suite(tmp_path, monkeypatch):
    monkeypatch.setenv("SPECLAB_THREADS", "4")
    assert main(["suite", "--out", str(tmp_path)]) == 0
    index = read(tmp_path / "suite.json")
    assert set(index) == set(SCEN)
    for name in SCEN:
        assert (tmp_path / f"{name}.summary.json").exists()


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "speclab.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("suite", "check", "spectrum", "identity"):
        assert sub in proc.stdout


def test_docs_schema_matches_package():
    docs = ROOT / "docs" / "scenario_schema.json"
    packaged = ROOT / "src" / "speclab" / "scenario_schema.json"
    assert read(docs) == read(packaged)


def test_bundled_scenarios_validate():
    for path in SCEN.values():
        load_scenario(path)
