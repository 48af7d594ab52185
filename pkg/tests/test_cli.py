# test_cli.py - 命令行入口与退出码
import json
import os
from fractions import Fraction

import pytest

import planar_moments
from src.data_snapshot import DataSnapshot, latest_session_id
from src.exact_core import TauPoly, parse_scalar
from src.formula_registry import formula_registry

QUIET = ["--log-level", "production"]
HERMITE_113 = ["--family", "hermite", "--tau", "1/2", "--p1", "1", "--p2", "1", "--N", "3"]


def run(capsys, *argv):
    code = planar_moments.main(list(argv) + QUIET)
    return code, capsys.readouterr().out


def test_compute_text(capsys):
    code, out = run(capsys, "compute", *HERMITE_113)
    assert code == planar_moments.EXIT_OK
    assert out.strip() == "27/4 (6.75)"


def test_compute_json_and_csv(capsys):
    code, out = run(capsys, "compute", *HERMITE_113, "--format", "json")
    assert code == 0
    record = json.loads(out)
    assert record["exact"] == "27/4"
    assert record["method"] == "complex/main"
    assert record["crosschecked_with"] == "complex/cd"

    code, out = run(capsys, "compute", *HERMITE_113, "--format", "csv")
    assert out.splitlines() == ["p1,p2,N,exact,float", "1,1,3,27/4,6.75"]


def test_compute_symbolic_tau(capsys):
    code, out = run(capsys, "compute", "--tau", "symbolic", "--p1", "1", "--p2", "1", "--N", "3")
    assert code == 0
    assert out.strip() == "6 + 3*t^2"


def test_compute_symplectic(capsys):
    code, out = run(capsys, "compute", "--tau", "0", "--p1", "2", "--p2", "0", "--N", "4",
                    "--ensemble", "symplectic")
    assert code == 0
    assert out.strip() == "-4 (-4.0)"


def test_table_csv(capsys):
    code, out = run(capsys, "table", "--tau", "1/2", "--p-max", "1", "--N", "2", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "p1,p2,N,exact,float"
    assert lines[1:] == ["0,0,2,2,2.0", "0,1,2,0,0.0", "1,0,2,0,0.0", "1,1,2,13/4,3.25"]


def test_table_needs_n(capsys):
    code, _ = run(capsys, "table", "--p-max", "2")
    assert code == planar_moments.EXIT_DOMAIN


def test_domain_errors(capsys):
    code, _ = run(capsys, "compute", "--family", "laguerre", "--nu", "-2", "--p1", "1", "--p2", "1", "--N", "2")
    assert code == planar_moments.EXIT_DOMAIN
    code, _ = run(capsys, "compute", "--family", "gegenbauer", "--tau", "symbolic",
                  "--p1", "1", "--p2", "1", "--N", "2")
    assert code == planar_moments.EXIT_DOMAIN
    code, _ = run(capsys, "asympt", "--family", "gegenbauer", "--p1", "1", "--p2", "1")
    assert code == planar_moments.EXIT_DOMAIN


def test_bad_arguments_exit_through_argparse(capsys):
    with pytest.raises(SystemExit) as excinfo:
        planar_moments.main(["compute", "--tau", "3/2", "--p1", "1", "--p2", "1", "--N", "2"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit):
        planar_moments.main(["table", "--p-max", "2", "--N-list", "0,3"])


def test_formula_mismatch_exit_code(capsys, monkeypatch):
    info = formula_registry.formulas["complex/cd"]
    monkeypatch.setitem(info, "formula_func", lambda *args: Fraction(-1))
    monkeypatch.setitem(info, "loaded", True)
    code, _ = run(capsys, "compute", *HERMITE_113)
    assert code == planar_moments.EXIT_FAILED


def test_oracle_mismatch_exit_code(capsys):
    code, _ = run(capsys, "compute", *HERMITE_113, "--oracle", "--tolerance", "-1")
    assert code == planar_moments.EXIT_ORACLE


def test_verify_and_limits(capsys):
    code, out = run(capsys, "verify", "--suite", "genus", "--suite", "elliptic-law")
    assert code == 0
    assert out.splitlines()[0].startswith("PASS elliptic-law")
    assert out.splitlines()[1].startswith("PASS genus")

    code, out = run(capsys, "limits", "--check", "catalan", "--p-max", "4")
    assert code == 0
    assert out.splitlines()[-1] == "PASS"

    code, out = run(capsys, "limits", "--check", "narayana", "--p-max", "3", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and all(row["passed"] for row in rows)


def test_asympt_report(capsys):
    code, out = run(capsys, "asympt", "--tau", "1/3", "--p1", "2", "--p2", "2", "--N-list", "10,20")
    assert code == 0
    assert out.startswith("# c1 = ")


def test_snapshot_is_written(capsys, tmp_path):
    code, _ = run(capsys, "table", "--p-max", "1", "--N", "2", "--snapshot", "--log-dir", str(tmp_path))
    assert code == 0
    names = os.listdir(tmp_path / "snapshots")
    assert any(name.endswith("_table.json") for name in names)
    assert "latest_summary.json" in names


def test_json_exact_values_parse_back(capsys):
    code, out = run(capsys, "compute", "--tau", "symbolic", "--p1", "1", "--p2", "1", "--N", "3",
                    "--format", "json")
    assert code == 0
    assert parse_scalar(json.loads(out)["exact"]) == TauPoly([6, 0, 3])

    code, out = run(capsys, "table", "--tau", "1/2", "--p-max", "1", "--N", "2", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [parse_scalar(row["exact"]) for row in rows] == [2, 0, 0, Fraction(13, 4)]
    assert all(parse_scalar(row["exact"]) == Fraction(row["exact"]) for row in rows)


def test_formulas_listing(capsys):
    code, out = run(capsys, "formulas", "--format", "json")
    assert code == 0
    names = [row["name"] for row in json.loads(out)]
    assert names == formula_registry.get_available_formulas()
    assert "symplectic/recursive" in names

    code, out = run(capsys, "formulas", "--name", "complex/cd-laguerre")
    assert code == 0
    assert "distinct_orders: True" in out.splitlines()
    code, _ = run(capsys, "formulas", "--name", "complex/nowhere")
    assert code == planar_moments.EXIT_DOMAIN


def test_snapshots_show_and_compare(capsys, tmp_path):
    log_dir = str(tmp_path)
    code, _ = run(capsys, "table", "--p-max", "1", "--N", "2", "--snapshot", "--log-dir", log_dir)
    assert code == 0
    session = latest_session_id(log_dir)
    assert session

    code, out = run(capsys, "snapshots", "--log-dir", log_dir, "--format", "json")
    assert code == 0
    assert json.loads(out) == [{"session": session, "stage": "table"}]

    code, out = run(capsys, "snapshots", "--log-dir", log_dir, "--show", "table")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 4

    baseline = DataSnapshot("baseline", log_dir)
    baseline.capture("table", rows)
    code, out = run(capsys, "snapshots", "--log-dir", log_dir, "--compare", "baseline")
    assert code == 0 and json.loads(out)["identical"]

    baseline.capture("table", [dict(rows[0], exact="5")] + rows[1:])
    code, out = run(capsys, "snapshots", "--log-dir", log_dir, "--compare", "baseline")
    assert code == planar_moments.EXIT_FAILED
    assert json.loads(out)["changed_rows"][0]["after"] == "5"

    code, _ = run(capsys, "snapshots", "--log-dir", log_dir, "--show", "verify")
    assert code == planar_moments.EXIT_DOMAIN
    code, _ = run(capsys, "snapshots", "--log-dir", str(tmp_path / "empty"))
    assert code == planar_moments.EXIT_DOMAIN
