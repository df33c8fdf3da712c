import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhv.cli import main
from qhv.scenario import DEMOS, ScenarioError, dump_scenario, emit, load_demo, parse_scenario, run


def cm(m):
    """Complex matrix as nested [re, im] pairs."""
    return [[[float(np.real(v)), float(np.imag(v))] for v in row] for row in np.asarray(m, dtype=complex)]


SZ = [[1, 0], [0, -1]]
SX = [[0, 1], [1, 0]]


def minimal(**extra):
    doc = {
        "dimension": 2,
        "observables": {"z": cm(SZ)},
        "states": {"up": cm(np.diag([1, 0]))},
        "queries": [{"type": "expect", "state": "up", "observable": "z", "expected": 1.0}],
    }
    doc.update(extra)
    return doc


def text(doc):
    return json.dumps(doc)


def test_parse_minimal():
    doc = parse_scenario(text(minimal()))
    assert doc.dimension == 2 and len(doc.queries) == 1
    report = run(doc)
    assert report.passed and report.results[0].rows[0][1] == 1.0


def test_non_hermitian_named():
    d = minimal()
    d["observables"]["bad"] = cm([[0, 1], [0, 0]])
    with pytest.raises(ScenarioError, match="observable bad"):
        parse_scenario(text(d))


def test_undeclared_state():
    d = minimal(queries=[{"type": "expect", "state": "nope", "observable": "z"}])
    with pytest.raises(ScenarioError, match="undeclared state nope"):
        parse_scenario(text(d))


def test_unknown_field_rejected():
    with pytest.raises(ScenarioError, match="colour: Extra inputs"):
        parse_scenario(text(minimal(colour="blue")))
    d = minimal()
    d["queries"][0]["extra_knob"] = 1
    with pytest.raises(ScenarioError):
        parse_scenario(text(d))


def test_syntax_error_position():
    with pytest.raises(ScenarioError, match="line 2, column"):
        parse_scenario('{"dimension": 2,\n  "observables": }')


def test_dimension_mismatch():
    d = minimal()
    d["states"]["big"] = cm(np.eye(3) / 3)
    with pytest.raises(ScenarioError, match="state big has dimension 3"):
        parse_scenario(text(d))


def test_catalog_reference_checks():
    d = minimal(catalogs={"c": ["z", "x"]})
    with pytest.raises(ScenarioError, match="undeclared observable x"):
        parse_scenario(text(d))
    d = minimal(catalogs={"c": ["z"]}, queries=[{"type": "verify-joint", "catalog": "c", "state": "up", "subset": ["q"]}])
    with pytest.raises(ScenarioError, match="not in catalog"):
        parse_scenario(text(d))


def test_bad_state_rejected():
    d = minimal()
    d["states"]["neg"] = cm(np.diag([1.5, -0.5]))
    with pytest.raises(ScenarioError, match="state neg"):
        parse_scenario(text(d))


def test_empty_query_list_passes():
    report = run(parse_scenario(text(minimal(queries=[]))))
    assert report.results == [] and report.passed and report.exit_code == 0


@pytest.mark.parametrize("name", DEMOS)
def test_demo_round_trip(name):
    doc = load_demo(name)
    canon = dump_scenario(doc)
    again = parse_scenario(canon)
    assert again == doc
    assert dump_scenario(again) == canon


@settings(max_examples=20, deadline=None)
@given(
    vals=st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2),
    expected=st.floats(-3, 3, allow_nan=False),
    trials=st.integers(0, 50),
)
def test_round_trip_generated(vals, expected, trials):
    d = {
        "dimension": 2,
        "observables": {"a": cm(np.diag(vals)), "x": cm(SX)},
        "states": {"m": cm(np.eye(2) / 2)},
        "catalogs": {"c": ["x"]},
        "queries": [
            {"type": "expect", "state": "m", "observable": "a", "expected": expected},
            {"type": "verify-lemma1", "catalog": "c", "trials": trials},
        ],
        "tolerances": {"check": 1e-9},
    }
    doc = parse_scenario(text(d))
    assert parse_scenario(dump_scenario(doc)) == doc


@pytest.mark.parametrize("name", DEMOS)
def test_demos_pass_and_are_deterministic(name):
    doc = load_demo(name)
    a, b = emit(run(doc, 3), "csv"), emit(run(doc, 3), "csv")
    assert a == b
    assert run(doc, 3).passed


def test_seed_changes_sampled_checks():
    d = minimal(
        observables={"x": cm(SX), "z": cm(SZ), "y": cm([[0, -1j], [1j, 0]])},
        catalogs={"c": ["x", "z", "y"]},
        queries=[{"type": "verify-pushforward", "catalog": "c", "trials": 5}],
    )
    doc = parse_scenario(text(d))
    assert emit(run(doc, 0), "csv") == emit(run(doc, 0), "csv")
    assert emit(run(doc, 0), "csv") != emit(run(doc, 1), "csv")


def test_chsh_demo_value():
    res = [r for r in run(load_demo("chsh-singlet")).results if r.type == "chsh"][0]
    rows = dict((k, v) for k, v in res.rows)
    assert abs(abs(rows["via_measure"]) - 2.828427) <= 1e-6
    assert res.status == "pass"


def test_emit_lemma1_summary_row():
    d = minimal(
        observables={"x": cm(SX), "z": cm(SZ)},
        catalogs={"c": ["x", "z"]},
        queries=[{"type": "verify-lemma1", "catalog": "c", "exhaustive": True}],
    )
    human = emit(run(parse_scenario(text(d))), "human")
    assert "lemma1, pass, max_dev=" in human


def test_werner_three_rows_csv():
    d = {"dimension": [2, 2], "queries": [{"type": "werner-scan", "p_grid": [0.0, 0.5, 1.0]}]}
    out = emit(run(parse_scenario(text(d))), "csv")
    rows = list(csv.reader(io.StringIO(out)))
    header = rows.index(["p", "chsh", "total_variation", "min_atom"])
    data = [r for r in rows[header + 1 :] if r]
    assert len(data) == 3
    assert [float(r[0]) for r in data] == [0.0, 0.5, 1.0]
    # 12 significant digits
    assert data[2][1] == format(-2 * np.sqrt(2), ".12g")


def test_failed_check_flagged():
    d = minimal(queries=[{"type": "expect", "state": "up", "observable": "z", "expected": 0.5}])
    report = run(parse_scenario(text(d)))
    assert report.results[0].status == "fail" and report.exit_code == 1
    assert "<-- FAIL" in emit(report, "human")


def test_resource_error_is_per_query(monkeypatch):
    monkeypatch.setenv("QHV_ATOM_CAP", "3")
    d = minimal(
        observables={"x": cm(SX), "z": cm(SZ)},
        catalogs={"c": ["x", "z"]},
        queries=[
            {"type": "verify-pushforward", "catalog": "c", "trials": 3},
            {"type": "expect", "state": "up", "observable": "z", "expected": 1.0},
        ],
    )
    report = run(parse_scenario(text(d)))
    assert [r.status for r in report.results] == ["error", "pass"]
    assert "ResourceError" in report.results[0].message
    assert report.exit_code == 1


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(text(minimal()))
    assert main(["run", str(good)]) == 0
    assert main(["validate", str(good)]) == 0
    failing = tmp_path / "fail.json"
    failing.write_text(text(minimal(queries=[{"type": "expect", "state": "up", "observable": "z", "expected": 0.0}])))
    assert main(["run", str(failing)]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert main(["run", str(broken)]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_cli_demo_out_file(tmp_path):
    out = tmp_path / "report.csv"
    assert main(["demo", "trine-negativity", "--format", "csv", "--out", str(out)]) == 0
    first = out.read_text()
    assert main(["demo", "trine-negativity", "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text() == first
    assert first.startswith("query,name,type,status,max_deviation,checks,message\n")


def test_module_entry_point(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(text(minimal()))
    proc = subprocess.run([sys.executable, "-m", "qhv", "run", str(good), "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "expect" in proc.stdout
