import csv
import dataclasses
import io
import json
import subprocess
import sys

import pytest

from qrhc import __version__
from qrhc.cli import dumps, run
from qrhc.cube import majority_nicd
from qrhc.search import REGISTRY

TOP_KEYS = {"spec_version", "command", "params", "reports", "summary"}


def _run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = run(argv + ["--out", str(out), "--no-timestamp"])
    return code, out.read_text() if out.exists() else None


def test_verify_report_schema(tmp_path):
    code, text = _run(["verify", "--ineq", "reverse-hc", "--qubits", "2", "--trials", "50",
                       "--seed", "7"], tmp_path)
    assert code == 0
    doc = json.loads(text)
    assert TOP_KEYS <= set(doc)
    assert doc["spec_version"] == __version__
    assert doc["params"]["seed"] == 7
    assert doc["summary"]["pass_count"] == 50 and doc["summary"]["fail_count"] == 0
    assert "timestamp" not in doc
    rep = doc["reports"][0]
    assert {"inequality_id", "params", "lhs", "rhs", "slack", "tol", "pass"} <= set(rep)


def test_contract_violation_exits_two(tmp_path, capsys):
    assert run(["verify", "--ineq", "reverse-hc", "--p", "2", "--q", "0.5"]) == 2
    assert "p must be at most 1" in capsys.readouterr().err
    assert run(["verify", "--ineq", "nope"]) == 2
    assert run(["search", "--ineq", "gross", "--p", "0.5", "--q", "-1",
                "--gamma-grid", "0:1:3"]) == 2


def test_out_of_region_search_reports_violation(tmp_path):
    code, text = _run(["search", "--ineq", "reverse-hc", "--p", "1", "--q", "0.5",
                       "--gamma-grid", "1:1:1", "--budget", "200"], tmp_path)
    assert code == 0
    row = json.loads(text)["profile"]["rows"][0]
    assert row["min_slack"] < 0 and not row["in_region"]


def test_in_region_violation_exits_one(tmp_path, monkeypatch):
    target = REGISTRY["reverse-hc"]
    real = target.evaluate

    def broken(ops, p, q, gamma, n):
        rep = real(ops, p, q, gamma, n)
        rep.slack -= 1.0
        return rep

    monkeypatch.setitem(REGISTRY, "reverse-hc", dataclasses.replace(target, evaluate=broken))
    code, text = _run(["search", "--ineq", "reverse-hc", "--p", "0.5", "--q", "-1",
                       "--gamma-grid", "0.2:0.2:1", "--budget", "50"], tmp_path)
    assert code == 1
    doc = json.loads(text)
    assert doc["summary"]["fail_count"] == 1 and "error" in doc


def test_determinism(tmp_path):
    argv = ["verify", "--ineq", "variational", "--dim", "4", "--trials", "20", "--seed", "3"]
    _, a = _run(argv, tmp_path, "a.json")
    _, b = _run(argv, tmp_path, "b.json")
    assert a == b


def test_timestamp_present_by_default(tmp_path):
    out = tmp_path / "t.json"
    run(["derivative", "--trials", "3", "--out", str(out)])
    assert "timestamp" in json.loads(out.read_text())


def test_nicd_csv_matches_classical(tmp_path):
    out = tmp_path / "table.csv"
    code = run(["nicd", "--basis", "product", "--qubits", "3", "--k", "8", "--gamma", "0.6",
                "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 1
    assert float(rows[0]["p_all_M"]) == pytest.approx(majority_nicd(3, 8, 0.6), abs=1e-12)


def test_nicd_json_with_envelope(tmp_path):
    code, text = _run(["nicd", "--basis", "ghz", "--qubits", "2", "--k", "1", "4",
                       "--gamma", "0.5", "--c", "1.0"], tmp_path)
    assert code == 0
    doc = json.loads(text)
    assert [r["k"] for r in doc["rows"]] == [1, 4]
    assert doc["rows"][0]["envelope"] is None and doc["rows"][1]["envelope"] > 0


def test_other_subcommands(tmp_path):
    for argv in (["lsi", "--qubits", "1", "--restarts", "2", "--budget", "100"],
                 ["mix", "--qubits", "2", "--sigma", "0.5", "--alpha", "1", "--trials", "5"],
                 ["derivative", "--qubits", "1", "--trials", "5"]):
        code, text = _run(argv, tmp_path)
        assert code == 0, argv
        assert TOP_KEYS <= set(json.loads(text))


def test_dumps_formatting():
    text = dumps({"a": 0.1, "b": [1, float("inf")], "c": None, "d": True})
    assert '"a": 0.10000000000000001' in text
    assert '"inf"' in text
    assert json.loads(text)["d"] is True


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qrhc", "verify", "--ineq", "gross",
                          "--trials", "5", "--no-timestamp"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["command"] == "verify"
