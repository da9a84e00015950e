from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from qforge.circuit.qasm import from_qasm
from qforge.cli import EXIT_SIM_CAP, EXIT_UNKNOWN_DEMO, EXIT_UNWRITABLE, main


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def _table(text):
    lines = text.splitlines()
    start = lines.index("label\tprobability") + 1
    rows = []
    for line in lines[start:]:
        if "\t" not in line:
            break
        label, prob = line.split("\t")
        rows.append((label, float(prob)))
    return rows


def test_unknown_demo(capsys):
    code, _ = run_cli("demo", "nope")
    assert code == EXIT_UNKNOWN_DEMO == 2
    assert "unknown demo" in capsys.readouterr().err


def test_negative_workspace():
    assert run_cli("stats", "qpe", "--workspace", "-1")[0] == EXIT_UNKNOWN_DEMO


def test_simulator_cap(monkeypatch, capsys):
    monkeypatch.setenv("QFORGE_SIM_CAP", "3")
    code, _ = run_cli("demo", "qpe")
    assert code == EXIT_SIM_CAP == 3
    assert "QFORGE_SIM_CAP" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    target = tmp_path / "missing" / "out.qasm"
    assert run_cli("export-qasm", "qpe", str(target))[0] == EXIT_UNWRITABLE == 4


def test_shor_demo():
    code, text = run_cli("demo", "shor", "--n", "15")
    assert code == 0
    assert "factors: 3 5" in text.splitlines()


def test_grover_quadratic_table():
    code, text = run_cli("demo", "grover-quadratic")
    assert code == 0
    rows = dict(_table(text))
    assert rows["0.5"] + rows["-0.5"] >= 0.9
    assert sum(rows.values()) == pytest.approx(1.0, abs=1e-8)
    assert "mcx_recompilation=true" in text and "mcx_recompilation=false" in text


@pytest.mark.parametrize("name", ["qpe", "qrange", "db-oracle", "shor"])
def test_demo_tables_are_distributions(name):
    code, text = run_cli("demo", name)
    assert code == 0
    assert sum(p for _, p in _table(text)) == pytest.approx(1.0, abs=1e-8)


def test_export_is_deterministic_and_parseable(tmp_path):
    a, b = tmp_path / "a.qasm", tmp_path / "b.qasm"
    assert run_cli("export-qasm", "qrange", str(a))[0] == 0
    assert run_cli("export-qasm", "qrange", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    qc = from_qasm(a.read_text())
    assert qc.num_qubits > 0


def test_export_raw_is_wider(tmp_path):
    raw, compiled = tmp_path / "raw.qasm", tmp_path / "c.qasm"
    run_cli("export-qasm", "qrange", str(raw), "--raw")
    run_cli("export-qasm", "qrange", str(compiled))
    assert from_qasm(raw.read_text()).num_qubits > from_qasm(compiled.read_text()).num_qubits


def test_export_empty_demo_is_header_only(tmp_path):
    path = tmp_path / "empty.qasm"
    assert run_cli("export-qasm", "empty", str(path))[0] == 0
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    assert lines[:2] == ["OPENQASM 2.0;", 'include "qelib1.inc";']
    assert all(not ln.startswith(("h ", "x ", "cx ")) for ln in lines)
    assert run_cli("demo", "empty")[0] == EXIT_UNKNOWN_DEMO


def test_stats_json_schema():
    code, text = run_cli("stats", "grover-quadratic", "--json", "--workspace", "4")
    assert code == 0
    records = json.loads(text)
    fields = {"demo", "qubits", "depth", "counts", "workspace", "mcx_recompilation"}
    assert [set(r) for r in records] == [fields, fields]
    w0, w4 = records
    assert (w0["workspace"], w4["workspace"]) == (0, 4)
    assert w4["depth"] < w0["depth"]
    assert w4["qubits"] == w0["qubits"] + 4


def test_stats_match_demo_output():
    _, stats = run_cli("stats", "grover-quadratic", "--json")
    (rec,) = json.loads(stats)
    _, demo = run_cli("demo", "grover-quadratic")
    line = next(ln for ln in demo.splitlines() if "mcx_recompilation=true" in ln)
    assert f"qubits={rec['qubits']}" in line
    assert f"depth={rec['depth']}" in line
    assert f"cx={rec['counts']['cx']}" in line


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qforge", "demo", "qpe"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert proc.stdout.startswith("demo: qpe")
