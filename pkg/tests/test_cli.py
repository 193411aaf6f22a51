import csv
import json
import subprocess
import sys

import pytest

from ising_currents import cli
from ising_currents.errors import PreconditionError
from ising_currents.graph import complete_graph, save_graph
from ising_currents.report import OUTPUT_ENV, TABLE_COLUMNS, emit_table, run_suite
from ising_currents.suites import SuiteConfig


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_expansions_complete4(tmp_path, capsys):
    out = tmp_path / "exp.json"
    code, text, _ = run(["verify", "expansions", "--generator", "complete:4", "--seeds", "20", "--out", str(out)], capsys)
    assert code == 0 and "PASS" in text
    report = json.loads(out.read_text())
    assert report["summary"]["pass"] and report["summary"]["records"] > 0
    for r in report["records"]:
        assert {"identity", "anchor", "instance", "lhs", "rhs", "gap", "tolerance", "passed"} <= set(r)


def test_verify_wick_grid(tmp_path, capsys):
    code, _, _ = run(["verify", "wick", "--generator", "grid:3x3", "--beta", "0.4", "--out", str(tmp_path / "w.json")], capsys)
    assert code == 0


def test_output_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "reports"))
    code, _, _ = run(["verify", "onsager"], capsys)
    assert code == 0
    assert (tmp_path / "reports" / "onsager.json").exists()


def test_failing_tolerance_exits_one(tmp_path, capsys):
    code, text, _ = run(["verify", "onsager", "--tolerance", "1e-30", "--out", str(tmp_path / "o.json")], capsys)
    assert code == 1 and "FAIL" in text


def test_question2_table(tmp_path, capsys):
    table = tmp_path / "q2.csv"
    code, _, _ = run(["verify", "question2", "--out", str(tmp_path / "q.json"), "--table", str(table)], capsys)
    assert code == 0
    rows = list(csv.reader(table.open()))
    assert tuple(rows[0]) == TABLE_COLUMNS and len(rows) > 3


def test_malformed_graph(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["compute", "corr", "--graph", str(bad), "--sites", "0,1"], capsys)
    assert code == 3 and "malformed graph" in err
    code, _, _ = run(["compute", "corr", "--graph", str(tmp_path / "missing.json")], capsys)
    assert code == 3
    code, _, _ = run(["compute", "z", "--generator", "star:4"], capsys)
    assert code != 0


def test_cap_and_usage_codes(capsys):
    code, _, err = run(["compute", "z", "--generator", "grid:5x5"], capsys)
    assert code == 4 and "cap" in err
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "no-such-suite"])
    assert exc.value.code == 2
    code, _, _ = run(["compute", "corr", "--sites", "0"], capsys)
    assert code == 2
    code, _, _ = run(["compute", "corr", "--generator", "path:3", "--sites", "0,9"], capsys)
    assert code == 2


def test_compute_methods_agree(tmp_path, capsys):
    path = tmp_path / "g.json"
    save_graph(complete_graph(3, beta=0.4, h=0.2), path)
    values = []
    for method in ("spin", "current", "ht", "fk"):
        code, text, _ = run(["compute", "corr", "--graph", str(path), "--sites", "0,1", "--method", method], capsys)
        assert code == 0
        values.append(json.loads(text)["value"])
    assert max(values) - min(values) < 1e-12
    code, text, _ = run(["compute", "phi-s", "--generator", "path:3", "--beta", "0.5", "--S", "0,1", "--x0", "0"], capsys)
    assert code == 0 and 0 < json.loads(text)["value"] < 1


def test_sample_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    argv = ["sample", "--generator", "path:2", "--beta", "0.5", "--sites", "0,1", "--steps", "3200", "--burn-in", "100", "--batches", "8", "--seed", "2", "--out", str(out)]
    code, text, _ = run(argv, capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["batch", "observable", "mean"] and len(rows) == 9
    first = out.read_text()
    run(argv, capsys)
    assert out.read_text() == first
    assert json.loads(text)["samples"] == 3200


def test_onsager_and_sweep_tables(tmp_path, capsys):
    code, _, _ = run(["onsager", "--beta-grid", "0.1:0.3:0.1", "--width", "4", "--out", str(tmp_path / "o.csv")], capsys)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "o.csv").open()))
    assert [r["beta"] for r in rows[::3]] == ["0.1", "0.2", "0.3"]
    code, _, _ = run(["sweep", "--size", "4", "--beta", "0.2", "0.3", "--sweeps", "2000", "--out", str(tmp_path / "t.csv")], capsys)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "t.csv").open()))
    assert {r["method"] for r in rows} == {"monte-carlo", "transfer-matrix", "agreement"}
    assert all(float(r["value"]) < 3 for r in rows if r["method"] == "agreement")


def test_report_determinism():
    cfg = SuiteConfig("switching", seed=4, trials=3)
    a, b = run_suite(cfg), run_suite(cfg)
    assert json.dumps(a.content()) == json.dumps(b.content())
    assert "timing" in a.to_dict() and "timing" not in a.content()


def test_emit_table(tmp_path):
    path = emit_table([{"beta": 0.1, "h": 0.0, "observable": "m", "value": 1 / 3, "stderr": 0.0, "method": "exact"}], tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines == ["beta,h,observable,value,stderr,method", "0.1,0.0,m,0.3333333333333333,0.0,exact"]
    with pytest.raises(PreconditionError):
        emit_table([], tmp_path / "empty.csv")
    assert not (tmp_path / "empty.csv").exists()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ising_currents.cli", "onsager", "--beta", "0.6", "--width", "4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][1]["value"] == pytest.approx(0.9736086674403005)
