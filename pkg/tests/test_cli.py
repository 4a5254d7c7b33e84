from __future__ import annotations

import json

import pytest

from penum.cli import main
from penum.core import DelayTrace


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def spec_json(**kw):
    doc = {"n": 1, "k": 0, "a": 0, "m": 5, "profile": "structured", "t_const": 7, "p_coeffs": [1]}
    doc.update(kw)
    return json.dumps(doc)


def test_enumerate_path(files, capsys):
    graph = files("p3.edges", "3 2\n0 1\n1 2\n")
    assert main(["enumerate", "--problem", "vertex-cover", "--graph", graph, "--k", "1"]) == 0
    assert capsys.readouterr().out == "b\n"


def test_enumerate_synthetic_constant_delay(files, tmp_path):
    spec = files("s.json", spec_json())
    out, trace, rep = (str(tmp_path / n) for n in ("sols.txt", "t.csv", "r.json"))
    code = main(["enumerate", "--problem", "synthetic", "--spec", spec,
                 "--solutions", out, "--trace", trace, "--report", rep])
    assert code == 0
    t = DelayTrace.from_csv(open(trace).read())
    assert t.delays == [7, 7, 7, 7, 7, 0]
    assert len(open(out).read().splitlines()) == 5
    doc = json.loads(open(rep).read())
    assert doc["overall_pass"] and doc["runs"][0]["trace_csv_path"] == trace


def test_missing_file(capsys):
    code = main(["enumerate", "--problem", "horn-sat", "--cnf", "/nonexistent/x.cnf"])
    assert code == 1
    assert "cannot read" in capsys.readouterr().err


def test_missing_instance_argument():
    assert main(["enumerate", "--problem", "vertex-cover", "--k", "1"]) == 1


def test_parse_error_is_input_error(files):
    cnf = files("bad.cnf", "p cnf 2 1\n1 2 0\n")
    assert main(["enumerate", "--problem", "horn-sat", "--cnf", cnf]) == 1


def test_regularize_front_loaded_queue(files, tmp_path):
    spec = files("s.json", spec_json(profile="front_loaded", m=5, t_const=10))
    schedule = json.dumps({"t_const": 15, "p_coeffs": [1], "exponent": 2})
    queue = str(tmp_path / "q.csv")
    sols = str(tmp_path / "sols.txt")
    code = main(["regularize", "--problem", "synthetic", "--spec", spec, "--schedule", schedule,
                 "--queue-csv", queue, "--solutions", sols])
    assert code == 0
    rows = open(queue).read().splitlines()
    assert rows[0] == "i,queue_size_at_emission"
    assert max(int(r.split(",")[1]) for r in rows[1:]) == 5
    assert len(open(sols).read().splitlines()) == 5


def test_regularize_schedule_from_file(files):
    spec = files("s.json", spec_json(a=1, m=20, t_const=2))
    schedule = files("sched.json", json.dumps({"t_table": {"0": 4}, "exponent": 2}))
    assert main(["regularize", "--problem", "synthetic", "--spec", spec, "--schedule", schedule,
                 "--solutions", "/dev/null"]) == 0


def test_regularize_empty(files, tmp_path):
    spec = files("s.json", spec_json(m=0))
    sols = tmp_path / "sols.txt"
    assert main(["regularize", "--problem", "synthetic", "--spec", spec, "--solutions", str(sols)]) == 0
    assert sols.read_text() == ""


def test_regularize_liar(files, tmp_path):
    # structured a=2 really needs exponent 3; it declares 2
    spec = files("s.json", spec_json(a=2, m=50, t_const=1))
    schedule = json.dumps({"t_const": 2, "exponent": 2})
    rep = tmp_path / "r.json"
    code = main(["regularize", "--problem", "synthetic", "--spec", spec, "--schedule", schedule,
                 "--report", str(rep)])
    assert code == 2
    doc = json.loads(rep.read_text())
    assert not doc["overall_pass"] and doc["runs"][0]["violation_index"] >= 1


def test_regularize_allow_late(files, capsys):
    spec = files("s.json", spec_json(a=2, m=50, t_const=1))
    schedule = json.dumps({"t_const": 2, "exponent": 2})
    code = main(["regularize", "--problem", "synthetic", "--spec", spec, "--schedule", schedule, "--allow-late"])
    assert code == 2
    assert len(capsys.readouterr().out.splitlines()) == 50


def test_compare_horn(files, capsys):
    cnf = files("tiny.cnf", "p cnf 2 2\n1 0\n-1 2 0\n")
    assert main(["compare", "--problem", "horn-sat", "--cnf", cnf]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["equal"] and doc["enumerated"] == 1 and doc["completeness_check"]


def test_roundtrip_k2(files, capsys):
    graph = files("k2.edges", "2 1\n0 1\n")
    assert main(["roundtrip", "--problem", "vertex-cover", "--graph", graph, "--k", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pass"] and doc["solutions_count"] == 3


@pytest.mark.parametrize("command", ["roundtrip", "compare"])
def test_random_instances(command, capsys):
    assert main(["--seed", "3", command, "--problem", "horn-sat", "--random", "5"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 5


def test_fit_square_law(files, capsys):
    trace = DelayTrace.from_delays([1] + [3 * i * i for i in range(1, 4097)])
    path = files("t.csv", trace.to_csv())
    assert main(["fit", "--trace", path, "--window", "16", "4096"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["exponent_hat"] == pytest.approx(2.0, abs=1e-9)
    assert doc["index_range"] == [16, 4096]


def test_fit_too_short(files):
    path = files("t.csv", DelayTrace.from_delays([1, 2, 3]).to_csv())
    assert main(["fit", "--trace", path]) == 1


def test_report_over_traces(files, tmp_path):
    good = files("good.csv", DelayTrace.from_delays([5] * 20).to_csv())
    bad = files("bad.csv", DelayTrace.from_delays([5] * 10 + [99] + [5] * 9).to_csv())
    out = tmp_path / "r.json"
    assert main(["report", "--trace", good, "--scale", "5", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["overall_pass"]
    assert main(["report", "--trace", good, "--trace", bad, "--scale", "5", "--out", str(out)]) == 2
    assert [r["pass"] for r in json.loads(out.read_text())["runs"]] == [True, False]


def test_report_merges_run_reports(files, tmp_path, capsys):
    spec = files("s.json", spec_json())
    rep = str(tmp_path / "run.json")
    assert main(["enumerate", "--problem", "synthetic", "--spec", spec, "--report", rep]) == 0
    capsys.readouterr()
    assert main(["report", "--run", rep, "--run", rep]) == 0
    assert len(json.loads(capsys.readouterr().out)["runs"]) == 2


def test_outputs_are_deterministic(files, tmp_path):
    spec = files("s.json", spec_json(profile="front_loaded", m=30, a=1))
    blobs = []
    paths = [str(tmp_path / f"out.{ext}") for ext in ("sols", "csv", "json", "q")]
    for _ in range(2):
        assert main(["--seed", "1", "regularize", "--problem", "synthetic", "--spec", spec,
                     "--exponent", "2", "--solutions", paths[0], "--trace", paths[1],
                     "--report", paths[2], "--queue-csv", paths[3]]) == 0
        blobs.append([open(p, "rb").read() for p in paths])
    assert blobs[0] == blobs[1]


def test_cost_cap_from_environment(files, monkeypatch):
    spec = files("s.json", spec_json(m=100))
    monkeypatch.setenv("ENUM_COST_CAP", "50")
    assert main(["enumerate", "--problem", "synthetic", "--spec", spec]) == 2
