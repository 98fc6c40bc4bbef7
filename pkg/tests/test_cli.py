import json

import pytest

from cegio.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _strip(rec):
    rec = dict(rec)
    rec.pop("elapsed_seconds")
    return rec


def test_run_booth(capsys):
    code, out, _ = _run(capsys, "run", "--bench", "booth", "--eta", "1")
    assert code == 0
    rec = json.loads(out)
    assert rec["status"] == "Optimal" and rec["value"]["exact"] == "0"
    assert [c["exact"] for c in rec["minimizer"]] == ["1", "3"]


def test_run_expression_csv(capsys, tmp_path):
    code, out, _ = _run(capsys, "run", "--expr", "(x0 - 0.5)^2", "--box=-1:1", "--eta", "1",
                        "--format", "csv", "--out", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0].startswith("benchmark,algorithm")
    assert (tmp_path / "run.csv").read_text() == out


def test_run_is_reproducible(capsys):
    argv = ("run", "--bench", "himmelblau", "--eta", "1", "--seed", "4", "--algo", "s")
    a = json.loads(_run(capsys, *argv)[1])
    b = json.loads(_run(capsys, *argv)[1])
    assert _strip(a) == _strip(b)


@pytest.mark.parametrize("argv", [
    ("run", "--bench", "nope"),
    ("run", "--expr", "x0 +", "--box", "0:1"),
    ("run", "--expr", "x0", "--box", "1:0"),
    ("run", "--bench", "booth", "--algo", "g,f"),
    ("bench", "--filter", "bumpy"),
    ("bench", "--ids", "99"),
])
def test_usage_errors(capsys, argv):
    assert _run(capsys, *argv)[0] == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--eta", "many"])
    assert exc.value.code == 2


def test_missing_solver_exit_3(capsys, tmp_path):
    ini = tmp_path / "s.ini"
    ini.write_text("[ghost]\ncommand = /nonexistent/solver\n")
    code, _, err = _run(capsys, "run", "--bench", "booth", "--eta", "0", "--backend", "ghost",
                        "--solvers-config", str(ini))
    assert code == 3 and "solver" in err


def test_cap_exceeded_exit_3(capsys):
    assert _run(capsys, "run", "--bench", "booth", "--eta", "2", "--cap", "10")[0] == 3


def test_budget_exit_1(capsys):
    code, out, _ = _run(capsys, "run", "--bench", "booth", "--eta", "2", "--budget", "1")
    assert code == 1 and json.loads(out)["status"] == "BudgetExhausted"


def test_bench_convex(capsys, tmp_path):
    code, out, err = _run(capsys, "bench", "--filter", "convex", "--algo", "f", "--eta", "1",
                          "--out", str(tmp_path))
    assert code == 0 and "10/10" in err
    lines = out.splitlines()
    assert len(lines) == 11 and lines[0].startswith("id,key,name")
    rows = [json.loads(x) for x in (tmp_path / "bench.jsonl").read_text().splitlines()]
    assert all(r["pass"] for r in rows) and {r["algorithm"] for r in rows} == {"f"}


def test_bench_jsonl_and_multiple_algorithms(capsys):
    code, out, _ = _run(capsys, "bench", "--ids", "2,24", "--algo", "g,f", "--eta", "1", "--format", "json")
    rows = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and [(r["id"], r["algorithm"]) for r in rows] == [(2, "g"), (2, "f"), (24, "g"), (24, "f")]


def test_bench_parallel_matches_serial(capsys):
    argv = ("bench", "--ids", "2,7,16", "--eta", "1", "--format", "json")
    serial = [_strip(json.loads(x)) for x in _run(capsys, *argv)[1].splitlines()]
    par = [_strip(json.loads(x)) for x in _run(capsys, *argv, "--jobs", "2")[1].splitlines()]
    assert serial == par


def test_compare_writes_series(capsys, tmp_path):
    code, out, _ = _run(capsys, "compare", "--bench", "ursem03_plane", "--eta", "1", "--init", "1.2",
                        "--step", "0.1", "--out", str(tmp_path))
    assert code == 0
    for name in ("cegio.csv", "simulated_annealing.csv", "pattern_search.csv", "summary.csv", "summary.json"):
        assert (tmp_path / name).exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    by = {r["method"]: r for r in summary["rows"]}
    assert by["cegio"]["value"] == "-3"
    assert float(by["pattern_search"]["value_decimal"]) > -2.5


def test_compare_out_is_a_file_exit_3(capsys, tmp_path):
    f = tmp_path / "file"
    f.write_text("")
    assert _run(capsys, "compare", "--bench", "booth", "--eta", "0", "--out", str(f))[0] == 3


def test_list(capsys):
    code, out, _ = _run(capsys, "list", "--filter", "convex")
    assert code == 0 and len(out.splitlines()) == 10 and "booth" in out


def test_unnamed_box_covers_every_variable(capsys):
    code, out, _ = _run(capsys, "run", "--expr", "(x0 - 0.3)^2 + abs(x1)", "--box=-1:1", "--eta", "1")
    rec = json.loads(out)
    assert code == 0 and len(rec["box"]) == 2 and rec["value"]["exact"] == "0"
