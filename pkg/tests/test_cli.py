import json

import pytest

from conftest import path3, skip3, unit3
from pctsp.cli import main
from pctsp.instance import load, save


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, inst in [("unit3", unit3()), ("path", path3()), ("skip", skip3())]:
        paths[name] = tmp_path / f"{name}.json"
        save(inst, paths[name])
    return paths


def test_gen(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert run(["gen", "--n", 8, "--seed", 42, "--out", out], capsys)[0] == 0
    assert load(out).n == 8
    first = out.read_bytes()
    run(["gen", "--n", 8, "--seed", 42, "--out", out], capsys)
    assert out.read_bytes() == first
    code, text, _ = run(["gen", "--n", 1], capsys)
    assert code == 0 and json.loads(text)["n"] == 1


def test_gen_unwritable(capsys):
    code, _, err = run(["gen", "--n", 3, "--out", "/nonexistent/dir/x.json"], capsys)
    assert code == 2 and "cannot write" in err


def test_solve_best(files, capsys):
    code, text, _ = run(["solve", files["unit3"], "--json"], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["H"] == 3.0 and doc["certified"] is True
    code, text, _ = run(["solve", files["skip"], "--json"], capsys)
    assert json.loads(text)["H"] == pytest.approx(2.1)


@pytest.mark.parametrize("mode", ["rounding", "primal-dual", "randomized", "exact"])
def test_solve_modes(files, capsys, mode):
    code, text, _ = run(["solve", files["path"], "--mode", mode, "--json"], capsys)
    assert code == 0
    doc = json.loads(text)
    assert doc["mode"] == mode
    assert ("H" in doc) or ("mean" in doc) or ("opt" in doc)


def test_solve_text_mirrors_json(files, capsys):
    _, as_json, _ = run(["solve", files["unit3"], "--json"], capsys)
    _, as_text, _ = run(["solve", files["unit3"]], capsys)
    keys = [line.split()[0] for line in as_text.splitlines()]
    assert "H" in keys and "certificates[0].name" in keys
    assert json.loads(as_json)["H"] == json.loads(as_text.split("\nH ")[1].split("\n")[0])


def test_solve_invalid(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "root": 0, "metric": [[0, 1], [2, 0]], "penalties": [0, 1]}')
    assert run(["solve", bad], capsys)[0] == 2
    assert run(["solve", tmp_path / "missing.json"], capsys)[0] == 2


def test_flag_conflicts(files, capsys):
    assert run(["solve", files["unit3"], "--trials", 5], capsys)[0] == 2
    assert run(["solve", files["unit3"], "--mode", "rounding", "--eq1"], capsys)[0] == 2


def test_event_log_and_lp_dump(files, tmp_path, capsys):
    events, dump = tmp_path / "ev.jsonl", tmp_path / "lp.txt"
    code, _, _ = run(["solve", files["path"], "--mode", "primal-dual",
                      "--event-log", events, "--lp-dump", dump], capsys)
    assert code == 0
    lines = events.read_text().splitlines()
    assert lines and all({"time", "type", "components"} <= json.loads(l).keys() for l in lines)
    assert dump.read_text().startswith("# pctsp LP dump v1")


def test_exact_and_verify(files, capsys):
    code, text, _ = run(["exact", files["skip"], "--json"], capsys)
    assert code == 0 and json.loads(text)["opt"] == pytest.approx(2.1)
    code, text, _ = run(["verify", files["path"], "--json"], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["all_passed"] and doc["ratio_opt"] is not None
    code, text, _ = run(["verify", files["skip"], "--json"], capsys)
    names = {c["name"]: c["passed"] for c in json.loads(text)["certificates"]}
    assert names["optimum-below-H"] and names["best-of-bound"]


def test_verify_single_vertex(tmp_path, capsys):
    p = tmp_path / "one.json"
    p.write_text('{"n": 1, "root": 0, "metric": [[0]], "penalties": [4]}')
    assert run(["verify", p], capsys)[0] == 0


def test_bench_deterministic(capsys):
    argv = ["bench", "--n-range", "4:6", "--count", 5, "--seed", 7, "--json"]
    code, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert code == 0 and first == second
    doc = json.loads(first)
    for row in doc["rows"]:
        assert row["max_H_over_LP"] <= 1.91457
        assert row["max_OPT_over_LP"] <= row["max_H_over_LP"] + 1e-12
    _, table, _ = run(argv[:-1], capsys)
    assert table.splitlines()[0].split()[:2] == ["n", "count"]


def test_bench_bad_range(capsys):
    assert run(["bench", "--n-range", "x"], capsys)[0] == 2
