import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from covlab.cli import (
    EXIT_BUDGET, EXIT_NOT_FOUND, EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, RunConfig, main, run_analyze,
)
from covlab.covers import affine_line_map
from covlab.ffield import make_field
from covlab.problem import load_problem

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"
GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def numeric_rows(text):
    rows = list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))
    return [{k: v for k, v in r.items()} for r in rows]


def test_analyze_csv_matches_golden(capsys):
    code, out, _ = run(capsys, "analyze", PROBLEMS / "kummer_f5.cov", "--max-ext", 2, "--format", "csv")
    assert code == EXIT_OK
    assert out == (GOLDEN / "kummer_f5_m2.csv").read_text()
    rows = numeric_rows(out)
    assert [(r["m"], r["injective"], r["surjective"]) for r in rows] == [("1", "true", "true"), ("2", "false", "false")]
    assert int(rows[1]["image_points"]) == 9


def test_csv_parses_back_to_report(capsys):
    f = load_problem(PROBLEMS / "kummer_f5.cov").covers["cube"]
    from covlab.covers import star_report

    rep = star_report(f, 3)
    _, out, _ = run(capsys, "analyze", PROBLEMS / "kummer_f5.cov", "--max-ext", 3, "--format", "csv")
    for row, r in zip(numeric_rows(out), rep.rows):
        assert int(row["source_points"]) == r.source_points
        assert int(row["off_diagonal_unramified"]) == r.off_diagonal_unramified
        assert (row["injective"] == "true") == r.injective


@pytest.mark.parametrize("fmt", ["table", "csv", "structured"])
def test_output_is_deterministic(capsys, fmt):
    args = ("analyze", PROBLEMS / "p1_f9.cov", "--max-ext", 2, "--format", fmt)
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second
    assert "methodology" in first[1]
    assert "seed" in first[1]


def test_structured_output(capsys):
    code, out, _ = run(capsys, "analyze", PROBLEMS / "kummer_f5.cov", "--max-ext", 2, "--format", "structured")
    d = json.loads(out)
    rep = d["reports"][0]
    assert rep["verdict_text"] == "refuted-at 2" and rep["truncated"] is False
    assert [r["m"] for r in rep["rows"]] == [1, 2]


def test_budget_truncation_marker_and_exit_code(capsys):
    code, out, _ = run(capsys, "analyze", PROBLEMS / "kummer_f5.cov", "--max-ext", 3, "--budget", 10, "--format", "csv")
    assert code == EXIT_BUDGET
    assert "TRUNCATED" in out
    assert len(numeric_rows(out)) == 1


def test_budget_from_environment(tmp_path):
    env = dict(os.environ, COVLAB_BUDGET="10")
    cmd = [sys.executable, "-m", "covlab.cli", "analyze", str(PROBLEMS / "kummer_f5.cov"), "--max-ext", "2"]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True)
    assert res.returncode == EXIT_BUDGET and "TRUNCATED" in res.stdout


def test_budget_during_load(capsys):
    code, out, _ = run(capsys, "analyze", PROBLEMS / "kummer_f5.cov", "--budget", 3, "--format", "structured")
    assert code == EXIT_BUDGET
    assert json.loads(out)["reports"][0]["truncated"]


@pytest.mark.parametrize("text,expected", [
    ("covlab-format 1\n[field F]\ngf = GF(5)\n[variety A]\nfield = F\nambient = affine 1\ndim = 1\nequation = x0 +* 2\n", EXIT_PARSE),
    ("covlab-format 1\n[field F]\ngf = GF(3^2)\nmodulus = [2, 0, 1]\n", EXIT_VALIDATION),
    ("covlab-format 1\n[field F]\ngf = GF(5)\n", EXIT_VALIDATION),
])
def test_exit_codes(tmp_path, capsys, text, expected):
    path = tmp_path / "p.cov"
    path.write_text(text)
    code, _, err = run(capsys, "analyze", path)
    assert code == expected and err.startswith("covlab:")


def test_missing_file(capsys):
    code, _, err = run(capsys, "analyze", "/nonexistent/x.cov")
    assert code == EXIT_PARSE and "no such file" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["analyze"])
    assert ei.value.code == 2


def test_run_analyze_api():
    f = affine_line_map(make_field(5), "x0^3")
    text = run_analyze(RunConfig(max_ext=2, format="csv"), f)
    assert text.splitlines()[1].endswith(",1,5,5,5,5,true,true,1,1,1,0,0,true,false")
    with pytest.raises(ValueError):
        RunConfig(budget=0)
    with pytest.raises(ValueError):
        RunConfig(format="xml")


def test_construct_kummer_round_trip(tmp_path, capsys):
    out = tmp_path / "k.cov"
    code, _, _ = run(capsys, "construct", "kummer", "--base", PROBLEMS / "line_f5.cov", "--u", "x0^2 + 1",
                     "--ell", 3, "-o", out)
    assert code == EXIT_OK
    prob = load_problem(out, verify_depth=2)
    assert list(prob.covers) == ["kummer"]
    code, text, _ = run(capsys, "analyze", out, "--max-ext", 3, "--format", "csv")
    rows = numeric_rows(text)
    assert [r["injective"] for r in rows] == ["true", "false", "true"]


def test_construct_product_round_trip(tmp_path, capsys):
    out = tmp_path / "p.cov"
    code, _, _ = run(capsys, "construct", "product", "--base", PROBLEMS / "line_f5.cov",
                     "--fiber", PROBLEMS / "line_f5.cov", "-o", out)
    assert code == EXIT_OK
    f = load_problem(out).covers["product"]
    assert not f.finite


def test_construct_section(tmp_path, capsys):
    out = tmp_path / "s.cov"
    args = ("construct", "section", "--input", PROBLEMS / "quadric_f3.cov", "--mode", "fill", "--dmax", 4)
    code, _, _ = run(capsys, *args, "-o", out)
    assert code == EXIT_OK
    prob = load_problem(out)
    assert set(prob.varieties) == {"X", "Z"} and "seed 20240601" in out.read_text()
    code, text, _ = run(capsys, *args)
    assert code == EXIT_OK and text == out.read_text()
    code, _, err = run(capsys, "construct", "section", "--input", PROBLEMS / "quadric_f3.cov", "--mode", "avoid",
                       "--dmax", 1, "--trials", 3)
    assert code == EXIT_NOT_FOUND and "seed" in err


def test_bounds_commands(capsys):
    code, out, _ = run(capsys, "bounds", "nonempty", "--sigma", 4, "--dim", 1, "--format", "structured")
    assert code == 0 and json.loads(out)["threshold"] == 9 and "formula" in json.loads(out)
    code, out, _ = run(capsys, "bounds", "crossover", "--sigma-z", 3, "--dim-z", 1, "--sigma-r", 2, "--dim-r", 0,
                       "--format", "structured")
    assert json.loads(out)["threshold"] == 7
    code, out, _ = run(capsys, "bounds", "surface", "--hodge", "1,0,4,0,45,0,4,0,1", "--format", "structured")
    d = json.loads(out)
    assert (d["chi"], d["k_squared"], d["n"]) == (5, 5, 54)
    code, out, _ = run(capsys, "bounds", "hodge-candidates", "--b1", 2, "--b2", 2, "--b3", 2, "--format", "csv")
    assert "count,54" in out and "closed_form,54" in out
    code, _, err = run(capsys, "bounds", "surface", "--hodge", "1,0,0")
    assert code == EXIT_VALIDATION
    code, _, err = run(capsys, "bounds", "crossover", "--sigma-z", 3, "--dim-z", 1, "--sigma-r", 2, "--dim-r", 1)
    assert code == EXIT_VALIDATION


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == EXIT_OK and "FAIL" not in out


def test_console_script_is_installed():
    res = subprocess.run(["covlab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("covlab ")


def test_fallback_backend_gives_identical_output():
    cmd = [sys.executable, "-m", "covlab.cli", "analyze", str(PROBLEMS / "p1_f9.cov"), "--max-ext", "2",
           "--format", "structured"]
    outs = [subprocess.run(cmd, env=dict(os.environ, COVLAB_NO_JIT=flag), capture_output=True, text=True,
                           check=True).stdout for flag in ("0", "1")]
    assert outs[0] == outs[1]
