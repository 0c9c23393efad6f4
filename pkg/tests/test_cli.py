import csv
import io
import json
import math
import subprocess
import sys

import pytest

from nonlocal_cascade import cli


def run(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_chsh_cascade_auto_theta(capsys):
    code, out, _ = run(capsys, "chsh-cascade", "--coeffs", "0.70710678,0.70710678", "--n", "3",
                       "--epsilon", "0.01", "--auto-theta")
    assert code == 0
    assert out.splitlines()[0] == "k,gamma_k,simulated,bound,violated"
    rows = rows_of(out)
    assert [r["k"] for r in rows] == ["1", "2", "3"]
    assert all(r["violated"] == "true" for r in rows)
    assert all(0 < float(r["gamma_k"]) < 1 for r in rows)


def test_svetlichny_boundary_has_no_second_charlie(capsys):
    code, out, err = run(capsys, "svetlichny-cascade", "--sin2-2alpha", "0.888888889", "--n", "2")
    assert code == 3
    assert out == ""
    assert "no feasible theta for k=2" in err
    assert len(err.strip().splitlines()) == 1


def test_verify_closed_form_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "appendix-a")
    assert code == 0
    rows = rows_of(out)
    assert rows and all(r["passed"] == "true" for r in rows)


def test_verify_all_suites(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "all", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["all_passed"] is True
    assert {r["suite"] for r in doc["rows"]} >= {"appendix-a", "sequential-bobs", "svetlichny", "two-charlies"}


@pytest.mark.parametrize("argv", [
    ("chsh-cascade", "--coeffs", "0.6,0.8", "--n", "2"),                    # ascending
    ("chsh-cascade", "--coeffs", "0.5,0.5", "--n", "2"),                    # not normalized
    ("chsh-cascade", "--coeffs", "0.8,0.6", "--n", "2", "--theta", "0.9"),  # theta > pi/4
    ("chsh-cascade", "--coeffs", "0.8,0.6", "--n", "2", "--theta", "0"),
    ("chsh-cascade", "--coeffs", "0.8,0.6", "--n", "2", "--epsilon", "0"),
    ("chsh-cascade", "--coeffs", "0.8,0.6", "--n", "0"),
    ("svetlichny-cascade", "--sin2-2alpha", "0.4", "--n", "1"),
    ("svetlichny-cascade", "--sin2-2alpha", "1.5", "--n", "1"),
    ("sweep", "chsh-gamma", "--param", "theta=0.1:0.2"),
    ("sweep", "chsh-gamma", "--param", "alpha=0.1:0.2:3"),
])
def test_invalid_arguments_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.strip()


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["chsh-cascade", "--n", "2"])
    assert exc.value.code == 2


def test_search_failure_exit_3(capsys):
    code, _, err = run(capsys, "find-theta", "--n", "7", "--L", "1")
    assert code == 3
    assert "n=7" in err


def test_unwritable_output_exit_4(capsys, tmp_path):
    target = tmp_path / "missing" / "out.csv"
    code, _, err = run(capsys, "find-theta", "--n", "2", "--L", "1", "--output", str(target))
    assert code == 4
    assert "cannot write" in err


def test_normalize_records_factor(capsys):
    code, out, _ = run(capsys, "chsh-cascade", "--coeffs", "1,3", "--normalize", "--n", "1",
                       "--theta", "0.3", "--format", "json")
    assert code == 0
    meta = json.loads(out)["meta"]
    assert meta["normalization_factor"] == pytest.approx(1 / math.sqrt(10), rel=1e-11)


def test_theta_frac_pi(capsys):
    _, a, _ = run(capsys, "chsh-cascade", "--coeffs", "0.8,0.6", "--n", "2", "--theta-frac-pi", "0.125")
    _, b, _ = run(capsys, "chsh-cascade", "--coeffs", "0.8,0.6", "--n", "2", "--theta", repr(math.pi / 8))
    assert a == b


def test_explicit_gammas(capsys):
    code, out, _ = run(capsys, "chsh-cascade", "--coeffs", "0.8,0.6", "--n", "2", "--theta", "0.4",
                       "--gammas", "0.3,1")
    assert code == 0
    rows = rows_of(out)
    assert [float(r["gamma_k"]) for r in rows] == [0.3, 1.0]
    for r in rows:
        assert float(r["simulated"]) == pytest.approx(float(r["bound"]), abs=1e-10)


def test_json_layout(capsys):
    code, out, _ = run(capsys, "chsh-cascade", "--coeffs", "0.8,0.6", "--dim-b", "3", "--n", "2",
                       "--theta", "0.3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"meta", "rows"}
    meta = doc["meta"]
    assert meta["command"] == "chsh-cascade"
    assert meta["version"] == "0.1.0"
    assert meta["columns"] == ["k", "gamma_k", "simulated", "bound", "violated"]
    assert "tolerances" in meta and "spec" in meta
    assert [list(r) for r in doc["rows"]] == [meta["columns"]] * 2


def test_csv_format_details(capsys):
    _, out, _ = run(capsys, "sweep", "chsh-gamma", "--param", "theta=0.05:0.7:3", "--n", "8")
    assert "\r" not in out and out.endswith("\n")
    rows = rows_of(out)
    for r in rows:
        for key, value in r.items():
            if value:
                assert len(value.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 12
    # infeasible observers appear as empty cells
    assert rows[-1]["gamma_8"] == ""


def test_violation_flags_recomputable(capsys):
    for argv, col, threshold in [
        (("chsh-cascade", "--coeffs", "0.8,0.6", "--n", "3", "--theta", "0.2", "--gammas", "0.2,0.5,1"), "simulated", 2),
        (("svetlichny-cascade", "--sin2-2alpha", "1", "--n", "3", "--theta", "0.7", "--gammas", "0.5,0.9,1"), "simulated", 4),
        (("chsh-cascade", "--coeffs", "0.70710678,0.70710678", "--n", "4"), "simulated", 2),
    ]:
        code, out, _ = run(capsys, *argv)
        assert code == 0
        for r in rows_of(out):
            assert (r["violated"] == "true") == (float(r[col]) > threshold)


def test_sweep_gamma_increasing_in_theta(capsys):
    code, out, _ = run(capsys, "sweep", "chsh-gamma", "--param", f"theta=0.01:{math.pi / 4!r}:100",
                       "--L", "1", "--n", "1")
    assert code == 0
    g = [float(r["gamma_1"]) for r in rows_of(out)]
    assert len(g) == 100
    assert all(a < b for a, b in zip(g, g[1:]))


def test_sweep_theta_n_decreasing(capsys):
    code, out, _ = run(capsys, "sweep", "theta-n", "--param", "n=1:5:5", "--L", "1")
    assert code == 0
    t = [float(r["theta_n"]) for r in rows_of(out)]
    # n = 1 and n = 2 both reach the end of the angle range
    assert t[0] == t[1] == pytest.approx(math.pi / 4)
    assert all(a > b for a, b in zip(t[1:], t[2:]))


def test_sweep_svetlichny_max_k(capsys):
    code, out, _ = run(capsys, "sweep", "svetlichny-max-k", "--param", "sin2_2alpha=0.55:1:10",
                       "--n", "3", "--grid-points", "2000")
    assert code == 0
    rows = rows_of(out)
    ks = [int(r["max_k"]) for r in rows]
    assert all(a <= b for a, b in zip(ks, ks[1:]))
    for r, k in zip(rows, ks):
        if float(r["sin2_2alpha"]) <= 8 / 9:
            assert k == 1
    assert ks[-1] == 2


def test_sweep_two_params_lexicographic(capsys):
    code, out, _ = run(capsys, "sweep", "chsh-gamma", "--param", "L=0.5:1:2", "--param", "theta=0.1:0.3:3")
    assert code == 0
    rows = rows_of(out)
    pairs = [(float(r["L"]), float(r["theta"])) for r in rows]
    assert pairs == [(0.5, 0.1), (0.5, 0.2), (0.5, 0.3), (1.0, 0.1), (1.0, 0.2), (1.0, 0.3)]


@pytest.mark.parametrize("threads", ["1", "3", "0"])
def test_thread_count_does_not_change_output(capsys, monkeypatch, threads):
    argv = ("sweep", "theta-n", "--param", "n=1:4:4", "--param", "L=0.6:1:3")
    monkeypatch.setenv("NONLOCAL_CASCADE_THREADS", "1")
    _, reference, _ = run(capsys, *argv)
    monkeypatch.setenv("NONLOCAL_CASCADE_THREADS", threads)
    _, out, _ = run(capsys, *argv)
    assert out == reference


@pytest.mark.parametrize("value", ["-1", "many"])
def test_bad_thread_env(capsys, monkeypatch, value):
    monkeypatch.setenv("NONLOCAL_CASCADE_THREADS", value)
    code, _, err = run(capsys, "sweep", "theta-n", "--param", "n=1:2:2")
    assert code == 2
    assert "NONLOCAL_CASCADE_THREADS" in err


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "nonlocal_cascade.cli", "find-theta", "--n", "1", "--L", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("k,gamma_k,theta_n,theta\n")
