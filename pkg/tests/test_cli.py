import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from defectlab import cli
from defectlab.report import CSV_FIELDS

DATA = Path(__file__).parent / "data"


def call(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = call(capsys, *argv)
    return code, json.loads(out)


def strip_timing(rep):
    rep = dict(rep)
    rep.pop("elapsed_ms")
    rep.pop("timing", None)
    return rep


def test_kv_verify_half(capsys):
    code, rep = report(capsys, "kv-verify", "--nu", "0.5")
    assert code == 0 and rep["pass"]
    (chk,) = rep["checks"]
    assert chk["lhs"] == pytest.approx(math.pi / 4, rel=1e-10)
    assert set(chk) == {"name", "lhs", "rhs", "rel_err", "tol", "pass", "metric", "params"}
    assert {"command", "params", "checks", "pass", "elapsed_ms"} <= set(rep)


def test_kv_verify_fubini(capsys):
    code, rep = report(capsys, "kv-verify", "--nu", "0.3", "--mode", "fubini")
    assert code == 0 and rep["checks"][0]["params"]["mode"] == "fubini"


def test_unmeetable_tolerance_exits_one(capsys):
    code, out, err = call(capsys, "kv-verify", "--nu", "0.7", "--tol", "1e-30")
    assert code == 1 and out == "" and "NonConvergenceError" in err


def test_loose_check_failure_exits_one(capsys):
    code, rep = report(capsys, "exponentiate", "--demo", "random", "--t", "2.7", "--tol", "0")
    assert code == 1 and not rep["pass"]


def test_nicholson_and_mellin(capsys):
    assert report(capsys, "nicholson", "--nu", "0.25", "--z", "1.0")[0] == 0
    code, rep = report(capsys, "mellin", "--nu", "0.0", "--beta", "2")
    assert code == 0 and rep["checks"][0]["lhs"] == pytest.approx(1.0, rel=1e-8)


def test_defect_basis(capsys, tmp_path):
    path = tmp_path / "profile.csv"
    code, rep = report(capsys, "defect-basis", "--cover", "3", "--profile-csv", str(path),
                       "--points", "50")
    assert code == 0
    assert len(rep["data"]["basis"]) == 5
    rows = list(csv.reader(path.open()))
    assert rows[0][0] == "r" and len(rows) == 51 and len(rows[0]) == 4


def test_lplc(capsys):
    code, rep = report(capsys, "lplc")
    kinds = {d["nu"]: d["kind"] for d in rep["data"]}
    assert code == 0
    assert kinds[0.999] != kinds[1.0]


def test_parseval_csv(capsys):
    code, out, _ = call(capsys, "parseval", "--format", "csv")
    rows = list(csv.DictReader(out.splitlines()))
    assert code == 0
    assert list(rows[0]) == list(CSV_FIELDS)
    assert rows[0]["pass"] == "True" and float(rows[0]["rel_err"]) <= 1e-6


def test_flow_scenario(capsys):
    code, rep = report(capsys, "flow-scenario", str(DATA / "scenario_loop.json"))
    assert code == 0
    assert [s["sheets"] for s in rep["data"]["steps"]] == [[0, 0], [0, 0], [2, 0], [1, 0], [0, 0]]


def test_flow_scenario_missing_file(capsys, tmp_path):
    code, _, err = call(capsys, "flow-scenario", str(tmp_path / "none.json"))
    assert code == 2 and "defectlab flow-scenario" in err


@pytest.mark.parametrize("s, t, winding", [(2.0, 2.0, 1), (-2.0, -2.0, 0), (0.0, 1.0, 0)])
def test_commutator(capsys, s, t, winding):
    code, rep = report(capsys, "commutator", "--s", str(s), "--t", str(t))
    assert code == 0
    assert abs(rep["data"]["winding"]) == winding
    assert rep["data"]["sheet_shift"] == -rep["data"]["winding"]


def test_commutator_finite_cover(capsys):
    code, rep = report(capsys, "commutator", "--cover", "2")
    assert code == 0 and rep["params"]["cover"] is not None


def test_commutator_through_puncture_is_input_error(capsys):
    code, _, err = call(capsys, "commutator", "--r", "1", "--theta", str(math.pi / 2), "--s", "1", "--t", "2")
    assert code == 2 and "PunctureError" in err


def test_exponentiate(capsys):
    code, rep = report(capsys, "exponentiate", "--demo", "rotation", "--t", "3.14159265")
    assert code == 0
    u = rep["data"]["U"]
    assert u[0][0] == pytest.approx(-1.0, abs=1e-8)
    code, rep = report(capsys, "exponentiate", "--demo", "random", "--dim", "5", "--t", "2.7")
    assert code == 0 and len(rep["data"]["U"]) == 5


def test_indices_interval_with_witness(capsys, tmp_path):
    path = tmp_path / "w.csv"
    code, rep = report(capsys, "indices-1d", "--n", "100", "--witness-csv", str(path))
    assert code == 0 and (rep["data"]["n_plus"], rep["data"]["n_minus"]) == (1, 1)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["index", "x", "witness_plus", "witness_minus"]
    assert len(rows) > 90


def test_indices_periodic(capsys):
    code, rep = report(capsys, "indices-1d", "--boundary", "periodic", "--n", "100")
    assert code == 0 and rep["data"] == {"n_plus": 0, "n_minus": 0}


def test_indices_small_grid_is_usage_error(capsys):
    assert call(capsys, "indices-1d", "--n", "20")[0] == 2


def test_resolvent(capsys):
    assert report(capsys, "resolvent")[0] == 0
    assert report(capsys, "resolvent", "--pair", "rotation")[0] == 0
    assert call(capsys, "resolvent", "--lambda1", "1j")[0] == 2


def test_bad_arguments_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        cli.run(["kv-verify", "--nu", "abc"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.run(["no-such-command"])
    assert info.value.code == 2


def test_output_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = call(capsys, "lplc", "--nu", "0.5", "-o", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["command"] == "lplc"


def test_seed_precedence(monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "17")
    assert cli.resolve_seed(None) == 17
    assert cli.resolve_seed(3) == 3
    monkeypatch.setenv(cli.SEED_ENV, "")
    assert cli.resolve_seed(None) == 0
    monkeypatch.setenv(cli.SEED_ENV, "x")
    with pytest.raises(ValueError):
        cli.resolve_seed(None)


def test_random_demo_deterministic_under_env_seed(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "11")
    a = strip_timing(report(capsys, "exponentiate", "--demo", "random")[1])
    b = strip_timing(report(capsys, "exponentiate", "--demo", "random")[1])
    c = strip_timing(report(capsys, "exponentiate", "--demo", "random", "--seed", "12")[1])
    assert a == b and a["params"]["seed"] == 11
    assert a["data"]["U"] != c["data"]["U"]


def test_all_subset(capsys):
    code, out, err = call(capsys, "all", "--only", "4", "7")
    rep = json.loads(out)
    assert code == 0
    assert set(rep["timing"]) == {"4", "7"}
    assert {c["params"]["criterion"] for c in rep["checks"]} == {4, 7}
    assert err.count("[PASS]") == 2


def test_all_deterministic(capsys):
    a = strip_timing(report(capsys, "all", "--only", "8", "--seed", "5")[1])
    b = strip_timing(report(capsys, "all", "--only", "8", "--seed", "5")[1])
    assert a == b


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "defectlab", "lplc", "--nu", "2.0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["data"][0]["kind"] == "LimitPoint"
