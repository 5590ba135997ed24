import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from mrules.cli import EXIT_CODES, main
from mrules.certificates import CertVerdict

from conftest import CATALOG, FIXTURES

GOLDEN = FIXTURES / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_kkt(capsys):
    code, out, _ = run(capsys, "check", CATALOG / "01_circle_max_x1.toml")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "KKT"
    assert doc["lambda"][1] == pytest.approx(0.5, abs=1e-9)
    assert doc["normalization"] == "lambda0"


def test_check_not_optimal(capsys):
    code, out, _ = run(capsys, "check", CATALOG / "02_circle_interior.toml")
    doc = json.loads(out)
    assert code == 3 and doc["verdict"] == "NOT_OPTIMAL"
    assert doc["direction"] == pytest.approx([1.0, 0.0])
    assert doc["gain"] > 0


def test_check_degenerate(capsys):
    code, out, _ = run(capsys, "check", CATALOG / "06_dependent_equalities.toml")
    assert code == 4 and json.loads(out)["verdict"] == "DEGENERATE"


def test_check_fritz_john_flag(capsys):
    code, out, _ = run(capsys, "check", CATALOG / "01_circle_max_x1.toml", "--fritz-john")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "FJ" and doc["normalization"] == "l1"
    assert doc["lambda"] == pytest.approx([2 / 3, 1 / 3], abs=1e-9)


@pytest.mark.parametrize("name", ["malformed.toml", "bad_expression.toml", "circle_outside.toml",
                                  "circle_wrong_dimension.toml", "infeasible_candidate.toml",
                                  "does_not_exist.toml"])
def test_check_input_errors(capsys, name):
    code, out, err = run(capsys, "check", FIXTURES / name)
    assert code == 1 and out == "" and "input error" in err


def test_check_numerical_failure(capsys):
    # the norm objective is not Gateaux differentiable at the candidate
    code, _, err = run(capsys, "check", FIXTURES / "norm_at_origin.toml")
    assert code == 2 and "LinearityViolation" in err


def test_check_out_file(capsys, tmp_path):
    target = tmp_path / "cert.json"
    code, out, _ = run(capsys, "check", CATALOG / "12_ball_top.toml", "--out", target)
    assert code == 0 and target.read_text() == out


def test_check_tolerance_flags(capsys):
    code, out, _ = run(capsys, "check", CATALOG / "01_circle_max_x1.toml", "--act-tol", "1e-6",
                       "--stat-tol", "1e-6", "--diff-t0", "0.001", "--diff-depth", "3",
                       "--diff-tol", "1e-5")
    assert code == 0 and json.loads(out)["lambda"][1] == pytest.approx(0.5, abs=1e-6)


def test_bad_flag_values():
    with pytest.raises(SystemExit):
        main(["check", str(CATALOG / "01_circle_max_x1.toml"), "--stat-tol", "-1"])


def test_near_active_warning(capsys, caplog, tmp_path):
    path = tmp_path / "near.toml"
    path.write_text('[problem]\nkind = "inequality"\nvars = ["x"]\nobjective = "-x^2"\n'
                    'ineq = ["x + 5e-9"]\n[candidate]\npoint = [0.0]\n')
    code, out, err = run(capsys, "check", path)
    assert code == 0 and json.loads(out)["near_active"] == [0]
    assert "within" in caplog.text


@pytest.mark.parametrize("stem", sorted(p.stem for p in GOLDEN.glob("*.json")))
def test_golden_documents(capsys, stem):
    code, out, _ = run(capsys, "check", CATALOG / f"{stem}.toml")
    assert out == (GOLDEN / f"{stem}.json").read_text()


def test_exit_codes_total():
    assert set(EXIT_CODES) == set(CertVerdict)
    assert EXIT_CODES[CertVerdict.KKT] == EXIT_CODES[CertVerdict.FJ] == 0


# -- ascend ------------------------------------------------------------------

def test_ascend_nonstationary(capsys):
    code, out, _ = run(capsys, "ascend", CATALOG / "07_circle_equality_nonoptimal.toml")
    doc = json.loads(out)
    assert code == 3 and doc["gain"] > 0 and abs(doc["residuals"][0]) <= 1e-8


def test_ascend_stationary_refuses(capsys):
    code, out, _ = run(capsys, "ascend", CATALOG / "01_circle_max_x1.toml")
    assert code == 0 and out.strip() == "candidate is FJ-stationary"


def test_ascend_infeasible(capsys):
    code, _, err = run(capsys, "ascend", FIXTURES / "infeasible_candidate.toml")
    assert code == 1 and "InfeasibleCandidate" in err


# -- diffcheck ---------------------------------------------------------------

def test_diffcheck_polynomial(capsys):
    code, out, _ = run(capsys, "diffcheck", CATALOG / "01_circle_max_x1.toml", "--function", "ineq:0")
    entries = json.loads(out)["functions"]
    assert code == 0 and [e["verdict"] for e in entries] == ["HADAMARD_CONSISTENT"]


def test_diffcheck_parabola(capsys):
    code, out, _ = run(capsys, "diffcheck", CATALOG / "15_parabola_indicator.toml", "--function", "0")
    (entry,) = json.loads(out)["functions"]
    assert entry["verdict"] == "GATEAUX" and entry["function"] == "objective"
    assert entry["witness"]["directions"][1] == [1.0, 0.005]


def test_diffcheck_norm(capsys):
    code, out, _ = run(capsys, "diffcheck", FIXTURES / "norm_at_origin.toml", "--function", "objective")
    assert json.loads(out)["functions"][0]["verdict"] == "DIRECTIONAL_NOT_LINEAR"


def test_diffcheck_all_functions(capsys):
    code, out, _ = run(capsys, "diffcheck", FIXTURES / "norm_at_origin.toml")
    labels = [e["function"] for e in json.loads(out)["functions"]]
    assert labels == ["objective", "ineq:0", "ineq:1"]


@pytest.mark.parametrize("selector", ["eq:0", "7", "nope"])
def test_diffcheck_unresolvable(capsys, selector):
    code, _, err = run(capsys, "diffcheck", CATALOG / "01_circle_max_x1.toml", "--function", selector)
    assert code == 1


# -- corpus ------------------------------------------------------------------

def test_corpus_catalog(capsys):
    code, out, _ = run(capsys, "corpus", CATALOG)
    lines = out.strip().splitlines()
    assert code == 0 and lines[-1] == "15/15 passed"
    names = [line.split()[0] for line in lines[:-1]]
    assert names == sorted(names)


def test_corpus_perturbed(capsys, tmp_path):
    for path in CATALOG.iterdir():
        shutil.copy(path, tmp_path)
    sidecar = tmp_path / "08_box_corner.expected"
    doc = json.loads(sidecar.read_text())
    doc["lambda"][2] += 1e-4
    sidecar.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "corpus", tmp_path)
    fails = [line for line in out.splitlines() if "FAIL" in line]
    assert code == 5 and len(fails) == 1 and fails[0].startswith("08_box_corner")


def test_corpus_empty(capsys, tmp_path):
    code, _, err = run(capsys, "corpus", tmp_path)
    assert code == 1


def test_corpus_missing_dir(capsys, tmp_path):
    code, _, _ = run(capsys, "corpus", tmp_path / "nope")
    assert code == 1


def test_console_script_deterministic(tmp_path):
    env = dict(os.environ, MRULES_SEED="3")
    outs = [subprocess.run([sys.executable, "-m", "mrules", "check",
                            str(CATALOG / "05_parabola_mixed.toml")],
                           capture_output=True, env=env, check=True).stdout for _ in range(2)]
    assert outs[0] == outs[1] and b'"KKT"' in outs[0]
