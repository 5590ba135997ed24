"""Acceptance criteria 1-8.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per
criterion appears in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mrules.ascent import certify_nonoptimal
from mrules.certificates import CertVerdict, MultiplierCertificate, NoMultipliers
from mrules.cli import analyze
from mrules.differentiation import DiffConfig, Verdict, classify, gateaux_gradient, hadamard_probe
from mrules.lp import min_l1_point
from mrules.multipliers import cq_report, fritz_john, normalize_kkt, supporting_hyperplane
from mrules.problem import ScalarField, load_problem

from checks import verify_ascent_certificate, verify_multiplier_certificate
from conftest import CATALOG, catalog_files
from generators import random_problem
from oracles import sympy_gradient

RESULTS = {}


def record(number, ok, detail):
    RESULTS[number] = (ok, detail)
    return ok


def summary_lines():
    return [f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
            for k, (ok, detail) in sorted(RESULTS.items())]


# 1 -------------------------------------------------------------------------

def criterion_1():
    worst, slowest, failures, count = 0.0, 0.0, [], 0
    for path in catalog_files():
        expected = json.loads(path.with_suffix(".expected").read_text())
        problem, cand = load_problem(path)
        start = time.perf_counter()
        outcome = analyze(problem, cand)
        slowest = max(slowest, time.perf_counter() - start)
        if outcome.verdict.value != expected["verdict"]:
            failures.append(path.stem)
            continue
        for key in ("lambda", "mu"):
            if key in expected:
                count += 1
                err = float(np.max(np.abs(np.subtract(outcome.document[key], expected[key])), initial=0.0))
                worst = max(worst, err)
                if err > 1e-6:
                    failures.append(path.stem)
    ok = not failures and slowest < 1.0 and len(catalog_files()) >= 12
    return record(1, ok, f"{len(catalog_files())} problems, max multiplier error {worst:.1e}, "
                         f"slowest {slowest:.3f}s, failures {failures}")


# 2 -------------------------------------------------------------------------

def criterion_2():
    rng = np.random.default_rng(2)
    both = neither = 0
    for _ in range(500):
        rows, n = int(rng.integers(1, 7)), int(rng.integers(1, 9))
        G = rng.uniform(-1, 1, (rows, n))
        v = supporting_hyperplane(G, np.ones(rows, bool))
        u = min_l1_point(n, A_ge=G, b_ge=np.ones(rows))
        if v is not None:
            assert np.all(v >= 0) and np.max(np.abs(G.T @ v)) <= 1e-9
        if u is not None:
            assert np.all(G @ u >= 1 - 1e-9)
        both += v is not None and u is not None
        neither += v is None and u is None
    return record(2, both == 0 and neither == 0, f"500 trials, both={both}, neither={neither}")


# 3 -------------------------------------------------------------------------

def criterion_3():
    certs = []
    for path in catalog_files():
        problem, cand = load_problem(path)
        res = fritz_john(problem, cand)
        if isinstance(res, MultiplierCertificate):
            certs.append((problem, cand, res))
    rng = np.random.default_rng(3)
    while len(certs) < 200:
        n = int(rng.integers(1, 6))
        q = int(rng.integers(0, n + 1))
        s = max(int(rng.integers(0, 4)), n + 1 - q)
        problem, cand = random_problem(rng, n, s, q, inactive=int(rng.integers(0, 3)))
        res = fritz_john(problem, cand)
        if isinstance(res, MultiplierCertificate):
            certs.append((problem, cand, res))
    worst, failed = 0.0, 0
    for problem, cand, cert in certs:
        try:
            worst = max(worst, verify_multiplier_certificate(problem, cand, cert, 1e-7))
        except AssertionError:
            failed += 1
    return record(3, failed == 0, f"{len(certs)} certificates, {failed} failed, "
                                  f"max independent residual {worst:.1e}")


# 4 -------------------------------------------------------------------------

def criterion_4():
    rng = np.random.default_rng(4)
    worst, max_iter, max_back, failed, methods = 0.0, 0, 0, 0, set()
    for trial in range(50):
        n = int(rng.integers(2, 7))
        q = int(rng.integers(1, min(3, n - 1) + 1))
        s = int(rng.integers(0, n - q))          # s + q + 1 <= n: non-stationary
        problem, cand = random_problem(rng, n, s, q, inactive=int(rng.integers(0, 3)),
                                       quadratic=bool(trial % 3))
        res = fritz_john(problem, cand)
        if not isinstance(res, NoMultipliers):
            failed += 1
            continue
        try:
            cert = certify_nonoptimal(problem, cand, res)
            verify_ascent_certificate(problem, cand, cert, 1e-8)
        except Exception:
            failed += 1
            continue
        worst = max(worst, cert.max_eq_residual)
        max_iter, max_back = max(max_iter, cert.iterations), max(max_back, cert.backtracks)
        methods.add(cert.method)
    ok = failed == 0 and worst <= 1e-8 and max_iter <= 500 and max_back <= 20 and methods == {"damped"}
    return record(4, ok, f"50 candidates, {failed} failed, max residual {worst:.1e}, "
                         f"max iterations {max_iter}, max backtracks {max_back}, methods {sorted(methods)}")


# 5 -------------------------------------------------------------------------

def criterion_5():
    rng = np.random.default_rng(5)
    worst, iterations = 0.0, set()
    for _ in range(30):
        n = int(rng.integers(2, 7))
        q = int(rng.integers(1, min(3, n - 1) + 1))
        s = int(rng.integers(0, n - q))
        problem, cand = random_problem(rng, n, s, q, quadratic=False)
        res = fritz_john(problem, cand)
        cert = certify_nonoptimal(problem, cand, res)
        iterations.add(cert.iterations)
        worst = max(worst, cert.max_eq_residual)
    ok = iterations == {1} and worst <= 1e-12
    return record(5, ok, f"30 affine problems, iterations {sorted(iterations)}, max residual {worst:.1e}")


# 6 -------------------------------------------------------------------------

def criterion_6():
    worst, fields = 0.0, 0
    for path in catalog_files():
        problem, _ = load_problem(path)
        lo = np.where(np.array(problem.domain.lower) == 0.0, 0.5, np.maximum(problem.domain.lower, -1.4))
        hi = np.minimum(problem.domain.upper, 1.4)
        for f in (problem.objective, *problem.ineq, *problem.eq):
            if f.builtin is not None:
                continue
            fields += 1
            oracle = sympy_gradient(f.text, problem.variables)
            rng = np.random.default_rng(fields)
            for _ in range(100):
                x = rng.uniform(lo, hi)
                worst = max(worst, float(np.max(np.abs(gateaux_gradient(f, x) - oracle(x)))))
    parabola = ScalarField.from_text("builtin:parabola_indicator", ["x1", "x2"])
    cfg = DiffConfig()
    v = classify(parabola, [0.0, 0.0], cfg)
    probe = hadamard_probe(parabola, [0.0, 0.0], [1.0, 0.0], cfg, paths=parabola.adversarial_paths)
    witness_ok = (v.verdict is Verdict.GATEAUX and not probe.consistent
                  and all(np.allclose(d, [1.0, t]) for d, t in zip(probe.directions, cfg.steps)))
    norm = ScalarField.from_text("builtin:euclidean_norm", ["x1", "x2"])
    norm_ok = classify(norm, [0.0, 0.0]).verdict is Verdict.DIRECTIONAL_NOT_LINEAR
    ok = worst <= 1e-6 and witness_ok and norm_ok
    return record(6, ok, f"{fields} C1 fields x 100 points, max gradient error {worst:.1e}, "
                         f"parabola witness {'ok' if witness_ok else 'missing'}, "
                         f"norm {'DirectionalNotLinear' if norm_ok else 'wrong verdict'}")


# 7 -------------------------------------------------------------------------

def criterion_7():
    qualifying, failures = 0, []
    for path in catalog_files():
        problem, cand = load_problem(path)
        res = fritz_john(problem, cand)
        if not isinstance(res, MultiplierCertificate):
            continue
        if cq_report(res.active_gradients, res.eq_jacobian, problem.n).qualifies:
            qualifying += 1
            try:
                if not normalize_kkt(res).lam[0] == 1.0 or not res.lam[0] > 1e-7:
                    failures.append(path.stem)
            except Exception:
                failures.append(path.stem)
    problem, cand = load_problem(CATALOG / "06_dependent_equalities.toml")
    degenerate = analyze(problem, cand).verdict is CertVerdict.DEGENERATE
    ok = qualifying > 0 and not failures and degenerate
    return record(7, ok, f"{qualifying} qualifying catalog problems normalised, failures {failures}, "
                         f"dependent-equalities verdict {'DEGENERATE' if degenerate else 'wrong'}")


# 8 -------------------------------------------------------------------------

def criterion_8():
    env = dict(os.environ, MRULES_SEED="1234")
    stems = ["01_circle_max_x1", "02_circle_interior", "05_parabola_mixed",
             "06_dependent_equalities", "07_circle_equality_nonoptimal", "15_parabola_indicator"]
    differing = []
    for stem in stems:
        outs = {subprocess.run([sys.executable, "-m", "mrules", "check", str(CATALOG / f"{stem}.toml")],
                               capture_output=True, env=env).stdout for _ in range(3)}
        if len(outs) != 1:
            differing.append(stem)
    return record(8, not differing, f"{len(stems)} problems x 3 runs, differing {differing}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: c.__name__)
def test_acceptance(criterion):
    number = int(criterion.__name__.rsplit("_", 1)[1])
    assert criterion(), RESULTS[number][1]


if __name__ == "__main__":
    os.environ.setdefault("MRULES_SEED", "0")
    for criterion in CRITERIA:
        criterion()
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
