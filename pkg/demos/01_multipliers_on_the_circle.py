"""
Multipliers on the unit disk
============================

Maximise x1 over the disk 1 - x1^2 - x2^2 >= 0. At (1, 0) the constraint is
active and the objective gradient is balanced by the constraint gradient;
at (0, 0) nothing is active, so there is room to climb.
"""
import numpy as np

from mrules import analyze, catalog_dir, load_problem, render
from mrules.multipliers import fritz_john, normalize_kkt

catalog = catalog_dir()

# the boundary point
problem, candidate = load_problem(catalog / "01_circle_max_x1.toml")
cert = fritz_john(problem, candidate)
print("raw Fritz John multipliers :", cert.lam)           # sum-normalised
print("KKT form                   :", normalize_kkt(cert).lam)
print("stationarity residual      :", cert.residual)

# the same numbers by hand: (1, 0) * lam0 + (-2, 0) * lam1 = 0
print("hand solution              :", np.array([2, 1]) / 3)

# the interior point: no multipliers, an ascent certificate instead
problem, candidate = load_problem(catalog / "02_circle_interior.toml")
outcome = analyze(problem, candidate)
print()
print(outcome.verdict.value)
print(render(outcome.document))
