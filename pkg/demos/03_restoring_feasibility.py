"""
Climbing along a circle
=======================

Maximise x1 subject to x1^2 + x2^2 = 1, starting from (0, 1). The gradient
of the objective is not a multiple of the constraint gradient there, so the
point is not stationary. A straight step leaves the circle; the fixed point
of the feasibility map bends the step back onto it.
"""
import numpy as np

from mrules import EngineConfig, catalog_dir, load_problem
from mrules.ascent import certify_nonoptimal
from mrules.multipliers import fritz_john

problem, candidate = load_problem(catalog_dir() / "07_circle_equality_nonoptimal.toml")
data = fritz_john(problem, candidate)
pairs = data.pairs
print("direction pair u  :", pairs.u[0])
print("direction pair u~ :", pairs.u_tilde[0])

straight = candidate.x + 0.5 * pairs.u[0]
print("straight step lands at h =", problem.eq[0](straight))

for damping in (1.0, 0.5):
    cert = certify_nonoptimal(problem, candidate, data, EngineConfig(damping=damping))
    print(f"\ndamping {damping}: alpha {cert.alpha:.4f}, {cert.iterations} iterations ({cert.method})")
    print("  improved point :", cert.improved_point)
    print("  objective gain :", cert.gain)
    print("  |h| afterwards :", abs(problem.eq[0](cert.improved_point)))
    print("  residual trail :", np.array(cert.history[:6]), "...")
