"""
When the objective multiplier vanishes
======================================

Two catalog problems have Fritz John multipliers only with lambda_0 = 0:

* the equality x1 = 0 listed twice, so the equality gradients are dependent;
* the cusp (1 - x1)^3 - x2 >= 0, x2 >= 0 at (1, 0), where the active
  gradients (0, -1) and (0, 1) cancel and no direction points strictly
  into both constraints.

In both cases the constraint qualification check fails, and that is what
allows lambda_0 = 0.
"""
from mrules import analyze, catalog_dir, load_problem

for stem in ("06_dependent_equalities", "14_cusp", "08_box_corner"):
    problem, candidate = load_problem(catalog_dir() / f"{stem}.toml")
    outcome = analyze(problem, candidate)
    doc = outcome.document
    cq = doc["cq"]
    print(f"{stem}: {outcome.verdict.value}")
    print(f"  lambda = {doc['lambda']}, mu = {doc['mu']}")
    print(f"  positive direction exists: {cq['slater']}, "
          f"equality gradients independent: {cq['independent']}")
