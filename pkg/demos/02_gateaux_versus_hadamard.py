"""
Gateaux is not Hadamard
=======================

The parabola indicator is 1 on the curve y = x^2 (x != 0) and 0 elsewhere.
Along every straight ray from the origin it is eventually 0, so all
directional derivatives exist and vanish: it is Gateaux differentiable with
gradient 0. Along the curve itself the difference quotient is 1/t, which
blows up, so it is not Hadamard differentiable.

The Euclidean norm at 0 fails earlier: the directional derivative is |h|,
which is not linear in h.
"""
from mrules import DiffConfig, classify
from mrules.differentiation import directional_quotient, hadamard_probe
from mrules.problem import ScalarField

cfg = DiffConfig()
parabola = ScalarField.from_text("builtin:parabola_indicator", ["x", "y"])
norm = ScalarField.from_text("builtin:euclidean_norm", ["x", "y"])
smooth = ScalarField.from_text("x^2 + y^2", ["x", "y"])

for t in cfg.steps:
    print(f"t = {t:<8g} quotient along (1, 0): {directional_quotient(parabola, [0, 0], [1, 0], t)}")

probe = hadamard_probe(parabola, [0, 0], [1, 0], cfg, paths=parabola.adversarial_paths)
print("\nHadamard probe consistent?", probe.consistent)
for t, h, q in zip(probe.steps, probe.directions, probe.quotients):
    print(f"  h_k = ({h[0]:g}, {h[1]:g})   quotient {q:g}")

print()
for name, f, x in [("parabola indicator", parabola, [0, 0]),
                   ("euclidean norm", norm, [0, 0]),
                   ("x^2 + y^2", smooth, [0.3, 0.4])]:
    verdict = classify(f, x, cfg)
    print(f"{name:<20} at {x}: {verdict.verdict.name}, gradient {verdict.gradient}")
