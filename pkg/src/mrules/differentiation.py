"""Numerical directional derivatives and differentiability diagnostics.

All limits are one-sided (``t -> 0+``). A limit is approximated by evaluating
the forward difference quotient on the geometric step ladder
``t_k = t0 * decay**k`` (``k = 0..depth``) and Richardson-extrapolating the
ladder in powers of ``t``.

Finite probes can refute Hadamard differentiability but never prove it, so the
strongest verdict is :attr:`Verdict.HADAMARD_CONSISTENT`.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import LinearityViolation, NonConvergent, StepLeavesDomain

__all__ = [
    "DiffConfig", "Verdict", "DiffVerdict", "HadamardResult",
    "directional_quotient", "gateaux_directional", "gateaux_gradient",
    "hadamard_probe", "classify", "resolve_seed",
]

SEED_ENV = "MRULES_SEED"


@dataclass(frozen=True)
class DiffConfig:
    t0: float = 1e-2
    decay: float = 0.5
    depth: int = 4
    samples: int = 16
    tol: float = 1e-6
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.decay < 1:
            raise ValueError("decay must lie in (0, 1)")
        if self.depth < 2:
            raise ValueError("depth must be at least 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def steps(self) -> np.ndarray:
        return self.t0 * self.decay ** np.arange(self.depth + 1)


def resolve_seed(seed: Optional[int] = None) -> int:
    """Explicit seed, else ``$MRULES_SEED``, else 0."""
    if seed is not None:
        return int(seed)
    return int(os.environ.get(SEED_ENV, "0"))


def _check_inside(domain, point):
    if domain is not None and not domain.contains(point):
        raise StepLeavesDomain(f"probe point {list(point)} leaves the domain")


def directional_quotient(f, x, h, t: float, domain=None) -> float:
    """``(f(x + t h) - f(x)) / t`` exactly as evaluated."""
    x = np.asarray(x, dtype=float)
    moved = x + t * np.asarray(h, dtype=float)
    _check_inside(domain, x)
    _check_inside(domain, moved)
    return (f(moved) - f(x)) / t


def _richardson(values, decay):
    """Extrapolate ``values[k] ~ L + c1 t_k + c2 t_k^2 + ...`` to ``t = 0``.

    Returns the final extrapolant and the gap to the previous diagonal entry.
    """
    ratio = 1.0 / decay
    prev = list(values)
    diagonal = [prev[0]]
    for j in range(1, len(values)):
        factor = ratio ** j - 1.0
        cur = [prev[k] + (prev[k] - prev[k - 1]) / factor for k in range(1, len(prev))]
        diagonal.append(cur[-1])
        prev = cur
    return float(diagonal[-1]), float(abs(diagonal[-1] - diagonal[-2]))


def _quotient_limit(f, x, fx, directions, cfg, domain):
    """Extrapolated limit of quotients along ``x + t_k * directions[k]``."""
    quotients = []
    for t, d in zip(cfg.steps, directions):
        moved = x + t * d
        _check_inside(domain, moved)
        quotients.append(float((f(moved) - fx) / t))
    estimate, spread = _richardson(quotients, cfg.decay)
    return estimate, spread, quotients


def gateaux_directional(f, x, h, cfg: DiffConfig = DiffConfig(), domain=None):
    """Estimate of ``lim_{t->0+} (f(x+th) - f(x))/t`` and its error bound.

    Raises :class:`NonConvergent` when the last two extrapolants disagree by
    more than ``cfg.tol * max(1, |estimate|)``.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    _check_inside(domain, x)
    estimate, spread, _ = _quotient_limit(f, x, f(x), [h] * (cfg.depth + 1), cfg, domain)
    if not (math.isfinite(estimate) and spread <= cfg.tol * max(1.0, abs(estimate))):
        raise NonConvergent(h, float(estimate), float(spread))
    return float(estimate), float(spread)


def audit_directions(n: int, cfg: DiffConfig) -> np.ndarray:
    """Directions used by the linearity audit: the negated canonical basis,
    then ``cfg.samples`` seeded random unit vectors."""
    rng = np.random.default_rng(resolve_seed(cfg.seed))
    random = rng.standard_normal((cfg.samples, n))
    norms = np.linalg.norm(random, axis=1)
    norms[norms == 0.0] = 1.0
    return np.vstack([-np.eye(n), random / norms[:, None]])


def gateaux_gradient(f, x, cfg: DiffConfig = DiffConfig(), domain=None, audit: bool = True) -> np.ndarray:
    """Gradient assembled from canonical directional derivatives.

    With `audit`, the derivative along further directions (negated basis
    vectors and random unit vectors) must match ``<grad, h>`` within
    ``cfg.tol * (1 + |grad|)``; otherwise :class:`LinearityViolation` is
    raised, meaning the function is directionally but not Gateaux
    differentiable.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    grad = np.array([gateaux_directional(f, x, e, cfg, domain)[0] for e in np.eye(n)])
    if audit:
        bound = cfg.tol * (1.0 + float(np.linalg.norm(grad)))
        for h in audit_directions(n, cfg):
            lhs, _ = gateaux_directional(f, x, h, cfg, domain)
            rhs = float(grad @ h)
            if abs(lhs - rhs) > bound:
                raise LinearityViolation(h, lhs, rhs)
    return grad


@dataclass(frozen=True)
class HadamardResult:
    consistent: bool
    derivative: float
    # witness fields are filled only when consistent is False
    label: str = ""
    steps: tuple = ()
    directions: tuple = ()
    quotients: tuple = ()
    limit: float = math.nan

    def as_dict(self):
        out = {"consistent": self.consistent, "derivative": self.derivative}
        if not self.consistent:
            out.update(label=self.label, steps=[float(t) for t in self.steps],
                       directions=[list(map(float, d)) for d in self.directions],
                       quotients=list(self.quotients), limit=self.limit)
        return out


def perturbation_set(n: int) -> np.ndarray:
    """Fixed perturbation directions: +-e_i, the all-ones diagonal and an
    alternating-sign diagonal (both unit length)."""
    eye = np.eye(n)
    diag = np.ones(n) / math.sqrt(n)
    alt = np.array([(-1.0) ** i for i in range(n)]) / math.sqrt(n)
    return np.vstack([eye, -eye, diag, alt])


def hadamard_probe(f, x, h, cfg: DiffConfig = DiffConfig(), domain=None, paths=()) -> HadamardResult:
    """Look for direction sequences ``h_k -> h`` along which the quotient
    does not converge to the Gateaux derivative.

    Generic sequences are ``h_k = h + t_k d`` for each ``d`` of
    :func:`perturbation_set`. Each element of `paths` is a callable
    ``(x, h, t) -> h_t`` supplying an extra curve; it is used only if its
    directions actually approach ``h``.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    derivative, _ = gateaux_directional(f, x, h, cfg, domain)
    fx = f(x)
    steps = cfg.steps
    bound = cfg.tol * max(1.0, abs(derivative))

    candidates = []
    for i, d in enumerate(perturbation_set(x.size)):
        candidates.append((f"perturbation[{i}]", [h + t * d for t in steps]))
    for j, path in enumerate(paths):
        seq = [np.asarray(path(x, h, t), dtype=float) for t in steps]
        gaps = [float(np.max(np.abs(s - h), initial=0.0)) for s in seq]
        if all(np.isfinite(gaps)) and gaps[-1] <= 1e-2 * (1.0 + float(np.max(np.abs(h), initial=0.0))) \
                and all(b <= a for a, b in zip(gaps, gaps[1:])):
            candidates.append((f"path[{j}]", seq))

    for label, seq in candidates:
        limit, spread, quotients = _quotient_limit(f, x, fx, seq, cfg, domain)
        scale = max(1.0, abs(limit)) if math.isfinite(limit) else 1.0
        if not (math.isfinite(limit) and spread <= cfg.tol * scale and abs(limit - derivative) <= bound):
            return HadamardResult(False, derivative, label, tuple(steps),
                                  tuple(seq), tuple(quotients), limit)
    return HadamardResult(True, derivative)


class Verdict(enum.IntEnum):
    NOT_DIRECTIONAL = 0
    DIRECTIONAL_NOT_LINEAR = 1
    GATEAUX = 2
    HADAMARD_CONSISTENT = 3


@dataclass(frozen=True)
class DiffVerdict:
    verdict: Verdict
    gradient: Optional[np.ndarray] = None
    witness: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "verdict": self.verdict.name,
            "gradient": None if self.gradient is None else [float(v) for v in self.gradient],
            "witness": self.witness,
        }


def probe_directions(n: int) -> np.ndarray:
    """Base directions ``h`` for which :func:`classify` runs the Hadamard probe."""
    eye = np.eye(n)
    return np.vstack([eye, -eye, np.ones(n) / math.sqrt(n)])


def classify(f, x, cfg: DiffConfig = DiffConfig(), domain=None, paths=None) -> DiffVerdict:
    """Strongest differentiability verdict consistent with the probes.

    `paths` defaults to the adversarial paths registered on `f` (builtins).
    """
    x = np.asarray(x, dtype=float)
    if paths is None:
        paths = getattr(f, "adversarial_paths", ())
    try:
        grad = gateaux_gradient(f, x, cfg, domain)
    except NonConvergent as exc:
        return DiffVerdict(Verdict.NOT_DIRECTIONAL, None, {
            "direction": [float(v) for v in exc.direction],
            "estimate": exc.estimate, "spread": exc.spread})
    except LinearityViolation as exc:
        return DiffVerdict(Verdict.DIRECTIONAL_NOT_LINEAR, None, {
            "direction": [float(v) for v in exc.direction],
            "directional_derivative": exc.lhs, "linear_prediction": exc.rhs})
    for h in probe_directions(x.size):
        result = hadamard_probe(f, x, h, cfg, domain, paths)
        if not result.consistent:
            witness = result.as_dict()
            witness["h"] = [float(v) for v in h]
            return DiffVerdict(Verdict.GATEAUX, grad, witness)
    return DiffVerdict(Verdict.HADAMARD_CONSISTENT, grad)
