"""Result records of the analysis and their serialised document form.

A document is one JSON object per run, with a fixed key order and floats in
shortest round-trip form, so two runs on the same input produce identical
bytes.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problem import problem_hash

__all__ = [
    "CertVerdict", "ActiveSet", "MultiplierCertificate", "NoMultipliers",
    "CqReport", "DirectionPairs", "AscentCertificate",
    "multiplier_document", "ascent_document", "render",
]

INACTIVE_NOTE = ("inactive inequality constraints were excluded, not checked "
                 "for lower semicontinuity")


class CertVerdict(str, enum.Enum):
    FJ = "FJ"
    KKT = "KKT"
    NOT_OPTIMAL = "NOT_OPTIMAL"
    DEGENERATE = "DEGENERATE"


@dataclass(frozen=True)
class ActiveSet:
    indices: tuple          # 0-based positions in problem.ineq
    ineq_values: tuple
    eq_values: tuple
    tol: float
    near_active: tuple = ()  # inactive, but below near_active_factor * tol

    @property
    def s(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class MultiplierCertificate:
    """Fritz John multipliers at a candidate.

    ``lam[0]`` multiplies the objective and ``lam[1 + i]`` the inequality
    ``ineq[i]``; ``mu[j]`` multiplies ``eq[j]``. Gradient rows are kept so the
    certificate can be re-checked and serialised.
    """

    kind: str
    point: np.ndarray
    active: ActiveSet
    lam: np.ndarray
    mu: np.ndarray
    normalization: str          # "l1" (|(lam, mu)|_1 = 1) or "lambda0" (lam[0] = 1)
    residual: float
    objective_gradient: np.ndarray
    active_gradients: np.ndarray  # rows for active inequalities, in active order
    eq_jacobian: np.ndarray
    notes: tuple = (INACTIVE_NOTE,)

    @property
    def slackness(self) -> np.ndarray:
        """``lam_i * g_i(x)`` for every inequality."""
        return self.lam[1:] * np.asarray(self.active.ineq_values, dtype=float)

    def stationarity_vector(self) -> np.ndarray:
        total = self.lam[0] * self.objective_gradient
        for row, i in zip(self.active_gradients, self.active.indices):
            total = total + self.lam[1 + i] * row
        for row, m in zip(self.eq_jacobian, self.mu):
            total = total + m * row
        return total


@dataclass(frozen=True)
class DirectionPairs:
    """Solutions ``u_j``, ``u~_j`` of ``DG u + z = r 1``, ``DH u = +-r e_j``
    with ``z <= 0``; rows of ``u`` / ``u_tilde`` are indexed by ``j``.

    ``g_scale`` / ``h_scale`` are the positive row scalings applied to the
    objective-and-active-inequality gradients and to the equality gradients
    before solving.
    """

    r: float
    u: np.ndarray
    u_tilde: np.ndarray
    z: np.ndarray
    z_tilde: np.ndarray
    g_scale: np.ndarray
    h_scale: np.ndarray

    @property
    def q(self) -> int:
        return self.u.shape[0]

    @property
    def max_norm(self) -> float:
        """``sup ||k||_inf`` over the convex hull of all ``u_j``, ``u~_j``."""
        return float(max(np.max(np.abs(self.u)), np.max(np.abs(self.u_tilde))))


@dataclass(frozen=True)
class NoMultipliers:
    """No Fritz John multipliers exist: the candidate admits first-order ascent.

    For inequality problems ``direction`` is an improving direction; for
    mixed problems ``pairs`` holds the data for feasibility restoration.
    """

    kind: str
    point: np.ndarray
    active: ActiveSet
    objective_gradient: np.ndarray
    active_gradients: np.ndarray
    eq_jacobian: np.ndarray
    direction: Optional[np.ndarray] = None
    pairs: Optional[DirectionPairs] = None


@dataclass(frozen=True)
class CqReport:
    slater: bool                       # positive-direction condition
    slater_direction: Optional[np.ndarray]
    eq_rank: Optional[int] = None      # None for inequality problems
    independent: Optional[bool] = None
    kernel: Optional[bool] = None
    kernel_direction: Optional[np.ndarray] = None

    @property
    def qualifies(self) -> bool:
        """Whether the relevant constraint qualification holds."""
        if self.independent is None:
            return self.slater
        return bool(self.independent and self.kernel)


@dataclass(frozen=True)
class AscentCertificate:
    kind: str
    point: np.ndarray
    improved_point: np.ndarray
    alpha: float
    gain: float
    ineq_values: tuple
    eq_residuals: tuple
    direction: np.ndarray         # u (inequality) or the fixed point k (mixed)
    coefficients: Optional[tuple] = None  # (a, a_tilde) at the fixed point
    iterations: int = 0
    backtracks: int = 0
    method: str = "line-search"
    history: tuple = field(default=(), repr=False)

    @property
    def max_eq_residual(self) -> float:
        return max((abs(v) for v in self.eq_residuals), default=0.0)


def _floats(values):
    if values is None:
        return None
    return [float(v) for v in np.asarray(values, dtype=float).ravel()]


def _cq_dict(cq):
    if cq is None:
        return None
    return {
        "slater": cq.slater,
        "slater_direction": _floats(cq.slater_direction),
        "rank": cq.eq_rank,
        "independent": cq.independent,
        "kernel": cq.kernel,
        "kernel_direction": _floats(cq.kernel_direction),
    }


def multiplier_document(problem, cert: MultiplierCertificate, verdict: CertVerdict,
                        cq: Optional[CqReport] = None) -> dict:
    return {
        "verdict": CertVerdict(verdict).value,
        "problem_hash": problem_hash(problem),
        "kind": cert.kind,
        "point": _floats(cert.point),
        "active_set": list(cert.active.indices),
        "near_active": list(cert.active.near_active),
        "lambda": _floats(cert.lam),
        "mu": _floats(cert.mu),
        "normalization": cert.normalization,
        "residual": float(cert.residual),
        "complementary_slackness": _floats(cert.slackness),
        "cq": _cq_dict(cq),
        "notes": list(cert.notes),
    }


def ascent_document(problem, cert: AscentCertificate) -> dict:
    doc = {
        "verdict": CertVerdict.NOT_OPTIMAL.value,
        "problem_hash": problem_hash(problem),
        "kind": cert.kind,
        "point": _floats(cert.point),
        "improved_point": _floats(cert.improved_point),
        "alpha": float(cert.alpha),
        "gain": float(cert.gain),
        "inequality_values": _floats(cert.ineq_values),
        "residuals": _floats(cert.eq_residuals),
        "method": cert.method,
        "iterations": cert.iterations,
        "backtracks": cert.backtracks,
    }
    if cert.kind == "mixed":
        doc["k_hat"] = _floats(cert.direction)
        doc["coefficients"] = None if cert.coefficients is None else {
            "a": _floats(cert.coefficients[0]), "a_tilde": _floats(cert.coefficients[1])}
    else:
        doc["direction"] = _floats(cert.direction)
    return doc


def render(doc: dict) -> str:
    """Deterministic text form of a document."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"
