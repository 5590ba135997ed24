"""Fritz John / KKT multipliers, constraint qualifications, normalisation.

At a candidate ``x`` stack the gradient rows of the objective, the active
inequalities and the equalities into ``M``. Multipliers exist iff the cone
``Im M + (R_-^{1+s} x {0})`` is not a neighbourhood of the origin, i.e. iff a
nonzero ``v`` with ``M^T v = 0`` exists whose first ``1+s`` entries are
nonnegative. That ``v`` is the normal of a supporting hyperplane of the cone
at 0 and is found by linear programming. When no such ``v`` exists the
alternative holds: there is an ascent direction, and the caller gets a
:class:`~mrules.certificates.NoMultipliers` record to hand to
:func:`~mrules.ascent.certify_nonoptimal`.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional, Union

import numpy as np

from .ascent import improving_direction_inequality, scaled_direction_pairs
from .certificates import (
    ActiveSet, CertVerdict, CqReport, MultiplierCertificate, NoMultipliers,
)
from .config import EngineConfig
from .differentiation import gateaux_gradient
from .errors import InfeasibleCandidate, NumericalBreakdown, ZeroLeadingMultiplier
from .lp import LpProblem, min_l1_point, null_vector, rank, solve_lp

__all__ = [
    "active_set", "supporting_hyperplane", "fritz_john_inequality", "fritz_john_mixed",
    "fritz_john", "cq_positive_direction", "cq_linear_independence",
    "cq_kernel_direction", "cq_report", "normalize_kkt", "verdict_of",
]


def active_set(problem, candidate, near_active_factor: float = 10.0) -> ActiveSet:
    """Indices of inequalities with ``|g_i(x)| <= act_tol``.

    Raises :class:`InfeasibleCandidate` if some ``g_i(x) < -act_tol`` or
    ``|h_j(x)| > act_tol``.
    """
    x = candidate.x
    tol = candidate.act_tol
    g = tuple(float(f(x)) for f in problem.ineq)
    h = tuple(float(f(x)) for f in problem.eq)
    bad_g = [i for i, v in enumerate(g) if v < -tol]
    bad_h = [j for j, v in enumerate(h) if abs(v) > tol]
    if bad_g or bad_h:
        raise InfeasibleCandidate(
            f"candidate violates inequalities {bad_g} and equalities {bad_h} "
            f"beyond tolerance {tol!r}")
    indices = tuple(i for i, v in enumerate(g) if abs(v) <= tol)
    near = tuple(i for i, v in enumerate(g) if tol < v <= near_active_factor * tol)
    return ActiveSet(indices, g, h, tol, near)


def supporting_hyperplane(M, negative, tol: float = 0.0, lead: Optional[int] = None,
                          lead_floor: float = 0.0):
    """Normal ``v`` (unit 1-norm) of a hyperplane supporting ``Im M + cone`` at 0.

    `M` has one row per coordinate of the cone's ambient space; `negative`
    marks the coordinates carrying the ``R_-`` recession block (the rest are
    pinned at zero). The returned ``v`` satisfies ``|M^T v|_inf <= tol`` and
    ``v_i >= 0`` on the marked coordinates. Returns None when no such ``v``
    exists, i.e. the cone is a neighbourhood of the origin.

    With `lead`, the LP maximises ``v[lead]``; if the best value is at most
    `lead_floor` the problem is re-solved with ``v[lead] = 0`` so degenerate
    solutions come out exactly degenerate.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    k, n = M.shape
    negative = np.asarray(negative, dtype=bool).reshape(k)
    if not negative.any():
        raise ValueError("at least one coordinate must carry the recession block")
    # columns: v (k entries), then one residual bound s >= 0
    lower = np.append(np.where(negative, 0.0, -np.inf), 0.0)
    A_eq = [np.append(negative.astype(float), 0.0)]
    b_eq = [1.0]
    MT = np.hstack([M.T, np.zeros((n, 1))])

    def solve(c, s_max=None, pin_lead=False):
        rows_eq, rhs_eq = list(A_eq), list(b_eq)
        if pin_lead:
            rows_eq.append(np.eye(k + 1)[lead])
            rhs_eq.append(0.0)
        if s_max is None:
            # |M^T v| <= s
            ones = np.hstack([np.zeros((n, k)), np.ones((n, 1))])
            A_ge = np.vstack([MT + ones, -MT + ones])
            b_ge = np.zeros(2 * n)
        else:
            A_ge = np.vstack([MT, -MT])
            b_ge = np.full(2 * n, -s_max)
            rows_eq.append(np.eye(k + 1)[k])
            rhs_eq.append(0.0)
        return solve_lp(LpProblem(c, np.vstack(rows_eq), np.array(rhs_eq), A_ge, b_ge, lower))

    v = None
    if tol > 0:
        best = solve(np.eye(k + 1)[k])
        if best.optimal and best.x[k] <= tol:
            s_max = best.x[k] + 1e-12
            v = best.x
            if lead is not None:
                lifted = solve(-np.eye(k + 1)[lead], s_max)
                v = lifted.x if lifted.optimal else v
    else:
        exact = solve(np.zeros(k + 1) if lead is None else -np.eye(k + 1)[lead], 0.0)
        v = exact.x if exact.optimal else None
        s_max = 0.0
    if v is not None:
        if lead is not None and v[lead] <= lead_floor:
            pinned = solve(np.zeros(k + 1), s_max, pin_lead=True)
            if pinned.optimal:
                v = pinned.x
        v = v[:k]
        return v / np.sum(np.abs(v))
    # only the pinned coordinates can carry a nonzero normal
    free = np.flatnonzero(~negative)
    if free.size:
        mu = null_vector(M[free].T)
        if mu is not None:
            v = np.zeros(k)
            v[free] = mu
            return v
    return None


def _gradients(problem, candidate, act, cfg):
    x, dom, dc = candidate.x, problem.domain, cfg.diff
    g0 = gateaux_gradient(problem.objective, x, dc, dom)
    G = np.array([gateaux_gradient(problem.ineq[i], x, dc, dom) for i in act.indices]).reshape(-1, x.size)
    H = np.array([gateaux_gradient(h, x, dc, dom) for h in problem.eq]).reshape(-1, x.size)
    return g0, G, H


def _certificate(problem, candidate, act, g0, G, H, v, cfg):
    s = act.s
    lam = np.zeros(1 + len(problem.ineq))
    lam[0] = v[0]
    for pos, i in enumerate(act.indices):
        lam[1 + i] = v[1 + pos]
    mu = np.array(v[1 + s:], dtype=float)
    M = np.vstack([g0, G, H])
    residual = float(np.max(np.abs(M.T @ v)))
    if residual > cfg.stat_tol:
        raise NumericalBreakdown(f"stationarity residual {residual:.3e} exceeds {cfg.stat_tol:.1e}")
    return MultiplierCertificate(problem.kind, candidate.x, act, lam, mu, "l1", residual, g0, G, H)


def fritz_john_inequality(problem, candidate, cfg: EngineConfig = EngineConfig()
                          ) -> Union[MultiplierCertificate, NoMultipliers]:
    """Multipliers ``lam_0..lam_m >= 0`` with ``sum lam_i grad f_i = 0`` and
    ``lam_i = 0`` off the active set, or an improving direction."""
    act = active_set(problem, candidate, cfg.near_active_factor)
    g0, G, H = _gradients(problem, candidate, act, cfg)
    M = np.vstack([g0, G])
    v = supporting_hyperplane(M, np.ones(M.shape[0], bool), cfg.lp_slack, lead=0,
                              lead_floor=cfg.stat_tol)
    if v is None:
        u = improving_direction_inequality(M)
        return NoMultipliers(problem.kind, candidate.x, act, g0, G, H, direction=u)
    return _certificate(problem, candidate, act, g0, G, H, v, cfg)


def fritz_john_mixed(problem, candidate, cfg: EngineConfig = EngineConfig()
                     ) -> Union[MultiplierCertificate, NoMultipliers]:
    """As :func:`fritz_john_inequality` with free multipliers ``mu`` for the
    equalities. Without multipliers, the result carries direction pairs for
    feasibility restoration."""
    act = active_set(problem, candidate, cfg.near_active_factor)
    g0, G, H = _gradients(problem, candidate, act, cfg)
    M = np.vstack([g0, G, H])
    negative = np.arange(M.shape[0]) < 1 + act.s
    v = supporting_hyperplane(M, negative, cfg.lp_slack, lead=0, lead_floor=cfg.stat_tol)
    if v is None:
        pairs = scaled_direction_pairs(g0, G, H)
        return NoMultipliers(problem.kind, candidate.x, act, g0, G, H, pairs=pairs)
    return _certificate(problem, candidate, act, g0, G, H, v, cfg)


def fritz_john(problem, candidate, cfg: EngineConfig = EngineConfig()):
    """Dispatch on the problem kind."""
    if problem.eq:
        return fritz_john_mixed(problem, candidate, cfg)
    return fritz_john_inequality(problem, candidate, cfg)


def cq_positive_direction(rows, n: Optional[int] = None):
    """``w`` with ``<row, w> >= 1`` for every active gradient row, or None.

    An empty row set is satisfied by ``w = 0``.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.size == 0:
        return np.zeros(n if n is not None else (rows.shape[1] if rows.ndim == 2 else 0))
    rows = np.atleast_2d(rows)
    return min_l1_point(rows.shape[1], A_ge=rows, b_ge=np.ones(rows.shape[0]))


def cq_linear_independence(H, tol: float = 1e-10) -> bool:
    """Whether the equality gradients (rows of `H`) are linearly independent."""
    H = np.asarray(H, dtype=float)
    if H.size == 0:
        return True
    H = np.atleast_2d(H)
    q, n = H.shape
    return q <= n and rank(H, tol) == q


def cq_kernel_direction(rows, H, n: Optional[int] = None):
    """``w`` in the common kernel of the equality gradients with
    ``<row, w> >= 1`` for every active inequality gradient, or None."""
    rows = np.asarray(rows, dtype=float)
    H = np.asarray(H, dtype=float)
    if n is None:
        n = H.shape[1] if H.ndim == 2 else rows.shape[-1]
    if rows.size == 0:
        return np.zeros(n)
    rows = np.atleast_2d(rows)
    H = H.reshape(-1, n)
    return min_l1_point(n, A_ge=rows, b_ge=np.ones(rows.shape[0]),
                        A_eq=H, b_eq=np.zeros(H.shape[0]))


def cq_report(active_gradients, eq_jacobian, n: int) -> CqReport:
    G = np.reshape(active_gradients, (-1, n))
    H = np.reshape(eq_jacobian, (-1, n))
    if H.shape[0] == 0:
        w = cq_positive_direction(G, n)
        return CqReport(w is not None, w)
    w = cq_positive_direction(G, n)
    kernel = cq_kernel_direction(G, H, n)
    return CqReport(w is not None, w, rank(H), cq_linear_independence(H),
                    kernel is not None, kernel)


def normalize_kkt(cert: MultiplierCertificate, stat_tol: float = 1e-7) -> MultiplierCertificate:
    """Divide all multipliers by the leading one (KKT form, ``lam_0 = 1``)."""
    lead = float(cert.lam[0])
    if not lead > stat_tol:
        raise ZeroLeadingMultiplier(
            f"leading multiplier {lead!r} is not above {stat_tol!r}; no KKT form")
    lam = cert.lam / lead
    lam[0] = 1.0
    return replace(cert, lam=lam, mu=cert.mu / lead, normalization="lambda0",
                   residual=cert.residual / lead)


def verdict_of(cert: MultiplierCertificate, stat_tol: float = 1e-7) -> CertVerdict:
    return CertVerdict.KKT if cert.lam[0] > stat_tol else CertVerdict.DEGENERATE
