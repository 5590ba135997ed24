"""Constructive non-optimality: build a strictly better feasible point.

Inequality problems only need an improving direction ``u`` (every active
gradient and the objective gradient have ``<row, u> >= 1``) followed by a
backtracking line search.

With equality constraints a straight step drifts off the constraint
manifold. For each equality ``j`` two directions ``u_j``, ``u~_j`` are
computed that improve the objective and active inequalities to first order
while moving ``h_j`` by ``+r`` and ``-r`` and leaving the other equalities
fixed. On the simplex of convex combinations ``k`` of these ``2q`` vectors
the map

    Phi(k) = sum_j (1/(2q) - w_j(k)/(2r)) u_j + (1/(2q) + w_j(k)/(2r)) u~_j,
    w_j(k) = h_j(x + alpha k)/alpha - <grad h_j(x), k>,

sends the simplex into itself once ``alpha`` is small, and any fixed point
satisfies ``h(x + alpha k) = 0`` exactly. The fixed point is found by damped
(Krasnoselskii) iteration, with a bracketing solve on the simplex
coordinates as fallback.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import AscentCertificate, DirectionPairs, NoMultipliers
from .config import EngineConfig
from .errors import (
    CertificationFailed, DomainFault, InternalInconsistency, NonConvergence,
    ResidualTooLarge, StepLeavesDomain,
)
from .lp import min_l1_point

__all__ = [
    "improving_direction_inequality", "direction_pairs", "scaled_direction_pairs",
    "residual_w", "SimplexState", "phi_map", "FixedPoint", "schauder_fixed_point",
    "certify_nonoptimal",
]


def improving_direction_inequality(rows) -> np.ndarray:
    """Least 1-norm ``u`` with ``<row, u> >= 1`` for every row."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    u = min_l1_point(rows.shape[1], A_ge=rows, b_ge=np.ones(rows.shape[0]))
    if u is None:
        raise InternalInconsistency(
            "no improving direction although no multipliers were found")
    return u


def direction_pairs(DG, DH, r: float = 1.0, g_scale=None, h_scale=None) -> DirectionPairs:
    """Solve ``DG u >= r``, ``DH u = +-r e_j`` for every equality ``j``.

    Each system is solved for the least 1-norm solution; the slacks
    ``z = r - DG u`` are recorded (they are <= 0).
    """
    DG = np.atleast_2d(np.asarray(DG, dtype=float))
    DH = np.atleast_2d(np.asarray(DH, dtype=float))
    q, n = DH.shape
    b = np.full(DG.shape[0], r)
    us, uts = [], []
    for j in range(q):
        target = np.zeros(q)
        for sign, store in ((1.0, us), (-1.0, uts)):
            target[j] = sign * r
            u = min_l1_point(n, A_ge=DG, b_ge=b, A_eq=DH, b_eq=target)
            if u is None:
                raise InternalInconsistency(
                    f"direction system for equality {j} (sign {sign:+.0f}) is infeasible")
            store.append(u)
    u, ut = np.array(us).reshape(q, n), np.array(uts).reshape(q, n)
    return DirectionPairs(
        r, u, ut, b - u @ DG.T, b - ut @ DG.T,
        np.ones(DG.shape[0]) if g_scale is None else np.asarray(g_scale, dtype=float),
        np.ones(q) if h_scale is None else np.asarray(h_scale, dtype=float))


def _row_scales(rows):
    scale = np.max(np.abs(rows), axis=1) if rows.size else np.ones(rows.shape[0])
    return np.where(scale > 0.0, scale, 1.0)


def scaled_direction_pairs(objective_gradient, active_gradients, eq_jacobian) -> DirectionPairs:
    """Direction pairs on gradient rows scaled to unit sup-norm, with ``r = 1``."""
    DG = np.vstack([objective_gradient, np.reshape(active_gradients, (-1, len(objective_gradient)))])
    DH = np.atleast_2d(np.asarray(eq_jacobian, dtype=float))
    gs, hs = _row_scales(DG), _row_scales(DH)
    return direction_pairs(DG / gs[:, None], DH / hs[:, None], 1.0, gs, hs)


def residual_w(eq, x, alpha: float, k, DH, domain=None) -> np.ndarray:
    """``w_j(k) = h_j(x + alpha k) / alpha - <DH_j, k>`` for each equality."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    moved = x + alpha * k
    if domain is not None and not domain.contains(moved):
        raise StepLeavesDomain(f"x + alpha k = {list(moved)} leaves the domain")
    DH = np.atleast_2d(np.asarray(DH, dtype=float))
    return np.array([h(moved) / alpha for h in eq]) - DH @ k


@dataclass(frozen=True)
class SimplexState:
    """Barycentric coordinates ``(a, a_tilde)`` and the point they induce."""

    a: np.ndarray
    a_tilde: np.ndarray
    k: np.ndarray

    @classmethod
    def from_coefficients(cls, a, a_tilde, pairs: DirectionPairs) -> "SimplexState":
        a = np.asarray(a, dtype=float)
        a_tilde = np.asarray(a_tilde, dtype=float)
        return cls(a, a_tilde, a @ pairs.u + a_tilde @ pairs.u_tilde)

    @classmethod
    def barycenter(cls, pairs: DirectionPairs) -> "SimplexState":
        c = np.full(pairs.q, 1.0 / (2 * pairs.q))
        return cls.from_coefficients(c, c.copy(), pairs)


def phi_map(state: SimplexState, w, pairs: DirectionPairs, r=None, q=None) -> SimplexState:
    """Image of ``state.k`` under the feasibility map, given ``w = w(state.k)``.

    Requires ``|w|_inf < r/q``, which keeps the coefficients nonnegative.
    """
    r = pairs.r if r is None else r
    q = pairs.q if q is None else q
    w = np.asarray(w, dtype=float)
    norm = float(np.max(np.abs(w), initial=0.0))
    if not norm < r / q:
        raise ResidualTooLarge(norm, r / q)
    a = 1.0 / (2 * q) - w / (2 * r)
    a_tilde = 1.0 / (2 * q) + w / (2 * r)
    total = a.sum() + a_tilde.sum()
    return SimplexState.from_coefficients(a / total, a_tilde / total, pairs)


@dataclass(frozen=True)
class FixedPoint:
    state: SimplexState
    iterations: int
    history: tuple
    method: str  # "damped" or "bracketing"

    @property
    def k(self) -> np.ndarray:
        return self.state.k


def _fixed_point_residual(eq, x, alpha, state, pairs, DH, domain):
    w = residual_w(eq, x, alpha, state.k, DH, domain)
    image = phi_map(state, w, pairs)
    return image, float(np.max(np.abs(image.k - state.k), initial=0.0))


def _bracketing_solve(eq, x, alpha, pairs, DH, cfg, domain, history):
    """Solve ``s_j + w_j(k(s)) / r = 0`` on ``s in [-1/q, 1/q]^q`` by
    coordinate-wise bisection, where ``a_j = 1/(2q) + s_j/2`` and
    ``a~_j = 1/(2q) - s_j/2``. Every coordinate problem is bracketed as long
    as ``|w|_inf < r/q``."""
    q, r = pairs.q, pairs.r
    s = np.zeros(q)

    def state_of(s):
        return SimplexState.from_coefficients(1 / (2 * q) + s / 2, 1 / (2 * q) - s / 2, pairs)

    def coordinate(s, j):
        return s[j] + residual_w(eq, x, alpha, state_of(s).k, DH, domain)[j] / r

    iterations = 0
    for _ in range(cfg.max_iter):
        for j in range(q):
            lo, hi = -1.0 / q, 1.0 / q
            trial = s.copy()
            for _ in range(200):
                trial[j] = 0.5 * (lo + hi)
                if coordinate(trial, j) > 0.0:
                    hi = trial[j]
                else:
                    lo = trial[j]
                if hi - lo <= 1e-17:
                    break
            s = trial
        iterations += 1
        state = state_of(s)
        _, res = _fixed_point_residual(eq, x, alpha, state, pairs, DH, domain)
        history.append(res)
        if res <= cfg.fp_tol:
            return state, iterations
        if q == 1:
            break
    raise NonConvergence(state_of(s).k, history)


def schauder_fixed_point(eq, x, pairs: DirectionPairs, DH, alpha: float,
                         cfg: EngineConfig = EngineConfig(), domain=None,
                         fallback: bool = True) -> FixedPoint:
    """Fixed point of the feasibility map for step `alpha`.

    Damped iteration ``k <- (1 - theta) k + theta Phi(k)`` from the
    barycenter, stopped once ``|Phi(k) - k|_inf <= cfg.fp_tol``. The damped
    phase is abandoned when the residual grows after the fifth iteration, or
    when the observed contraction rate cannot reach the tolerance within
    ``cfg.max_iter`` iterations. Then, if `fallback` is set, a bracketing
    solve on the simplex coordinates is tried; otherwise (or if that fails
    too) :class:`NonConvergence` is raised. :class:`ResidualTooLarge` means
    `alpha` is too large for the map to stay inside the simplex.
    """
    theta = cfg.damping
    state = SimplexState.barycenter(pairs)
    history = []
    for it in range(1, cfg.max_iter + 1):
        image, res = _fixed_point_residual(eq, x, alpha, state, pairs, DH, domain)
        history.append(res)
        if res <= cfg.fp_tol:
            return FixedPoint(state, it, tuple(history), "damped")
        if it > 5 and res > history[-2]:
            break
        if it > 10 and history[-6] > 0.0:
            rate = (res / history[-6]) ** 0.2
            if rate >= 1.0 or it + np.log(cfg.fp_tol / res) / np.log(rate) > cfg.max_iter:
                break
        state = SimplexState.from_coefficients(
            (1 - theta) * state.a + theta * image.a,
            (1 - theta) * state.a_tilde + theta * image.a_tilde, pairs)
    if not fallback:
        raise NonConvergence(state.k, history)
    damped = len(history)
    state, extra = _bracketing_solve(eq, x, alpha, pairs, DH, cfg, domain, history)
    return FixedPoint(state, damped + extra, tuple(history), "bracketing")


def _step_radius(problem, x, cfg):
    return min(cfg.r0, 0.99 * problem.domain.distance_to_boundary(x))


def _evaluate_all(problem, point):
    f = problem.objective(point)
    g = tuple(c(point) for c in problem.ineq)
    h = tuple(c(point) for c in problem.eq)
    return f, g, h


def certify_nonoptimal(problem, candidate, data: NoMultipliers,
                       cfg: EngineConfig = EngineConfig()) -> AscentCertificate:
    """Produce a feasible point with strictly larger objective.

    The step is halved up to ``cfg.max_backtracks`` times; every trial is
    re-evaluated from scratch (objective gain, all inequalities strictly
    positive, equalities within ``cfg.restore_tol``). With equalities, a
    slowly converging fixed-point iteration also triggers a halving; the
    bracketing fallback is only allowed on the final step length.
    """
    x = candidate.x
    f0 = problem.objective(x)
    radius = _step_radius(problem, x, cfg)
    diagnostics = []

    if data.pairs is None:
        u = np.asarray(data.direction, dtype=float)
        start = min(1.0, radius / float(np.max(np.abs(u))))
        for b in range(cfg.max_backtracks + 1):
            t = start * 0.5 ** b
            moved = x + t * u
            if not problem.domain.contains(moved):
                diagnostics.append((t, "outside domain"))
                continue
            try:
                f, g, _ = _evaluate_all(problem, moved)
            except DomainFault as exc:
                diagnostics.append((t, str(exc)))
                continue
            if f > f0 and all(v > 0.0 for v in g):
                return AscentCertificate(data.kind, x, moved, t, f - f0, g, (), u, backtracks=b)
            diagnostics.append((t, f"gain {f - f0!r}, min constraint {min(g, default=0.0)!r}"))
        raise CertificationFailed(f"no improving step after {cfg.max_backtracks} backtracks", diagnostics)

    pairs = data.pairs
    DH = np.atleast_2d(data.eq_jacobian) / pairs.h_scale[:, None]
    eq = [lambda p, h=h, c=c: h(p) / c for h, c in zip(problem.eq, pairs.h_scale)]
    start = min(1.0, radius / pairs.max_norm)
    for b in range(cfg.max_backtracks + 1):
        alpha = start * 0.5 ** b
        try:
            fp = schauder_fixed_point(eq, x, pairs, DH, alpha, cfg, problem.domain,
                                      fallback=b == cfg.max_backtracks)
            moved = x + alpha * fp.k
            f, g, h = _evaluate_all(problem, moved)
        except (ResidualTooLarge, NonConvergence, StepLeavesDomain, DomainFault) as exc:
            diagnostics.append((alpha, f"{type(exc).__name__}: {exc}"))
            continue
        worst = max(abs(v) for v in h)
        if f > f0 and all(v > 0.0 for v in g) and worst <= cfg.restore_tol:
            return AscentCertificate(
                data.kind, x, moved, alpha, f - f0, g, h, fp.k,
                (fp.state.a, fp.state.a_tilde), fp.iterations, b, fp.method, fp.history)
        diagnostics.append((alpha, f"gain {f - f0!r}, min constraint {min(g, default=0.0)!r}, "
                                   f"equality residual {worst!r}"))
    raise CertificationFailed(f"no restored ascent point after {cfg.max_backtracks} backtracks",
                              diagnostics)
