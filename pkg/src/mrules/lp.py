"""Dense linear programming and rank kernel.

Problems here have a handful of rows and columns, so a dense tableau simplex
is plenty. Bland's smallest-index rule is used for both entering and leaving
variables, which rules out cycling and makes the pivot sequence (and hence
the returned vertex) fully deterministic. Rows are equilibrated, and a
column entry only qualifies as a pivot when it exceeds a small fraction of
the column's largest entry, which keeps roundoff-sized pivots out.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalBreakdown

__all__ = [
    "LpStatus", "LpProblem", "LpOutcome", "solve_lp", "feasible_point",
    "min_l1_point", "rank", "null_vector", "LP_TOL",
]

LP_TOL = 1e-9
PIVOT_TOL = 1e-12
PIVOT_REL = 1e-9   # entries below this fraction of the column's largest are roundoff
COST_TOL = 1e-11
MAX_PIVOTS = 20_000


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _block(a, n):
    if a is None:
        return np.zeros((0, n))
    a = np.asarray(a, dtype=float)
    return a.reshape(-1, n) if a.size else np.zeros((0, n))


def _vec(b, m):
    if b is None:
        return np.zeros(m)
    return np.asarray(b, dtype=float).reshape(m)


@dataclass
class LpProblem:
    """Optimise ``c @ x`` subject to ``A_eq x = b_eq``, ``A_ge x >= b_ge`` and
    per-variable lower bounds, each either 0 or ``-inf`` (free).

    The objective is minimised unless ``maximize`` is set.
    """

    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_ge: Optional[np.ndarray] = None
    b_ge: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.A_eq = _block(self.A_eq, n)
        self.b_eq = _vec(self.b_eq, self.A_eq.shape[0])
        self.A_ge = _block(self.A_ge, n)
        self.b_ge = _vec(self.b_ge, self.A_ge.shape[0])
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(n)
        if not np.all((self.lower == 0.0) | (self.lower == -np.inf)):
            raise ValueError("lower bounds must be 0 or -inf")
        for arr in (self.c, self.A_eq, self.b_eq, self.A_ge, self.b_ge):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")

    @property
    def n(self) -> int:
        return self.c.size

    def residual(self, x) -> float:
        """Largest constraint violation of `x` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if self.A_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        if self.A_ge.shape[0]:
            worst = max(worst, float(np.max(self.b_ge - self.A_ge @ x)))
        bounded = self.lower == 0.0
        if np.any(bounded):
            worst = max(worst, float(np.max(-x[bounded])))
        return worst


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Rows ``[A | b]`` with a basis, plus one cost row ``[d | -z]``."""

    def __init__(self, A, b, basis):
        self.T = np.hstack([A, b[:, None]])
        self.basis = list(basis)

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        for i in range(T.shape[0]):
            if i != r and T[i, j] != 0.0:
                T[i] -= T[i, j] * T[r]
        T[r, j] = 1.0
        self.basis[r] = j

    def set_cost(self, cost):
        m = len(self.basis)
        row = np.zeros(self.T.shape[1])
        row[:cost.size] = cost
        for i in range(m):
            row -= cost[self.basis[i]] * self.T[i]
        if self.T.shape[0] > m:
            self.T[m] = row
        else:
            self.T = np.vstack([self.T, row])

    def run(self, allowed):
        """Minimise the cost row over columns in `allowed` (Bland's rule).

        Returns False if the objective is unbounded below.
        """
        T = self.T
        m = len(self.basis)
        for _ in range(MAX_PIVOTS):
            cost = T[m, :-1]
            # reduced costs are only meaningful relative to their column's size
            scale = np.maximum(1.0, np.max(np.abs(T[:m, :-1]), axis=0, initial=0.0))
            entering = next((j for j in allowed if cost[j] < -COST_TOL * scale[j]), None)
            if entering is None:
                return True
            column = T[:m, entering]
            floor = max(PIVOT_TOL, PIVOT_REL * float(np.max(np.abs(column), initial=0.0)))
            rows = [i for i in range(m) if column[i] > floor]
            if not rows:
                return False
            ratios = [T[i, -1] / column[i] for i in rows]
            best = min(ratios)
            ties = [i for i, q in zip(rows, ratios) if q <= best + 1e-12 * max(1.0, abs(best))]
            leaving = min(ties, key=lambda i: self.basis[i])
            self.pivot(leaving, entering)
        raise NumericalBreakdown(f"simplex exceeded {MAX_PIVOTS} pivots")

    def solution(self, ncols):
        y = np.zeros(ncols)
        for i, j in enumerate(self.basis):
            if j < ncols:
                y[j] = self.T[i, -1]
        return y


def solve_lp(p: LpProblem) -> LpOutcome:
    """Two-phase dense simplex with Bland's rule."""
    n = p.n
    free = np.flatnonzero(p.lower == -np.inf)
    # x = P y, y >= 0; free variables split as x_j = y_j - y_{n+k}
    P = np.hstack([np.eye(n), -np.eye(n)[:, free]])
    ny = P.shape[1]
    n_eq, n_ge = p.A_eq.shape[0], p.A_ge.shape[0]
    m = n_eq + n_ge
    A = np.zeros((m, ny + n_ge))
    A[:n_eq, :ny] = p.A_eq @ P
    A[n_eq:, :ny] = p.A_ge @ P
    A[n_eq:, ny:] = -np.eye(n_ge)
    b = np.concatenate([p.b_eq, p.b_ge])
    nstd = A.shape[1]

    flip = b < 0
    A[flip] *= -1.0
    b = np.where(flip, -b, b)
    scale = np.max(np.abs(np.hstack([A, b[:, None]])), axis=1) if m else np.zeros(0)
    scale[scale == 0.0] = 1.0
    A /= scale[:, None]
    b = b / scale

    cost = (P.T @ p.c) * (-1.0 if p.maximize else 1.0)
    cost = np.concatenate([cost, np.zeros(n_ge)])

    # phase 1: one artificial per row
    tab = _Tableau(np.hstack([A, np.eye(m)]), b, range(nstd, nstd + m))
    tab.set_cost(np.concatenate([np.zeros(nstd), np.ones(m)]))
    if not tab.run(range(nstd + m)):
        raise NumericalBreakdown("phase-1 objective reported unbounded")
    if -tab.T[m, -1] > LP_TOL:
        return LpOutcome(LpStatus.INFEASIBLE)

    # drive artificials out of the basis; drop rows that are redundant
    r = 0
    while r < len(tab.basis):
        if tab.basis[r] >= nstd:
            row = tab.T[r, :nstd]
            floor = max(PIVOT_TOL, PIVOT_REL * float(np.max(np.abs(row), initial=0.0)))
            cols = [j for j in range(nstd) if abs(row[j]) > floor]
            if cols:
                tab.pivot(r, cols[0])
            else:
                tab.T = np.delete(tab.T, r, axis=0)
                del tab.basis[r]
                continue
        r += 1
    tab.T = np.delete(tab.T, range(nstd, nstd + m), axis=1)
    tab.T = tab.T[:len(tab.basis)]

    tab.set_cost(cost)
    if not tab.run(range(nstd)):
        return LpOutcome(LpStatus.UNBOUNDED)
    y = tab.solution(nstd)
    x = P @ y[:ny]
    x[p.lower == 0.0] = np.maximum(x[p.lower == 0.0], 0.0)
    bscale = 1.0 + max(np.max(np.abs(p.b_eq), initial=0.0), np.max(np.abs(p.b_ge), initial=0.0))
    if p.residual(x) > LP_TOL * bscale:
        raise NumericalBreakdown(f"optimal vertex violates constraints by {p.residual(x):.3e}")
    return LpOutcome(LpStatus.OPTIMAL, x, float(p.c @ x))


def feasible_point(A_eq=None, b_eq=None, A_ge=None, b_ge=None, lower=None, n=None):
    """Any point satisfying the constraint system, or None if there is none.

    `n` is only needed when no constraint block or bound vector fixes the
    dimension.
    """
    if n is None:
        for block in (A_eq, A_ge):
            if block is not None and np.ndim(block) == 2:
                n = np.shape(block)[1]
                break
        else:
            n = 0 if lower is None else len(lower)
    outcome = solve_lp(LpProblem(np.zeros(n), A_eq, b_eq, A_ge, b_ge, lower))
    return outcome.x if outcome.optimal else None


def min_l1_point(n, A_ge=None, b_ge=None, A_eq=None, b_eq=None):
    """Point of least 1-norm with ``A_ge x >= b_ge`` and ``A_eq x = b_eq``
    (all variables free), or None if the system is infeasible."""
    A_ge = _block(A_ge, n)
    A_eq = _block(A_eq, n)
    split = lambda a: np.hstack([a, -a])
    outcome = solve_lp(LpProblem(
        np.ones(2 * n), split(A_eq), _vec(b_eq, A_eq.shape[0]),
        split(A_ge), _vec(b_ge, A_ge.shape[0])))
    if not outcome.optimal:
        return None
    return outcome.x[:n] - outcome.x[n:]


def _row_normalised(matrix):
    a = np.array(matrix, dtype=float, ndmin=2)
    if a.size == 0:
        return a
    norms = np.max(np.abs(a), axis=1)
    norms[norms == 0.0] = 1.0
    return a / norms[:, None]


def _eliminate(a, tol):
    """Row echelon form in place; returns pivot columns."""
    rows, cols = a.shape
    pivots = []
    r = 0
    for j in range(cols):
        if r == rows:
            break
        i = r + int(np.argmax(np.abs(a[r:, j])))
        if abs(a[i, j]) <= tol:
            a[r:, j] = 0.0
            continue
        a[[r, i]] = a[[i, r]]
        a[r] /= a[r, j]
        for k in range(rows):
            if k != r:
                a[k] -= a[k, j] * a[r]
        pivots.append(j)
        r += 1
    return pivots


def rank(matrix, tol: float = 1e-10) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    Rows are first scaled to unit max-norm; a pivot counts when its magnitude
    exceeds `tol`.
    """
    a = _row_normalised(matrix)
    if a.size == 0:
        return 0
    return len(_eliminate(a, tol))


def null_vector(matrix, tol: float = 1e-10):
    """A nonzero ``v`` with ``matrix @ v = 0`` (unit 1-norm, first nonzero
    entry positive), or None when the columns are independent."""
    a = _row_normalised(matrix)
    cols = a.shape[1]
    if cols == 0:
        return None
    pivots = _eliminate(a, tol) if a.size else []
    free = [j for j in range(cols) if j not in pivots]
    if not free:
        return None
    j = free[0]
    v = np.zeros(cols)
    v[j] = 1.0
    for r, pj in enumerate(pivots):
        v[pj] = -a[r, j]
    v /= np.sum(np.abs(v))
    first = v[np.flatnonzero(v)[0]]
    return v if first > 0 else -v
