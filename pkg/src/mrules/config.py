"""Tolerances and iteration limits shared by the analysis pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field

from .differentiation import DiffConfig

__all__ = ["EngineConfig"]


@dataclass(frozen=True)
class EngineConfig:
    """Knobs for multiplier computation and ascent certification.

    ``stat_tol``
        bound on the stationarity residual of a multiplier certificate, and
        the threshold below which the leading multiplier counts as zero.
    ``restore_tol``
        bound on ``|h_j|`` at a restored (improved) point.
    ``fp_tol``, ``max_iter``, ``damping``
        stopping rule and averaging weight of the fixed-point iteration.
    ``max_backtracks``
        how many times the step may be halved before certification fails.
    ``r0``
        cap on the sup-norm step length; it is further limited by the
        distance from the candidate to the domain boundary.
    ``near_active_factor``
        inactive constraints with value below ``factor * act_tol`` are
        flagged in the active-set record.
    """

    diff: DiffConfig = field(default_factory=DiffConfig)
    stat_tol: float = 1e-7
    restore_tol: float = 1e-8
    fp_tol: float = 1e-10
    max_iter: int = 500
    damping: float = 0.5
    max_backtracks: int = 30
    r0: float = 1.0
    near_active_factor: float = 10.0

    def __post_init__(self):
        for name in ("stat_tol", "restore_tol", "fp_tol", "r0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1 or self.max_backtracks < 0:
            raise ValueError("iteration limits must be positive")

    @property
    def lp_slack(self) -> float:
        """Allowed violation of the stationarity equations inside the
        multiplier LP; gradients are only known to finite accuracy."""
        return self.stat_tol / 10.0
