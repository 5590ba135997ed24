"""Native scalar fields that the expression grammar cannot express.

Problem files refer to these as ``builtin:<name>``. Each entry may carry an
analytic gradient (used by tests and demos as an oracle) and a list of
adversarial paths for the Hadamard probe. A path is a callable
``path(x, h, t) -> h_t`` returning a perturbed direction such that the curve
``x + t * h_t`` is one that a generic probe would be unlikely to follow; the
probe only uses it when ``h_t -> h`` as ``t -> 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import UnknownFunction

__all__ = ["Builtin", "BUILTINS", "get_builtin", "register_builtin"]


@dataclass(frozen=True)
class Builtin:
    name: str
    func: Callable[[np.ndarray], float]
    arity: Optional[int] = None  # None: any dimension
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    paths: tuple = field(default_factory=tuple)


def _parabola_indicator(x):
    # exact float comparison on purpose: the set is a curve of measure zero
    return 1.0 if (x[1] == x[0] * x[0] and x[0] != 0.0) else 0.0


def _parabola_path(x, h, t):
    # direction whose step lands exactly on y = x^2
    first = x[0] + t * h[0]
    return np.array([h[0], (first * first - x[1]) / t])


def _euclidean_norm(x):
    return math.sqrt(float(np.dot(x, x)))


def _euclidean_norm_gradient(x):
    norm = _euclidean_norm(x)
    if norm == 0.0:
        raise ValueError("euclidean norm has no gradient at the origin")
    return np.asarray(x, dtype=float) / norm


BUILTINS = {
    "parabola_indicator": Builtin(
        "parabola_indicator", _parabola_indicator, arity=2,
        paths=(_parabola_path,)),
    "euclidean_norm": Builtin(
        "euclidean_norm", _euclidean_norm, gradient=_euclidean_norm_gradient),
}


def register_builtin(builtin: Builtin) -> None:
    BUILTINS[builtin.name] = builtin


def get_builtin(name: str) -> Builtin:
    try:
        return BUILTINS[name]
    except KeyError:
        raise UnknownFunction(f"builtin:{name}") from None
