"""Problem model: scalar fields, domain boxes, the two problem kinds, loading.

Two problem kinds are supported, both posed as maximisation over an open box:

* :class:`InequalityProblem` -- maximise ``f0`` subject to ``f_i(x) >= 0``;
* :class:`MixedProblem` -- maximise ``f`` subject to ``g_i(x) >= 0`` and
  ``h_j(x) = 0`` with at least one equality.

Problem files are TOML documents::

    [problem]
    kind = "inequality"            # or "mixed"
    vars = ["x1", "x2"]
    objective = "x1"
    ineq = ["1 - x1^2 - x2^2"]
    eq = []
    domain = { x1 = "(-1.5, 1.5)", x2 = "(-1.5, 1.5)" }   # optional

    [candidate]
    point = [1.0, 0.0]
    act_tol = 1e-9                  # optional

A constraint or objective written ``"builtin:<name>"`` refers to a native
field from :mod:`mrules.builtins`.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .builtins import get_builtin
from .errors import DimensionMismatch, FormatError, InputError, PointOutsideDomain
from .expr import Expression, compile_expression, free_variables, parse, to_source

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "ScalarField", "DomainBox", "InequalityProblem", "MixedProblem", "Candidate",
    "FeasibilityReport", "load_problem", "loads_problem", "dump_problem",
    "problem_hash", "feasibility_report",
]

BUILTIN_PREFIX = "builtin:"
DEFAULT_ACT_TOL = 1e-9


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function of the problem's coordinate vector."""

    variables: tuple
    expression: Optional[Expression] = None
    builtin: Optional[str] = None
    source: Optional[str] = field(default=None, compare=False)
    _fn: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if (self.expression is None) == (self.builtin is None):
            raise ValueError("exactly one of expression / builtin must be given")
        if self.expression is not None:
            fn = compile_expression(self.expression, self.variables)
        else:
            spec = get_builtin(self.builtin)
            if spec.arity is not None and spec.arity != len(self.variables):
                raise DimensionMismatch(
                    f"builtin:{self.builtin} needs {spec.arity} variables, "
                    f"problem has {len(self.variables)}")
            native = spec.func
            fn = lambda x: float(native(np.asarray(x, dtype=float)))
        object.__setattr__(self, "_fn", fn)

    @classmethod
    def from_text(cls, text: str, variables: Sequence[str]) -> "ScalarField":
        variables = tuple(variables)
        stripped = text.strip()
        if stripped.startswith(BUILTIN_PREFIX):
            return cls(variables, builtin=stripped[len(BUILTIN_PREFIX):], source=stripped)
        return cls(variables, expression=parse(text, variables), source=text)

    @property
    def arity(self) -> int:
        return len(self.variables)

    @property
    def text(self) -> str:
        if self.source is not None:
            return self.source
        if self.builtin is not None:
            return BUILTIN_PREFIX + self.builtin
        return to_source(self.expression)

    @property
    def analytic_gradient(self):
        """Registered analytic gradient for builtins, else None."""
        if self.builtin is None:
            return None
        return get_builtin(self.builtin).gradient

    @property
    def adversarial_paths(self) -> tuple:
        if self.builtin is None:
            return ()
        return get_builtin(self.builtin).paths

    def free_variables(self) -> list:
        if self.expression is None:
            return list(self.variables)
        return free_variables(self.expression)

    def __call__(self, x) -> float:
        return self._fn(x)


@dataclass(frozen=True)
class DomainBox:
    """Open box ``prod (lower_i, upper_i)``; bounds may be infinite."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise DimensionMismatch("domain bounds have different lengths")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise InputError(f"empty domain interval ({lo}, {hi})")

    @classmethod
    def unbounded(cls, n: int) -> "DomainBox":
        return cls((-math.inf,) * n, (math.inf,) * n)

    @property
    def n(self) -> int:
        return len(self.lower)

    def contains(self, x) -> bool:
        return all(lo < xi < hi for lo, xi, hi in zip(self.lower, x, self.upper))

    def distance_to_boundary(self, x) -> float:
        """Largest r with the closed sup-norm ball of radius r inside the box
        (``inf`` for an unbounded box, 0 outside)."""
        if not self.contains(x):
            return 0.0
        return min((min(xi - lo, hi - xi) for lo, xi, hi in zip(self.lower, x, self.upper)),
                   default=math.inf)


@dataclass(frozen=True)
class InequalityProblem:
    """Maximise ``objective`` subject to ``ineq[i](x) >= 0``, x in ``domain``."""

    variables: tuple
    objective: ScalarField
    ineq: tuple
    domain: DomainBox

    kind = "inequality"

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def eq(self) -> tuple:
        return ()


@dataclass(frozen=True)
class MixedProblem:
    """Maximise ``objective`` subject to ``ineq[i](x) >= 0`` and ``eq[j](x) == 0``."""

    variables: tuple
    objective: ScalarField
    ineq: tuple
    eq: tuple
    domain: DomainBox

    kind = "mixed"

    def __post_init__(self):
        if not self.eq:
            raise InputError("a mixed problem needs at least one equality constraint")

    @property
    def n(self) -> int:
        return len(self.variables)


Problem = Union[InequalityProblem, MixedProblem]


@dataclass(frozen=True)
class Candidate:
    point: tuple
    act_tol: float = DEFAULT_ACT_TOL

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(v) for v in self.point))
        if not self.act_tol > 0:
            raise InputError("activity tolerance must be positive")

    @property
    def x(self) -> np.ndarray:
        return np.array(self.point, dtype=float)


def make_problem(variables, objective, ineq=(), eq=(), domain=None) -> Problem:
    """Build a problem from expression strings (or ready ScalarFields).

    With no equalities the result is an :class:`InequalityProblem`.
    """
    variables = tuple(variables)

    def as_field(f):
        return f if isinstance(f, ScalarField) else ScalarField.from_text(f, variables)

    if domain is None:
        domain = DomainBox.unbounded(len(variables))
    elif not isinstance(domain, DomainBox):
        lower, upper = zip(*domain)
        domain = DomainBox(tuple(map(float, lower)), tuple(map(float, upper)))
    objective = as_field(objective)
    ineq = tuple(as_field(f) for f in ineq)
    eq = tuple(as_field(f) for f in eq)
    if eq:
        return MixedProblem(variables, objective, ineq, eq, domain)
    return InequalityProblem(variables, objective, ineq, domain)


# -- file format -------------------------------------------------------------

_TOML_LINE = re.compile(r"line (\d+)")
_INTERVAL = re.compile(r"^\s*\(\s*([^,\s]+)\s*,\s*([^,\s)]+)\s*\)\s*$")


def _line_of(text, key):
    m = re.search(rf"^\s*{re.escape(key)}\s*=", text, re.MULTILINE)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _parse_interval(raw, line):
    if not isinstance(raw, str):
        raise FormatError(line, f"domain interval must be a string '(lo, hi)', got {raw!r}")
    m = _INTERVAL.match(raw)
    if m is None:
        raise FormatError(line, f"malformed domain interval {raw!r}")
    try:
        lo, hi = float(m.group(1)), float(m.group(2))
    except ValueError:
        raise FormatError(line, f"malformed domain interval {raw!r}") from None
    if not lo < hi:
        raise FormatError(line, f"empty domain interval {raw!r}")
    return lo, hi


def loads_problem(text: str):
    """Parse problem-file text; returns ``(problem, candidate)``."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _TOML_LINE.search(str(exc))
        raise FormatError(int(m.group(1)) if m else None, str(exc)) from None

    def section(name):
        sec = doc.get(name)
        if not isinstance(sec, dict):
            raise FormatError(None, f"missing [{name}] section")
        return sec

    prob, cand = section("problem"), section("candidate")

    def get(sec, key, kind, default=None, required=True):
        if key not in sec:
            if required:
                raise FormatError(None, f"missing key {key!r}")
            return default
        value = sec[key]
        if not isinstance(value, kind):
            raise FormatError(_line_of(text, key), f"key {key!r} has the wrong type")
        return value

    kind = get(prob, "kind", str)
    if kind not in ("inequality", "mixed"):
        raise FormatError(_line_of(text, "kind"), f"unknown problem kind {kind!r}")
    variables = get(prob, "vars", list)
    if not variables or not all(isinstance(v, str) for v in variables):
        raise FormatError(_line_of(text, "vars"), "vars must be a nonempty list of names")
    if len(set(variables)) != len(variables):
        raise FormatError(_line_of(text, "vars"), "duplicate variable names")
    objective = get(prob, "objective", str)
    ineq = get(prob, "ineq", list, default=[], required=False)
    eq = get(prob, "eq", list, default=[], required=False)
    for key, items in (("ineq", ineq), ("eq", eq)):
        if not all(isinstance(s, str) for s in items):
            raise FormatError(_line_of(text, key), f"{key} entries must be strings")
    if kind == "inequality" and eq:
        raise FormatError(_line_of(text, "eq"), "inequality problems take no equalities")

    raw_domain = get(prob, "domain", dict, default={}, required=False)
    lower, upper = [-math.inf] * len(variables), [math.inf] * len(variables)
    for name, raw in raw_domain.items():
        if name not in variables:
            raise FormatError(_line_of(text, "domain"), f"domain names unknown variable {name!r}")
        i = variables.index(name)
        lower[i], upper[i] = _parse_interval(raw, _line_of(text, "domain"))

    point = get(cand, "point", list)
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in point):
        raise FormatError(_line_of(text, "point"), "point entries must be numbers")
    act_tol = get(cand, "act_tol", (int, float), default=DEFAULT_ACT_TOL, required=False)

    if len(point) != len(variables):
        raise DimensionMismatch(
            f"point has {len(point)} entries but the problem declares {len(variables)} variables")
    problem = make_problem(variables, objective, ineq, eq,
                           DomainBox(tuple(lower), tuple(upper)))
    candidate = Candidate(tuple(point), float(act_tol))
    if not problem.domain.contains(candidate.point):
        raise PointOutsideDomain(f"candidate {list(candidate.point)} is not inside the domain box")
    return problem, candidate


def load_problem(path):
    """Load a problem file; returns ``(problem, candidate)``."""
    return loads_problem(Path(path).read_text())


def _fmt_bound(value):
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _dump_problem_section(problem):
    lines = [
        "[problem]",
        f"kind = {json.dumps(problem.kind)}",
        f"vars = {json.dumps(list(problem.variables))}",
        f"objective = {json.dumps(problem.objective.text)}",
        f"ineq = {json.dumps([f.text for f in problem.ineq])}",
        f"eq = {json.dumps([f.text for f in problem.eq])}",
    ]
    bounded = [
        f"{name} = {json.dumps(f'({_fmt_bound(lo)}, {_fmt_bound(hi)})')}"
        for name, lo, hi in zip(problem.variables, problem.domain.lower, problem.domain.upper)
        if not (math.isinf(lo) and math.isinf(hi))
    ]
    if bounded:
        lines.append("domain = { " + ", ".join(bounded) + " }")
    return "\n".join(lines) + "\n"


def dump_problem(problem, candidate) -> str:
    """Serialise to the problem-file format; :func:`loads_problem` inverts it."""
    return (_dump_problem_section(problem) + "\n[candidate]\n"
            f"point = [{', '.join(repr(v) for v in candidate.point)}]\n"
            f"act_tol = {candidate.act_tol!r}\n")


def problem_hash(problem) -> str:
    """SHA-256 of the canonical problem section (candidate excluded)."""
    return hashlib.sha256(_dump_problem_section(problem).encode()).hexdigest()


# -- feasibility -------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityReport:
    ineq_values: tuple
    eq_values: tuple
    in_domain: bool
    feasible: bool
    tol: float


def feasibility_report(problem, point, tol: float = 0.0) -> FeasibilityReport:
    """Evaluate every constraint at `point`.

    Feasible iff every inequality is ``>= -tol``, every equality has absolute
    value ``<= tol``, and the point lies in the open domain box.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (problem.n,):
        raise DimensionMismatch(f"point of shape {point.shape} for a problem in {problem.n} variables")
    g = tuple(f(point) for f in problem.ineq)
    h = tuple(f(point) for f in problem.eq)
    in_domain = problem.domain.contains(point)
    feasible = in_domain and all(v >= -tol for v in g) and all(abs(v) <= tol for v in h)
    return FeasibilityReport(g, h, in_domain, feasible, tol)
