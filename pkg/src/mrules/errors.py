"""Exception hierarchy.

Input errors (bad files, unknown names, infeasible candidates) derive from
:class:`InputError`; everything that goes wrong inside the numerics derives
from :class:`NumericalError`. The command-line layer maps the two families to
distinct exit codes.
"""


class MrulesError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MrulesError):
    pass


class NumericalError(MrulesError):
    pass


# -- expressions -------------------------------------------------------------

class ExpressionSyntaxError(InputError):
    def __init__(self, position, message):
        self.position = position
        self.message = message
        super().__init__(f"at position {position}: {message}")


class UnknownVariable(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown variable {name!r}")


class UnknownFunction(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown function {name!r}")


class DomainFault(NumericalError):
    """An elementary operation was evaluated outside its domain."""

    def __init__(self, operation, operand):
        self.operation = operation
        self.operand = operand
        super().__init__(f"{operation} undefined at {operand!r}")


# -- problem files -----------------------------------------------------------

class FormatError(InputError):
    def __init__(self, line, message):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class DimensionMismatch(InputError):
    pass


class PointOutsideDomain(InputError):
    pass


class InfeasibleCandidate(InputError):
    pass


# -- differentiation ---------------------------------------------------------

class StepLeavesDomain(NumericalError):
    pass


class NonConvergent(NumericalError):
    """Richardson extrapolants of a difference quotient do not settle."""

    def __init__(self, direction, estimate, spread):
        self.direction = direction
        self.estimate = estimate
        self.spread = spread
        super().__init__(
            f"difference quotients do not converge along {list(direction)}: "
            f"estimate {estimate!r}, spread {spread!r}")


class LinearityViolation(NumericalError):
    """Directional derivatives exist but are not linear in the direction."""

    def __init__(self, direction, lhs, rhs):
        self.direction = direction
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(
            f"directional derivative {lhs!r} along {list(direction)} "
            f"differs from gradient prediction {rhs!r}")


# -- linear programming ------------------------------------------------------

class NumericalBreakdown(NumericalError):
    pass


# -- multipliers and ascent --------------------------------------------------

class ZeroLeadingMultiplier(NumericalError):
    pass


class InternalInconsistency(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    def __init__(self, norm, bound):
        self.norm = norm
        self.bound = bound
        super().__init__(f"residual norm {norm!r} is not below {bound!r}")


class NonConvergence(NumericalError):
    def __init__(self, iterate, history):
        self.iterate = iterate
        self.history = list(history)
        last = self.history[-1] if self.history else float("nan")
        super().__init__(
            f"fixed-point iteration stalled after {len(self.history)} "
            f"iterations (last residual {last!r})")


class CertificationFailed(NumericalError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or []
        super().__init__(message)
