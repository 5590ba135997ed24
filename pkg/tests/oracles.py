"""Independent oracles used by the tests.

None of these go through the package's numerics: gradients come from sympy,
ranks from exact rational determinants, stationarity from central
differences with a different step.
"""
import itertools
from fractions import Fraction

import numpy as np
import sympy


def sympy_field(text, variables):
    """Parse expression text with sympy (``^`` is power in the package grammar)."""
    symbols = sympy.symbols(list(variables))
    local = dict(zip(variables, symbols))
    local.update({"min": sympy.Min, "max": sympy.Max, "abs": sympy.Abs})
    expr = sympy.sympify(text.replace("^", "**"), locals=local)
    return expr, symbols


def sympy_gradient(text, variables):
    """Callable returning the exact gradient of `text` as a float vector."""
    expr, symbols = sympy_field(text, variables)
    grads = [sympy.lambdify(symbols, sympy.diff(expr, s), "math") for s in symbols]
    return lambda x: np.array([float(g(*x)) for g in grads])


def central_gradient(f, x, step=1e-5):
    """Fourth-order central differences, independent of the one-sided ladder."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = step
        grad[i] = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * step)
    return grad


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    return sum((-1) ** j * rows[0][j] * _det([r[:j] + r[j + 1:] for r in rows[1:]])
               for j in range(n) if rows[0][j] != 0)


def exact_rank(matrix):
    """Largest k with a nonzero k x k minor, in exact rational arithmetic."""
    a = [[Fraction(float(v)) for v in row] for row in np.atleast_2d(matrix)]
    m, n = len(a), len(a[0]) if a else 0
    for k in range(min(m, n), 0, -1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                if _det([[a[i][j] for j in cols] for i in rows]) != 0:
                    return k
    return 0
