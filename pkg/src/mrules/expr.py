"""Scalar expressions over named variables.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?
    atom   := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"

so ``^`` binds tighter than unary minus (``-x^2`` is ``-(x^2)``) and is
right-associative. There is no implicit multiplication.

Evaluation is plain IEEE double arithmetic through :mod:`math`; any operation
that leaves its domain or produces a non-finite value raises
:class:`~mrules.errors.DomainFault` instead of returning NaN or infinity.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from .errors import DomainFault, ExpressionSyntaxError, UnknownFunction, UnknownVariable

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "Expression",
    "parse", "evaluate", "free_variables", "to_source", "compile_expression",
    "FUNCTIONS",
]


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expression = Union[Num, Var, Neg, BinOp, Call]


def _checked(name, fn, *args):
    try:
        out = fn(*args)
    except (ValueError, ZeroDivisionError, OverflowError):
        raise DomainFault(name, args[0] if len(args) == 1 else args) from None
    if not math.isfinite(out):
        raise DomainFault(name, args[0] if len(args) == 1 else args)
    return out


def _sqrt(x):
    if x < 0.0:
        raise DomainFault("sqrt", x)
    return math.sqrt(x)


def _log(x):
    if x <= 0.0:
        raise DomainFault("log", x)
    return math.log(x)


# name -> (callable, min arity, max arity or None for variadic)
FUNCTIONS = {
    "sin": (math.sin, 1, 1),
    "cos": (math.cos, 1, 1),
    "exp": (math.exp, 1, 1),
    "log": (_log, 1, 1),
    "sqrt": (_sqrt, 1, 1),
    "abs": (abs, 1, 1),
    "min": (min, 1, None),
    "max": (max, 1, None),
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(pos, f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source, variables):
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = set(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.take()
        if value != text or kind == "end":
            found = "end of input" if kind == "end" else repr(value)
            raise ExpressionSyntaxError(pos, f"expected {text!r}, found {found}")

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            number = float(value)
            if not math.isfinite(number):
                raise ExpressionSyntaxError(pos, f"literal {value} is not finite")
            return Num(number)
        if kind == "ident":
            if self.peek()[1] == "(":
                if value not in FUNCTIONS:
                    raise UnknownFunction(value)
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                _, lo, hi = FUNCTIONS[value]
                if len(args) < lo or (hi is not None and len(args) > hi):
                    raise ExpressionSyntaxError(
                        pos, f"{value} takes {lo if hi == lo else f'at least {lo}'} "
                             f"argument(s), got {len(args)}")
                return Call(value, tuple(args))
            if value not in self.variables:
                raise UnknownVariable(value)
            return Var(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExpressionSyntaxError(pos, f"unexpected {found}")


def parse(source: str, variables: Sequence[str]) -> Expression:
    """Parse `source` into an AST whose variables are drawn from `variables`."""
    if not source or not source.strip():
        raise ExpressionSyntaxError(0, "empty expression")
    parser = _Parser(source, variables)
    node = parser.expr()
    kind, value, pos = parser.peek()
    if kind != "end":
        raise ExpressionSyntaxError(pos, f"unexpected {value!r}")
    return node


def free_variables(expr: Expression) -> list:
    """Variable names in order of first appearance (left to right)."""
    seen = []

    def walk(node):
        if isinstance(node, Var):
            if node.name not in seen:
                seen.append(node.name)
        elif isinstance(node, Neg):
            walk(node.operand)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Call):
            for arg in node.args:
                walk(arg)

    walk(expr)
    return seen


def to_source(expr: Expression) -> str:
    """Fully parenthesised source text; reparses to an identical AST."""
    if isinstance(expr, Num):
        text = repr(float(expr.value))
        return f"({text})" if text.startswith("-") else text
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{to_source(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({to_source(expr.left)} {expr.op} {to_source(expr.right)})"
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(to_source(a) for a in expr.args)})"
    raise TypeError(f"not an expression node: {expr!r}")


def _binop(op, a, b):
    if op == "+":
        out = a + b
    elif op == "-":
        out = a - b
    elif op == "*":
        out = a * b
    elif op == "/":
        if b == 0.0:
            raise DomainFault("/", (a, b))
        out = a / b
    else:
        return _checked("^", math.pow, a, b)
    if not math.isfinite(out):
        raise DomainFault(op, (a, b))
    return out


def _call(name, values):
    fn = FUNCTIONS[name][0]
    if name in ("min", "max"):
        return fn(values)
    if name in ("sqrt", "log"):
        return fn(values[0])
    return _checked(name, fn, values[0])


def evaluate(expr: Expression, point: Mapping[str, float]) -> float:
    """Evaluate `expr` with variables bound by the mapping `point`."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return float(point[expr.name])
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, point)
    if isinstance(expr, BinOp):
        return _binop(expr.op, evaluate(expr.left, point), evaluate(expr.right, point))
    if isinstance(expr, Call):
        return _call(expr.func, [evaluate(a, point) for a in expr.args])
    raise TypeError(f"not an expression node: {expr!r}")


def compile_expression(expr: Expression, variables: Sequence[str]) -> Callable[[Sequence[float]], float]:
    """Turn `expr` into a closure over a coordinate vector ordered as `variables`.

    The closure performs exactly the same floating point operations as
    :func:`evaluate`, so both paths agree bit for bit.
    """
    index = {name: i for i, name in enumerate(variables)}

    def build(node):
        if isinstance(node, Num):
            value = node.value
            return lambda x: value
        if isinstance(node, Var):
            i = index[node.name]
            return lambda x: float(x[i])
        if isinstance(node, Neg):
            inner = build(node.operand)
            return lambda x: -inner(x)
        if isinstance(node, BinOp):
            left, right, op = build(node.left), build(node.right), node.op
            return lambda x: _binop(op, left(x), right(x))
        if isinstance(node, Call):
            args, name = [build(a) for a in node.args], node.func
            return lambda x: _call(name, [a(x) for a in args])
        raise TypeError(f"not an expression node: {node!r}")

    return build(expr)
