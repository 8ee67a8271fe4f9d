"""Scalar arithmetic expressions over the variables ``t``, ``s`` and ``x``.

Problem coefficients are given as text, e.g. ``"2 + sin(t)"`` or
``"exp(-(t-s))"``.  This module tokenizes and parses such text with a Pratt
parser and evaluates the resulting tree either on plain floats or
elementwise on numpy arrays.

Grammar notes:

* precedence ``^`` > unary ``-`` > ``* /`` > ``+ -``
* ``+ - * /`` are left-associative, ``^`` is right-associative, so
  ``2^3^2 == 512`` and ``-2^2 == -4``
* no implicit multiplication: ``2x`` is a syntax error
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

VARIABLES = ("t", "s", "x")
FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")


class ExpressionError(Exception):
    """Base class for parse and evaluation failures."""


class ExprSyntaxError(ExpressionError):
    def __init__(self, offset: int, expected: str, found: str = ""):
        self.offset = offset
        self.expected = expected
        self.found = found
        msg = f"syntax error at byte {offset}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnknownIdentifier(ExpressionError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at byte {offset}")


class MissingBinding(ExpressionError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no value bound for variable {name!r}")


class DomainError(ExpressionError):
    def __init__(self, node: "Node", reason: str):
        self.node = node
        self.reason = reason
        super().__init__(f"{reason} in {to_source(node)}")


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


# -- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, name, op, end
    text: str
    offset: int  # byte offset into the UTF-8 source


def tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(byte_pos, "a number, name, operator or parenthesis",
                                  source[pos])
        text = m.group()
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, text, byte_pos))
        pos = m.end()
        byte_pos += len(text.encode("utf-8"))
    tokens.append(_Token("end", "", byte_pos))
    return tokens


# -- Pratt parser ------------------------------------------------------------

# left binding powers of infix operators
_INFIX_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text or tok.kind != "op":
            raise ExprSyntaxError(tok.offset, repr(text), tok.text or "end of input")
        return self.advance()

    def parse(self) -> Node:
        node = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(tok.offset, "an operator or end of input", tok.text)
        return node

    def expression(self, rbp: int) -> Node:
        left = self.prefix()
        while True:
            tok = self.peek()
            lbp = _INFIX_BP.get(tok.text, 0) if tok.kind == "op" else 0
            if lbp <= rbp:
                return left
            self.advance()
            # right-associative '^' parses its right side one notch looser
            right = self.expression(lbp - 1 if tok.text == "^" else lbp)
            left = BinOp(tok.text, left, right)

    def prefix(self) -> Node:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "name":
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expression(0)
                self.expect(")")
                return Call(tok.text, arg)
            raise UnknownIdentifier(tok.text, tok.offset)
        if tok.kind == "op" and tok.text == "-":
            return Neg(self.expression(_UNARY_BP))
        if tok.kind == "op" and tok.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        raise ExprSyntaxError(tok.offset, "a number, variable, function call, '-' or '('",
                              tok.text or "end of input")


@dataclass(frozen=True)
class Expression:
    """A parsed expression; ``source`` keeps the original text."""

    source: str
    ast: Node

    @property
    def variables(self) -> frozenset[str]:
        return free_variables(self.ast)

    @property
    def is_constant(self) -> bool:
        return not self.variables

    def __call__(self, **bindings):
        return evaluate(self, bindings)

    def __str__(self) -> str:
        return self.source


def parse(source: str) -> Expression:
    if not source or not source.strip():
        raise ExprSyntaxError(0, "an expression", "empty input")
    return Expression(source, _Parser(source).parse())


def free_variables(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, Call):
        return free_variables(node.arg)
    return free_variables(node.left) | free_variables(node.right)


def to_source(node: Node) -> str:
    """Print ``node`` fully parenthesized, so that ``parse`` reproduces it."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


# -- evaluation --------------------------------------------------------------

def _fail_if(mask, node: Node, reason: str) -> None:
    if np.any(mask):
        raise DomainError(node, reason)


def _eval(node: Node, env: Mapping[str, object]):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise MissingBinding(node.name) from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        a = _eval(node.arg, env)
        f = node.func
        if f == "ln":
            _fail_if(np.less_equal(a, 0.0), node, "logarithm of a non-positive value")
            return np.log(a)
        if f == "sqrt":
            _fail_if(np.less(a, 0.0), node, "square root of a negative value")
            return np.sqrt(a)
        return {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}[f](a)

    a = _eval(node.left, env)
    b = _eval(node.right, env)
    op = node.op
    if op == "+":
        return np.add(a, b)
    if op == "-":
        return np.subtract(a, b)
    if op == "*":
        return np.multiply(a, b)
    if op == "/":
        _fail_if(np.equal(b, 0.0), node, "division by zero")
        return np.divide(a, b)
    out = np.power(np.asarray(a, dtype=float), b)
    _fail_if(np.isnan(out) & ~np.isnan(a) & ~np.isnan(b), node,
             "power of a negative base to a non-integer exponent")
    return out


def evaluate(e: Expression | Node, bindings: Mapping[str, object] | None = None):
    """Evaluate in IEEE double precision.

    Bindings may be floats or numpy arrays (broadcast elementwise).  With only
    scalar bindings a Python ``float`` is returned, otherwise an ndarray.
    """
    node = e.ast if isinstance(e, Expression) else e
    env = dict(bindings or {})
    array_mode = any(np.ndim(v) > 0 for v in env.values())
    with np.errstate(all="ignore"):
        out = _eval(node, env)
    if array_mode:
        return np.asarray(out, dtype=float)
    return float(out)


def evaluate_on(e: Expression, shape, **bindings) -> np.ndarray:
    """Like ``evaluate`` but always returns an array of ``shape``.

    Constant expressions would otherwise collapse to a scalar.
    """
    return np.broadcast_to(evaluate(e, bindings), shape).astype(float)


__all__ = [
    "Expression", "Num", "Var", "Neg", "BinOp", "Call", "Node",
    "ExpressionError", "ExprSyntaxError", "UnknownIdentifier", "MissingBinding",
    "DomainError", "parse", "evaluate", "evaluate_on", "to_source",
    "free_variables", "tokenize", "VARIABLES", "FUNCTIONS",
]
