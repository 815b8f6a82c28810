"""Arithmetic expression language for drift and diffusion entries.

Grammar (LL(1), no implicit multiplication):

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          right-associative
    atom   := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'

'^' binds tighter than unary minus, so -x1^2 parses as -(x1^2).
Variables are x1..xn for the declared dimension n. Trees are immutable
tuples wrapped in :class:`ExpressionTree`; evaluation is pure and total
except for explicit domain faults (1/0, sqrt(-1), ln(0), 0^-1, (-2)^0.5),
which raise instead of propagating NaN or infinities.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    UnknownFunctionError,
    UnknownVariableError,
)

FUNCTIONS = ("sin", "cos", "tan", "tanh", "exp", "ln", "sqrt", "abs")

_SCALAR_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "tanh": math.tanh,
    "exp": math.exp, "ln": math.log, "sqrt": math.sqrt, "abs": abs,
}
_VECTOR_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "tanh": np.tanh,
    "exp": np.exp, "ln": np.log, "sqrt": np.sqrt, "abs": np.abs,
}

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^])
      | (?P<lp>\()
      | (?P<rp>\))
    """,
    re.VERBOSE,
)

_ATOM_EXPECTED = frozenset({"number", "variable", "function", "(", "-"})


@dataclass(frozen=True)
class ExpressionTree:
    """Parsed expression: a nested-tuple AST plus its declared dimension."""

    root: tuple
    dimension: int


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[pos]!r} at offset {pos}",
                pos, _ATOM_EXPECTED)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, dimension):
        self.text = text
        self.dimension = dimension
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        kind, text, off = self.peek()
        shown = text if kind != "end" else "end of input"
        raise ExpressionSyntaxError(
            f"unexpected {shown!r} at offset {off}; expected one of "
            + ", ".join(sorted(expected)),
            off, expected)

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(frozenset({"+", "-", "*", "/", "^", "end of input"}))
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            child = self.unary()
            if child[0] == "c":
                # fold literal negation so printing round-trips structurally
                return ("c", -child[1])
            return ("u-", child)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return ("^", base, self.unary())
        return base

    def atom(self):
        kind, text, off = self.peek()
        if kind == "num":
            self.advance()
            return ("c", float(text))
        if kind == "lp":
            self.advance()
            node = self.expr()
            if self.peek()[0] != "rp":
                self.fail(frozenset({")", "+", "-", "*", "/", "^"}))
            self.advance()
            return node
        if kind == "ident":
            self.advance()
            if text in _SCALAR_FUNCS:
                if self.peek()[0] != "lp":
                    self.fail(frozenset({"("}))
                self.advance()
                node = self.expr()
                if self.peek()[0] != "rp":
                    self.fail(frozenset({")", "+", "-", "*", "/", "^"}))
                self.advance()
                return ("f", text, node)
            m = re.fullmatch(r"x([0-9]+)", text)
            if m is None:
                raise UnknownFunctionError(
                    f"unknown function or variable {text!r} at offset {off}", off)
            index = int(m.group(1))
            if not 1 <= index <= self.dimension:
                raise UnknownVariableError(
                    f"variable {text!r} out of range for dimension "
                    f"{self.dimension} at offset {off}", off)
            return ("v", index - 1)
        self.fail(_ATOM_EXPECTED)


def parse_expression(text, dimension):
    """Parse ``text`` into an :class:`ExpressionTree` over x1..x<dimension>."""
    if dimension < 1:
        raise DomainError(f"dimension must be >= 1, got {dimension}")
    return ExpressionTree(_Parser(text, int(dimension)).parse(), int(dimension))


def _fmt_number(value):
    # repr gives the shortest decimal that round-trips the float
    return repr(value)


# precedence levels used by the printer; parenthesize a child whose level
# is below what its position requires
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "u-": 3, "^": 4, "c": 5, "v": 5, "f": 5}


def _print(node):
    kind = node[0]
    if kind == "c":
        v = node[1]
        if v < 0 or (v == 0 and math.copysign(1.0, v) < 0):
            return "-" + _fmt_number(-v), 3
        return _fmt_number(v), 5
    if kind == "v":
        return f"x{node[1] + 1}", 5
    if kind == "f":
        inner, _ = _print(node[2])
        return f"{node[1]}({inner})", 5
    if kind == "u-":
        text, prec = _print(node[1])
        if prec < 3:
            text = f"({text})"
        return "-" + text, 3
    left, lp = _print(node[1])
    right, rp = _print(node[2])
    my = _PREC[kind]
    if kind == "^":
        if lp < 5:
            left = f"({left})"
        if rp < 3:
            right = f"({right})"
    else:
        if lp < my:
            left = f"({left})"
        # subtraction and division are left-associative: guard equal precedence
        if rp < my or (rp == my and kind in "-/"):
            right = f"({right})"
        if kind in "+-" and right.startswith("-"):
            right = f"({right})"
    return f"{left} {kind} {right}" if my == 1 else f"{left}{kind}{right}", my


def print_expression(tree):
    """Render a tree to canonical text; re-parsing it reproduces the tree."""
    return _print(tree.root)[0]


def _eval_scalar(node, point):
    kind = node[0]
    if kind == "c":
        return node[1]
    if kind == "v":
        return float(point[node[1]])
    if kind == "u-":
        return -_eval_scalar(node[1], point)
    if kind == "f":
        arg = _eval_scalar(node[2], point)
        name = node[1]
        if name == "ln" and arg <= 0.0:
            raise EvaluationDomainError(f"ln of non-positive value {arg}")
        if name == "sqrt" and arg < 0.0:
            raise EvaluationDomainError(f"sqrt of negative value {arg}")
        try:
            return _SCALAR_FUNCS[name](arg)
        except (ValueError, OverflowError) as exc:
            raise EvaluationDomainError(f"{name}({arg}) failed: {exc}") from exc
    a = _eval_scalar(node[1], point)
    b = _eval_scalar(node[2], point)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if kind == "/":
        if b == 0.0:
            raise EvaluationDomainError("division by zero")
        return a / b
    # kind == "^"
    if a < 0.0 and b != math.floor(b):
        raise EvaluationDomainError(f"negative base {a} to non-integer power {b}")
    if a == 0.0 and b < 0.0:
        raise EvaluationDomainError(f"zero base to negative power {b}")
    try:
        return math.pow(a, b)
    except (ValueError, OverflowError) as exc:
        raise EvaluationDomainError(f"{a}^{b} failed: {exc}") from exc


def evaluate(tree, point):
    """Evaluate at one point (length-n sequence). Returns a finite float."""
    if len(point) != tree.dimension:
        raise DomainError(
            f"point has length {len(point)}, tree dimension is {tree.dimension}")
    out = _eval_scalar(tree.root, point)
    if not math.isfinite(out):
        raise EvaluationDomainError(f"expression evaluated to non-finite {out}")
    return out


def _eval_np(node, cols):
    kind = node[0]
    if kind == "c":
        return node[1]
    if kind == "v":
        return cols[node[1]]
    if kind == "u-":
        return -_eval_np(node[1], cols)
    if kind == "f":
        arg = _eval_np(node[2], cols)
        name = node[1]
        if name == "ln" and np.any(np.asarray(arg) <= 0.0):
            raise EvaluationDomainError("ln of non-positive value")
        if name == "sqrt" and np.any(np.asarray(arg) < 0.0):
            raise EvaluationDomainError("sqrt of negative value")
        with np.errstate(over="ignore", invalid="ignore"):
            return _VECTOR_FUNCS[name](arg)
    a = _eval_np(node[1], cols)
    b = _eval_np(node[2], cols)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if kind == "/":
        if np.any(np.asarray(b) == 0.0):
            raise EvaluationDomainError("division by zero")
        return a / b
    an = np.asarray(a)
    bn = np.asarray(b)
    if np.any((an < 0.0) & (bn != np.floor(bn))):
        raise EvaluationDomainError("negative base to non-integer power")
    if np.any((an == 0.0) & (bn < 0.0)):
        raise EvaluationDomainError("zero base to negative power")
    with np.errstate(over="ignore", invalid="ignore"):
        return np.power(a, b)


def evaluate_block(tree, points):
    """Vectorized evaluation over an (M, n) array; returns an (M,) float array.

    Domain faults raise the same errors as :func:`evaluate`; any non-finite
    output (overflow included) is rejected rather than returned.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1 and tree.dimension == 1:
        pts = pts[:, np.newaxis]
    if pts.ndim != 2 or pts.shape[1] != tree.dimension:
        raise DomainError(
            f"points must be (M, {tree.dimension}), got shape {pts.shape}")
    cols = [np.ascontiguousarray(pts[:, k]) for k in range(pts.shape[1])]
    out = _eval_np(tree.root, cols)
    out = np.broadcast_to(np.asarray(out, dtype=np.float64), (pts.shape[0],)).copy()
    if not np.all(np.isfinite(out)):
        raise EvaluationDomainError("expression evaluated to non-finite values")
    return out
