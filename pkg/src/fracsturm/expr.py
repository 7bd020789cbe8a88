"""A small expression language for potentials q(x).

Grammar (whitespace is insignificant, implicit multiplication is not
supported)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | 'x' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)`` and
``2^-1`` is ``0.5``.  Parsed trees evaluate on numpy arrays.
"""

import math
import re
from dataclasses import dataclass

import numpy as np


class ParseError(ValueError):
    def __init__(self, offset, expected, text=""):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        super().__init__(f"parse error at offset {offset}: expected {' or '.join(self.expected)}")
        self.text = text


class EvalDomain(ArithmeticError):
    """Evaluation left the real domain (log of a non-positive number, ...)."""


def _log(v):
    if np.any(v <= 0):
        raise EvalDomain("log of a non-positive value")
    return np.log(v)


def _sqrt(v):
    if np.any(v < 0):
        raise EvalDomain("sqrt of a negative value")
    return np.sqrt(v)


FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": np.abs,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


# -- AST ---------------------------------------------------------------------


class Node:
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.eval(x), dtype=float)
        out = np.broadcast_to(out, x.shape)
        if not np.all(np.isfinite(out)):
            raise EvalDomain(f"{self} is not finite on the sample")
        return float(out) if out.ndim == 0 else np.array(out)


@dataclass(frozen=True)
class Const(Node):
    value: float

    def eval(self, x):
        return self.value

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    def eval(self, x):
        return x

    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def eval(self, x):
        return -self.arg.eval(x)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def eval(self, x):
        a = self.left.eval(x)
        b = self.right.eval(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvalDomain("division by zero")
            return a / b
        return np.power(a, b)

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node

    def eval(self, x):
        return FUNCTIONS[self.name](self.arg.eval(x))

    def __str__(self):
        return f"{self.name}({self.arg})"


# -- tokenizer / parser ------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(pos, {"number", "name", "operator"}, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, expected):
        raise ParseError(self.tok[2], expected, self.text)

    def expect(self, value):
        if self.tok[1] != value or self.tok[0] == "end":
            self.fail({repr(value)})
        self.i += 1

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            self.fail({"operator", "end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.i += 1
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.i += 1
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        kind, value, _ = self.tok
        if kind == "num":
            self.i += 1
            return Const(float(value))
        if kind == "name":
            if value == "x":
                self.i += 1
                return Var()
            if value in CONSTANTS:
                self.i += 1
                return Const(CONSTANTS[value])
            if value in FUNCTIONS:
                self.i += 1
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            self.fail({"x", "pi", "e", "function name"})
        if kind == "op" and value == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        self.fail({"number", "x", "pi", "e", "function name", "'('"})


def parse(text):
    """Parse ``text`` into an evaluable AST; raises :class:`ParseError`."""
    return _Parser(text).parse()
