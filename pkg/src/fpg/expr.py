"""Arithmetic expressions over chart coordinates ``x1..xn, y1..yn``.

Grammar (highest precedence first)::

    primary := NUMBER | xK | yK | FUNC '(' expr ')' | '(' expr ')'
    power   := primary ['^' INTEGER]          INTEGER may be '-k' or '(-k)'
    unary   := '-' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

``FUNC`` is one of the jet-safe primitives; there are no user functions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import primitives
from .derivatives import EvalPoint
from .errors import DimensionError, ExprSyntaxError, UnknownIdentifier


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "x" or "y"
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]

_PREC = {"+": 10, "-": 10, "*": 20, "/": 20}
_UNARY_PREC = 30
_POW_PREC = 40

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)
_VAR = re.compile(r"([xy])(\d+)$")


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | ident | op | end
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {src[pos]!r}", line, pos - line_start + 1,
                {"number", "identifier", "operator"},
            )
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


_OPERAND_START = {"number", "identifier", "(", "-"}
_AFTER_OPERAND = {"+", "-", "*", "/", "^", ")", "end of input"}


class _Parser:
    def __init__(self, src: str, n: int):
        self.toks = _tokenize(src)
        self.i = 0
        self.n = n

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def fail(self, message: str, expected) -> None:
        t = self.tok
        raise ExprSyntaxError(message, t.line, t.col, expected)

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            self.fail(f"unexpected {self._describe()}", {text})
        self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else f"token {self.tok.text!r}"

    def parse(self) -> Node:
        node = self.expression(0)
        if self.tok.kind != "end":
            self.fail(f"unexpected {self._describe()}", _AFTER_OPERAND)
        return node

    def expression(self, rbp: int) -> Node:
        left = self.prefix()
        while True:
            t = self.tok
            if t.kind != "op" or t.text not in _PREC and t.text != "^":
                return left
            lbp = _POW_PREC if t.text == "^" else _PREC[t.text]
            if lbp <= rbp:
                return left
            self.advance()
            if t.text == "^":
                left = Pow(left, self.integer_exponent())
            else:
                left = BinOp(t.text, left, self.expression(lbp))

    def integer_exponent(self) -> int:
        sign, parens = 1, 0
        while self.tok.kind == "op" and self.tok.text in "(-":
            if self.tok.text == "(":
                parens += 1
            else:
                sign = -sign
            self.advance()
        t = self.tok
        if t.kind != "num" or not re.fullmatch(r"\d+", t.text):
            self.fail("exponent must be an integer literal", {"integer"})
        self.advance()
        for _ in range(parens):
            self.expect(")")
        return sign * int(t.text)

    def prefix(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "op" and t.text == "-":
            self.advance()
            return Neg(self.expression(_UNARY_PREC))
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expression(0)
            self.expect(")")
            return node
        if t.kind == "ident":
            self.advance()
            if t.text in primitives.FUNCTIONS:
                self.expect("(")
                arg = self.expression(0)
                self.expect(")")
                return Call(t.text, arg)
            m = _VAR.match(t.text)
            if m is None:
                raise UnknownIdentifier(
                    f"unknown identifier {t.text!r} at line {t.line}, column {t.col}; "
                    f"expected x1..x{self.n}, y1..y{self.n} or one of {', '.join(primitives.PRIMITIVES)}"
                )
            k = int(m.group(2))
            if not 1 <= k <= self.n:
                raise DimensionError(
                    f"{t.text} at line {t.line}, column {t.col} is out of range for dimension {self.n}"
                )
            return Var(m.group(1), k)
        self.fail(f"unexpected {self._describe()}", _OPERAND_START)


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY_PREC
    if isinstance(node, Pow):
        return _POW_PREC
    return 100


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def pretty(node: Node) -> str:
    """Canonical text with minimal parentheses; ``parse(pretty(e))`` rebuilds ``e``."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return f"{node.kind}{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = pretty(node.operand)
        if _prec(node.operand) < _UNARY_PREC or isinstance(node.operand, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = pretty(node.base)
        if _prec(node.base) <= _POW_PREC:
            base = f"({base})"
        exp = str(node.exponent) if node.exponent >= 0 else f"(-{-node.exponent})"
        return f"{base}^{exp}"
    p = _PREC[node.op]
    left, right = pretty(node.left), pretty(node.right)
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def _compile(node: Node):
    if isinstance(node, Num):
        v = node.value
        return lambda x, y: v
    if isinstance(node, Var):
        i = node.index - 1
        if node.kind == "x":
            return lambda x, y: x[i]
        return lambda x, y: y[i]
    if isinstance(node, Neg):
        f = _compile(node.operand)
        return lambda x, y: -f(x, y)
    if isinstance(node, Pow):
        f, m = _compile(node.base), node.exponent
        return lambda x, y: primitives.ipow(f(x, y), m)
    if isinstance(node, Call):
        f, g = _compile(node.arg), primitives.FUNCTIONS[node.func]
        return lambda x, y: g(f(x, y))
    a, b = _compile(node.left), _compile(node.right)
    if node.op == "+":
        return lambda x, y: a(x, y) + b(x, y)
    if node.op == "-":
        return lambda x, y: a(x, y) - b(x, y)
    if node.op == "*":
        return lambda x, y: a(x, y) * b(x, y)
    return lambda x, y: primitives.div(a(x, y), b(x, y))


class Expr:
    """A parsed expression bound to dimension ``n``; callable as a scalar field ``f(x, y)``."""

    def __init__(self, root: Node, n: int, source: str | None = None):
        self.root = root
        self.n = n
        self.source = source if source is not None else pretty(root)
        self._fn = _compile(root)

    def __call__(self, x, y):
        return self._fn(x, y)

    def __repr__(self) -> str:
        return f"Expr({pretty(self.root)!r}, n={self.n})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and (self.root, self.n) == (other.root, other.n)

    def __hash__(self) -> int:
        return hash((self.root, self.n))

    def pretty(self) -> str:
        return pretty(self.root)

    def variables(self) -> set:
        out, stack = set(), [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Var):
                out.add(f"{node.kind}{node.index}")
            elif isinstance(node, (Neg,)):
                stack.append(node.operand)
            elif isinstance(node, Pow):
                stack.append(node.base)
            elif isinstance(node, Call):
                stack.append(node.arg)
            elif isinstance(node, BinOp):
                stack.extend((node.left, node.right))
        return out


def parse(src: str, n: int) -> Expr:
    """Parse ``src`` into an expression over ``x1..xn, y1..yn``."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 1, 1, _OPERAND_START)
    return Expr(_Parser(src, n).parse(), n, src)


def evaluate(e: Expr, p):
    """Value of ``e`` at an :class:`EvalPoint` or at a ``(x, y)`` pair of (jet) sequences."""
    if isinstance(p, EvalPoint):
        if p.n != e.n:
            raise DimensionError(f"expression bound to n={e.n}, point has n={p.n}")
        return e(p.x, p.y)
    x, y = p
    if len(x) != e.n or len(y) != e.n:
        raise DimensionError(f"expression bound to n={e.n}")
    return e(x, y)
