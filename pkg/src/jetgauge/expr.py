"""Closed-form scalar expressions over named variables.

Grammar (verbatim contract):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' number)?
    base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base

Identifiers are [a-zA-Z][a-zA-Z0-9_]*; the callable functions are sin, cos,
exp, log, sqrt and neg; '^' takes a constant numeric exponent.  The tree
evaluates exactly as parsed, with no rewriting.  Note the grammar places
unary minus inside 'base', so a leading '-x^2' parses as (-x)^2.

Lifting replaces every variable by its truncated Taylor series and replays
the tree on series, which yields exact derivatives of any composite up to
the truncation order.
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import series
from ._multiindex import MultiIndexContext, context
from .series import DomainError

__all__ = [
    "DomainError", "ParseError", "Expr", "Num", "Var", "Bin", "Pow", "Call",
    "Neg", "ExprMap", "TaylorMap", "parse_expr", "constant", "variable",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "neg")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class Expr:
    """Base node; subclasses are frozen dataclasses."""

    def eval(self, env: Mapping[str, float]) -> float:
        raise NotImplementedError

    def lift(self, ctx: MultiIndexContext, env: Mapping[str, np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def variables(self) -> set[str]:
        out: set[str] = set()
        self._collect(out)
        return out

    def _collect(self, out: set[str]) -> None:
        raise NotImplementedError

    def to_text(self) -> str:
        return self._print(0)

    def _print(self, parent_prec: int) -> str:
        raise NotImplementedError

    # Programmatic construction sugar used by the higher modules.
    def __add__(self, other):
        return Bin("+", self, as_expr(other))

    def __radd__(self, other):
        return Bin("+", as_expr(other), self)

    def __sub__(self, other):
        return Bin("-", self, as_expr(other))

    def __rsub__(self, other):
        return Bin("-", as_expr(other), self)

    def __mul__(self, other):
        return Bin("*", self, as_expr(other))

    def __rmul__(self, other):
        return Bin("*", as_expr(other), self)

    def __truediv__(self, other):
        return Bin("/", self, as_expr(other))

    def __rtruediv__(self, other):
        return Bin("/", as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, exponent):
        return Pow(self, float(exponent))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return constant(float(value))


def constant(value: float) -> Expr:
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value}")
    if value < 0:
        return Neg(Num(-value))
    return Num(float(value))


def variable(name: str) -> Expr:
    return Var(name)


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def eval(self, env):
        return self.value

    def lift(self, ctx, env):
        return series.const(ctx, self.value)

    def _collect(self, out):
        pass

    def _print(self, parent_prec):
        return repr(self.value) if self.value != int(self.value) else str(int(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def eval(self, env):
        return env[self.name]

    def lift(self, ctx, env):
        return env[self.name]

    def _collect(self, out):
        out.add(self.name)

    def _print(self, parent_prec):
        return self.name


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    lhs: Expr
    rhs: Expr

    def eval(self, env):
        a = self.lhs.eval(env)
        b = self.rhs.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b

    def lift(self, ctx, env):
        a = self.lhs.lift(ctx, env)
        b = self.rhs.lift(ctx, env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return series.mul(ctx, a, b)
        return series.div(ctx, a, b)

    def _collect(self, out):
        self.lhs._collect(out)
        self.rhs._collect(out)

    def _print(self, parent_prec):
        prec = _PREC[self.op]
        left = self.lhs._print(prec)
        # Right operand needs parens at equal precedence for - and /.
        right = self.rhs._print(prec + (0 if self.op in "+*" else 1))
        if isinstance(self.rhs, Neg):
            right = f"({right})"
        text = f"{left} {self.op} {right}"
        return f"({text})" if prec < parent_prec else text


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: float

    def eval(self, env):
        a = self.base.eval(env)
        e = self.exponent
        if float(e).is_integer():
            k = int(e)
            if k < 0 and a == 0.0:
                raise DomainError("zero raised to a negative power")
            return a**k
        if a < 0.0 or (a == 0.0 and e < 0):
            raise DomainError(f"{a} raised to non-integer power {e}")
        return a**e

    def lift(self, ctx, env):
        return series.powc(ctx, self.base.lift(ctx, env), self.exponent)

    def _collect(self, out):
        self.base._collect(out)

    def _print(self, parent_prec):
        base = self.base._print(0)
        if not isinstance(self.base, (Num, Var)):
            base = f"({base})"
        e = self.exponent
        etext = str(int(e)) if float(e).is_integer() else repr(e)
        return f"{base}^{etext}"


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def eval(self, env):
        a = self.arg.eval(env)
        if self.func == "neg":
            return -a
        if self.func == "log":
            if a <= 0.0:
                raise DomainError(f"log of nonpositive value {a}")
            return math.log(a)
        if self.func == "sqrt":
            if a < 0.0:
                raise DomainError(f"sqrt of negative value {a}")
            return math.sqrt(a)
        return getattr(math, self.func)(a)

    def lift(self, ctx, env):
        a = self.arg.lift(ctx, env)
        if self.func == "neg":
            return -a
        return series.analytic(ctx, self.func, a)

    def _collect(self, out):
        self.arg._collect(out)

    def _print(self, parent_prec):
        return f"{self.func}({self.arg._print(0)})"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def eval(self, env):
        return -self.arg.eval(env)

    def lift(self, ctx, env):
        return -self.arg.lift(ctx, env)

    def _collect(self, out):
        self.arg._collect(out)

    def _print(self, parent_prec):
        text = "-" + self.arg._print(3)
        return f"({text})" if parent_prec > 1 else text


_TOKEN = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[a-zA-Z][a-zA-Z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def locate(offset: int) -> tuple[int, int]:
        row = bisect.bisect_right(line_starts, offset) - 1
        return row + 1, offset - line_starts[row] + 1

    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(text, pos)
        if match is None:
            line, column = locate(pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, column)
        start = match.start(match.lastgroup)
        line, column = locate(start)
        tokens.append(_Token(match.lastgroup, match.group(match.lastgroup), line, column))
        pos = match.end()
    line, column = locate(len(text))
    tokens.append(_Token("end", "", line, column))
    return tokens


class _Parser:
    def __init__(self, text: str, declared: Sequence[str] | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.declared = None if declared is None else set(declared)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.advance()
        if tok.text != text:
            shown = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {shown!r}", tok.line, tok.column)
        return tok

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            node = Bin(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.peek().text in ("*", "/"):
            op = self.advance().text
            node = Bin(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        node = self.parse_base()
        if self.peek().text == "^":
            self.advance()
            tok = self.advance()
            if tok.kind != "num":
                raise ParseError("exponent must be a numeric literal", tok.line, tok.column)
            node = Pow(node, float(tok.text))
        return node

    def parse_base(self) -> Expr:
        tok = self.advance()
        if tok.text == "-":
            return Neg(self.parse_base())
        if tok.text == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "ident":
            if self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok.text!r}", tok.line, tok.column)
                self.advance()
                arg = self.parse_expr()
                self.expect(")")
                return Neg(arg) if tok.text == "neg" else Call(tok.text, arg)
            if self.declared is not None and tok.text not in self.declared:
                raise ParseError(f"undeclared variable {tok.text!r}", tok.line, tok.column)
            return Var(tok.text)
        shown = tok.text or "end of input"
        raise ParseError(f"unexpected {shown!r}", tok.line, tok.column)


def parse_expr(text: str, variables: Sequence[str] | None = None) -> Expr:
    parser = _Parser(text, variables)
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return node


@dataclass(frozen=True)
class TaylorMap:
    """Taylor coefficients of a vector map around a base point.

    coeffs[k, r] multiplies (x - base)^mu(r); raw derivatives are the same
    table scaled by mu!.
    """

    variables: tuple[str, ...]
    base: np.ndarray
    order: int
    coeffs: np.ndarray

    @property
    def ctx(self) -> MultiIndexContext:
        return context(len(self.variables), self.order)

    @property
    def nin(self) -> int:
        return len(self.variables)

    @property
    def nout(self) -> int:
        return self.coeffs.shape[0]

    def coeff(self, component: int, mu) -> float:
        return float(self.coeffs[component, self.ctx.pos(mu)])

    def raw(self, component: int, mu) -> float:
        pos = self.ctx.pos(mu)
        return float(self.coeffs[component, pos] * self.ctx.factorial[pos])

    def value(self) -> np.ndarray:
        return self.coeffs[:, 0].copy()

    def jacobian(self) -> np.ndarray:
        return self.coeffs[:, 1 : 1 + self.nin].copy()


class ExprMap:
    """Ordered list of expressions over a declared variable tuple."""

    def __init__(self, variables: Sequence[str], exprs: Sequence[Expr]):
        if len(set(variables)) != len(variables):
            raise ValueError("variable names must be unique")
        self.variables = tuple(variables)
        self.exprs = tuple(exprs)
        declared = set(self.variables)
        for e in self.exprs:
            loose = e.variables() - declared
            if loose:
                raise ValueError(f"undeclared variables {sorted(loose)}")

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "ExprMap":
        parser = _Parser(text, variables)
        exprs = [parser.parse_expr()]
        while parser.peek().text == ",":
            parser.advance()
            exprs.append(parser.parse_expr())
        tok = parser.peek()
        if tok.kind != "end":
            raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
        return cls(variables, exprs)

    def __len__(self) -> int:
        return len(self.exprs)

    def __iter__(self) -> Iterator[Expr]:
        return iter(self.exprs)

    def to_text(self) -> str:
        return ", ".join(e.to_text() for e in self.exprs)

    def eval(self, point) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        if point.shape != (len(self.variables),):
            raise ValueError(f"expected {len(self.variables)} input values")
        env = dict(zip(self.variables, point))
        return np.array([e.eval(env) for e in self.exprs])

    def taylor_lift(self, base, order: int) -> TaylorMap:
        base = np.asarray(base, dtype=float)
        if base.shape != (len(self.variables),):
            raise ValueError(f"expected {len(self.variables)} base values")
        ctx = context(len(self.variables), order)
        env = {name: series.coordinate(ctx, k, base[k])
               for k, name in enumerate(self.variables)}
        coeffs = np.vstack([e.lift(ctx, env) for e in self.exprs])
        return TaylorMap(self.variables, base, order, coeffs)
