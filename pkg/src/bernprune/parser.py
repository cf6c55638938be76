"""Polynomial expressions, problem files and SMT-LIB2 export.

Expression grammar, loosest to tightest::

    + -        binary, left associative
    unary -    applies to a whole product, so -x*y == -(x*y)
    *          left associative
    ^          right associative, exponent must fold to a non-negative integer

Problem file, one directive per line, ``#`` starts a comment::

    vars x1 x2
    box -1 1          # one line per variable, in ``vars`` order
    box 0 2
    constraint x1^2 + x2^2 - 1
    objective x1*x2   # optional
    epsilon 1e-4      # optional, default 1e-3
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Sequence

from .poly import Box, Polynomial

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-3

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column + pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), line, column + pos))
        pos = m.end()
    tokens.append(Token("end", "", line, column + len(text)))
    return tokens


_BINARY = {"+": 1, "-": 1, "*": 2, "^": 3}


class _ExprParser:
    def __init__(self, tokens: list[Token], variables: Sequence[str]):
        self.tokens = tokens
        self.i = 0
        self.index = {v: k for k, v in enumerate(variables)}
        self.n = len(variables)

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg: str, tok: Token):
        raise ParseError(msg, tok.line, tok.column)

    def parse(self) -> Polynomial:
        if self.peek().kind == "end":
            self.fail("empty expression", self.peek())
        value = self.expression(1)
        tok = self.peek()
        if tok.kind != "end":
            self.fail("unbalanced ')'" if tok.text == ")" else f"unexpected {tok.text!r}", tok)
        return value

    def expression(self, min_prec: int) -> Polynomial:
        lhs = self.prefix()
        while True:
            tok = self.peek()
            prec = _BINARY.get(tok.text) if tok.kind == "op" else None
            if prec is None or prec < min_prec:
                return lhs
            self.advance()
            if tok.text == "^":
                exp_tok = self.peek()
                rhs = self.expression(prec)
                lhs = lhs ** self.integer_exponent(rhs, exp_tok)
            else:
                rhs = self.expression(prec + 1)
                if tok.text == "+":
                    lhs = lhs + rhs
                elif tok.text == "-":
                    lhs = lhs - rhs
                else:
                    lhs = lhs * rhs

    def integer_exponent(self, value: Polynomial, tok: Token) -> int:
        if not value.is_constant():
            self.fail("exponent must be a constant", tok)
        e = value.constant_term()
        if e < 0:
            self.fail("negative exponent", tok)
        if e != int(e):
            self.fail("non-integer exponent", tok)
        return int(e)

    def prefix(self) -> Polynomial:
        tok = self.advance()
        if tok.kind == "op" and tok.text in "+-":
            operand = self.expression(_BINARY["*"])
            return -operand if tok.text == "-" else operand
        if tok.kind == "op" and tok.text == "(":
            inner = self.expression(1)
            close = self.advance()
            if close.text != ")":
                self.fail("unbalanced '(': expected ')'", close)
            return inner
        if tok.kind == "num":
            return Polynomial.constant(float(tok.text), self.n)
        if tok.kind == "name":
            if tok.text not in self.index:
                self.fail(f"unknown identifier {tok.text!r}", tok)
            return Polynomial.variable(self.index[tok.text], self.n)
        if tok.kind == "end":
            self.fail("unexpected end of expression", tok)
        self.fail(f"unexpected {tok.text!r}", tok)


def parse_expr(text: str, variables: Sequence[str], line: int = 1, column: int = 1) -> Polynomial:
    """Parse an arithmetic expression over ``variables`` into a polynomial."""
    return _ExprParser(tokenize(text, line, column), variables).parse()


def format_number(x: float) -> str:
    return repr(float(x))


def _monomial(k: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for e, name in zip(k, names):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _term_order(k: tuple[int, ...]):
    return (-sum(k), tuple(-e for e in k))


def print_poly(p: Polynomial, names: Sequence[str]) -> str:
    """Deterministic text form that :func:`parse_expr` reads back termwise."""
    if p.is_zero:
        return "0"
    out = []
    for idx, k in enumerate(sorted(p.terms, key=_term_order)):
        c = p.terms[k]
        mono = _monomial(k, names)
        mag = abs(c)
        if not mono:
            body = format_number(mag)
        elif mag == 1.0:
            body = mono
        else:
            body = f"{format_number(mag)}*{mono}"
        if idx == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


@dataclass
class ProblemFile:
    variables: list[str]
    box: Box
    constraints: list[Polynomial] = field(default_factory=list)
    objective: Polynomial | None = None
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if len(self.variables) != self.box.n:
            raise ValueError("box dimension differs from variable count")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        for p in [*self.constraints, *([self.objective] if self.objective else [])]:
            if p.n != len(self.variables):
                raise ValueError("polynomial references undeclared variables")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.constraints)


def parse_problem_text(text: str) -> ProblemFile:
    variables: list[str] | None = None
    intervals: list[tuple[float, float]] = []
    constraints: list[Polynomial] = []
    objective = None
    epsilon = DEFAULT_EPSILON
    pending: list[tuple[str, str, int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)
        keyword, _, rest = stripped.partition(" ")
        rest_col = indent + len(keyword) + 2
        rest_stripped = rest.lstrip()
        rest_col += len(rest) - len(rest_stripped)
        rest = rest_stripped
        if keyword == "vars":
            if variables is not None:
                raise ParseError("vars: declared twice", lineno, indent + 1)
            names = rest.split()
            if not names:
                raise ParseError("vars: at least one variable required", lineno, rest_col)
            for name in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                    raise ParseError(f"vars: invalid name {name!r}", lineno, rest_col + rest.index(name))
            if len(set(names)) != len(names):
                raise ParseError("vars: duplicate variable name", lineno, rest_col)
            variables = names
        elif keyword == "box":
            fields = rest.split()
            where = f"box[{len(intervals)}]"
            if len(fields) != 2:
                raise ParseError(f"{where}: expected '<lo> <hi>'", lineno, rest_col)
            try:
                lo, hi = float(fields[0]), float(fields[1])
            except ValueError:
                raise ParseError(f"{where}: bounds must be numbers", lineno, rest_col) from None
            if not lo <= hi:
                raise ParseError(f"{where}: lower bound exceeds upper bound", lineno, rest_col)
            intervals.append((lo, hi))
        elif keyword in ("constraint", "objective"):
            if not rest:
                raise ParseError(f"{keyword}: missing expression", lineno, rest_col)
            if keyword == "objective" and any(p[0] == "objective" for p in pending):
                raise ParseError("objective: declared twice", lineno, indent + 1)
            pending.append((keyword, rest, lineno, rest_col))
        elif keyword == "epsilon":
            try:
                epsilon = float(rest)
            except ValueError:
                raise ParseError("epsilon: expected a number", lineno, rest_col) from None
            if not epsilon > 0:
                raise ParseError("epsilon: must be positive", lineno, rest_col)
        else:
            raise ParseError(f"unknown directive {keyword!r}", lineno, indent + 1)

    if variables is None:
        raise ParseError("vars: missing declaration", 1, 1)
    if len(intervals) != len(variables):
        raise ParseError(f"box: expected {len(variables)} lines, found {len(intervals)}", 1, 1)
    for keyword, expr, lineno, col in pending:
        poly = parse_expr(expr, variables, lineno, col)
        if keyword == "constraint":
            constraints.append(poly)
        else:
            objective = poly
    return ProblemFile(variables, Box.from_intervals(intervals), constraints, objective, epsilon)


def parse_problem(path) -> ProblemFile:
    return parse_problem_text(Path(path).read_text(encoding="utf-8"))


def print_problem(problem: ProblemFile) -> str:
    names = problem.variables
    lines = ["vars " + " ".join(names)]
    for lo, hi in zip(problem.box.lower, problem.box.upper):
        lines.append(f"box {format_number(lo)} {format_number(hi)}")
    for p in problem.constraints:
        lines.append("constraint " + print_poly(p, names))
    if problem.objective is not None:
        lines.append("objective " + print_poly(problem.objective, names))
    lines.append(f"epsilon {format_number(problem.epsilon)}")
    return "\n".join(lines) + "\n"


def smt_decimal(x: float) -> str:
    """Shortest round-trip decimal of ``x`` in SMT-LIB positional notation."""
    d = Decimal(repr(abs(float(x))))
    text = format(d, "f")
    if "." not in text:
        text += ".0"
    return f"(- {text})" if x < 0 else text


def _smt_monomial(k: Sequence[int], names: Sequence[str]) -> str | None:
    factors = [name for e, name in zip(k, names) for _ in range(e)]
    if not factors:
        return None
    return factors[0] if len(factors) == 1 else "(* " + " ".join(factors) + ")"


def smt_poly(p: Polynomial, names: Sequence[str]) -> str:
    if p.is_zero:
        return "0.0"
    acc = None
    for k in sorted(p.terms, key=_term_order):
        c = p.terms[k]
        mono = _smt_monomial(k, names)
        mag = abs(c)
        if mono is None:
            body = smt_decimal(mag)
        elif mag == 1.0:
            body = mono
        else:
            body = f"(* {smt_decimal(mag)} {mono})"
        if acc is None:
            acc = f"(- {body})" if c < 0 else body
        else:
            acc = f"({'-' if c < 0 else '+'} {acc} {body})"
    return acc


def export_smtlib2(problem: ProblemFile, box: Box | None = None) -> str:
    """QF_NRA script asserting the box bounds and every ``p_i <= 0``."""
    if problem.objective is not None:
        log.warning("export_smtlib2: objective ignored, exporting feasibility problem only")
    box = problem.box if box is None else box
    names = problem.variables
    out = ["(set-logic QF_NRA)"]
    out += [f"(declare-const {v} Real)" for v in names]
    for v, lo, hi in zip(names, box.lower, box.upper):
        out.append(f"(assert (<= {smt_decimal(lo)} {v}))")
        out.append(f"(assert (<= {v} {smt_decimal(hi)}))")
    for p in problem.constraints:
        out.append(f"(assert (<= {smt_poly(p, names)} 0.0))")
    out += ["(check-sat)", "(get-model)"]
    return "\n".join(out) + "\n"
