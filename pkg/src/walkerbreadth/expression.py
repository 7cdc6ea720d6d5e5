"""Small infix expression language with exact differentiation.

Grammar (standard precedence, ``^`` right-associative, unary minus binds
looser than ``^`` so ``-y^2 == -(y^2)``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Implicit multiplication (``2y``, ``y z``) is rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .exceptions import ExpressionSyntaxError, FieldSingular, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "exp", "log", "sqrt", "tan", "tanh")
CONSTANTS = {"pi": math.pi, "e": math.e}

_NUMERIC = {
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "tan": np.tan,
    "tanh": np.tanh,
}


class Node:
    """Base class of the expression tree. Nodes are immutable."""

    precedence = 100

    def diff(self, var: str) -> "Node":
        raise NotImplementedError

    def depends_on(self, var: str) -> bool:
        raise NotImplementedError

    def pycode(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.render()

    def render(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Node):
    value: float

    def diff(self, var):
        return ZERO

    def depends_on(self, var):
        return False

    def pycode(self):
        return repr(float(self.value))

    def render(self):
        v = self.value
        if float(v).is_integer() and abs(v) < 1e15:
            return str(int(v))
        return repr(float(v))


@dataclass(frozen=True)
class Var(Node):
    name: str

    def diff(self, var):
        return ONE if var == self.name else ZERO

    def depends_on(self, var):
        return self.name == var

    def pycode(self):
        return f"_v_{self.name}"

    def render(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    arg: Node
    precedence = 3

    def diff(self, var):
        return neg(self.arg.diff(var))

    def depends_on(self, var):
        return self.arg.depends_on(var)

    def pycode(self):
        return f"(-({self.arg.pycode()}))"

    def render(self):
        inner = self.arg.render()
        if self.arg.precedence <= self.precedence:
            inner = f"({inner})"
        return "-" + inner


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    @property
    def precedence(self):
        return {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}[self.op]

    def depends_on(self, var):
        return self.left.depends_on(var) or self.right.depends_on(var)

    def diff(self, var):
        a, b = self.left, self.right
        if self.op == "+":
            return add(a.diff(var), b.diff(var))
        if self.op == "-":
            return sub(a.diff(var), b.diff(var))
        if self.op == "*":
            return add(mul(a.diff(var), b), mul(a, b.diff(var)))
        if self.op == "/":
            num = sub(mul(a.diff(var), b), mul(a, b.diff(var)))
            return div(num, power(b, Num(2.0)))
        # power
        if not b.depends_on(var):
            if isinstance(b, Num):
                lowered = Num(b.value - 1.0)
            else:
                lowered = sub(b, ONE)
            return mul(mul(b, power(a, lowered)), a.diff(var))
        # general a^b = exp(b log a)
        inner = add(mul(b.diff(var), Call("log", a)), div(mul(b, a.diff(var)), a))
        return mul(self, inner)

    def pycode(self):
        op = "**" if self.op == "^" else self.op
        return f"({self.left.pycode()} {op} {self.right.pycode()})"

    def render(self):
        p = self.precedence
        left = self.left.render()
        right = self.right.render()
        if self.op == "^":
            # right-associative
            if self.left.precedence <= p:
                left = f"({left})"
            if self.right.precedence < p:
                right = f"({right})"
        else:
            if self.left.precedence < p:
                left = f"({left})"
            if self.right.precedence <= p:
                right = f"({right})"
        return f"{left}{self.op}{right}" if self.op in "*/^" else f"{left} {self.op} {right}"


@dataclass(frozen=True)
class Call(Node):
    fn: str
    arg: Node

    def depends_on(self, var):
        return self.arg.depends_on(var)

    def diff(self, var):
        a = self.arg
        da = a.diff(var)
        if self.fn == "sin":
            outer = Call("cos", a)
        elif self.fn == "cos":
            outer = neg(Call("sin", a))
        elif self.fn == "sinh":
            outer = Call("cosh", a)
        elif self.fn == "cosh":
            outer = Call("sinh", a)
        elif self.fn == "exp":
            outer = self
        elif self.fn == "log":
            return div(da, a)
        elif self.fn == "sqrt":
            return div(da, mul(Num(2.0), self))
        elif self.fn == "tan":
            outer = add(ONE, power(self, Num(2.0)))
        elif self.fn == "tanh":
            outer = sub(ONE, power(self, Num(2.0)))
        else:  # pragma: no cover - guarded by the parser
            raise ValueError(self.fn)
        return mul(outer, da)

    def pycode(self):
        return f"_f_{self.fn}({self.arg.pycode()})"

    def render(self):
        return f"{self.fn}({self.arg.render()})"


ZERO = Num(0.0)
ONE = Num(1.0)


def _is(node, value):
    return isinstance(node, Num) and node.value == value


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if isinstance(b, Neg):
        return BinOp("-", a, b.arg)
    return BinOp("+", a, b)


def sub(a, b):
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if isinstance(b, Neg):
        return BinOp("+", a, b.arg)
    return BinOp("-", a, b)


def mul(a, b):
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    if isinstance(b, Num) and not isinstance(a, Num):
        a, b = b, a
    return BinOp("*", a, b)


def div(a, b):
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    return BinOp("/", a, b)


def power(a, b):
    if _is(b, 0.0):
        return ONE
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            return Num(a.value ** b.value)
        except (OverflowError, ZeroDivisionError):
            pass
    return BinOp("^", a, b)


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(
                f"unexpected character {text[start]!r}", _byte_offset(text, start)
            )
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok):
        raise ExpressionSyntaxError(message, _byte_offset(self.text, tok[2]))

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            self.fail(f"expected {value!r}", tok)

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression", self.peek())
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(f"unexpected token {tok[1]!r}", tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = BinOp(op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = BinOp(op, node, rhs)
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            operand = self.unary()
            return operand if tok[1] == "+" else Neg(operand)
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("^", "**"):
            self.take()
            exponent = self.unary()
            return BinOp("^", base, exponent)
        return base

    def atom(self):
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            node = Num(float(value))
        elif kind == "name":
            if value in FUNCTIONS:
                nxt = self.peek()
                if nxt[1] != "(":
                    self.fail(f"expected '(' after {value}", nxt)
                self.take()
                arg = self.expr()
                self.expect(")")
                node = Call(value, arg)
            elif value in CONSTANTS:
                node = Num(CONSTANTS[value])
            elif value in self.variables:
                node = Var(value)
            else:
                raise UnknownIdentifier(value, _byte_offset(self.text, tok[2]))
        elif kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
        else:
            self.fail(
                "unexpected end of expression" if kind == "end" else f"unexpected token {value!r}",
                tok,
            )
        nxt = self.peek()
        if nxt[0] in ("num", "name") or (nxt[0] == "op" and nxt[1] == "("):
            self.fail("implicit multiplication is not allowed", nxt)
        return node


# ---------------------------------------------------------------------------


def substitute(node: Node, mapping: Mapping[str, Node]) -> Node:
    """Replace variables by subtrees, simplifying on the way up."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return neg(substitute(node.arg, mapping))
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, mapping))
    build = {"+": add, "-": sub, "*": mul, "/": div, "^": power}[node.op]
    return build(substitute(node.left, mapping), substitute(node.right, mapping))


class Expression:
    """Parsed expression over a fixed tuple of variable names.

    Evaluation accepts scalars or numpy arrays (broadcast).  Results that are
    not finite raise :class:`FieldSingular`.
    """

    def __init__(self, ast: Node, variables: Sequence[str], source_text: str | None = None):
        self.ast = ast
        self.variables = tuple(variables)
        self.source_text = source_text if source_text is not None else ast.render()
        self._partials: dict[str, Expression] = {}
        args = ", ".join(f"_v_{v}" for v in self.variables)
        code = f"lambda {args}: {ast.pycode()}"
        namespace = {f"_f_{k}": fn for k, fn in _NUMERIC.items()}
        self._fn = eval(compile(code, "<expression>", "eval"), namespace)  # noqa: S307

    def __repr__(self):
        return f"Expression({self.source_text!r}, variables={self.variables})"

    def __str__(self):
        return self.ast.render()

    @property
    def is_constant(self):
        return not any(self.ast.depends_on(v) for v in self.variables)

    def diff(self, var: str) -> "Expression":
        if var not in self.variables:
            raise UnknownIdentifier(var, 0)
        if var not in self._partials:
            self._partials[var] = Expression(self.ast.diff(var), self.variables)
        return self._partials[var]

    def __call__(self, *args, **kwargs):
        if kwargs:
            args = tuple(kwargs[v] for v in self.variables)
        if args and all(isinstance(a, float) for a in args):
            # scalar fast path, used inside the integrators
            with np.errstate(all="ignore"):
                try:
                    out = float(self._fn(*args))
                except (ZeroDivisionError, OverflowError, ValueError) as exc:
                    raise FieldSingular(f"{self.source_text!r} singular at {args}") from exc
            if not math.isfinite(out):
                raise FieldSingular(f"{self.source_text!r} is not finite at {args}")
            return out
        with np.errstate(all="ignore"):
            try:
                out = self._fn(*args)
            except (ZeroDivisionError, OverflowError, ValueError) as exc:
                raise FieldSingular(f"{self.source_text!r} singular at {args}") from exc
            if np.ndim(out) == 0 and np.ndim(args[0] if args else 0) > 0:
                out = np.full(np.broadcast(*args).shape, float(out))
        if not np.all(np.isfinite(out)):
            raise FieldSingular(f"{self.source_text!r} is not finite at {args}")
        return out

    def compose(self, mapping: Mapping[str, "Expression"], variables: Sequence[str]) -> "Expression":
        """Substitute expressions (over ``variables``) for this expression's variables."""
        ast = substitute(self.ast, {k: v.ast for k, v in mapping.items()})
        return Expression(ast, variables)

    def evaluate(self, env: Mapping[str, float]):
        return self(*(env[v] for v in self.variables))


def parse_expression(text: str, variables: Sequence[str] = ("t",)) -> Expression:
    """Parse ``text`` allowing only the given variable names."""
    if isinstance(text, (int, float)):
        text = repr(float(text))
    ast = _Parser(text, variables).parse()
    return Expression(ast, variables, source_text=text)


class ScalarField2:
    """The Walker defining function f(y, z) with cached exact partials.

    The coordinate ``x`` is deliberately not a valid variable: only strict
    Walker metrics are supported.
    """

    def __init__(self, source_text: str):
        self.expr = parse_expression(source_text, ("y", "z"))
        self.source_text = self.expr.source_text

    @property
    def ast(self):
        return self.expr.ast

    def __repr__(self):
        return f"ScalarField2({self.source_text!r})"

    def __call__(self, y, z):
        return self.expr(y, z)

    @cached_property
    def f_y(self) -> Expression:
        return self.expr.diff("y")

    @cached_property
    def f_z(self) -> Expression:
        return self.expr.diff("z")

    @cached_property
    def f_yy(self) -> Expression:
        return self.f_y.diff("y")

    @cached_property
    def f_yz(self) -> Expression:
        return self.f_y.diff("z")

    @cached_property
    def f_zz(self) -> Expression:
        return self.f_z.diff("z")

    def partial(self, var: str) -> Expression:
        return self.expr.diff(var)


def parse_field(text: str) -> ScalarField2:
    return ScalarField2(text)
