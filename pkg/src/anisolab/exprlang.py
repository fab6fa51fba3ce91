"""Closed-form expressions over ``x1..xd`` (or named variables).

A small Pratt parser produces an immutable tree of frozen dataclasses.
Trees evaluate on floats or numpy arrays and differentiate symbolically::

    >>> e = parse("2*x1/(1+x1^2)", d=1)
    >>> evaluate(e, [1.0])
    1.0
    >>> evaluate(diff(parse("x1^2", d=1), 1), [3.0])
    6.0

Precedence, tightest first: ``^`` (right associative), unary minus,
``* /``, ``+ -``.  So ``-x1^2`` is ``-(x1^2)`` and ``2^3^2`` is ``2^9``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Neg", "BinOp", "Call",
    "ExprError", "ExprSyntaxError", "ExprDomainError",
    "FUNCTIONS", "parse", "evaluate", "diff", "gradient", "to_source", "as_expr",
]


class ExprError(ValueError):
    """Base class for expression errors; ``offset`` is a byte offset or -1."""

    def __init__(self, message: str, offset: int = -1):
        self.offset = offset
        if offset >= 0:
            message = f"{message} at offset {offset}"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class ExprDomainError(ExprError, ArithmeticError):
    pass


FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "log": np.log,
    "tanh": np.tanh,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
}

CONSTANTS = {"pi": math.pi}


class Expr:
    """Base node.  Subclasses are frozen dataclasses; ``pos`` never takes part in equality."""

    def __call__(self, *coords):
        return evaluate(self, coords)

    def __str__(self) -> str:
        return to_source(self)

    def compiled(self) -> Callable:
        fn = self.__dict__.get("_fn")
        if fn is None:
            fn = _compile(self)
            object.__setattr__(self, "_fn", fn)
        return fn

    def variables(self) -> set[int]:
        out: set[int] = set()
        _collect_vars(self, out)
        return out

    def depends_on(self, i: int) -> bool:
        return i in self.variables()

    # building trees from Python code
    def __add__(self, other): return add(self, as_expr(other))
    def __radd__(self, other): return add(as_expr(other), self)
    def __sub__(self, other): return sub(self, as_expr(other))
    def __rsub__(self, other): return sub(as_expr(other), self)
    def __mul__(self, other): return mul(self, as_expr(other))
    def __rmul__(self, other): return mul(as_expr(other), self)
    def __truediv__(self, other): return div(self, as_expr(other))
    def __rtruediv__(self, other): return div(as_expr(other), self)
    def __pow__(self, other): return power(self, as_expr(other))
    def __rpow__(self, other): return power(as_expr(other), self)
    def __neg__(self): return neg(self)


@dataclass(frozen=True, eq=True, repr=False)
class Const(Expr):
    value: float
    pos: int = field(default=-1, compare=False)

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Var(Expr):
    index: int
    name: str
    pos: int = field(default=-1, compare=False)

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True, eq=True, repr=False)
class Neg(Expr):
    arg: Expr
    pos: int = field(default=-1, compare=False)

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, eq=True, repr=False)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)

    def __repr__(self):
        return f"BinOp({self.op!r}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Call(Expr):
    fn: str
    arg: Expr
    pos: int = field(default=-1, compare=False)

    def __repr__(self):
        return f"Call({self.fn}, {self.arg!r})"


def _collect_vars(e: Expr, out: set[int]) -> None:
    if isinstance(e, Var):
        out.add(e.index)
    elif isinstance(e, Neg | Call):
        _collect_vars(e.arg, out)
    elif isinstance(e, BinOp):
        _collect_vars(e.left, out)
        _collect_vars(e.right, out)


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass
class _Tok:
    kind: str  # "num" | "id" | "op" | "end"
    text: str
    pos: int  # character offset


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    i = 0
    n = len(source)
    while i < n:
        if source[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(source, i)
        if m is None or m.end() == i:
            raise ExprSyntaxError(f"unexpected character {source[i]!r}", _byte_offset(source, i))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        i = m.end()
    toks.append(_Tok("end", "", n))
    return toks


def _byte_offset(source: str, char_pos: int) -> int:
    return len(source[:char_pos].encode("utf-8"))


# ---------------------------------------------------------------- parser

_INFIX_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_PREFIX_MINUS_BP = 30
_XVAR = re.compile(r"x(\d+)$")


class _Parser:
    def __init__(self, source: str, names: dict[str, int], d: int | None):
        self.source = source
        self.toks = _tokenize(source)
        self.i = 0
        self.names = names
        self.d = d

    def error(self, msg: str, tok: _Tok):
        raise ExprSyntaxError(msg, _byte_offset(self.source, tok.pos))

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        t = self.next()
        if t.kind == "end":
            self.error(f"expected {text!r} but reached end of input", t)
        if t.text != text:
            self.error(f"expected {text!r}, found {t.text!r}", t)

    def parse(self) -> Expr:
        e = self.expr(0)
        t = self.peek()
        if t.kind != "end":
            self.error(f"unexpected {t.text!r}", t)
        return e

    def expr(self, rbp: int) -> Expr:
        left = self.nud(self.next())
        while True:
            t = self.peek()
            bp = _INFIX_BP.get(t.text, 0) if t.kind == "op" else 0
            if bp <= rbp:
                return left
            self.next()
            # ^ is right associative: the right side binds one level looser
            right = self.expr(bp - 1 if t.text == "^" else bp)
            left = BinOp(t.text, left, right, pos=_byte_offset(self.source, t.pos))

    def nud(self, t: _Tok) -> Expr:
        pos = _byte_offset(self.source, t.pos)
        if t.kind == "num":
            return Const(float(t.text), pos=pos)
        if t.kind == "id":
            return self.identifier(t, pos)
        if t.kind == "op" and t.text == "-":
            return Neg(self.expr(_PREFIX_MINUS_BP), pos=pos)
        if t.kind == "op" and t.text == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        if t.kind == "end":
            self.error("unexpected end of input", t)
        self.error(f"unexpected {t.text!r}", t)

    def identifier(self, t: _Tok, pos: int) -> Expr:
        name = t.text
        if name in FUNCTIONS:
            if self.peek().text != "(":
                self.error(f"function {name!r} needs an argument list", self.peek())
            self.next()
            arg = self.expr(0)
            if self.peek().text == ",":
                self.error(f"function {name!r} takes one argument", self.peek())
            self.expect(")")
            return Call(name, arg, pos=pos)
        if name in self.names:
            return Var(self.names[name], name, pos=pos)
        m = _XVAR.match(name)
        if m and self.d is not None:
            raise ExprSyntaxError(
                f"variable {name} out of range for dimension d={self.d}", pos)
        if name in CONSTANTS:
            return Const(CONSTANTS[name], pos=pos)
        raise ExprSyntaxError(f"unknown identifier {name!r}", pos)


def parse(source: str, d: int | None = None, variables: Sequence[str] | None = None) -> Expr:
    """Parse ``source`` over ``x1..xd`` or over the given variable names.

    ``variables=("u",)`` makes ``u`` variable 1; ``d=3`` accepts ``x1, x2, x3``.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    if variables is None:
        if d is None:
            raise TypeError("parse() needs d or variables")
        if d < 0:
            raise ValueError("d must be non-negative")
        names = {f"x{i}": i for i in range(1, d + 1)}
    else:
        names = {name: i for i, name in enumerate(variables, start=1)}
    return _Parser(source, names, d if variables is None else None).parse()


def as_expr(obj, d: int | None = None, variables: Sequence[str] | None = None) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, str):
        return parse(obj, d=d, variables=variables)
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return Const(float(obj))
    raise TypeError(f"cannot convert {type(obj).__name__} to Expr")


# ---------------------------------------------------------------- printer

def to_source(e: Expr) -> str:
    """Fully parenthesized source text; ``parse(to_source(e))`` rebuilds ``e``."""
    if isinstance(e, Const):
        v = e.value
        return repr(v) if v >= 0 else f"(-{-v!r})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.arg)})"
    raise TypeError(type(e))


# ---------------------------------------------------------------- evaluation

def _domain(msg: str, node: Expr):
    raise ExprDomainError(msg, node.pos)


def _any(mask) -> bool:
    if isinstance(mask, (bool, np.bool_)):
        return bool(mask)
    return bool(np.any(mask))


def _compile(e: Expr) -> Callable:
    if isinstance(e, Const):
        v = e.value
        return lambda x: v
    if isinstance(e, Var):
        k = e.index - 1
        return lambda x: x[k]
    if isinstance(e, Neg):
        f = _compile(e.arg)
        return lambda x: -f(x)
    if isinstance(e, Call):
        return _compile_call(e)
    if isinstance(e, BinOp):
        return _compile_binop(e)
    raise TypeError(type(e))


def _compile_call(e: Call) -> Callable:
    f = _compile(e.arg)
    fn = FUNCTIONS[e.fn]
    if e.fn == "log":
        def g(x):
            a = f(x)
            if _any(a <= 0):
                _domain("log of non-positive argument", e)
            return np.log(a)
        return g
    if e.fn == "sqrt":
        def g(x):
            a = f(x)
            if _any(a < 0):
                _domain("sqrt of negative argument", e)
            return np.sqrt(a)
        return g
    return lambda x: fn(f(x))


def _compile_binop(e: BinOp) -> Callable:
    fl, fr = _compile(e.left), _compile(e.right)
    op = e.op
    if op == "+":
        return lambda x: fl(x) + fr(x)
    if op == "-":
        return lambda x: fl(x) - fr(x)
    if op == "*":
        return lambda x: fl(x) * fr(x)
    if op == "/":
        def g(x):
            den = fr(x)
            if _any(den == 0):
                _domain("division by zero", e)
            return fl(x) / den
        return g
    if op == "^":
        if isinstance(e.right, Const):
            c = e.right.value
            if float(c).is_integer():
                if c >= 0:
                    return lambda x: np.power(fl(x), c)

                def g(x):
                    b = fl(x)
                    if _any(b == 0):
                        _domain("zero raised to a negative power", e)
                    return np.power(b, c)
                return g

            def g(x):
                b = fl(x)
                if _any(b < 0) or (c < 0 and _any(b == 0)):
                    _domain("non-integer power of a non-positive base", e)
                return np.power(b, c)
            return g

        def g(x):
            b, p = fl(x), fr(x)
            integral = np.floor(p) == p
            bad = ((b < 0) & ~integral) | ((b == 0) & (p < 0))
            if _any(bad):
                _domain("power outside its real domain", e)
            return np.power(b, p)
        return g
    raise ExprSyntaxError(f"unknown operator {op!r}", e.pos)


def evaluate(e: Expr, x: Sequence) -> float | np.ndarray:
    """Evaluate ``e`` at ``x``; ``x[i-1]`` feeds variable ``i`` (floats or arrays).

    Raises ``ExprDomainError`` carrying the offending node's source offset.
    """
    fn = e.compiled()
    if isinstance(x, np.ndarray) and x.ndim == 1 and x.dtype != object:
        x = [float(v) for v in x]
    with np.errstate(all="ignore"):
        out = fn(x)
    if isinstance(out, np.ndarray):
        return out
    return float(out)


# ---------------------------------------------------------------- differentiation

ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    return BinOp("+", a, b, pos=a.pos)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    return BinOp("-", a, b, pos=a.pos)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    return BinOp("*", a, b, pos=a.pos)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    return BinOp("/", a, b, pos=b.pos)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a, pos=a.pos)


def power(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(b, 0.0):
        return ONE
    return BinOp("^", a, b, pos=a.pos)


def call(fn: str, a: Expr) -> Expr:
    return Call(fn, a, pos=a.pos)


def diff(e: Expr, i: int) -> Expr:
    """Symbolic partial derivative in variable ``i`` (1-based); unsimplified beyond trivial folds."""
    if i < 1:
        raise ValueError("variable index starts at 1")
    return _d(e, i)


def _d(e: Expr, i: int) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == i else ZERO
    if isinstance(e, Neg):
        return neg(_d(e.arg, i))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = _d(a, i), _d(b, i)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, b), mul(a, db))
        if e.op == "/":
            return div(sub(mul(da, b), mul(a, db)), mul(b, b))
        if e.op == "^":
            if _is_const(db, 0.0):
                lowered = Const(b.value - 1.0) if isinstance(b, Const) else sub(b, ONE)
                return mul(mul(b, power(a, lowered)), da)
            if _is_const(da, 0.0):
                return mul(mul(e, call("log", a)), db)
            return mul(e, add(mul(db, call("log", a)), div(mul(b, da), a)))
    if isinstance(e, Call):
        g = e.arg
        dg = _d(g, i)
        if _is_const(dg, 0.0):
            return ZERO
        fn = e.fn
        if fn == "exp":
            outer = e
        elif fn == "log":
            return div(dg, g)
        elif fn == "tanh":
            outer = sub(ONE, power(e, Const(2.0)))
        elif fn == "cosh":
            outer = call("sinh", g)
        elif fn == "sinh":
            outer = call("cosh", g)
        elif fn == "sqrt":
            return div(dg, mul(Const(2.0), e))
        elif fn == "abs":
            outer = div(g, e)
        elif fn == "sin":
            outer = call("cos", g)
        elif fn == "cos":
            outer = neg(call("sin", g))
        else:
            raise ExprSyntaxError(f"no derivative rule for {fn}", e.pos)
        return mul(outer, dg)
    raise TypeError(type(e))


def gradient(e: Expr, d: int) -> list[Expr]:
    return [diff(e, i) for i in range(1, d + 1)]
