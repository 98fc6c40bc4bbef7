"""Objective-function expressions: AST, parser, printer and exact evaluator.

Arithmetic is carried out on :class:`fractions.Fraction`.  The four
transcendental operations (``sin``, ``cos``, ``sqrt``, ``exp``) and the
constant ``pi`` are *quantized*: the exact argument is rounded to the nearest
double, the libm function is applied, and the result is rounded to a multiple
of ``10**-12`` (half away from zero).  The SMT encoder tabulates these nodes
with the very same function, so solver and evaluator agree on every grid point.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence, Union

from .errors import EvaluationError, ExprSyntaxError

__all__ = [
    "Expr", "Const", "Pi", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "FUNCTIONS", "TRANSCENDENTAL", "QUANTUM",
    "parse", "parse_objectives", "to_text", "evaluate", "free_var_count",
    "quantize", "pi_value", "iter_nodes", "variables", "float_function", "as_fraction",
]

QUANTUM = 10**12
FUNCTIONS = ("abs", "floor", "sqrt", "sin", "cos", "exp")
TRANSCENDENTAL = frozenset({"sqrt", "sin", "cos", "exp"})

Number = Union[int, Fraction, str]


def as_fraction(value: Number | float) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # str() gives the shortest repr, i.e. the decimal the user typed
        return Fraction(repr(value))
    return Fraction(value)


class Expr:
    """Base class of all expression nodes.

    Nodes are immutable and compare structurally.  The arithmetic dunders are
    conveniences for building objectives in code::

        x, y = Var(0), Var(1)
        booth = (x + 2 * y - 7) ** 2 + (2 * x + y - 5) ** 2
    """

    __slots__ = ()

    def __add__(self, other): return Add(self, _lift(other))
    def __radd__(self, other): return Add(_lift(other), self)
    def __sub__(self, other): return Sub(self, _lift(other))
    def __rsub__(self, other): return Sub(_lift(other), self)
    def __mul__(self, other): return Mul(self, _lift(other))
    def __rmul__(self, other): return Mul(_lift(other), self)
    def __truediv__(self, other): return Div(self, _lift(other))
    def __rtruediv__(self, other): return Div(_lift(other), self)
    def __neg__(self): return Neg(self)

    def __pow__(self, exponent: int):
        return Pow(self, exponent)

    def __str__(self) -> str:
        return to_text(self)


def _lift(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(as_fraction(value))


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", as_fraction(self.value))


@dataclass(frozen=True)
class Pi(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be non-negative")


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr

    def __post_init__(self):
        if isinstance(self.right, Const) and self.right.value == 0:
            raise ValueError("division by the constant zero")


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError("exponent must be a non-negative integer")


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")


_BINARY = (Add, Sub, Mul, Div)


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, _BINARY):
        return (e.left, e.right)
    if isinstance(e, (Neg, Call)):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


def iter_nodes(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal (iterative, so deep trees do not hit the recursion limit)."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def variables(e: Expr) -> frozenset[int]:
    return frozenset(n.index for n in iter_nodes(e) if isinstance(n, Var))


def free_var_count(e: Expr) -> int:
    """``1 + max variable index``, or 0 for a closed expression.

    Warns (``UserWarning``) when the indices do not form a contiguous range.
    """
    used = variables(e)
    if not used:
        return 0
    n = max(used) + 1
    if len(used) != n:
        missing = sorted(set(range(n)) - used)
        warnings.warn(f"variable indices are not contiguous; unused: {missing}", stacklevel=2)
    return n


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)
_VAR = re.compile(r"x(0|[1-9]\d*)\Z")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok=None) -> ExprSyntaxError:
        tok = tok or self.peek()
        return ExprSyntaxError(message, tok[2], self.text)

    def expect(self, op: str):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            found = tok[1] or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}", tok)

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            tok = self.take()
            right = self.unary()
            if tok[1] == "*":
                left = Mul(left, right)
            else:
                if isinstance(right, Const) and right.value == 0:
                    raise self.error("division by the constant zero", tok)
                left = Div(left, right)
        return left

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                raise self.error("exponent must be a non-negative integer literal", tok)
            return Pow(base, int(tok[1]))
        return base

    def atom(self) -> Expr:
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            return Const(Fraction(value))
        if kind == "name":
            if value == "pi":
                return Pi()
            m = _VAR.match(value)
            if m:
                return Var(int(m.group(1)))
            if value in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                close = self.peek()
                self.expect(")")
                if len(args) != 1:
                    raise ExprSyntaxError(
                        f"{value}() takes exactly 1 argument ({len(args)} given)", close[2], self.text
                    )
                return Call(value, args[0])
            raise ExprSyntaxError(f"unknown identifier {value!r}", pos, self.text)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"unexpected token {value or 'end of input'!r}", tok)


def parse(text: str) -> Expr:
    """Parse an infix objective such as ``"(x0 + 2*x1 - 7)^2 + (2*x0 + x1 - 5)^2"``."""
    return _Parser(text).parse()


def parse_objectives(text: str) -> list[Expr]:
    """Parse one objective per line; ``#`` starts a comment, blank lines are skipped."""
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse(line))
    return out


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _const_text(v: Fraction) -> str:
    if v < 0:
        return f"(-{_const_text(-v)})"
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"({v.numerator}/{v.denominator})"
    places = max(twos, fives)
    if places == 0:
        return str(v.numerator)
    scaled = v.numerator * 10**places // v.denominator
    digits = str(scaled).rjust(places + 1, "0")
    return f"{digits[:-places]}.{digits[-places:]}"


def _fmt(e: Expr, ctx: int) -> str:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.func}({_fmt(e.arg, 0)})"
    if isinstance(e, Pow):
        s, prec = f"{_fmt(e.base, _ATOM)}^{e.exponent}", _POW
    elif isinstance(e, Neg):
        s, prec = f"-{_fmt(e.arg, _NEG)}", _NEG
    elif isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        s, prec = f"{_fmt(e.left, _ADD)} {op} {_fmt(e.right, _ADD + 1)}", _ADD
    elif isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        s, prec = f"{_fmt(e.left, _MUL)} {op} {_fmt(e.right, _MUL + 1)}", _MUL
    else:
        raise TypeError(f"not an expression node: {e!r}")
    return f"({s})" if prec < ctx else s


def to_text(e: Expr) -> str:
    """Render with the minimum number of parentheses; ``parse(to_text(e)) == e``."""
    return _fmt(e, 0)


# ---------------------------------------------------------------------------
# Exact evaluation
# ---------------------------------------------------------------------------

_HALF = Fraction(1, 2)


def quantize(value: float) -> Fraction:
    """Round a double to the nearest multiple of 1e-12, ties away from zero."""
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite intermediate value {value!r}")
    scaled = Fraction(value) * QUANTUM
    n = math.floor(abs(scaled) + _HALF)
    return Fraction(-n if scaled < 0 else n, QUANTUM)


def pi_value() -> Fraction:
    return _PI


_PI = quantize(math.pi)

_LIBM: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "exp": math.exp,
}


def apply_transcendental(func: str, arg: Fraction) -> Fraction:
    if func == "sqrt" and arg < 0:
        raise EvaluationError(f"sqrt of negative argument {arg}")
    try:
        return quantize(_LIBM[func](float(arg)))
    except OverflowError as exc:
        raise EvaluationError(f"{func}({float(arg)!r}) overflows") from exc


Point = Sequence[Fraction]
_Exact = Callable[[Point], Fraction]


def _compile_exact(e: Expr) -> _Exact:
    if isinstance(e, Const):
        v = e.value
        return lambda x: v
    if isinstance(e, Pi):
        return lambda x: _PI
    if isinstance(e, Var):
        i = e.index
        return lambda x: x[i]
    if isinstance(e, Neg):
        a = _compile_exact(e.arg)
        return lambda x: -a(x)
    if isinstance(e, _BINARY):
        a, b = _compile_exact(e.left), _compile_exact(e.right)
        if isinstance(e, Add):
            return lambda x: a(x) + b(x)
        if isinstance(e, Sub):
            return lambda x: a(x) - b(x)
        if isinstance(e, Mul):
            return lambda x: a(x) * b(x)

        def div(x):
            den = b(x)
            if den == 0:
                raise EvaluationError("division by zero")
            return a(x) / den
        return div
    if isinstance(e, Pow):
        a, n = _compile_exact(e.base), e.exponent
        return lambda x: a(x) ** n
    if isinstance(e, Call):
        a = _compile_exact(e.arg)
        if e.func == "abs":
            return lambda x: abs(a(x))
        if e.func == "floor":
            return lambda x: Fraction(math.floor(a(x)))
        func = e.func
        return lambda x: apply_transcendental(func, a(x))
    raise TypeError(f"not an expression node: {e!r}")


@lru_cache(maxsize=512)
def exact_function(e: Expr) -> _Exact:
    """Compiled exact evaluator; cached per expression."""
    return _compile_exact(e)


def evaluate(e: Expr, x: Sequence[Number]) -> Fraction:
    """Evaluate ``e`` at the rational point ``x``.

    Raises :class:`EvaluationError` on division by zero, ``sqrt`` of a
    negative number, or a transcendental argument that overflows a double.
    """
    used = variables(e)
    n = max(used) + 1 if used else 0
    if len(x) < n:
        raise ValueError(f"point has {len(x)} coordinates, objective needs {n}")
    point = [c if isinstance(c, Fraction) else as_fraction(c) for c in x]
    return exact_function(e)(point)


# ---------------------------------------------------------------------------
# Double-precision working copy (used by the local-search baselines)
# ---------------------------------------------------------------------------

def _compile_float(e: Expr) -> Callable[[Sequence[float]], float]:
    if isinstance(e, Const):
        v = float(e.value)
        return lambda x: v
    if isinstance(e, Pi):
        return lambda x: math.pi
    if isinstance(e, Var):
        i = e.index
        return lambda x: x[i]
    if isinstance(e, Neg):
        a = _compile_float(e.arg)
        return lambda x: -a(x)
    if isinstance(e, _BINARY):
        a, b = _compile_float(e.left), _compile_float(e.right)
        if isinstance(e, Add):
            return lambda x: a(x) + b(x)
        if isinstance(e, Sub):
            return lambda x: a(x) - b(x)
        if isinstance(e, Mul):
            return lambda x: a(x) * b(x)
        return lambda x: a(x) / b(x)
    if isinstance(e, Pow):
        a, n = _compile_float(e.base), e.exponent
        return lambda x: a(x) ** n
    if isinstance(e, Call):
        a = _compile_float(e.arg)
        func = {"abs": abs, "floor": math.floor, **_LIBM}[e.func]
        return lambda x: float(func(a(x)))
    raise TypeError(f"not an expression node: {e!r}")


def float_function(e: Expr) -> Callable[[Sequence[float]], float]:
    """Fast double-precision evaluator; returns ``inf`` where the exact one would raise."""
    inner = _compile_float(e)

    def f(x: Sequence[float]) -> float:
        try:
            v = inner(x)
        except (ZeroDivisionError, ValueError, OverflowError):
            return math.inf
        return v if math.isfinite(v) else math.inf
    return f
