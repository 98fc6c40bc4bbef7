"""Compile a falsification query into a self-contained SMT-LIB2 script.

The query asks whether some grid point scores strictly below a threshold.
Each decision variable becomes a bounded integer ``Ki`` with ``xi = Ki / p``;
the objective is emitted by structural recursion using exact rational
literals.  ``sin``/``cos``/``sqrt``/``exp`` nodes whose argument is affine in a
single variable are replaced by a lookup chain over that variable's grid
values, filled with the evaluator's own quantized results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import CapExceededError, EncodingError, EvaluationError, GridError
from .expr import (
    TRANSCENDENTAL, Add, Call, Const, Div, Expr, Mul, Neg, Pi, Pow, Sub, Var,
    as_fraction, evaluate, pi_value, variables,
)
from .grid import GridSpec

__all__ = ["Query", "SmtScript", "encode_query", "tabulate", "affine_form", "DEFAULT_LOGIC", "TABLE_CAP"]

DEFAULT_LOGIC = "QF_NIRA"
TABLE_CAP = 100_001


@dataclass(frozen=True)
class Query:
    """``exists x in grid: lower <= f(x) < threshold``."""

    objective: Expr
    grid: GridSpec
    threshold: Fraction
    lower: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "threshold", as_fraction(self.threshold))
        if self.lower is not None:
            object.__setattr__(self, "lower", as_fraction(self.lower))
        used = variables(self.objective)
        if used and max(used) >= self.grid.dim:
            raise GridError(
                f"objective uses x{max(used)} but the grid has {self.grid.dim} dimension(s)"
            )

    def accepts(self, value: Fraction) -> bool:
        return value < self.threshold and (self.lower is None or value >= self.lower)


@dataclass(frozen=True)
class SmtScript:
    logic: str
    declarations: tuple[str, ...]
    assertions: tuple[str, ...]
    commands: tuple[str, ...]
    symbols: tuple[str, ...]
    header: tuple[str, ...] = field(default=())

    @property
    def text(self) -> str:
        lines = [*self.header, *self.declarations, *self.assertions, *self.commands]
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return self.text


def _real(q: Fraction) -> str:
    q = as_fraction(q)
    mag = abs(q)
    s = f"{mag.numerator}.0" if mag.denominator == 1 else f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return f"(- {s})" if q < 0 else s


def _int(v: int) -> str:
    return f"(- {-v})" if v < 0 else str(v)


def affine_form(e: Expr) -> Optional[tuple[dict[int, Fraction], Fraction]]:
    """``(coefficients, offset)`` if ``e`` is affine in its variables, else ``None``.

    Closed subexpressions (including ``pi`` and transcendental constants) are
    folded to their exact quantized values.
    """
    if not variables(e):
        try:
            return {}, evaluate(e, ())
        except EvaluationError:
            return None
    if isinstance(e, Var):
        return {e.index: Fraction(1)}, Fraction(0)
    if isinstance(e, Neg):
        inner = affine_form(e.arg)
        if inner is None:
            return None
        return {i: -c for i, c in inner[0].items()}, -inner[1]
    if isinstance(e, (Add, Sub)):
        a, b = affine_form(e.left), affine_form(e.right)
        if a is None or b is None:
            return None
        sign = 1 if isinstance(e, Add) else -1
        coeffs = dict(a[0])
        for i, c in b[0].items():
            coeffs[i] = coeffs.get(i, Fraction(0)) + sign * c
        return {i: c for i, c in coeffs.items() if c != 0}, a[1] + sign * b[1]
    if isinstance(e, Mul):
        a, b = affine_form(e.left), affine_form(e.right)
        if a is None or b is None:
            return None
        if a[0] and b[0]:
            return None
        (vs, off), s = (a, b[1]) if a[0] else (b, a[1])
        return {i: c * s for i, c in vs.items() if c * s != 0}, off * s
    if isinstance(e, Div):
        a, b = affine_form(e.left), affine_form(e.right)
        if a is None or b is None or b[0] or b[1] == 0:
            return None
        return {i: c / b[1] for i, c in a[0].items()}, a[1] / b[1]
    if isinstance(e, Pow) and e.exponent == 1:
        return affine_form(e.base)
    return None


def _table_variable(node: Call) -> int:
    form = affine_form(node.arg)
    if form is None:
        raise EncodingError(
            f"{node.func}() argument is not affine in one variable; use the enumerator backend"
        )
    coeffs = form[0]
    if len(coeffs) != 1:
        raise EncodingError(
            f"{node.func}() argument depends on {len(coeffs)} variables; use the enumerator backend"
        )
    return next(iter(coeffs))


def tabulate(node: Call, grid: GridSpec, cap: int = TABLE_CAP) -> list[tuple[int, Fraction]]:
    """Quantized value of ``node`` at every feasible value of its single grid variable."""
    if not isinstance(node, Call) or node.func not in TRANSCENDENTAL:
        raise EncodingError("only sin/cos/sqrt/exp nodes are tabulated")
    i = _table_variable(node)
    lo, hi = grid.kbounds[i]
    if hi - lo + 1 > cap:
        raise CapExceededError(
            f"table for {node.func}() needs {hi - lo + 1} entries (cap {cap}); use the enumerator backend"
        )
    p = grid.level.scale
    point = [Fraction(0)] * (i + 1)
    rows = []
    for k in range(lo, hi + 1):
        point[i] = Fraction(k, p)
        try:
            rows.append((k, evaluate(node, point)))
        except EvaluationError as exc:
            raise EncodingError(f"{node.func}() undefined at K{i} = {k}: {exc}") from exc
    return rows


class _Emitter:
    def __init__(self, grid: GridSpec, table_cap: int):
        self.grid = grid
        self.table_cap = table_cap
        self.defs: list[str] = []
        self.guards: list[str] = []
        self.names: dict[Expr, str] = {}
        self.counter = 0

    def _define(self, term: str, node: Expr, prefix: str = "aux") -> str:
        if node in self.names:
            return self.names[node]
        name = f"{prefix}{self.counter}"
        self.counter += 1
        self.defs.append(f"(define-fun {name} () Real {term})")
        self.names[node] = name
        return name

    def _shared(self, node: Expr) -> str:
        """Term for ``node``, bound to a name unless it is atomic (avoids duplication)."""
        term = self.term(node)
        if isinstance(node, Var) or not variables(node) or not term.startswith("("):
            return term
        return self._define(term, node)

    def term(self, e: Expr) -> str:
        if e in self.names:
            return self.names[e]
        if not variables(e) and not isinstance(e, Const):
            try:
                return _real(evaluate(e, ()))
            except EvaluationError as exc:
                raise EncodingError(f"constant subexpression is undefined: {exc}") from exc
        if isinstance(e, Const):
            return _real(e.value)
        if isinstance(e, Pi):
            return _real(pi_value())
        if isinstance(e, Var):
            return f"x{e.index}"
        if isinstance(e, Neg):
            return f"(- {self.term(e.arg)})"
        if isinstance(e, (Add, Sub, Mul)):
            op = {Add: "+", Sub: "-", Mul: "*"}[type(e)]
            return f"({op} {self.term(e.left)} {self.term(e.right)})"
        if isinstance(e, Div):
            den = self._shared(e.right)
            if variables(e.right):
                self.guards.append(f"(assert (not (= {den} 0.0)))")
            return f"(/ {self.term(e.left)} {den})"
        if isinstance(e, Pow):
            if e.exponent == 0:
                return "1.0"
            base = self._shared(e.base)
            if e.exponent == 1:
                return base
            return "(* " + " ".join([base] * e.exponent) + ")"
        if isinstance(e, Call):
            if e.func == "abs":
                a = self._shared(e.arg)
                return f"(ite (< {a} 0.0) (- {a}) {a})"
            if e.func == "floor":
                return f"(to_real (to_int {self.term(e.arg)}))"
            i = _table_variable(e)
            rows = tabulate(e, self.grid, self.table_cap)
            chain = _real(rows[-1][1])
            for k, v in reversed(rows[:-1]):
                chain = f"(ite (= K{i} {_int(k)}) {_real(v)} {chain})"
            return self._define(chain, e, prefix="tab")
        raise TypeError(f"not an expression node: {e!r}")


def encode_query(q: Query, logic: str = DEFAULT_LOGIC, table_cap: int = TABLE_CAP) -> SmtScript:
    """Emit the SMT-LIB2 script whose models are exactly the counterexamples of ``q``."""
    grid = q.grid
    p = grid.level.scale
    symbols = tuple(f"K{i}" for i in range(grid.dim))
    decls = [f"(declare-const {s} Int)" for s in symbols]
    used = sorted(variables(q.objective))
    for i in used:
        rhs = f"(to_real K{i})" if p == 1 else f"(/ (to_real K{i}) {p}.0)"
        decls.append(f"(define-fun x{i} () Real {rhs})")

    em = _Emitter(grid, table_cap)
    body = em.term(q.objective)
    decls.extend(em.defs)
    decls.append(f"(define-fun objective () Real {body})")

    asserts = [
        f"(assert (and (<= {_int(lo)} {s}) (<= {s} {_int(hi)})))"
        for s, (lo, hi) in zip(symbols, grid.kbounds)
    ]
    asserts.extend(dict.fromkeys(em.guards))
    asserts.append(f"(assert (< objective {_real(q.threshold)}))")
    if q.lower is not None:
        asserts.append(f"(assert (<= {_real(q.lower)} objective))")
    commands = ("(check-sat)", f"(get-value ({' '.join(symbols)}))")
    header = ("(set-option :produce-models true)", f"(set-logic {logic})")
    return SmtScript(
        logic=logic,
        declarations=tuple(decls),
        assertions=tuple(asserts),
        commands=commands,
        symbols=symbols,
        header=header,
    )
