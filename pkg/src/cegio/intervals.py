"""Vectorized interval extension of an objective.

Given float arrays bracketing every variable, the compiled function returns
arrays ``lo, hi`` that bracket the *exact* (quantized) value of the objective
for every point inside the input intervals.  The enumerator uses it to prune
whole blocks of the grid and to skip exact evaluation of hopeless points; the
exact evaluator always has the last word.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .expr import Add, Call, Const, Div, Expr, Mul, Neg, Pi, Pow, Sub, Var, pi_value

Interval = tuple[np.ndarray, np.ndarray]
IntervalFn = Callable[[Sequence[np.ndarray], Sequence[np.ndarray]], Interval]

_INF = np.inf
_TWO_PI = 2 * math.pi
# quantization to 1e-12 plus libm error
_TPAD = 1e-12
_TREL = 4e-15


def _widen(lo, hi) -> Interval:
    return np.nextafter(lo, -_INF), np.nextafter(hi, _INF)


def _point(value: Fraction) -> Interval:
    f = float(value)
    if Fraction(f) == value:
        return np.float64(f), np.float64(f)
    return _widen(np.float64(f), np.float64(f))


def _pad(lo, hi) -> Interval:
    return lo - (np.abs(lo) * _TREL + _TPAD), hi + (np.abs(hi) * _TREL + _TPAD)


def _mul(a: Interval, b: Interval) -> Interval:
    alo, ahi = a
    blo, bhi = b
    with np.errstate(invalid="ignore", over="ignore"):
        p1, p2, p3, p4 = alo * blo, alo * bhi, ahi * blo, ahi * bhi
        lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
        hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return _widen(lo, hi)


def _div(a: Interval, b: Interval) -> Interval:
    blo, bhi = b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        straddles = (blo <= 0) & (bhi >= 0)
        rlo = np.where(straddles, -_INF, 1.0 / bhi)
        rhi = np.where(straddles, _INF, 1.0 / blo)
    return _mul(a, _widen(rlo, rhi))


def _pow(a: Interval, n: int) -> Interval:
    if n == 0:
        return np.float64(1.0), np.float64(1.0)
    if n == 1:
        return a
    alo, ahi = a
    with np.errstate(over="ignore", invalid="ignore"):
        if n % 2:
            lo, hi = alo**n, ahi**n
        else:
            lo = np.where(alo >= 0, alo**n, np.where(ahi <= 0, ahi**n, 0.0))
            hi = np.maximum(np.abs(alo), np.abs(ahi)) ** n
        rel = n * 4e-16
        return lo - np.abs(lo) * rel - 1e-300, hi + np.abs(hi) * rel + 1e-300


def _abs(a: Interval) -> Interval:
    alo, ahi = a
    lo = np.where(alo >= 0, alo, np.where(ahi <= 0, -ahi, 0.0))
    hi = np.maximum(-alo, ahi)
    return lo, hi


def _periodic(a: Interval, fn, peak: float, trough: float) -> Interval:
    """Range of sin/cos: ``peak``/``trough`` are the phases of the max/min in [0, 2pi)."""
    alo, ahi = a
    with np.errstate(invalid="ignore", over="ignore"):
        flo, fhi = fn(alo), fn(ahi)
        lo = np.minimum(flo, fhi)
        hi = np.maximum(flo, fhi)
        eps = 1e-9 * (1.0 + np.abs(alo))
        wide = ~np.isfinite(alo) | ~np.isfinite(ahi) | (ahi - alo >= _TWO_PI)
        kmax = np.ceil((alo - peak - eps) / _TWO_PI)
        has_max = kmax * _TWO_PI + peak <= ahi + eps
        kmin = np.ceil((alo - trough - eps) / _TWO_PI)
        has_min = kmin * _TWO_PI + trough <= ahi + eps
        lo = np.where(wide | has_min, -1.0, lo)
        hi = np.where(wide | has_max, 1.0, hi)
    return _pad(lo, hi)


def _monotone(a: Interval, fn) -> Interval:
    alo, ahi = a
    with np.errstate(invalid="ignore", over="ignore"):
        return _pad(fn(alo), fn(ahi))


def _compile(e: Expr) -> IntervalFn:
    if isinstance(e, Const):
        iv = _point(e.value)
        return lambda lo, hi: iv
    if isinstance(e, Pi):
        iv = _point(pi_value())
        return lambda lo, hi: iv
    if isinstance(e, Var):
        i = e.index
        return lambda lo, hi: (lo[i], hi[i])
    if isinstance(e, Neg):
        f = _compile(e.arg)

        def neg(lo, hi):
            alo, ahi = f(lo, hi)
            return -ahi, -alo
        return neg
    if isinstance(e, (Add, Sub, Mul, Div)):
        f, g = _compile(e.left), _compile(e.right)
        if isinstance(e, Add):
            def add(lo, hi):
                (alo, ahi), (blo, bhi) = f(lo, hi), g(lo, hi)
                return _widen(alo + blo, ahi + bhi)
            return add
        if isinstance(e, Sub):
            def sub(lo, hi):
                (alo, ahi), (blo, bhi) = f(lo, hi), g(lo, hi)
                return _widen(alo - bhi, ahi - blo)
            return sub
        op = _mul if isinstance(e, Mul) else _div
        return lambda lo, hi: op(f(lo, hi), g(lo, hi))
    if isinstance(e, Pow):
        f, n = _compile(e.base), e.exponent
        return lambda lo, hi: _pow(f(lo, hi), n)
    if isinstance(e, Call):
        f = _compile(e.arg)
        if e.func == "abs":
            return lambda lo, hi: _abs(f(lo, hi))
        if e.func == "floor":
            def floor(lo, hi):
                alo, ahi = f(lo, hi)
                return np.floor(alo), np.floor(ahi)
            return floor
        if e.func == "sin":
            return lambda lo, hi: _periodic(f(lo, hi), np.sin, math.pi / 2, 3 * math.pi / 2)
        if e.func == "cos":
            return lambda lo, hi: _periodic(f(lo, hi), np.cos, 0.0, math.pi)
        if e.func == "exp":
            return lambda lo, hi: _monotone(f(lo, hi), np.exp)
        if e.func == "sqrt":
            def sqrt(lo, hi):
                alo, ahi = f(lo, hi)
                return _monotone((np.maximum(alo, 0.0), ahi), np.sqrt)
            return sqrt
    raise TypeError(f"not an expression node: {e!r}")


@lru_cache(maxsize=256)
def interval_function(e: Expr) -> IntervalFn:
    """Compile ``e``; the result maps per-variable ``(lo, hi)`` arrays to value bounds.

    Bounds are broadcast to the common input shape; NaNs (undefined
    operations) become ``-inf``/``+inf`` so such points are never pruned.
    """
    inner = _compile(e)

    def fn(lo: Sequence[np.ndarray], hi: Sequence[np.ndarray]) -> Interval:
        shape = np.broadcast_shapes(*(np.shape(a) for a in lo)) if lo else ()
        vlo, vhi = inner(lo, hi)
        vlo = np.broadcast_to(np.asarray(vlo, dtype=np.float64), shape)
        vhi = np.broadcast_to(np.asarray(vhi, dtype=np.float64), shape)
        vlo = np.where(np.isnan(vlo), -_INF, vlo)
        vhi = np.where(np.isnan(vhi), _INF, vhi)
        return vlo, vhi
    return fn


def grid_intervals(klo: Sequence[np.ndarray], khi: Sequence[np.ndarray], scale: int) -> tuple[list, list]:
    """Float brackets of ``k/scale`` for integer coordinate arrays."""
    lo, hi = [], []
    for a, b in zip(klo, khi):
        lo.append(np.nextafter(np.asarray(a, dtype=np.float64) / scale, -_INF))
        hi.append(np.nextafter(np.asarray(b, dtype=np.float64) / scale, _INF))
    return lo, hi
