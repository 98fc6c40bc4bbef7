from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .expr import Expr, evaluate
from .grid import GridSpec, PrecisionLevel, to_point


@dataclass(frozen=True)
class Candidate:
    """A scored point.

    Grid candidates carry their integer coordinates ``k`` and the precision
    level, with ``x == k / 10**level.places``.  Off-grid candidates (returned
    by the local-search baselines) leave both as ``None``.
    """

    x: tuple[Fraction, ...]
    value: Fraction
    k: Optional[tuple[int, ...]] = None
    level: Optional[PrecisionLevel] = None

    @classmethod
    def on_grid(cls, f: Expr, k: Sequence[int], level: PrecisionLevel) -> Candidate:
        k = tuple(int(v) for v in k)
        x = to_point(k, level)
        return cls(x=x, value=evaluate(f, x), k=k, level=level)

    @classmethod
    def at(cls, f: Expr, x: Sequence[Fraction]) -> Candidate:
        x = tuple(Fraction(c) for c in x)
        return cls(x=x, value=evaluate(f, x))

    def in_grid(self, grid: GridSpec) -> bool:
        return self.k is not None and self.level == grid.level and grid.contains_k(self.k)
