"""Box domains and the fixed-point grids laid over them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import GridError
from .expr import as_fraction

__all__ = ["BoxDomain", "PrecisionLevel", "GridSpec", "make_grid", "to_point", "shrink_box", "parse_box"]


@dataclass(frozen=True)
class BoxDomain:
    """Closed box ``[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`` with rational endpoints."""

    bounds: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if not self.bounds:
            raise GridError("box must have at least one dimension")
        norm = []
        for i, (lo, hi) in enumerate(self.bounds):
            lo, hi = as_fraction(lo), as_fraction(hi)
            if lo > hi:
                raise GridError(f"dimension {i}: lower bound {lo} exceeds upper bound {hi}")
            norm.append((lo, hi))
        object.__setattr__(self, "bounds", tuple(norm))

    @classmethod
    def uniform(cls, lo, hi, dim: int) -> BoxDomain:
        return cls(((lo, hi),) * dim)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def center(self) -> tuple[Fraction, ...]:
        return tuple((lo + hi) / 2 for lo, hi in self.bounds)

    def contains(self, x: Sequence[Fraction]) -> bool:
        return len(x) == self.dim and all(lo <= c <= hi for c, (lo, hi) in zip(x, self.bounds))

    def issubset(self, other: BoxDomain) -> bool:
        return self.dim == other.dim and all(
            olo <= lo and hi <= ohi for (lo, hi), (olo, ohi) in zip(self.bounds, other.bounds)
        )

    def __str__(self) -> str:
        return " x ".join(f"[{lo}, {hi}]" for lo, hi in self.bounds)


@dataclass(frozen=True)
class PrecisionLevel:
    """Grid scale ``p = 10**k``: points are multiples of ``10**-k``."""

    places: int

    def __post_init__(self):
        if self.places < 0:
            raise GridError("decimal places must be non-negative")

    @property
    def scale(self) -> int:
        return 10**self.places

    @property
    def step(self) -> Fraction:
        return Fraction(1, self.scale)


@dataclass(frozen=True)
class GridSpec:
    box: BoxDomain
    level: PrecisionLevel
    kbounds: tuple[tuple[int, int], ...]

    @property
    def dim(self) -> int:
        return len(self.kbounds)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in self.kbounds)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def contains_k(self, k: Sequence[int]) -> bool:
        return len(k) == self.dim and all(lo <= v <= hi for v, (lo, hi) in zip(k, self.kbounds))

    def iter_k(self) -> Iterator[tuple[int, ...]]:
        """All integer coordinates in lexicographic order (first axis slowest)."""
        def rec(i: int, prefix: tuple[int, ...]):
            if i == self.dim:
                yield prefix
                return
            lo, hi = self.kbounds[i]
            for v in range(lo, hi + 1):
                yield from rec(i + 1, prefix + (v,))
        return rec(0, ())

    def point(self, k: Sequence[int]) -> tuple[Fraction, ...]:
        return to_point(k, self.level)

    def nearest_k(self, x: Sequence[Fraction]) -> tuple[int, ...]:
        """Grid coordinates nearest to ``x`` (ties toward +inf), clamped into the grid."""
        p = self.level.scale
        out = []
        for c, (lo, hi) in zip(x, self.kbounds):
            v = math.floor(as_fraction(c) * p + Fraction(1, 2))
            out.append(min(max(v, lo), hi))
        return tuple(out)


def make_grid(box: BoxDomain, level: PrecisionLevel | int) -> GridSpec:
    """Integer bounds ``ceil(lo*p) .. floor(hi*p)`` per axis; never rounds outward."""
    if isinstance(level, int):
        level = PrecisionLevel(level)
    p = level.scale
    kb = []
    for i, (lo, hi) in enumerate(box.bounds):
        klo, khi = math.ceil(lo * p), math.floor(hi * p)
        if klo > khi:
            raise GridError(f"dimension {i}: no multiple of 1/{p} in [{lo}, {hi}]")
        kb.append((klo, khi))
    return GridSpec(box, level, tuple(kb))


def to_point(k: Sequence[int], level: PrecisionLevel | int) -> tuple[Fraction, ...]:
    if isinstance(level, int):
        level = PrecisionLevel(level)
    p = level.scale
    return tuple(Fraction(int(v), p) for v in k)


def shrink_box(box: BoxDomain, center: Sequence[Fraction], radius) -> BoxDomain:
    """Intersect ``box`` with the cube of half-width ``radius`` around ``center``."""
    radius = as_fraction(radius)
    if not box.contains(tuple(as_fraction(c) for c in center)):
        raise GridError("shrink center lies outside the box")
    return BoxDomain(tuple(
        (max(lo, as_fraction(c) - radius), min(hi, as_fraction(c) + radius))
        for c, (lo, hi) in zip(center, box.bounds)
    ))


def parse_box(text: str | Iterable[str], dim: int | None = None) -> BoxDomain:
    """Parse ``"x0:-2:2,x1:-1:1"`` (or ``"-2:2"`` broadcast to ``dim`` axes).

    Entries may also be passed as an iterable of ``"name:lo:hi"`` strings.
    """
    parts = [p.strip() for p in (text.split(",") if isinstance(text, str) else text) if p.strip()]
    if not parts:
        raise GridError("empty box specification")
    named: dict[int, tuple[Fraction, Fraction]] = {}
    anonymous = []
    for part in parts:
        fields = part.split(":")
        try:
            if len(fields) == 3:
                name = fields[0].strip()
                if not (name.startswith("x") and name[1:].isdigit()):
                    raise GridError(f"bad variable name {name!r} in box entry {part!r}")
                named[int(name[1:])] = (Fraction(fields[1].strip()), Fraction(fields[2].strip()))
            elif len(fields) == 2:
                anonymous.append((Fraction(fields[0].strip()), Fraction(fields[1].strip())))
            else:
                raise GridError(f"bad box entry {part!r}; expected name:lo:hi or lo:hi")
        except (ValueError, ZeroDivisionError) as exc:
            raise GridError(f"bad number in box entry {part!r}") from exc
    if named and anonymous:
        raise GridError("mix of named and unnamed box entries")
    if named:
        n = max(named) + 1
        if set(named) != set(range(n)):
            raise GridError("box must name every variable x0..x{n-1}")
        return BoxDomain(tuple(named[i] for i in range(n)))
    if len(anonymous) == 1 and dim:
        return BoxDomain(anonymous * dim)
    return BoxDomain(tuple(anonymous))
