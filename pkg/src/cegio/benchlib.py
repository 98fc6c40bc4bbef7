"""Benchmark registry: objectives, boxes, known minima and tags.

The bundled catalog lives in ``data/benchmarks.ini``; :func:`load_catalog`
reads user files in the same format.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import BenchmarkNotFound
from .expr import Expr, as_fraction, evaluate, parse, variables
from .grid import BoxDomain, parse_box

__all__ = ["BenchmarkSpec", "TAGS", "lookup", "list_benchmarks", "load_catalog", "registry", "DEFAULT_TOLERANCE"]

TAGS = frozenset({"convex", "semidefinite-positive", "multimodal", "as-printed-discrepancy"})
DEFAULT_TOLERANCE = Fraction(5, 10_000)


@dataclass(frozen=True)
class BenchmarkSpec:
    key: str
    name: str
    expr_text: str
    box: BoxDomain
    minimum: Fraction
    minimizers: tuple[tuple[Fraction, ...], ...]
    tags: frozenset[str]
    id: Optional[int] = None
    tolerance: Fraction = DEFAULT_TOLERANCE
    golden: dict[int, Fraction] = field(default_factory=dict, compare=False)
    slack: dict[int, Fraction] = field(default_factory=dict, compare=False)
    note: str = ""

    @property
    def objective(self) -> Expr:
        return parse(self.expr_text)

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def discrepancy(self) -> bool:
        return "as-printed-discrepancy" in self.tags

    def reference(self, eta: int) -> Fraction:
        """Value a run at ``10^-eta`` is judged against: the golden grid minimum if stored, else the minimum."""
        return self.golden.get(eta, self.minimum)

    def allowance(self, eta: int) -> Fraction:
        """``max(tolerance, slack * 10^-2)`` for a run at ``10^-eta``."""
        return max(self.tolerance, self.slack.get(eta, Fraction(0)) / 100)

    def passes(self, value: Fraction, eta: int) -> bool:
        return abs(as_fraction(value) - self.reference(eta)) <= self.allowance(eta)


def _constant(text: str) -> Fraction:
    e = parse(text)
    return evaluate(e, ())


def _points(text: str) -> tuple[tuple[Fraction, ...], ...]:
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            out.append(tuple(_constant(c) for c in chunk.split(",")))
    return tuple(out)


def _spec(key: str, sec: configparser.SectionProxy) -> BenchmarkSpec:
    try:
        expr_text = sec["expr"]
        obj = parse(expr_text)
        dim = max(variables(obj), default=-1) + 1
        box = parse_box(sec["box"], dim=max(dim, 1))
        tags = frozenset(t.strip() for t in sec.get("tags", "").split(",") if t.strip())
        unknown = tags - TAGS
        if unknown:
            raise ValueError(f"unknown tag(s) {sorted(unknown)}")
        golden, slack = {}, {}
        for opt, val in sec.items():
            if opt.startswith("golden_eta"):
                golden[int(opt[len("golden_eta"):])] = Fraction(val)
            elif opt.startswith("slack_eta"):
                slack[int(opt[len("slack_eta"):])] = Fraction(val)
        spec = BenchmarkSpec(
            key=key,
            name=sec.get("name", key),
            expr_text=expr_text,
            box=box,
            minimum=_constant(sec["minimum"]),
            minimizers=_points(sec.get("minimizers", "")),
            tags=tags,
            id=sec.getint("id") if "id" in sec else None,
            tolerance=Fraction(sec["tolerance"]) if "tolerance" in sec else DEFAULT_TOLERANCE,
            golden=golden,
            slack=slack,
            note=sec.get("note", ""),
        )
    except (KeyError, ValueError) as exc:
        raise ValueError(f"benchmark [{key}]: {exc}") from exc
    for m in spec.minimizers:
        if not box.contains(m):
            raise ValueError(f"benchmark [{key}]: minimizer {tuple(map(float, m))} lies outside the box")
    return spec


def load_catalog(source: Union[str, Path, Iterable[str]]) -> dict[str, BenchmarkSpec]:
    """Parse a catalog file (path or iterable of lines) into ``{key: spec}``."""
    parser = configparser.ConfigParser(interpolation=None)
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            parser.read_file(fh)
    else:
        parser.read_file(iter(source))
    return {key: _spec(key, parser[key]) for key in parser.sections()}


@lru_cache(maxsize=1)
def registry() -> dict[str, BenchmarkSpec]:
    text = resources.files("cegio").joinpath("data/benchmarks.ini").read_text(encoding="utf-8")
    return load_catalog(text.splitlines())


def lookup(name: Union[str, int], catalog: Optional[dict[str, BenchmarkSpec]] = None) -> BenchmarkSpec:
    """Find a benchmark by key (case and ``-``/space insensitive), display name, or numeric id."""
    reg = registry() if catalog is None else catalog
    if isinstance(name, int) or (isinstance(name, str) and name.strip().isdigit()):
        n = int(name)
        for spec in reg.values():
            if spec.id == n:
                return spec
        raise BenchmarkNotFound(f"no benchmark with id {n}")
    norm = name.strip().lower().replace("-", "_").replace(" ", "_")
    if norm in reg:
        return reg[norm]
    for spec in reg.values():
        if spec.name.lower().replace("-", "_").replace(" ", "_") == norm:
            return spec
    raise BenchmarkNotFound(f"unknown benchmark {name!r}")


def list_benchmarks(
    tags: Iterable[str] = (),
    catalog: Optional[dict[str, BenchmarkSpec]] = None,
) -> list[BenchmarkSpec]:
    """Numbered benchmarks carrying every tag in ``tags``, ordered by id.

    Entries without an id (extras) are only listed when a user catalog is given.
    """
    want = frozenset(tags)
    unknown = want - TAGS
    if unknown:
        raise ValueError(f"unknown tag(s) {sorted(unknown)}; known: {sorted(TAGS)}")
    reg = registry() if catalog is None else catalog
    specs = [s for s in reg.values() if want <= s.tags and (s.id is not None or catalog is not None)]
    return sorted(specs, key=lambda s: (s.id is None, s.id or 0, s.key))
