"""Serialization of optimization runs.

Rationals are written twice: exactly as ``"n/d"`` (or ``"n"``) and as a
12-significant-digit decimal string for humans.  Readers should compare the
exact form.  ``data/run_record.schema.json`` documents the layout.
"""

from __future__ import annotations

import json
from decimal import Context, Decimal
from fractions import Fraction
from importlib import resources
from typing import Any, Optional

from . import __version__
from .algorithms import CegioResult

__all__ = ["rational", "from_rational", "run_record", "dumps", "schema"]

_CTX = Context(prec=40)


def rational(q: Fraction) -> dict[str, str]:
    q = Fraction(q)
    exact = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    dec = _CTX.divide(Decimal(q.numerator), Decimal(q.denominator))
    return {"exact": exact, "decimal": format(dec, ".12g")}


def from_rational(obj: dict[str, str]) -> Fraction:
    return Fraction(obj["exact"])


def _box(box) -> list[list[dict[str, str]]]:
    return [[rational(lo), rational(hi)] for lo, hi in box.bounds]


def run_record(
    result: CegioResult,
    *,
    benchmark: Optional[dict[str, Any]] = None,
    expr: str,
    box,
    seed: Optional[int] = None,
    params: Optional[dict[str, Any]] = None,
) -> dict[str, Any]:
    """Plain-JSON view of a run.  Every field except ``elapsed_seconds`` is deterministic."""
    cand = result.candidate
    return {
        "tool": "cegio",
        "version": __version__,
        "benchmark": benchmark,
        "expr": expr,
        "box": _box(box),
        "algorithm": result.algorithm,
        "backend": result.backend,
        "eta": result.eta,
        "seed": seed,
        "params": params or {},
        "status": result.status.value,
        "message": result.message,
        "value": rational(cand.value),
        "minimizer": [rational(c) for c in cand.x],
        "minimizer_k": list(cand.k) if cand.k is not None else None,
        "minimizer_places": cand.level.places if cand.level is not None else None,
        "queries": result.queries,
        "sat": result.sat,
        "unsat": result.unsat,
        "volume": result.volume,
        "levels": [
            {
                "places": tr.places,
                "box": _box(tr.box),
                "grid_points": tr.grid_points,
                "queries": tr.queries,
                "skipped": tr.skipped,
                "completed": tr.completed,
                "values": [rational(v) for v in tr.values],
                "points": [list(k) for k in tr.points],
            }
            for tr in result.levels
        ],
        "elapsed_seconds": round(result.elapsed, 6),
    }


def dumps(record: dict[str, Any], indent: Optional[int] = None) -> str:
    return json.dumps(record, sort_keys=True, indent=indent)


def schema() -> dict[str, Any]:
    text = resources.files("cegio").joinpath("data/run_record.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
