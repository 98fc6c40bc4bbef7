"""Derivative-free local-search baselines for qualitative comparison.

Both methods search in double precision and re-score their answer with the
exact evaluator.  They never return a point that scores worse than ``init``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .candidate import Candidate
from .errors import EvaluationError, GridError
from .expr import Expr, as_fraction, float_function
from .grid import BoxDomain

__all__ = ["BaselineParams", "simulated_annealing", "pattern_search"]

Trajectory = list[tuple[int, tuple[float, ...], float]]


@dataclass(frozen=True)
class BaselineParams:
    """``neighborhood`` is the initial SA proposal half-width as a fraction of each box side."""

    budget: int = 1000
    seed: int = 0
    temperature: float = 1.0
    cooling: float = 0.99
    neighborhood: float = 0.1
    step: float = 1.0
    contraction: float = 0.5
    min_step: float = 1e-6

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling rate must lie in (0, 1)")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction factor must lie in (0, 1)")
        if self.temperature <= 0 or self.step <= 0 or self.min_step <= 0 or self.neighborhood <= 0:
            raise ValueError("temperature, neighborhood and step sizes must be positive")


def _start(box: BoxDomain, init: Sequence) -> tuple[float, ...]:
    x = tuple(as_fraction(c) for c in init)
    if not box.contains(x):
        raise GridError("initial point lies outside the box")
    return tuple(float(c) for c in x)


def _clip(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


def _finish(f: Expr, init: Sequence, best: tuple[float, ...], box: BoxDomain) -> Candidate:
    """Exact re-score; fall back to ``init`` if rounding made ``best`` look better than it is."""
    start = Candidate.at(f, [as_fraction(c) for c in init])
    x = tuple(Fraction(c) for c in best)
    if not box.contains(x):
        return start
    try:
        cand = Candidate.at(f, x)
    except EvaluationError:
        return start
    return cand if cand.value <= start.value else start


def simulated_annealing(
    f: Expr,
    box: BoxDomain,
    params: BaselineParams,
    init: Sequence,
    trajectory: Optional[Trajectory] = None,
) -> Candidate:
    """Metropolis search with geometric cooling.

    Proposals are drawn uniformly from a box around the current point whose
    half-width shrinks with the temperature and is clipped to the domain.
    ``params.budget`` counts proposals.  Accepted moves are appended to
    ``trajectory`` as ``(iteration, x, f)``.
    """
    fn = float_function(f)
    rng = random.Random(params.seed)
    bounds = [(float(lo), float(hi)) for lo, hi in box.bounds]
    widths = [hi - lo for lo, hi in bounds]
    x = _start(box, init)
    fx = fn(x)
    best, fbest = x, fx
    if trajectory is not None:
        trajectory.append((0, x, fx))
    temp = params.temperature
    for it in range(1, params.budget + 1):
        shrink = temp / params.temperature
        y = tuple(
            _clip(c + rng.uniform(-1.0, 1.0) * params.neighborhood * w * shrink, lo, hi)
            for c, w, (lo, hi) in zip(x, widths, bounds)
        )
        fy = fn(y)
        delta = fy - fx
        if delta < 0 or (math.isfinite(delta) and rng.random() < math.exp(-delta / temp)):
            x, fx = y, fy
            if trajectory is not None:
                trajectory.append((it, x, fx))
            if fx < fbest:
                best, fbest = x, fx
        temp *= params.cooling
    return _finish(f, init, best, box)


def pattern_search(
    f: Expr,
    box: BoxDomain,
    params: BaselineParams,
    init: Sequence,
    trajectory: Optional[Trajectory] = None,
) -> Candidate:
    """Compass search: poll +-step along each axis, move on the first improvement,
    contract the step when no direction improves.

    Stops when the step falls below ``params.min_step`` or after
    ``params.budget`` evaluations.  Deterministic.
    """
    fn = float_function(f)
    bounds = [(float(lo), float(hi)) for lo, hi in box.bounds]
    x = _start(box, init)
    fx = fn(x)
    if trajectory is not None:
        trajectory.append((0, x, fx))
    step = params.step
    evals = 0
    it = 0
    while step >= params.min_step and evals < params.budget:
        it += 1
        moved = False
        for axis in range(len(x)):
            for sign in (1.0, -1.0):
                lo, hi = bounds[axis]
                c = _clip(x[axis] + sign * step, lo, hi)
                if c == x[axis]:
                    continue
                y = x[:axis] + (c,) + x[axis + 1:]
                fy = fn(y)
                evals += 1
                if fy < fx:
                    x, fx, moved = y, fy, True
                    break
                if evals >= params.budget:
                    break
            if moved or evals >= params.budget:
                break
        if moved:
            if trajectory is not None:
                trajectory.append((it, x, fx))
        else:
            step *= params.contraction
    return _finish(f, init, x, box)
