"""Counterexample-guided minimization over a ladder of fixed-point grids.

At each precision level the loop asks the backend whether any grid point
scores below the incumbent.  A witness becomes the new incumbent; a refusal
proves the incumbent is the grid minimum at that level and the grid is
refined.  Three variants share the loop:

* ``cegio_g`` -- one query per step, threshold = incumbent value;
* ``cegio_s`` -- for objectives with a known lower bound ``f_m``, the gap to
  ``f_m`` is split into ``alpha`` bands that are probed bottom-up;
* ``cegio_f`` -- for convex objectives, each finer level searches only a
  small box around the previous level's minimizer.
"""

from __future__ import annotations

import enum
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .backend import Sat, Timeout, Unknown, Unsat
from .candidate import Candidate
from .encode import Query
from .errors import BackendError, GridError, LowerBoundViolation
from .expr import Expr, as_fraction, variables
from .grid import BoxDomain, GridSpec, make_grid, shrink_box

__all__ = [
    "Status", "LevelTrace", "CegioResult", "SimplifiedParams",
    "cegio_g", "cegio_s", "cegio_f", "initial_candidate", "DEFAULT_GAP",
]

DEFAULT_GAP = Fraction(1, 100_000)


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    SOLVER_UNKNOWN = "SolverUnknown"
    TIMED_OUT = "TimedOut"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass
class LevelTrace:
    """Descent at one precision level.

    ``values[0]`` is the incumbent on entry; each later entry is a strict
    improvement found by a counterexample at ``points[i]`` (integer coords).
    """

    places: int
    box: BoxDomain
    grid_points: int
    values: list[Fraction] = field(default_factory=list)
    points: list[tuple[int, ...]] = field(default_factory=list)
    queries: int = 0
    skipped: bool = False
    completed: bool = False


@dataclass
class CegioResult:
    candidate: Candidate
    status: Status
    levels: list[LevelTrace]
    algorithm: str
    backend: str
    eta: int
    queries: int = 0
    sat: int = 0
    unsat: int = 0
    volume: int = 0
    elapsed: float = 0.0
    message: str = ""

    @property
    def value(self) -> Fraction:
        return self.candidate.value

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL

    def trajectory(self) -> list[tuple[tuple[Fraction, ...], Fraction]]:
        """Incumbent ``(x, f)`` after every improvement, starting from the initial point."""
        out = []
        for tr in self.levels:
            scale = 10**tr.places
            for k, v in zip(tr.points, tr.values[1:]):
                out.append((tuple(Fraction(c, scale) for c in k), v))
        first = self.levels[0].values[0] if self.levels and self.levels[0].values else None
        return out if first is None else [(self._start, first)] + out

    _start: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class SimplifiedParams:
    alpha: int
    f_m: Fraction = Fraction(0)
    gap: Fraction = DEFAULT_GAP

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError("alpha must be a positive integer")
        object.__setattr__(self, "alpha", int(self.alpha))
        object.__setattr__(self, "f_m", as_fraction(self.f_m))
        object.__setattr__(self, "gap", as_fraction(self.gap))
        if self.gap < 0:
            raise ValueError("stop gap must be non-negative")


def _first_grid(box: BoxDomain, eta: int) -> GridSpec:
    for places in range(eta + 1):
        try:
            return make_grid(box, places)
        except GridError:
            continue
    raise GridError(f"no grid level up to 10^-{eta} has a point in {box}")


def initial_candidate(
    f: Expr,
    box: BoxDomain,
    eta: int,
    init: Union[Candidate, Sequence, None] = None,
    seed: Optional[int] = None,
) -> Candidate:
    """Starting incumbent on the coarsest non-empty grid.

    Explicit ``init`` points are snapped to the finest grid (``10^-eta``) so
    the incumbent always belongs to every grid it is compared against.
    Without ``init``, ``seed`` picks a uniformly random grid point; otherwise
    the box center rounded to the grid is used.
    """
    if init is not None:
        x = init.x if isinstance(init, Candidate) else tuple(as_fraction(c) for c in init)
        if not box.contains(x):
            raise GridError("initial point lies outside the box")
        grid = make_grid(box, eta)
        return Candidate.on_grid(f, grid.nearest_k(x), grid.level)
    grid = _first_grid(box, eta)
    if seed is not None:
        rng = random.Random(seed)
        k = tuple(rng.randint(lo, hi) for lo, hi in grid.kbounds)
    else:
        k = grid.nearest_k(box.center)
    return Candidate.on_grid(f, k, grid.level)


class _Run:
    def __init__(self, f, box, eta, backend, budget, algorithm):
        if eta < 0:
            raise ValueError("eta must be non-negative")
        used = variables(f)
        if used and max(used) >= box.dim:
            raise GridError(f"objective uses x{max(used)} but the box has {box.dim} dimension(s)")
        self.f, self.box, self.eta = f, box, eta
        self.backend = backend
        self.budget = budget
        self.algorithm = algorithm
        self.levels: list[LevelTrace] = []
        self.queries = self.sat = self.unsat = self.volume = 0
        self.t0 = time.perf_counter()

    def result(self, cand: Candidate, status: Status, message: str = "", start=()) -> CegioResult:
        return CegioResult(
            candidate=cand, status=status, levels=self.levels, algorithm=self.algorithm,
            backend=getattr(self.backend, "name", type(self.backend).__name__), eta=self.eta,
            queries=self.queries, sat=self.sat, unsat=self.unsat, volume=self.volume,
            elapsed=time.perf_counter() - self.t0, message=message, _start=start,
        )

    def ask(self, tr: LevelTrace, grid: GridSpec, threshold: Fraction, lower=None):
        """Issue one query; returns a Candidate, ``None`` (Unsat) or a terminal Status."""
        if self.budget is not None and self.queries >= self.budget:
            return Status.BUDGET_EXHAUSTED
        self.queries += 1
        tr.queries += 1
        verdict = self.backend.check(Query(self.f, grid, threshold, lower))
        if isinstance(verdict, Unsat):
            self.unsat += 1
            return None
        if isinstance(verdict, Sat):
            self.sat += 1
            if not grid.contains_k(verdict.witness):
                raise BackendError(f"witness {verdict.witness} lies outside the grid")
            cand = Candidate.on_grid(self.f, verdict.witness, grid.level)
            if not cand.value < threshold:
                raise BackendError(
                    f"witness {verdict.witness} scores {cand.value}, not below threshold {threshold}"
                )
            return cand
        if isinstance(verdict, Timeout):
            return Status.TIMED_OUT
        if isinstance(verdict, Unknown):
            return Status.SOLVER_UNKNOWN
        raise BackendError(f"backend returned {verdict!r}")

    def level_box(self, places: int, incumbent: Candidate) -> BoxDomain:
        return self.box

    def run(self, init, seed, step) -> CegioResult:
        cur = initial_candidate(self.f, self.box, self.eta, init, seed)
        start = cur.x
        for places in range(self.eta + 1):
            box = self.level_box(places, cur)
            try:
                grid = make_grid(box, places)
            except GridError:
                self.levels.append(LevelTrace(places, box, 0, [cur.value], skipped=True, completed=True))
                continue
            tr = LevelTrace(places, box, grid.size, [cur.value])
            self.levels.append(tr)
            self.volume += grid.size
            while True:
                if len(tr.values) > grid.size:
                    raise AssertionError(
                        f"level {places}: {len(tr.values) - 1} improvements on a {grid.size}-point grid"
                    )
                out = step(self, tr, grid, cur)
                if isinstance(out, Status):
                    return self.result(cur, out, f"stopped at level {places}", start)
                if out is None:
                    tr.completed = True
                    break
                if out == "stop":
                    tr.completed = True
                    return self.result(cur, Status.OPTIMAL, "stop gap reached", start)
                if not out.value < cur.value:
                    raise AssertionError(f"level {places}: no strict descent ({out.value} >= {cur.value})")
                cur = out
                tr.values.append(cur.value)
                tr.points.append(cur.k)
        return self.result(cur, Status.OPTIMAL, "", start)


def _step_g(run: _Run, tr: LevelTrace, grid: GridSpec, cur: Candidate):
    return run.ask(tr, grid, cur.value)


def cegio_g(
    f: Expr,
    box: BoxDomain,
    eta: int,
    backend,
    init: Union[Candidate, Sequence, None] = None,
    *,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> CegioResult:
    """Generalized loop: the result is the exact minimum over the ``10^-eta`` grid."""
    return _Run(f, box, eta, backend, budget, "g").run(init, seed, _step_g)


def cegio_s(
    f: Expr,
    box: BoxDomain,
    eta: int,
    params: SimplifiedParams,
    backend,
    init: Union[Candidate, Sequence, None] = None,
    *,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> CegioResult:
    """Simplified loop for ``f >= params.f_m``.

    Stops the whole run as soon as the incumbent is within ``params.gap`` of
    ``f_m``.  Raises :class:`LowerBoundViolation` if a witness scores below
    ``f_m``.
    """
    f_m, alpha = params.f_m, params.alpha

    def step(run: _Run, tr: LevelTrace, grid: GridSpec, cur: Candidate):
        if cur.value < f_m:
            raise LowerBoundViolation(f"point {cur.x} scores {cur.value}, below the claimed bound {f_m}")
        if cur.value - f_m <= params.gap:
            return "stop"
        delta = (cur.value - f_m) / alpha
        for j in range(1, alpha + 1):
            t = f_m + j * delta
            lower = f_m + (j - 1) * delta if j > 1 else None
            out = run.ask(tr, grid, t, lower)
            if out is None:
                continue
            if isinstance(out, Candidate) and out.value < f_m:
                raise LowerBoundViolation(
                    f"witness {out.x} scores {out.value}, below the claimed bound {f_m}"
                )
            return out
        return None

    return _Run(f, box, eta, backend, budget, "s").run(init, seed, step)


class _FastRun(_Run):
    def level_box(self, places: int, incumbent: Candidate) -> BoxDomain:
        if places == 0:
            return self.box
        return shrink_box(self.box, incumbent.x, Fraction(1, 10 ** (places - 1)))


def cegio_f(
    f: Expr,
    box: BoxDomain,
    eta: int,
    backend,
    init: Union[Candidate, Sequence, None] = None,
    *,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> CegioResult:
    """Fast loop for convex ``f``: level ``k >= 1`` searches within ``10^-(k-1)`` of the last minimizer."""
    return _FastRun(f, box, eta, backend, budget, "f").run(init, seed, _step_g)
