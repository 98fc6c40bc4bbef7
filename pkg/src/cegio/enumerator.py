"""Exhaustive grid search with exact semantics.

Two queries are answered over a :class:`GridSpec`:

* :func:`first_below` -- the lexicographically first grid point whose exact
  value lies in ``[lower, threshold)``;
* :func:`grid_minimum` -- the exact grid minimum, ties broken by the
  lexicographically smallest integer vector.

Both explore the grid as a tree of integer sub-boxes.  A sub-box is discarded
only when the interval extension proves that no point in it can qualify, and
every surviving point is confirmed with the exact evaluator, so results are
identical to a plain point-by-point scan (:func:`naive_first_below`,
:func:`naive_minimum`), just much faster on large grids.
"""

from __future__ import annotations

import heapq
import itertools
import math
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import EvaluationError
from .expr import Expr, exact_function
from .grid import GridSpec
from .intervals import grid_intervals, interval_function

LEAF_POINTS = 2048
BATCH = 64

Box = tuple[tuple[int, ...], tuple[int, ...]]


def _size(box: Box) -> int:
    return math.prod(h - l + 1 for l, h in zip(*box))


def _split(box: Box) -> tuple[Box, Box]:
    lo, hi = box
    axis = max(range(len(lo)), key=lambda i: (hi[i] - lo[i], -i))
    mid = (lo[axis] + hi[axis]) // 2
    left_hi = hi[:axis] + (mid,) + hi[axis + 1:]
    right_lo = lo[:axis] + (mid + 1,) + lo[axis + 1:]
    return (lo, left_hi), (right_lo, hi)


def _box_bounds(fn, boxes: Sequence[Box], scale: int) -> tuple[np.ndarray, np.ndarray]:
    dim = len(boxes[0][0])
    klo = [np.array([b[0][i] for b in boxes], dtype=np.float64) for i in range(dim)]
    khi = [np.array([b[1][i] for b in boxes], dtype=np.float64) for i in range(dim)]
    return fn(*grid_intervals(klo, khi, scale))


def _box_points(box: Box) -> np.ndarray:
    """Integer coordinates of every point of ``box``, shape (n, dim), lexicographic order."""
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(*box)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _down(q: Fraction) -> float:
    return float(np.nextafter(float(q), -np.inf))


def _up(q: Fraction) -> float:
    return float(np.nextafter(float(q), np.inf))


class _Exact:
    def __init__(self, f: Expr, scale: int):
        self.fn = exact_function(f)
        self.scale = scale
        self.evaluations = 0

    def __call__(self, k: Sequence[int]) -> Optional[Fraction]:
        self.evaluations += 1
        try:
            return self.fn([Fraction(int(v), self.scale) for v in k])
        except EvaluationError:
            return None


def first_below(
    f: Expr,
    grid: GridSpec,
    threshold: Fraction,
    lower: Optional[Fraction] = None,
) -> Optional[tuple[tuple[int, ...], Fraction]]:
    """Lexicographically first ``k`` with ``lower <= f(k/p) < threshold``, or ``None``."""
    fn = interval_function(f)
    exact = _Exact(f, grid.level.scale)
    scale = grid.level.scale
    t_up = _up(threshold)
    l_down = -np.inf if lower is None else _down(lower)

    def keep(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        return (lo < t_up) & (hi >= l_down)

    root: Box = (tuple(l for l, _ in grid.kbounds), tuple(h for _, h in grid.kbounds))
    lo, hi = _box_bounds(fn, [root], scale)
    if not keep(lo, hi)[0]:
        return None

    tie = itertools.count()
    heap: list = [(root[0], next(tie), root)]
    best: Optional[tuple[tuple[int, ...], Fraction]] = None
    while heap:
        if best is not None and heap[0][0] >= best[0]:
            break
        batch = []
        while heap and len(batch) < BATCH and (best is None or heap[0][0] < best[0]):
            batch.append(heapq.heappop(heap)[2])
        inner = [b for b in batch if _size(b) > LEAF_POINTS]
        leaves = [b for b in batch if _size(b) <= LEAF_POINTS]

        if inner:
            kids = [c for b in inner for c in _split(b)]
            lo, hi = _box_bounds(fn, kids, scale)
            for box, ok in zip(kids, keep(lo, hi)):
                if ok:
                    heapq.heappush(heap, (box[0], next(tie), box))

        for box in leaves:
            pts = _box_points(box)
            klo = [pts[:, i] for i in range(pts.shape[1])]
            lo, hi = fn(*grid_intervals(klo, klo, scale))
            for idx in np.flatnonzero(keep(lo, hi)):
                k = tuple(int(v) for v in pts[idx])
                if best is not None and k >= best[0]:
                    break
                v = exact(k)
                if v is not None and v < threshold and (lower is None or v >= lower):
                    best = (k, v)
                    break
    return best


def grid_minimum(f: Expr, grid: GridSpec) -> Optional[tuple[tuple[int, ...], Fraction]]:
    """Exact minimum over the grid; ties go to the lexicographically smallest ``k``.

    Returns ``None`` only if the objective is undefined at every grid point.
    """
    fn = interval_function(f)
    exact = _Exact(f, grid.level.scale)
    scale = grid.level.scale
    root: Box = (tuple(l for l, _ in grid.kbounds), tuple(h for _, h in grid.kbounds))
    lo, _ = _box_bounds(fn, [root], scale)

    tie = itertools.count()
    heap: list = [(float(lo[0]), next(tie), root)]
    best_k: Optional[tuple[int, ...]] = None
    best_v: Optional[Fraction] = None
    best_up = np.inf

    while heap:
        if best_v is not None and heap[0][0] > best_up and Fraction(heap[0][0]) > best_v:
            break
        batch = []
        while heap and len(batch) < BATCH and (best_v is None or heap[0][0] <= best_up):
            batch.append(heapq.heappop(heap)[2])
        if not batch:
            break
        inner = [b for b in batch if _size(b) > LEAF_POINTS]
        leaves = [b for b in batch if _size(b) <= LEAF_POINTS]

        for box in leaves:
            pts = _box_points(box)
            klo = [pts[:, i] for i in range(pts.shape[1])]
            lo, _ = fn(*grid_intervals(klo, klo, scale))
            order = np.lexsort((np.arange(len(lo)), lo))
            for idx in order:
                if best_v is not None and lo[idx] > best_up:
                    break
                k = tuple(int(v) for v in pts[idx])
                v = exact(k)
                if v is None:
                    continue
                if best_v is None or v < best_v or (v == best_v and k < best_k):
                    best_k, best_v = k, v
                    best_up = _up(best_v)

        if inner:
            kids = [c for b in inner for c in _split(b)]
            lo, _ = _box_bounds(fn, kids, scale)
            for box, bound in zip(kids, lo):
                if best_v is None or bound <= best_up:
                    heapq.heappush(heap, (float(bound), next(tie), box))

    if best_v is None:
        return None
    return best_k, best_v


def naive_first_below(f: Expr, grid: GridSpec, threshold: Fraction, lower: Optional[Fraction] = None):
    """Reference scan: exact evaluation of every point in lexicographic order."""
    exact = _Exact(f, grid.level.scale)
    for k in grid.iter_k():
        v = exact(k)
        if v is not None and v < threshold and (lower is None or v >= lower):
            return k, v
    return None


def naive_minimum(f: Expr, grid: GridSpec):
    exact = _Exact(f, grid.level.scale)
    best = None
    for k in grid.iter_k():
        v = exact(k)
        if v is not None and (best is None or v < best[1]):
            best = (k, v)
    return best
