"""Boundary correlations of the nearest-neighbour model on simply connected grid regions.

A region is a finite set of cells ``(x, y)`` of the square lattice.  Cells
become sites (ordered by ``(y, x)``) joined with coupling 1 when adjacent.
Boundary order follows the outer face counter-clockwise, ``y`` pointing up.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import PreconditionError
from .exact import corr_spin
from .graph import WeightedGraph

Cell = tuple[int, int]
_STEPS = ((1, 0), (0, 1), (-1, 0), (0, -1))  # east, north, west, south: ccw


def _components(cells: set[Cell]) -> int:
    seen: set[Cell] = set()
    count = 0
    for c in cells:
        if c in seen:
            continue
        count += 1
        stack = [c]
        seen.add(c)
        while stack:
            x, y = stack.pop()
            for dx, dy in _STEPS:
                nb = (x + dx, y + dy)
                if nb in cells and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
    return count


def outer_boundary_walk(cells: Iterable[Cell]) -> list[Cell]:
    """Vertices of the outer face in counter-clockwise order (cut vertices may repeat)."""
    cells = set(cells)
    start = min(cells, key=lambda c: (c[1], c[0]))
    walk = [start]
    prev_dir = 1  # as if arrived heading north, so the search starts east
    v = start
    first_edge = None
    while True:
        back = (prev_dir + 2) % 4
        for k in range(1, 5):
            d = (back + k) % 4
            w = (v[0] + _STEPS[d][0], v[1] + _STEPS[d][1])
            if w in cells:
                break
        else:
            return walk  # isolated cell
        edge = (v, w)
        if edge == first_edge:
            return walk[:-1]
        if first_edge is None:
            first_edge = edge
        walk.append(w)
        v, prev_dir = w, d


@dataclass(frozen=True)
class PlanarRegion:
    cells: tuple[Cell, ...]
    graph: WeightedGraph
    boundary: tuple[int, ...]

    def site(self, cell: Cell) -> int:
        return self.cells.index(tuple(cell))


def planar_region(cells: Iterable[Cell], beta: float) -> PlanarRegion:
    """Validate a simply connected region and build its zero-field model."""
    cells = sorted({(int(x), int(y)) for x, y in cells}, key=lambda c: (c[1], c[0]))
    if not cells:
        raise PreconditionError("empty region")
    cellset = set(cells)
    if _components(cellset) != 1:
        raise PreconditionError("region is not connected")
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    box = {(x, y) for x in range(min(xs) - 1, max(xs) + 2) for y in range(min(ys) - 1, max(ys) + 2)}
    if _components(box - cellset) != 1:
        raise PreconditionError("region complement is not connected")
    index = {c: i for i, c in enumerate(cells)}
    pairs = []
    for (x, y), i in index.items():
        for nb in ((x + 1, y), (x, y + 1)):
            if nb in index:
                pairs.append((i, index[nb], 1.0))
    g = WeightedGraph(len(cells), pairs, beta=beta)
    walk = tuple(index[c] for c in outer_boundary_walk(cellset))
    return PlanarRegion(tuple(cells), g, walk)


def grid_region(width: int, height: int, beta: float) -> PlanarRegion:
    return planar_region(product(range(width), range(height)), beta)


def check_ccw(region: PlanarRegion, points: Sequence[int]) -> None:
    """Raise unless ``points`` are distinct boundary sites met in counter-clockwise order."""
    if len(set(points)) != len(points):
        raise PreconditionError("boundary points must be distinct")
    walk = region.boundary
    for p in points:
        if p not in walk:
            raise PreconditionError(f"site {p} is not on the outer boundary")
    L = len(walk)
    for s in (i for i, v in enumerate(walk) if v == points[0]):
        pos, ok = 0, True
        for p in points[1:]:
            nxt = [k for k in range(pos + 1, L) if walk[(s + k) % L] == p]
            if not nxt:
                ok = False
                break
            pos = nxt[0]
        if ok:
            return
    raise PreconditionError("boundary points are not in counter-clockwise order")


def pairings(items: Sequence[int]) -> Iterator[list[tuple[int, int]]]:
    """All perfect matchings, each as pairs ``(a, b)`` with ``a < b`` listed by increasing ``a``."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        for tail in pairings(rest[:i] + rest[i + 1:]):
            yield [(first, partner)] + tail


def crossing_sign(matching: Sequence[tuple[int, int]]) -> int:
    """``(-1)^(number of crossing chords)`` for points in cyclic order."""
    crossings = 0
    for i, (a, b) in enumerate(matching):
        for c, d in matching[i + 1:]:
            if (a < c < b < d) or (c < a < d < b):
                crossings += 1
    return -1 if crossings % 2 else 1


class Sides(NamedTuple):
    lhs: float
    rhs: float


def fermionic_wick_2n(region: PlanarRegion, points: Sequence[int]) -> Sides:
    if len(points) % 2 or not 2 <= len(points) <= 8:
        raise PreconditionError("need an even number of boundary points, at most 8")
    check_ccw(region, points)
    g = region.graph
    lhs = corr_spin(g, points)
    rhs = 0.0
    for matching in pairings(list(range(len(points)))):
        term = float(crossing_sign(matching))
        for a, b in matching:
            term *= corr_spin(g, {points[a], points[b]})
        rhs += term
    return Sides(lhs, rhs)


def boundary_wick4(region: PlanarRegion, x1: int, x2: int, x3: int, x4: int) -> Sides:
    check_ccw(region, (x1, x2, x3, x4))
    g = region.graph
    c = lambda a, b: corr_spin(g, {a, b})
    lhs = corr_spin(g, {x1, x2, x3, x4})
    rhs = c(x1, x2) * c(x3, x4) - c(x1, x3) * c(x2, x4) + c(x1, x4) * c(x2, x3)
    return Sides(lhs, rhs)
