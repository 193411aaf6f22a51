"""Weighted graphs with an optional ghost vertex, spin configurations and energies.

Vertices are dense integers ``0..n-1``.  When a graph carries a ghost vertex it
is the index ``n``; its spin is pinned to ``+1``.  A positive field ``h`` is
always encoded as a ghost vertex coupled to every site with strength ``h``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GraphFormatError

Edge = tuple[int, int, float]


def _check_real(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
    return value


@dataclass(frozen=True)
class WeightedGraph:
    """Ferromagnetic pair couplings on ``n_vertices`` sites.

    ``couplings`` lists ``(x, y, J)`` triples with ``x != y``.  Zero couplings
    are dropped on construction.  Pairs touching index ``n_vertices`` are ghost
    couplings and are only allowed when ``has_ghost`` is set with ``h == 0``;
    a positive ``h`` generates the ghost couplings itself.
    """

    n_vertices: int
    couplings: tuple[Edge, ...] = ()
    beta: float = 1.0
    h: float = 0.0
    has_ghost: bool = False
    _edges: tuple[Edge, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n_vertices)
        if n < 1:
            raise DomainError("a graph needs at least one vertex")
        beta = _check_real("beta", self.beta)
        h = _check_real("h", self.h)
        has_ghost = bool(self.has_ghost) or h > 0

        seen: dict[tuple[int, int], float] = {}
        for item in self.couplings:
            x, y, J = item
            x, y = int(x), int(y)
            J = _check_real("J", J)
            if x == y:
                raise DomainError(f"self-pair {x}{y} is not allowed")
            x, y = min(x, y), max(x, y)
            if x < 0 or y > n or (y == n and not has_ghost):
                raise DomainError(f"pair {x}{y} outside the vertex set")
            if y == n and h > 0:
                raise DomainError("explicit ghost couplings conflict with h > 0")
            if (x, y) in seen:
                raise DomainError(f"duplicate pair {x}{y}")
            if J > 0:
                seen[(x, y)] = J
        couplings = tuple((x, y, J) for (x, y), J in sorted(seen.items()))
        edges = couplings
        if h > 0:
            edges = tuple(sorted(couplings + tuple((x, n, h) for x in range(n))))

        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "has_ghost", has_ghost)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "_edges", edges)

    @property
    def ghost(self) -> int | None:
        return self.n_vertices if self.has_ghost else None

    @property
    def n_sites(self) -> int:
        """Number of vertices including the ghost."""
        return self.n_vertices + int(self.has_ghost)

    @property
    def edges(self) -> tuple[Edge, ...]:
        """The pair set with positive coupling, ghost pairs included, sorted."""
        return self._edges

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(x, y): i for i, (x, y, _) in enumerate(self._edges)}

    def edge_endpoints(self) -> np.ndarray:
        return np.array([(x, y) for x, y, _ in self._edges], dtype=np.int64).reshape(-1, 2)

    def edge_strengths(self) -> np.ndarray:
        """``beta * J`` for every pair in :attr:`edges`."""
        return np.array([self.beta * J for _, _, J in self._edges], dtype=float)

    def coupling(self, x: int, y: int) -> float:
        x, y = min(x, y), max(x, y)
        for a, b, J in self._edges:
            if (a, b) == (x, y):
                return J
        return 0.0

    def neighbors(self, x: int) -> list[int]:
        """Sites ``y`` in the vertex set with ``J_xy > 0`` (the ghost is not a neighbor)."""
        out = []
        for a, b, _ in self._edges:
            if a == x and b < self.n_vertices:
                out.append(b)
            elif b == x:
                out.append(a)
        return sorted(out)

    def with_beta(self, beta: float) -> "WeightedGraph":
        return replace(self, beta=beta)

    def with_field(self, h: float) -> "WeightedGraph":
        if self.has_ghost and any(y == self.n_vertices for _, y, _ in self.couplings):
            raise DomainError("graph already carries explicit ghost couplings")
        return replace(self, h=h, has_ghost=h > 0)

    def lattice_couplings(self) -> tuple[Edge, ...]:
        return tuple(e for e in self._edges if e[1] < self.n_vertices)

    def ghost_couplings(self) -> np.ndarray:
        """Per-site coupling to the ghost vertex, including an active field."""
        out = np.zeros(self.n_vertices)
        for x, y, J in self._edges:
            if y == self.n_vertices:
                out[x] = J
        return out

    def __hash__(self):
        return hash((self.n_vertices, self.couplings, self.beta, self.h, self.has_ghost))


def vertex_set(g: WeightedGraph, A: Iterable[int]) -> frozenset[int]:
    """Validate a subset of the (non-ghost) vertex set."""
    out = frozenset(int(a) for a in A)
    bad = [a for a in out if not 0 <= a < g.n_vertices]
    if bad:
        raise DomainError(f"vertices {sorted(bad)} are not in the vertex set")
    return out


def as_spins(g: WeightedGraph, sigma: Sequence[int]) -> np.ndarray:
    """Validate a spin configuration on the vertex set of ``g``."""
    s = np.asarray(sigma)
    if s.shape != (g.n_vertices,):
        raise DomainError(f"spin configuration has shape {s.shape}, expected ({g.n_vertices},)")
    if not np.all(np.abs(s) == 1):
        raise DomainError("spins must be +1 or -1")
    return s.astype(np.int8)


def energy(g: WeightedGraph, sigma: Sequence[int], *, via_ghost: bool = False) -> float:
    """Hamiltonian of ``sigma``.

    The default form sums lattice pairs and the field term separately; with
    ``via_ghost`` the field is read from the ghost pairs with the ghost spin
    pinned to ``+1``.
    """
    s = as_spins(g, sigma).astype(float)
    if via_ghost:
        full = np.append(s, 1.0) if g.has_ghost else s
        return -float(sum(J * full[x] * full[y] for x, y, J in g.edges))
    e = -sum(J * s[x] * s[y] for x, y, J in g.lattice_couplings())
    if g.has_ghost:
        e -= sum(J * s[x] for x, y, J in g.couplings if y == g.n_vertices)
    return float(e - g.h * s.sum())


def ghost_augment(g: WeightedGraph) -> WeightedGraph:
    """Fold the field into explicit ghost couplings and set ``h`` to zero."""
    if g.h == 0:
        return g
    return WeightedGraph(g.n_vertices, g.edges, beta=g.beta, h=0.0, has_ghost=True)


def induced_subgraph(g: WeightedGraph, S: Iterable[int], *, h: float | None = None) -> tuple[WeightedGraph, list[int]]:
    """Restriction of ``g`` to the sites ``S`` (relabelled in increasing order).

    Returns the subgraph and the list mapping new labels to old ones.  The
    field defaults to the field of ``g``, explicit ghost couplings included;
    passing ``h`` replaces both.
    """
    old = sorted(vertex_set(g, S))
    if not old:
        raise DomainError("empty vertex set")
    new = {v: i for i, v in enumerate(old)}
    pairs = [(new[x], new[y], J) for x, y, J in g.lattice_couplings() if x in new and y in new]
    if h is None and g.has_ghost and g.h == 0:
        ghost = g.ghost_couplings()
        pairs += [(new[x], len(old), float(ghost[x])) for x in old if ghost[x] > 0]
        return WeightedGraph(len(old), pairs, beta=g.beta, has_ghost=True), old
    return WeightedGraph(len(old), pairs, beta=g.beta, h=g.h if h is None else h), old


# --- generators -------------------------------------------------------------


def _accumulate(n: int, pairs: Iterable[tuple[int, int]], J: float) -> list[Edge]:
    acc: dict[tuple[int, int], float] = {}
    for x, y in pairs:
        if x == y:
            continue
        key = (min(x, y), max(x, y))
        acc[key] = acc.get(key, 0.0) + J
    return [(x, y, v) for (x, y), v in acc.items()]


def path_graph(n: int, beta: float = 1.0, h: float = 0.0, J: float = 1.0) -> WeightedGraph:
    return WeightedGraph(n, _accumulate(n, ((i, i + 1) for i in range(n - 1)), J), beta, h)


def cycle_graph(n: int, beta: float = 1.0, h: float = 0.0, J: float = 1.0) -> WeightedGraph:
    if n < 3:
        raise DomainError("a cycle needs at least 3 vertices")
    return WeightedGraph(n, _accumulate(n, ((i, (i + 1) % n) for i in range(n)), J), beta, h)


def complete_graph(n: int, beta: float = 1.0, h: float = 0.0, J: float = 1.0) -> WeightedGraph:
    pairs = ((i, j) for i in range(n) for j in range(i + 1, n))
    return WeightedGraph(n, _accumulate(n, pairs, J), beta, h)


def grid_index(width: int, row: int, col: int) -> int:
    return row * width + col


def grid_graph(width: int, height: int, beta: float = 1.0, h: float = 0.0, J: float = 1.0) -> WeightedGraph:
    """Nearest-neighbour ``width x height`` box with free boundary; site ``(r, c)`` is ``r*width + c``."""
    pairs = []
    for r in range(height):
        for c in range(width):
            if c + 1 < width:
                pairs.append((grid_index(width, r, c), grid_index(width, r, c + 1)))
            if r + 1 < height:
                pairs.append((grid_index(width, r, c), grid_index(width, r + 1, c)))
    return WeightedGraph(width * height, _accumulate(width * height, pairs, J), beta, h)


def torus_graph(width: int, height: int, beta: float = 1.0, h: float = 0.0, J: float = 1.0) -> WeightedGraph:
    """Periodic ``width x height`` lattice.

    Wrapped bonds that land on an existing pair add to its coupling, so a
    circumference of 2 gives ``J = 2`` on that pair; circumference 1 bonds are
    constant and dropped.
    """
    pairs = []
    for r in range(height):
        for c in range(width):
            v = grid_index(width, r, c)
            pairs.append((v, grid_index(width, r, (c + 1) % width)))
            pairs.append((v, grid_index(width, (r + 1) % height, c)))
    return WeightedGraph(width * height, _accumulate(width * height, pairs, J), beta, h)


def plus_boundary_grid(width: int, height: int, beta: float = 1.0, J: float = 1.0) -> WeightedGraph:
    """Box whose outer neighbours are frozen to ``+1``.

    The frozen spins are merged into the ghost vertex, which couples to every
    boundary site with ``J`` times its number of missing neighbours.
    """
    base = grid_graph(width, height, beta=beta, J=J)
    g = base.n_vertices
    pairs = list(base.couplings)
    for r in range(height):
        for c in range(width):
            missing = (r == 0) + (r == height - 1) + (c == 0) + (c == width - 1)
            if missing:
                pairs.append((grid_index(width, r, c), g, J * missing))
    return WeightedGraph(base.n_vertices, pairs, beta=beta, has_ghost=True)


def from_generator(spec: str, beta: float = 1.0, h: float = 0.0) -> WeightedGraph:
    """Build a graph from ``path:N``, ``cycle:N``, ``complete:N``, ``grid:WxH`` or ``torus:WxH``."""
    try:
        kind, _, arg = spec.partition(":")
        kind = kind.strip().lower()
        if kind in ("grid", "torus"):
            w, _, hh = arg.lower().partition("x")
            dims = (int(w), int(hh or w))
            return (grid_graph if kind == "grid" else torus_graph)(*dims, beta=beta, h=h)
        builders = {"path": path_graph, "cycle": cycle_graph, "complete": complete_graph}
        return builders[kind](int(arg), beta=beta, h=h)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise GraphFormatError(f"unrecognised generator {spec!r}") from exc


# --- JSON -------------------------------------------------------------------


def graph_to_dict(g: WeightedGraph) -> dict:
    out = {
        "vertices": g.n_vertices,
        "edges": [[x, y, J] for x, y, J in g.couplings],
        "beta": g.beta,
        "h": g.h,
    }
    if g.has_ghost and g.h == 0:
        out["ghost"] = True
    return out


def graph_from_dict(data: dict) -> WeightedGraph:
    try:
        n = data["vertices"]
        edges = [(int(x), int(y), float(J)) for x, y, J in data.get("edges", [])]
        if not isinstance(n, int):
            raise TypeError("'vertices' must be an integer")
        return WeightedGraph(
            n,
            edges,
            beta=float(data.get("beta", 1.0)),
            h=float(data.get("h", 0.0)),
            has_ghost=bool(data.get("ghost", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph description: {exc}") from exc


def load_graph(path: str | Path) -> WeightedGraph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise GraphFormatError(f"{path}: expected a JSON object")
    return graph_from_dict(data)


def save_graph(g: WeightedGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g), indent=2) + "\n")
