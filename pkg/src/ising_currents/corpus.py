"""Randomized instances shared by the verification suites."""
from __future__ import annotations

from functools import lru_cache
from typing import Iterator

import networkx as nx
import numpy as np

from .graph import WeightedGraph


@lru_cache(maxsize=None)
def connected_shapes(max_vertices: int = 4) -> tuple[tuple[int, tuple[tuple[int, int], ...]], ...]:
    """Every connected simple graph on 1..max_vertices vertices, up to isomorphism."""
    if max_vertices > 7:
        raise ValueError("the graph atlas stops at 7 vertices")
    out = []
    for G in nx.graph_atlas_g():
        n = G.number_of_nodes()
        if 1 <= n <= max_vertices and nx.is_connected(G):
            out.append((n, tuple(sorted(tuple(sorted(e)) for e in G.edges()))))
    return tuple(out)


def unit_interval(rng: np.random.Generator, size=None):
    """Uniform draws on ``(0, 1]``."""
    return 1.0 - rng.random(size)


def shape_instances(
    max_vertices: int = 4,
    draws: int = 20,
    seed: int = 0,
    ghost_variants: bool = True,
) -> Iterator[WeightedGraph]:
    """Every connected shape at ``draws`` random ``(beta, h)``.

    Each draw yields the zero-field model and, with ``ghost_variants``, the same
    model with field ``h`` carried by the ghost vertex.
    """
    rng = np.random.default_rng(seed)
    for n, pairs in connected_shapes(max_vertices):
        couplings = [(x, y, 1.0) for x, y in pairs]
        for beta, h in unit_interval(rng, (draws, 2)):
            yield WeightedGraph(n, couplings, beta=float(beta))
            if ghost_variants:
                yield WeightedGraph(n, couplings, beta=float(beta), h=float(h))


def random_instance(rng: np.random.Generator, max_vertices: int = 5, field: bool | None = None) -> WeightedGraph:
    """Random graph with random couplings in ``(0, 1]``, beta in ``(0, 1.5]`` and maybe a field."""
    n = int(rng.integers(2, max_vertices + 1))
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    keep = rng.random(len(pairs)) < 0.7
    couplings = [(x, y, float(unit_interval(rng))) for (x, y), k in zip(pairs, keep) if k]
    if field is None:
        field = bool(rng.random() < 0.5)
    h = float(unit_interval(rng)) if field else 0.0
    return WeightedGraph(n, couplings, beta=float(1.5 * unit_interval(rng)), h=h)
