"""Random currents: sources, traces, backbone peeling and switching identities.

Exact laws of traces are built from parity classes.  Under ``P^A`` the set of
pairs carrying an odd current is an edge set ``E`` with odd-degree set ``A``,
drawn with weight ``prod_E sinh prod_{not E} cosh``; every other pair carries a
positive even current independently with probability ``1 - 1/cosh``.  The
joint law of two independent traces is assembled the same way from pairs of
parity classes, so every probability below is a finite sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import exact
from . import subsets as sb
from .errors import DegenerateError, EmptySupportError, PreconditionError
from .graph import WeightedGraph, vertex_set

Pair = tuple[int, int]
Walk = tuple[int, ...]


@dataclass(frozen=True)
class Current:
    """Non-negative integer counts on pairs of sites; zero counts are not stored.

    Site ``n_vertices`` is the ghost.  Sources never include it.
    """

    n_vertices: int
    items: tuple[tuple[Pair, int], ...] = ()

    def __post_init__(self):
        clean: dict[Pair, int] = {}
        for (x, y), k in self.items:
            x, y, k = int(x), int(y), int(k)
            if k < 0:
                raise PreconditionError("current counts must be non-negative")
            if x == y or min(x, y) < 0 or max(x, y) > self.n_vertices:
                raise PreconditionError(f"pair {x}{y} is not a pair of sites")
            key = (min(x, y), max(x, y))
            clean[key] = clean.get(key, 0) + k
        object.__setattr__(self, "items", tuple(sorted((p, k) for p, k in clean.items() if k)))

    @classmethod
    def from_mapping(cls, n_vertices: int, counts: Mapping[Pair, int]) -> "Current":
        return cls(n_vertices, tuple(counts.items()))

    @classmethod
    def from_array(cls, g: WeightedGraph, counts: Sequence[int]) -> "Current":
        pairs = [(x, y) for x, y, _ in g.edges]
        return cls(g.n_vertices, tuple(zip(pairs, (int(k) for k in counts))))

    def to_array(self, g: WeightedGraph) -> np.ndarray:
        index = g.edge_index()
        out = np.zeros(g.n_edges, dtype=np.int64)
        for p, k in self.items:
            if p not in index:
                raise PreconditionError(f"pair {p} carries current but has no coupling")
            out[index[p]] = k
        return out

    def as_dict(self) -> dict[Pair, int]:
        return dict(self.items)

    def degree(self, x: int) -> int:
        return sum(k for (a, b), k in self.items if x in (a, b))

    def __add__(self, other: "Current") -> "Current":
        if other.n_vertices != self.n_vertices:
            raise PreconditionError("currents live on different vertex sets")
        return Current(self.n_vertices, self.items + other.items)

    @property
    def total(self) -> int:
        return sum(k for _, k in self.items)


def sources(n: Current) -> frozenset[int]:
    """Sites with odd total current; the ghost is excluded."""
    deg: dict[int, int] = {}
    for (x, y), k in n.items:
        deg[x] = deg.get(x, 0) + k
        deg[y] = deg.get(y, 0) + k
    return frozenset(x for x, d in deg.items() if d % 2 and x < n.n_vertices)


def trace(n: Current) -> frozenset[Pair]:
    return frozenset(p for p, _ in n.items)


def weight(g: WeightedGraph, n: Current) -> float:
    """``prod (beta J_xy)^n_xy / n_xy!``; zero if current sits on an uncoupled pair."""
    index = g.edge_index()
    K = g.edge_strengths()
    w = 1.0
    for p, k in n.items:
        if p not in index:
            return 0.0
        w *= K[index[p]] ** k / math.factorial(k)
    return w


def trace_mask(g: WeightedGraph, n: Current) -> int:
    index = g.edge_index()
    return sum(1 << index[p] for p, _ in n.items)


# --- backbone --------------------------------------------------------------------


@dataclass(frozen=True)
class BackboneDecomposition:
    n_vertices: int
    backbone_walks: tuple[Walk, ...]
    loops: tuple[Walk, ...]
    vertex_order: tuple[int, ...]
    edge_order: tuple[Pair, ...]

    @property
    def walks(self) -> tuple[Walk, ...]:
        return self.backbone_walks + self.loops


def _ghost_targets(n: Current, A: frozenset[int]) -> list[int]:
    targets = sorted(A)
    if len(targets) % 2:
        targets.append(n.n_vertices)
    return targets


def backbone_peel(
    n: Current,
    A: Iterable[int],
    vertex_order: Sequence[int] | None = None,
    edge_order: Sequence[Pair] | None = None,
) -> BackboneDecomposition:
    """Deterministic peeling of ``n`` into source-to-source walks and loops.

    Walk from the smallest source, always along the smallest pair still
    carrying current.  When stuck, restart at the smallest source not yet used
    as a walk endpoint; once none is left, restart at the smallest site with
    remaining current.  For an odd source set the ghost plays the extra source.
    """
    A = frozenset(A)
    if sources(n) != A:
        raise PreconditionError(f"current has sources {sorted(sources(n))}, not {sorted(A)}")
    n_sites = n.n_vertices + 1
    vertex_order = tuple(range(n_sites)) if vertex_order is None else tuple(vertex_order)
    pairs = sorted(p for p, _ in n.items)
    edge_order = tuple(pairs) if edge_order is None else tuple(tuple(sorted(p)) for p in edge_order)
    vrank = {v: i for i, v in enumerate(vertex_order)}
    erank = {p: i for i, p in enumerate(edge_order)}
    missing = [p for p in pairs if p not in erank] + [v for p in pairs for v in p if v not in vrank]
    if missing:
        raise PreconditionError(f"orders do not cover {missing}")

    residual = dict(n.items)
    incident: dict[int, list[Pair]] = {}
    for p in pairs:
        for v in p:
            incident.setdefault(v, []).append(p)
    for v in incident:
        incident[v].sort(key=erank.__getitem__)
    deg = {v: sum(residual[p] for p in ps) for v, ps in incident.items()}
    pending = _ghost_targets(n, A)
    remaining = n.total

    def restart() -> int:
        odd = [a for a in pending if deg.get(a, 0) % 2]
        if odd:
            return min(odd, key=vrank.__getitem__)
        return min((v for v, d in deg.items() if d > 0), key=vrank.__getitem__)

    walks: list[list[int]] = []
    if remaining:
        x = restart()
        walk = [x]
        while remaining:
            if deg[x] == 0:
                walks.append(walk)
                x = restart()
                walk = [x]
                continue
            p = next(q for q in incident[x] if residual[q] > 0)
            y = p[0] if p[1] == x else p[1]
            residual[p] -= 1
            deg[x] -= 1
            deg[y] -= 1
            remaining -= 1
            walk.append(y)
            x = y
        walks.append(walk)

    backbone = tuple(tuple(w) for w in walks if w[0] != w[-1])
    loops = tuple(tuple(w) for w in walks if w[0] == w[-1])
    return BackboneDecomposition(n.n_vertices, backbone, loops, vertex_order, edge_order)


def backbone_reconstruct(d: BackboneDecomposition) -> Current:
    counts: dict[Pair, int] = {}
    for walk in d.walks:
        for a, b in zip(walk, walk[1:]):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    return Current.from_mapping(d.n_vertices, counts)


def walk_family_sources(n_vertices: int, walks: Iterable[Walk]) -> frozenset[int]:
    """Sites that are an endpoint of an odd number of open walks (ghost excluded)."""
    odd: set[int] = set()
    for w in walks:
        if w[0] != w[-1]:
            odd ^= {w[0], w[-1]}
    return frozenset(v for v in odd if v < n_vertices)


def backbone_valid(d: BackboneDecomposition, A: Iterable[int]) -> bool:
    """Backbone endpoints partition ``A`` (plus the ghost when ``|A|`` is odd); loops are closed."""
    A = frozenset(A)
    targets = sorted(A) + ([d.n_vertices] if len(A) % 2 else [])
    ends = sorted(v for w in d.backbone_walks for v in (w[0], w[-1]))
    return (
        len(d.backbone_walks) == math.ceil(len(A) / 2)
        and ends == targets
        and all(w[0] == w[-1] for w in d.loops)
    )


# --- exact trace laws --------------------------------------------------------------


@dataclass(frozen=True)
class TraceLaw:
    """Exact law of the trace of a current drawn from ``P^A``."""

    graph: WeightedGraph
    sources: frozenset[int]
    parity_sets: np.ndarray
    parity_probs: np.ndarray
    sprinkle: np.ndarray
    partition: float

    @cached_property
    def pmf(self) -> np.ndarray:
        """Probability of every edge subset (index = mask)."""
        sb.check_cap(self.graph.n_edges, sb.SUBSET_CAP, "edge subsets")
        base = np.zeros(1 << self.graph.n_edges)
        np.add.at(base, self.parity_sets, self.parity_probs)
        return sb.spread(base, self.sprinkle, 1 - self.sprinkle)

    def prob(self, edges: Iterable[Pair] | int) -> float:
        if not isinstance(edges, (int, np.integer)):
            index = self.graph.edge_index()
            edges = sum(1 << index[tuple(sorted(p))] for p in edges)
        return float(self.pmf[int(edges)])

    def edge_marginals(self) -> np.ndarray:
        bits = sb.mask_bits(self.parity_sets, self.graph.n_edges)
        odd = self.parity_probs @ bits
        return odd + (1 - odd) * self.sprinkle

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Independent trace masks."""
        base = rng.choice(self.parity_sets, size=size, p=self.parity_probs)
        extra = rng.random((size, self.graph.n_edges)) < self.sprinkle
        return base | (extra.astype(np.int64) << np.arange(self.graph.n_edges)).sum(axis=1)


def _parity_law(g: WeightedGraph, A: Iterable[int]) -> tuple[np.ndarray, np.ndarray, float]:
    masks = exact.parity_classes(g, A)
    w = exact.parity_weights(g, masks)
    return masks, w, float(w.sum())


def trace_law_exact(g: WeightedGraph, A: Iterable[int] = ()) -> TraceLaw:
    A = vertex_set(g, A)
    masks, w, total = _parity_law(g, A)
    if total <= 0:
        raise EmptySupportError(f"no current has sources {sorted(A)}")
    keep = w > 0
    return TraceLaw(g, A, masks[keep], w[keep] / total, 1 - 1 / np.cosh(g.edge_strengths()), total)


_PAIRWISE_LIMIT = 1 << 22


def union_pmf(first: TraceLaw, second: TraceLaw) -> np.ndarray:
    """Law of the union of two independent traces.

    Parity classes are paired explicitly; pairs outside both classes then join
    the union independently with probability ``1 - (1 - q)^2``.
    """
    g = first.graph
    sb.check_cap(g.n_edges, sb.SUBSET_CAP, "edge subsets")
    size = 1 << g.n_edges
    if len(first.parity_sets) * len(second.parity_sets) <= _PAIRWISE_LIMIT:
        base = np.zeros(size)
        union = (first.parity_sets[:, None] | second.parity_sets[None, :]).ravel()
        np.add.at(base, union, np.outer(first.parity_probs, second.parity_probs).ravel())
    else:
        # too many class pairs: OR-convolve the two class laws instead
        f, h = np.zeros(size), np.zeros(size)
        np.add.at(f, first.parity_sets, first.parity_probs)
        np.add.at(h, second.parity_sets, second.parity_probs)
        base = sb.or_convolve(f, h)
    both = (1 - first.sprinkle) * (1 - second.sprinkle)
    return sb.spread(base, 1 - both, both)


def _union_expectation(g: WeightedGraph, A, B, values: np.ndarray) -> float:
    """``Z_A Z_B E[values(union trace)]`` under ``P^A x P^B``; zero if either law is empty."""
    try:
        la, lb = trace_law_exact(g, A), trace_law_exact(g, B)
    except EmptySupportError:
        return 0.0
    return la.partition * lb.partition * float(np.dot(union_pmf(la, lb), values))


def subset_functional(g: WeightedGraph, F: Callable[[int], float] | np.ndarray) -> np.ndarray:
    """Tabulate a trace functional, given as a table or as a function of the trace mask."""
    if callable(F):
        sb.check_cap(g.n_edges, sb.SUBSET_CAP, "edge subsets")
        return np.array([F(mask) for mask in range(1 << g.n_edges)], dtype=float)
    F = np.asarray(F, dtype=float)
    if F.shape != (1 << g.n_edges,):
        raise PreconditionError(f"functional table must have length 2**{g.n_edges}")
    return F


class Sides(NamedTuple):
    lhs: float
    rhs: float


def squared_corr_identity(g: WeightedGraph, A: Iterable[int] = ()) -> Sides:
    """``<sigma_A>^2`` against the probability that two sourceless traces lie in the even-meeting event."""
    A = vertex_set(g, A)
    law = trace_law_exact(g, ())
    rhs = float(np.dot(union_pmf(law, law), exact.fk_indicator(g, A)))
    return Sides(exact.corr_spin(g, A) ** 2, rhs)


class GriffithsGap(NamedTuple):
    spin: float
    currents: float


def griffiths2_gap(g: WeightedGraph, A: Iterable[int], B: Iterable[int]) -> GriffithsGap:
    A, B = vertex_set(g, A), vertex_set(g, B)
    try:
        law1 = trace_law_exact(g, A ^ B)
    except EmptySupportError as exc:
        raise DegenerateError("<sigma_A sigma_B> vanishes") from exc
    law0 = trace_law_exact(g, ())
    spin = 1 - exact.corr_spin(g, A) * exact.corr_spin(g, B) / exact.corr_spin(g, A ^ B)
    outside = ~exact.fk_indicator(g, A)
    return GriffithsGap(spin, float(np.dot(union_pmf(law0, law1), outside)))


def switching_verify(g: WeightedGraph, A: Iterable[int], B: Iterable[int], F=None) -> Sides:
    """Both sides of the switching lemma for a functional of the union trace.

    ``F`` is a table over edge masks, a function of the mask, or ``None`` for 1.
    """
    A, B = vertex_set(g, A), vertex_set(g, B)
    values = np.ones(1 << g.n_edges) if F is None else subset_functional(g, F)
    lhs = _union_expectation(g, A, B, values)
    rhs = _union_expectation(g, (), A ^ B, values * exact.fk_indicator(g, A))
    return Sides(lhs, rhs)


class Ursell(NamedTuple):
    direct: float
    via_currents: float


def ursell4(g: WeightedGraph, x1: int, x2: int, x3: int, x4: int) -> Ursell:
    xs = [x1, x2, x3, x4]
    vertex_set(g, xs)
    if len(set(xs)) != 4:
        raise PreconditionError("the four sites must be distinct")
    c = lambda *v: exact.corr_spin(g, v)
    direct = c(x1, x2, x3, x4) - c(x1, x2) * c(x3, x4) - c(x1, x3) * c(x2, x4) - c(x1, x4) * c(x2, x3)
    c13, c24 = c(x1, x3), c(x2, x4)
    if c13 <= 0 or c24 <= 0:
        raise DegenerateError("two-point functions in the pairing must be positive")
    try:
        law13, law24 = trace_law_exact(g, {x1, x3}), trace_law_exact(g, {x2, x4})
    except EmptySupportError as exc:
        raise DegenerateError("two-point functions in the pairing must be positive") from exc
    joined = sb.subset_table(g.n_sites, g.edge_endpoints(), lambda lab: sb.all_connected(lab, xs))
    prob = float(np.dot(union_pmf(law13, law24), joined))
    return Ursell(direct, -2 * c13 * c24 * prob)


def double_connection_probability(g: WeightedGraph, A: Iterable[int], B: Iterable[int]) -> float:
    """``P^0 x P^0`` probability that some site of ``A`` is joined to some site of ``B``."""
    A, B = sorted(vertex_set(g, A)), sorted(vertex_set(g, B))
    law = trace_law_exact(g, ())
    hit = sb.subset_table(g.n_sites, g.edge_endpoints(), lambda lab: sb.any_connected(lab, A, B))
    return float(np.dot(union_pmf(law, law), hit))


def question2_scan(g: WeightedGraph, A: Iterable[int], B: Iterable[int], betas: Sequence[float]) -> list[dict]:
    """Double-current connection probability across a grid of ``beta``; reports only."""
    rows = []
    prev = None
    for beta in betas:
        value = double_connection_probability(g.with_beta(beta), A, B)
        rows.append({"beta": float(beta), "value": value, "diff": None if prev is None else value - prev})
        prev = value
    return rows


def truncation_tail(strength: float, cutoff: int) -> float:
    """``sum_{k > cutoff} strength^k / k!``: mass a per-pair count cutoff discards."""
    term = strength ** (cutoff + 1) / math.factorial(cutoff + 1)
    total, k = 0.0, cutoff + 1
    while term > 1e-300 and term > total * 1e-17:
        total += term
        k += 1
        term *= strength / k
    return total


class TruncatedSwitching(NamedTuple):
    lhs: float
    rhs: float
    tail: float


def _split_counts(g: WeightedGraph, n: np.ndarray, first: list[int], second: list[int]) -> float:
    """Number of parity masks ``P`` inside the support of ``n`` with odd sets ``first`` and ``first ^ parity``.

    Weighted by ``2^(n_e - 1)`` per occupied pair, this is the number of ways to
    split ``n`` into two currents with the required sources.
    """
    support = [i for i in range(len(n)) if n[i] > 0]
    ends = sb.endpoint_masks(g.edge_endpoints())
    par = 0
    for i in support:
        if n[i] % 2:
            par ^= 1 << i
    want1 = sum(1 << t for t in first)
    want2 = sum(1 << t for t in second)
    count = 0
    for k in range(1 << len(support)):
        mask, bnd1, bnd2 = 0, 0, 0
        for j, i in enumerate(support):
            if k >> j & 1:
                mask |= 1 << i
        rest = mask ^ par
        for i in support:
            if mask >> i & 1:
                bnd1 ^= ends[i]
            if rest >> i & 1:
                bnd2 ^= ends[i]
        count += bnd1 == want1 and bnd2 == want2
    return float(count)


def switching_truncated(g: WeightedGraph, A: Iterable[int], B: Iterable[int], F: Callable[[np.ndarray], float], cutoff: int) -> TruncatedSwitching:
    """Diagnostic for functionals of the summed counts, truncating every pair at ``cutoff``.

    Both sides sum over pairs of currents whose sum has at most ``cutoff`` on
    every pair.  ``tail`` is the largest relative Poisson mass beyond the cutoff
    of a single pair; it is not an error bound for the identity.
    """
    A, B = vertex_set(g, A), vertex_set(g, B)
    m = g.n_edges
    sb.check_cap((cutoff + 1) ** m, 1 << 20, "truncated count vectors")
    K = g.edge_strengths()
    indicator = exact.fk_indicator(g, A)
    tA, tB = exact.site_targets(g, A), exact.site_targets(g, B)
    t0, tAB = exact.site_targets(g, ()), exact.site_targets(g, A ^ B)
    lhs = rhs = 0.0
    for counts in np.ndindex(*([cutoff + 1] * m)):
        n = np.array(counts, dtype=np.int64)
        occupied = n > 0
        base = float(np.prod(K ** n / np.array([math.factorial(k) for k in n])) * 2.0 ** (n[occupied] - 1).sum())
        value = F(n)
        if value == 0 or base == 0:
            continue
        lhs += base * value * _split_counts(g, n, tA, tB)
        mask = int((occupied.astype(np.int64) << np.arange(m)).sum())
        if indicator[mask]:
            rhs += base * value * _split_counts(g, n, t0, tAB)
    tail = max((truncation_tail(2 * float(k), cutoff) * math.exp(-2 * float(k)) for k in K), default=0.0)
    return TruncatedSwitching(lhs, rhs, tail)
