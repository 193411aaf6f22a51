"""Markov chains for spins, currents and even subgraphs, plus the sprinkling maps.

Chains keep their state in plain Python containers because single updates are
cheap and numpy scalar overhead would dominate.  Every chain owns its own
``numpy.random.Generator``; identical seeds reproduce identical streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sparse

from . import subsets as sb
from .currents import Current, sources
from .errors import PreconditionError
from .exact import site_targets
from .graph import WeightedGraph, as_spins, vertex_set

BURN_IN = 10_000
N_BATCHES = 32


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent streams for parallel chains."""
    return [make_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


class _Uniforms:
    """Buffered uniforms drawn from a generator in blocks."""

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self.rng, self.block = rng, block
        self.buf: list[float] = []

    def __call__(self) -> float:
        if not self.buf:
            self.buf = self.rng.random(self.block).tolist()
        return self.buf.pop()


# --- spins -------------------------------------------------------------------------


class SpinChain:
    """Heat-bath Glauber dynamics; pinned ghost spin enters as a site field."""

    kind = "spin"

    def __init__(self, g: WeightedGraph, rng: np.random.Generator, sigma: Sequence[int] | None = None):
        self.g, self.rng = g, rng
        n = g.n_vertices
        self.sigma = [1] * n if sigma is None else [int(s) for s in as_spins(g, sigma)]
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for x, y, J in g.lattice_couplings():
            self.adj[x].append((y, J))
            self.adj[y].append((x, J))
        self.field = (g.ghost_couplings() if g.h == 0 else np.full(n, g.h)).tolist()
        self.uniform = _Uniforms(rng)
        self.steps = 0
        self._matrix = None

    def local_field(self, x: int) -> float:
        s = self.sigma
        return self.field[x] + sum(J * s[y] for y, J in self.adj[x])

    def step(self) -> None:
        n = len(self.sigma)
        x = min(int(self.uniform() * n), n - 1)
        p_plus = 1.0 / (1.0 + math.exp(-2.0 * self.g.beta * self.local_field(x)))
        self.sigma[x] = 1 if self.uniform() < p_plus else -1
        self.steps += 1

    def _colour_classes(self) -> list[np.ndarray]:
        colour = [-1] * len(self.sigma)
        for x in range(len(self.sigma)):
            used = {colour[y] for y, _ in self.adj[x]}
            colour[x] = next(c for c in range(len(self.sigma) + 1) if c not in used)
        colour = np.array(colour)
        return [np.flatnonzero(colour == c) for c in range(colour.max() + 1)]

    def sweep(self) -> None:
        """Update every site once, one independent colour class at a time."""
        if self._matrix is None:
            n = len(self.sigma)
            rows, cols, vals = [], [], []
            for x, nbrs in enumerate(self.adj):
                for y, J in nbrs:
                    rows.append(x)
                    cols.append(y)
                    vals.append(J)
            self._matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
            self._classes = self._colour_classes()
            self._field = np.array(self.field)
        s = np.array(self.sigma, dtype=float)
        for cls in self._classes:
            h = self._matrix[cls] @ s + self._field[cls]
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * self.g.beta * h))
            s[cls] = np.where(self.rng.random(len(cls)) < p_plus, 1.0, -1.0)
        self.sigma = s.astype(int).tolist()
        self.steps += len(self.sigma)

    def state(self) -> np.ndarray:
        return np.array(self.sigma, dtype=np.int8)

    def code(self) -> int:
        """Configuration index with bit ``v`` set when ``sigma_v = -1``."""
        return sum(1 << v for v, s in enumerate(self.sigma) if s < 0)


def glauber_step(g: WeightedGraph, sigma: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """One heat-bath update at a uniformly chosen site; returns the new configuration."""
    chain = SpinChain(g, rng, sigma)
    chain.uniform = rng.random
    chain.step()
    return chain.state()


# --- currents ------------------------------------------------------------------------


def _cycle_edges(g: WeightedGraph) -> list[list[int]]:
    basis = sb.cycle_basis(g.n_sites, g.edge_endpoints())
    return [[i for i in range(g.n_edges) if c >> i & 1] for c in basis]


def _start_parity_set(g: WeightedGraph, A: frozenset[int]) -> int:
    targets = site_targets(g, A)
    start = sb.particular_parity_set(g.n_sites, g.edge_endpoints(), targets) if len(targets) % 2 == 0 else None
    if start is None:
        raise PreconditionError(f"no configuration has sources {sorted(A)}")
    return start


class CurrentChain:
    """Metropolis chain on currents with fixed sources.

    Even moves change one count by +-2; cycle moves add an independent +-1 to
    every pair of a fundamental cycle.  Both keep every vertex parity, and both
    proposals are symmetric, so the acceptance ratio is the weight ratio.
    """

    kind = "current"

    def __init__(self, g: WeightedGraph, A: Iterable[int], rng: np.random.Generator, counts: Sequence[int] | None = None, debug: bool = False):
        self.g, self.rng, self.debug = g, rng, debug
        self.A = vertex_set(g, A)
        self.K = g.edge_strengths().tolist()
        self.cycles = _cycle_edges(g)
        if counts is None:
            start = _start_parity_set(g, self.A)
            counts = [start >> i & 1 for i in range(g.n_edges)]
        self.counts = [int(k) for k in counts]
        if sources(Current.from_array(g, self.counts)) != self.A:
            raise PreconditionError("initial current has the wrong sources")
        self.uniform = _Uniforms(rng)
        self.steps = 0

    def step(self) -> bool:
        moved = self._move()
        if self.debug and moved and sources(Current.from_array(self.g, self.counts)) != self.A:
            raise AssertionError("current chain left its source class")
        return moved

    def _move(self) -> bool:
        u = self.uniform
        n, K = self.counts, self.K
        m = len(n)
        self.steps += 1
        if m == 0:
            return False
        if not self.cycles or u() < 0.5:
            e = min(int(u() * m), m - 1)
            k = n[e]
            if u() < 0.5:
                ratio = K[e] * K[e] / ((k + 1) * (k + 2))
                if u() < ratio:
                    n[e] = k + 2
                    return True
            elif k >= 2 and u() * K[e] * K[e] < k * (k - 1):
                n[e] = k - 2
                return True
            return False
        cyc = self.cycles[min(int(u() * len(self.cycles)), len(self.cycles) - 1)]
        ratio = 1.0
        signs = []
        for e in cyc:
            if u() < 0.5:
                signs.append(1)
                ratio *= K[e] / (n[e] + 1)
            else:
                if n[e] == 0:
                    return False
                signs.append(-1)
                ratio *= n[e] / K[e]
        if u() < ratio:
            for e, s in zip(cyc, signs):
                n[e] += s
            return True
        return False

    def state(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)

    def code(self) -> int:
        """Trace mask."""
        return sum(1 << i for i, k in enumerate(self.counts) if k)


def worm_step(g: WeightedGraph, n: Current, A: Iterable[int], rng: np.random.Generator) -> Current:
    """One update of the current chain started from ``n``."""
    A = vertex_set(g, A)
    if sources(n) != A:
        raise PreconditionError("current does not have the declared sources")
    chain = CurrentChain(g, A, rng, n.to_array(g))
    chain.uniform = rng.random
    chain.step()
    return Current.from_array(g, chain.counts)


# --- even subgraphs ---------------------------------------------------------------------


class EvenSubgraphChain:
    """Metropolis chain on edge sets with a fixed odd-degree set, target ``prod tanh``.

    Proposals XOR a uniformly chosen fundamental cycle.
    """

    kind = "ht"

    def __init__(self, g: WeightedGraph, A: Iterable[int], rng: np.random.Generator, mask: int | None = None, debug: bool = False):
        self.g, self.rng, self.debug = g, rng, debug
        self.A = vertex_set(g, A)
        self.tanh = np.tanh(g.edge_strengths()).tolist()
        self.cycles = _cycle_edges(g)
        self.cycle_masks = sb.cycle_basis(g.n_sites, g.edge_endpoints())
        self.mask = _start_parity_set(g, self.A) if mask is None else int(mask)
        self._ends = sb.endpoint_masks(g.edge_endpoints())
        self._expected = sum(1 << t for t in site_targets(g, self.A))
        if self._boundary() != self._expected:
            raise PreconditionError("initial edge set has the wrong odd-degree set")
        self.uniform = _Uniforms(rng)
        self.steps = 0

    def step(self) -> bool:
        self.steps += 1
        if not self.cycles:
            return False
        u = self.uniform
        j = min(int(u() * len(self.cycles)), len(self.cycles) - 1)
        ratio = 1.0
        for e in self.cycles[j]:
            t = self.tanh[e]
            if self.mask >> e & 1:
                ratio /= t
            else:
                ratio *= t
        if u() < ratio:
            self.mask ^= self.cycle_masks[j]
            if self.debug and self._boundary() != self._expected:
                raise AssertionError("edge-set chain left its odd-degree class")
            return True
        return False

    def _boundary(self) -> int:
        bnd = 0
        for i, m in enumerate(self._ends):
            if self.mask >> i & 1:
                bnd ^= int(m)
        return bnd

    def state(self) -> int:
        return self.mask

    def code(self) -> int:
        return self.mask


def even_subgraph_step(g: WeightedGraph, E: int, A: Iterable[int], rng: np.random.Generator) -> int:
    chain = EvenSubgraphChain(g, A, rng, E)
    chain.uniform = rng.random
    chain.step()
    return chain.mask


# --- sprinkling -----------------------------------------------------------------------------


def _sprinkle(masks, probs: np.ndarray, rng: np.random.Generator):
    scalar = np.isscalar(masks) or isinstance(masks, int)
    arr = np.atleast_1d(np.asarray(masks, dtype=np.int64))
    add = rng.random((len(arr), len(probs))) < probs
    out = arr | (add.astype(np.int64) << np.arange(len(probs))).sum(axis=1)
    return int(out[0]) if scalar else out


def sprinkle_ht_to_current(E, g: WeightedGraph, rng: np.random.Generator):
    """Add each pair independently with probability ``1 - 1/cosh(beta J)``."""
    return _sprinkle(E, 1 - 1 / np.cosh(g.edge_strengths()), rng)


def sprinkle_current_to_fk(T, g: WeightedGraph, rng: np.random.Generator):
    """Add each pair independently with probability ``1 - exp(-beta J)``."""
    return _sprinkle(T, -np.expm1(-g.edge_strengths()), rng)


# --- estimation ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainSpec:
    law: str = "spin"
    sources: tuple[int, ...] = ()
    samples: int = 10_000
    burn_in: int = BURN_IN
    thin: int = 1
    n_batches: int = N_BATCHES
    seed: int = 0
    sweep: bool = False


@dataclass(frozen=True)
class EstimatorResult:
    mean: float
    stderr: float
    n_samples: int
    burn_in: int


def make_chain(g: WeightedGraph, spec: ChainSpec):
    rng = make_rng(spec.seed)
    if spec.law == "spin":
        return SpinChain(g, rng)
    if spec.law == "current":
        return CurrentChain(g, spec.sources, rng)
    if spec.law == "ht":
        return EvenSubgraphChain(g, spec.sources, rng)
    raise PreconditionError(f"unknown law {spec.law!r}")


def run_chain(g: WeightedGraph, spec: ChainSpec, record: Callable | None = None) -> list:
    """Recorded states (``chain.code()`` by default) after burn-in, every ``thin`` updates."""
    chain = make_chain(g, spec)
    advance = chain.sweep if spec.sweep and chain.kind == "spin" else chain.step
    for _ in range(spec.burn_in):
        advance()
    record = record or (lambda c: c.code())
    out = []
    for _ in range(spec.samples):
        for _ in range(spec.thin):
            advance()
        out.append(record(chain))
    return out


def batch_means(values: Sequence[float], n_batches: int = N_BATCHES) -> tuple[float, float]:
    if n_batches < 2:
        raise PreconditionError("batch means needs at least 2 batches")
    v = np.asarray(values, dtype=float)
    if len(v) < n_batches:
        raise PreconditionError("fewer samples than batches")
    size = len(v) // n_batches
    means = v[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))


def estimate(g: WeightedGraph, observable: Callable, spec: ChainSpec) -> EstimatorResult:
    """Batch-means estimate of ``observable(state)`` along a chain."""
    if spec.n_batches < 2:
        raise PreconditionError("batch means needs at least 2 batches")
    values = run_chain(g, spec, record=lambda c: observable(c.state()))
    mean, se = batch_means(values, spec.n_batches)
    return EstimatorResult(mean, se, len(values), spec.burn_in)


def empirical_law(codes: Sequence[int], size: int) -> np.ndarray:
    return np.bincount(np.asarray(codes, dtype=np.int64), minlength=size) / len(codes)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
