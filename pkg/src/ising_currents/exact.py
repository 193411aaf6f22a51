"""Exact computations on small graphs.

Spin sums enumerate all ``2**n`` configurations with the field applied
directly.  The expansions work on the full pair set (ghost pairs included) and
enumerate edge subsets; together they serve as the reference every sampler and
identity check is measured against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from . import subsets as sb
from .errors import CapExceededError, PreconditionError
from .graph import WeightedGraph, induced_subgraph, vertex_set


def _mask(vertices: Iterable[int]) -> int:
    out = 0
    for v in vertices:
        out |= 1 << v
    return out


def site_targets(g: WeightedGraph, A: Iterable[int]) -> list[int]:
    """Odd-degree sites required of a current or edge set with sources ``A``.

    The ghost absorbs the parity of an odd source set when present.
    """
    A = sorted(vertex_set(g, A))
    if len(A) % 2 and g.has_ghost:
        A.append(g.ghost)
    return A


# --- spin enumeration --------------------------------------------------------


@lru_cache(maxsize=64)
def _spin_table(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray, float]:
    """``(configs, probabilities, log Z)``; bit ``v`` of a config set means ``sigma_v = -1``."""
    n = g.n_vertices
    sb.check_cap(n, sb.SPIN_CAP, "spin configurations")
    idx = np.arange(1 << n, dtype=np.int64)
    spins = 1 - 2 * ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)
    minus_h = np.zeros(idx.shape)
    for x, y, J in g.lattice_couplings():
        minus_h += J * spins[:, x] * spins[:, y]
    field = g.ghost_couplings() if g.h == 0 else np.zeros(n)
    minus_h += spins @ (field + g.h)
    logw = g.beta * minus_h
    top = logw.max()
    w = np.exp(logw - top)
    total = w.sum()
    return idx, w / total, float(top + math.log(total))


def _signs(configs: np.ndarray, A: Iterable[int]) -> np.ndarray:
    return 1 - 2 * (sb.popcount(configs & _mask(A)) & 1)


def z_spin(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    """``sum_sigma sigma_A exp(-beta H(sigma))`` by full enumeration."""
    A = vertex_set(g, A)
    configs, p, logz = _spin_table(g)
    return float(math.exp(logz) * np.dot(p, _signs(configs, A)))


def corr_spin(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    A = vertex_set(g, A)
    configs, p, _ = _spin_table(g)
    return float(np.dot(p, _signs(configs, A)))


def log_z_spin(g: WeightedGraph) -> float:
    return _spin_table(g)[2]


def spin_law(g: WeightedGraph) -> np.ndarray:
    """Gibbs probabilities indexed by config bits (bit ``v`` set means ``sigma_v = -1``)."""
    return _spin_table(g)[1].copy()


# --- expansion weights -------------------------------------------------------


@dataclass(frozen=True)
class ExpansionWeights:
    c0: float
    c1: float
    c2: float
    tanh: np.ndarray
    p: np.ndarray
    t: np.ndarray


def _free_components(g: WeightedGraph) -> int:
    """Components of the full pair graph that do not contain the ghost."""
    _, _, root = sb.spanning_forest(g.n_sites, g.edge_endpoints())
    roots = {root[v] for v in range(g.n_vertices)}
    if g.has_ghost:
        roots.discard(root[g.ghost])
    return len(roots)


def expansion_weights(g: WeightedGraph) -> ExpansionWeights:
    K = g.edge_strengths()
    c1 = float(np.exp(K.sum()))
    return ExpansionWeights(
        c0=float(np.prod(np.cosh(K))),
        c1=c1,
        c2=c1 * 2 ** _free_components(g),
        tanh=np.tanh(K),
        p=-np.expm1(-2 * K),
        t=np.exp(-2 * K),
    )


# --- high-temperature expansion ----------------------------------------------


def ht_sum(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    """Sum of ``prod_{e in E} tanh(beta J_e)`` over edge sets with odd-degree set ``A``."""
    sb.check_cap(g.n_edges, sb.SUBSET_CAP, "edge subsets")
    targets = site_targets(g, A)
    if len(targets) % 2:
        return 0.0
    bnd = sb.boundary_table(g.edge_endpoints())
    x = sb.subset_products(np.tanh(g.edge_strengths()))
    return float(x[bnd == _mask(targets)].sum())


def ht_corr(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    return ht_sum(g, A) / ht_sum(g, ())


# --- currents, via parity factorisation ---------------------------------------


def parity_classes(g: WeightedGraph, A: Iterable[int]) -> np.ndarray:
    """Edge masks ``E`` whose odd-degree set on the vertex set is ``A``."""
    sb.check_cap(g.n_edges, 62, "edges in a mask")
    targets = site_targets(g, A)
    if len(targets) % 2:
        return np.zeros(0, dtype=np.int64)
    return sb.parity_sets(g.n_sites, g.edge_endpoints(), targets)


def parity_weights(g: WeightedGraph, masks: np.ndarray) -> np.ndarray:
    """``prod_{e in E} sinh(beta J_e) prod_{e not in E} cosh(beta J_e)`` per mask."""
    K = g.edge_strengths()
    bits = sb.mask_bits(masks, g.n_edges)
    return np.prod(np.where(bits, np.sinh(K), np.cosh(K)), axis=1)


def current_sum(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    """Total weight of currents with sources ``A``.

    Summing ``(beta J)^k / k!`` over even (odd) ``k`` gives ``cosh`` (``sinh``),
    so only the parity pattern of a current matters and the sum is finite.
    """
    masks = parity_classes(g, A)
    return float(parity_weights(g, masks).sum())


def current_corr(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    return current_sum(g, A) / current_sum(g, ())


# --- random-cluster expansion ----------------------------------------------------


def fk_indicator(g: WeightedGraph, A: Iterable[int]) -> np.ndarray:
    """Membership of every edge subset in the even-meeting event for ``A``."""
    targets = site_targets(g, A)
    return sb.subset_table(g.n_sites, g.edge_endpoints(), lambda lab: sb.even_meeting(lab, targets))


def fk_weights(g: WeightedGraph) -> np.ndarray:
    """``2**k(E) prod p prod (1-p)`` for every edge subset ``E``."""
    sb.check_cap(g.n_edges, sb.SUBSET_CAP, "edge subsets")
    w = expansion_weights(g)
    counts = sb.subset_table(g.n_sites, g.edge_endpoints(), sb.component_count)
    return np.ldexp(sb.subset_products(w.p, 1 - w.p), counts)


def fk_sum(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    return float(fk_weights(g)[fk_indicator(g, A)].sum())


def fk_corr(g: WeightedGraph, A: Iterable[int] = ()) -> float:
    r = fk_weights(g)
    return float(r[fk_indicator(g, A)].sum() / r.sum())


def fk_law(g: WeightedGraph) -> np.ndarray:
    r = fk_weights(g)
    return r / r.sum()


# --- low-temperature expansion -------------------------------------------------


def contour_sets(g: WeightedGraph) -> np.ndarray:
    """Distinct disagreement-edge masks over all spin configurations."""
    configs, _, _ = _spin_table(g)
    n = g.n_vertices
    spins_minus = (configs[:, None] >> np.arange(n)) & 1
    if g.has_ghost:
        spins_minus = np.concatenate((spins_minus, np.zeros((len(configs), 1), dtype=np.int64)), axis=1)
    mask = np.zeros(len(configs), dtype=np.int64)
    for i, (x, y) in enumerate(g.edge_endpoints()):
        mask |= (spins_minus[:, x] ^ spins_minus[:, y]) << i
    return np.unique(mask)


def lt_partition(g: WeightedGraph) -> float:
    """Partition function rebuilt from contour sets.

    Each contour set has ``2**k0`` preimages, ``k0`` counting components not
    attached to the ghost, which is the factor carried by the prefactor.
    """
    w = expansion_weights(g)
    masks = contour_sets(g)
    t = np.prod(np.where(sb.mask_bits(masks, g.n_edges), w.t, 1.0), axis=1)
    return float(w.c2 * t.sum())


# --- finite-volume inequalities --------------------------------------------------


def boundary_of(g: WeightedGraph, S: Iterable[int], ghost: bool = True) -> list[int]:
    """Sites of ``S`` with a positively coupled neighbour outside ``S``.

    The ghost never belongs to ``S``, so with ``ghost`` every site coupled to it
    is a boundary site; ``ghost=False`` looks at lattice pairs only.
    """
    S = vertex_set(g, S)
    to_ghost = g.ghost_couplings() if ghost else np.zeros(g.n_vertices)
    return sorted(x for x in S if to_ghost[x] > 0 or any(y not in S for y in g.neighbors(x)))


def phi_S(g: WeightedGraph, S: Iterable[int], x0: int) -> float:
    S = vertex_set(g, S)
    if x0 not in S:
        raise PreconditionError(f"x0={x0} is not in S")
    sub, old = induced_subgraph(g, S, h=0.0)
    new = {v: i for i, v in enumerate(old)}
    return sum(corr_spin(sub, {new[x0]} ^ {new[y]}) for y in boundary_of(g, S))


class SimonLieb(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def simon_lieb_check(
    g: WeightedGraph, S: Iterable[int], x0: int, x: int, slack: float = 1e-12, ghost_boundary: bool = True
) -> SimonLieb:
    """Finite-volume check of ``<s0 sx> <= sum_{y in dS} <s0 sy>_S <sy sx>``.

    The restricted model on ``S`` keeps the field of ``g``.  With a field and
    ``ghost_boundary=False`` the inequality can fail.
    """
    S = vertex_set(g, S)
    if x0 not in S or x in S or not 0 <= x < g.n_vertices:
        raise PreconditionError("need x0 in S and x a site outside S")
    sub, old = induced_subgraph(g, S)
    new = {v: i for i, v in enumerate(old)}
    lhs = corr_spin(g, {x0, x})
    rhs = sum(corr_spin(sub, {new[x0]} ^ {new[y]}) * corr_spin(g, {y, x}) for y in boundary_of(g, S, ghost_boundary))
    return SimonLieb(lhs, rhs, lhs <= rhs + slack)


class BetaDerivative(NamedTuple):
    analytic: float
    numeric: float


def beta_derivative_check(g: WeightedGraph, A: Iterable[int] = (), step: float = 1e-5) -> BetaDerivative:
    A = vertex_set(g, A)
    cA = corr_spin(g, A)
    analytic = 0.0
    for x, y, J in g.edges:
        pair = {x} if y == g.ghost else {x, y}
        analytic += J * (corr_spin(g, A ^ pair) - cA * corr_spin(g, pair))
    if g.beta < step:
        raise PreconditionError("beta must exceed the finite-difference step")
    numeric = (corr_spin(g.with_beta(g.beta + step), A) - corr_spin(g.with_beta(g.beta - step), A)) / (2 * step)
    return BetaDerivative(analytic, numeric)


def all_subsets(n: int) -> list[frozenset[int]]:
    return [frozenset(v for v in range(n) if k >> v & 1) for k in range(1 << n)]


__all__ = [
    "CapExceededError",
    "ExpansionWeights",
    "all_subsets",
    "beta_derivative_check",
    "boundary_of",
    "contour_sets",
    "corr_spin",
    "current_corr",
    "current_sum",
    "expansion_weights",
    "fk_corr",
    "fk_indicator",
    "fk_law",
    "fk_sum",
    "fk_weights",
    "ht_corr",
    "ht_sum",
    "log_z_spin",
    "lt_partition",
    "parity_classes",
    "parity_weights",
    "phi_S",
    "simon_lieb_check",
    "site_targets",
    "spin_law",
    "z_spin",
]
