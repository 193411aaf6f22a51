"""Bit-mask kernels over edge subsets.

An edge subset ``E`` of a graph with ``m`` pairs is the integer whose bit ``i``
is set iff pair ``i`` belongs to ``E``.  Tables indexed by subsets therefore have
length ``2**m``.  Vertex subsets use the same convention over site indices.
"""
from __future__ import annotations

from collections import deque
from typing import Iterator, Sequence

import numpy as np

from .errors import CapExceededError

SPIN_CAP = 20
SUBSET_CAP = 24
PARITY_CAP = 20
_BLOCK_BITS = 14


def check_cap(size: int, cap: int, what: str) -> None:
    if size > cap:
        raise CapExceededError(f"{what}: {size} exceeds the enumeration cap of {cap}")


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.int64)).astype(np.int64)


def subset_products(inside: Sequence[float], outside: Sequence[float] | None = None) -> np.ndarray:
    """``prod_{i in E} inside[i] * prod_{i not in E} outside[i]`` for every subset ``E``."""
    m = len(inside)
    outside = np.ones(m) if outside is None else outside
    out = np.ones(1)
    for a, b in zip(inside, outside):
        out = np.concatenate((out * b, out * a))
    return out


def endpoint_masks(endpoints: np.ndarray) -> list[int]:
    return [(1 << int(x)) | (1 << int(y)) for x, y in endpoints]


def boundary_table(endpoints: np.ndarray) -> np.ndarray:
    """Site mask of odd-degree vertices of every edge subset."""
    out = np.zeros(1, dtype=np.int64)
    for mask in endpoint_masks(endpoints):
        out = np.concatenate((out, out ^ mask))
    return out


def _merge(labels: np.ndarray, u: int, v: int) -> np.ndarray:
    lu, lv = labels[:, u], labels[:, v]
    lo = np.minimum(lu, lv)[:, None]
    hi = np.maximum(lu, lv)[:, None]
    return np.where(labels == hi, lo, labels)


def iter_label_blocks(n_sites: int, endpoints: np.ndarray, block_bits: int = _BLOCK_BITS) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(offset, labels)`` covering all subsets in index order.

    ``labels[r, v]`` is the smallest site in the component of ``v`` in the
    graph on all sites with edge set ``offset + r``.
    """
    m = len(endpoints)
    low = min(m, block_bits)
    base = np.tile(np.arange(n_sites, dtype=np.int16), (1, 1))
    for x, y in endpoints[:low]:
        base = np.concatenate((base, _merge(base, int(x), int(y))))
    for hi in range(1 << (m - low)):
        block = base
        for j in range(m - low):
            if hi >> j & 1:
                x, y = endpoints[low + j]
                block = _merge(block, int(x), int(y))
        yield hi << low, block


def component_count(labels: np.ndarray) -> np.ndarray:
    return (labels == np.arange(labels.shape[1])).sum(axis=1)


def even_meeting(labels: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """True where every component contains an even number of ``targets``."""
    rows = np.arange(labels.shape[0])
    odd = np.zeros(labels.shape, dtype=bool)
    for t in targets:
        odd[rows, labels[:, t]] ^= True
    return ~odd.any(axis=1)


def all_connected(labels: np.ndarray, vertices: Sequence[int]) -> np.ndarray:
    first = labels[:, vertices[0]]
    return np.logical_and.reduce([labels[:, v] == first for v in vertices])


def any_connected(labels: np.ndarray, A: Sequence[int], B: Sequence[int]) -> np.ndarray:
    """True where some vertex of ``A`` shares a component with some vertex of ``B``."""
    out = np.zeros(labels.shape[0], dtype=bool)
    for a in A:
        for b in B:
            out |= labels[:, a] == labels[:, b]
    return out


def subset_table(n_sites: int, endpoints: np.ndarray, fn) -> np.ndarray:
    """Evaluate ``fn(labels)`` block-wise and concatenate into a table over all subsets."""
    check_cap(len(endpoints), SUBSET_CAP, "edge subsets")
    return np.concatenate([fn(labels) for _, labels in iter_label_blocks(n_sites, endpoints)])


# --- cycle space --------------------------------------------------------------


def spanning_forest(n_sites: int, endpoints: np.ndarray) -> tuple[list[int], list[int], list[int]]:
    """BFS forest: ``(parent, parent_edge, root)`` per site; roots have parent ``-1``."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_sites)]
    for i, (x, y) in enumerate(endpoints):
        adj[int(x)].append((int(y), i))
        adj[int(y)].append((int(x), i))
    parent = [-2] * n_sites
    parent_edge = [-1] * n_sites
    root = [-1] * n_sites
    for r in range(n_sites):
        if parent[r] != -2:
            continue
        parent[r], root[r] = -1, r
        queue = deque([r])
        while queue:
            v = queue.popleft()
            for w, i in adj[v]:
                if parent[w] == -2:
                    parent[w], parent_edge[w], root[w] = v, i, r
                    queue.append(w)
    return parent, parent_edge, root


def _root_path(v: int, parent: list[int], parent_edge: list[int]) -> int:
    mask = 0
    while parent[v] >= 0:
        mask ^= 1 << parent_edge[v]
        v = parent[v]
    return mask


def cycle_basis(n_sites: int, endpoints: np.ndarray) -> list[int]:
    """Fundamental cycles of a BFS spanning forest, as edge masks."""
    parent, parent_edge, _ = spanning_forest(n_sites, endpoints)
    tree = {e for e in parent_edge if e >= 0}
    basis = []
    for i, (x, y) in enumerate(endpoints):
        if i not in tree:
            basis.append((1 << i) ^ _root_path(int(x), parent, parent_edge) ^ _root_path(int(y), parent, parent_edge))
    return basis


def particular_parity_set(n_sites: int, endpoints: np.ndarray, targets: Sequence[int]) -> int | None:
    """Some edge mask whose odd-degree sites are exactly ``targets``, or ``None``."""
    parent, parent_edge, root = spanning_forest(n_sites, endpoints)
    per_root: dict[int, int] = {}
    mask = 0
    for t in targets:
        per_root[root[t]] = per_root.get(root[t], 0) ^ 1
        mask ^= _root_path(t, parent, parent_edge)
    if any(per_root.values()):
        return None
    return mask


def parity_sets(n_sites: int, endpoints: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """All edge masks with odd-degree set ``targets`` (a coset of the cycle space)."""
    start = particular_parity_set(n_sites, endpoints, targets)
    if start is None:
        return np.zeros(0, dtype=np.int64)
    basis = cycle_basis(n_sites, endpoints)
    check_cap(len(basis), PARITY_CAP, "cycle space dimension")
    out = np.array([start], dtype=np.int64)
    for c in basis:
        out = np.concatenate((out, out ^ c))
    return np.sort(out)


def mask_bits(masks: np.ndarray, m: int) -> np.ndarray:
    """Boolean matrix ``(len(masks), m)`` of the bits of ``masks``."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(m)) & 1).astype(bool)


def zeta(table: np.ndarray) -> np.ndarray:
    """``out[S] = sum_{T subset of S} table[T]``."""
    out = np.array(table, dtype=float)
    bit = 1
    while bit < len(out):
        view = out.reshape(-1, 2, bit)
        view[:, 1, :] += view[:, 0, :]
        bit <<= 1
    return out


def mobius(table: np.ndarray) -> np.ndarray:
    """Inverse of :func:`zeta`."""
    out = np.array(table, dtype=float)
    bit = 1
    while bit < len(out):
        view = out.reshape(-1, 2, bit)
        view[:, 1, :] -= view[:, 0, :]
        bit <<= 1
    return out


def or_convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``out[S] = sum_{A | B = S} f[A] g[B]`` via subset sums."""
    return np.clip(mobius(zeta(f) * zeta(g)), 0.0, None)


def spread(weights: np.ndarray, add: Sequence[float], keep: Sequence[float]) -> np.ndarray:
    """Independent per-edge enlargement of a measure on subsets.

    For a measure ``weights`` on base sets ``D``, returns the measure on ``S``
    obtained by adding each edge ``e`` outside ``D`` with weight ``add[e]`` and
    leaving it out with weight ``keep[e]``; edges already in ``D`` stay with
    weight 1.  All terms are non-negative, so no cancellation occurs.
    """
    out = np.array(weights, dtype=float)
    for i, (a, k) in enumerate(zip(add, keep)):
        view = out.reshape(-1, 2, 1 << i)
        without = view[:, 0, :].copy()
        view[:, 1, :] += a * without
        view[:, 0, :] = k * without
    return out
