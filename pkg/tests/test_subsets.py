import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ising_currents import subsets as sb
from ising_currents.errors import CapExceededError


def _random_edges(rng, n, p=0.6):
    return np.array([(x, y) for x in range(n) for y in range(x + 1, n) if rng.random() < p], dtype=np.int64).reshape(-1, 2)


def test_subset_products_matches_direct_product():
    a, b = [0.3, 0.7, 1.5], [2.0, 0.5, 1.1]
    out = sb.subset_products(a, b)
    for mask in range(8):
        expect = np.prod([a[i] if mask >> i & 1 else b[i] for i in range(3)])
        assert out[mask] == pytest.approx(expect)


def test_boundary_table():
    ends = np.array([(0, 1), (1, 2), (0, 2)])
    table = sb.boundary_table(ends)
    assert table[0b001] == 0b011
    assert table[0b011] == 0b101
    assert table[0b111] == 0


@pytest.mark.parametrize("seed", range(5))
def test_component_labels_match_networkx(seed):
    rng = np.random.default_rng(seed)
    n = 6
    ends = _random_edges(rng, n)
    for offset, labels in sb.iter_label_blocks(n, ends, block_bits=3):
        for r in range(labels.shape[0]):
            mask = offset + r
            G = nx.Graph()
            G.add_nodes_from(range(n))
            G.add_edges_from(tuple(ends[i]) for i in range(len(ends)) if mask >> i & 1)
            for comp in nx.connected_components(G):
                assert {int(labels[r, v]) for v in comp} == {min(comp)}
            assert sb.component_count(labels[r : r + 1])[0] == nx.number_connected_components(G)


def test_even_meeting_and_connectivity():
    ends = np.array([(0, 1), (2, 3)])
    table = sb.subset_table(4, ends, lambda lab: sb.even_meeting(lab, [0, 1]))
    assert table.tolist() == [False, True, False, True]
    both = sb.subset_table(4, ends, lambda lab: sb.any_connected(lab, [0], [1, 3]))
    assert both.tolist() == [False, True, False, True]
    every = sb.subset_table(4, ends, lambda lab: sb.all_connected(lab, [0, 1]))
    assert every.tolist() == [False, True, False, True]


@given(st.integers(0, 2**31 - 1))
def test_parity_sets_are_the_full_coset(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    ends = _random_edges(rng, n, 0.7)
    targets = sorted(int(v) for v in rng.choice(n, size=2 * int(rng.integers(0, n // 2 + 1)), replace=False))
    want = sum(1 << t for t in targets)
    brute = [m for m in range(1 << len(ends)) if sb.boundary_table(ends)[m] == want]
    assert sb.parity_sets(n, ends, targets).tolist() == brute


def test_cycle_basis_dimension():
    ends = np.array([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4), (5, 6)])
    basis = sb.cycle_basis(7, ends)
    # m - n + components = 7 - 7 + 2
    assert len(basis) == 2
    table = sb.boundary_table(ends)
    assert all(table[c] == 0 for c in basis)


def test_particular_parity_set_none_when_impossible():
    ends = np.array([(0, 1), (2, 3)])
    assert sb.particular_parity_set(4, ends, [0, 2]) is None
    assert sb.parity_sets(4, ends, [0, 2]).size == 0


def test_spread_matches_enumeration():
    rng = np.random.default_rng(3)
    w = rng.random(8)
    add, keep = rng.random(3), rng.random(3)
    out = sb.spread(w, add, keep)
    expect = np.zeros(8)
    for base in range(8):
        for extra in range(8):
            if extra & base:
                continue
            f = w[base]
            for i in range(3):
                if base >> i & 1:
                    continue
                f *= add[i] if extra >> i & 1 else keep[i]
            expect[base | extra] += f
    np.testing.assert_allclose(out, expect)


def test_or_convolution_matches_pairs():
    rng = np.random.default_rng(4)
    f, g = rng.random(16), rng.random(16)
    expect = np.zeros(16)
    for a, b in itertools.product(range(16), repeat=2):
        expect[a | b] += f[a] * g[b]
    np.testing.assert_allclose(sb.or_convolve(f, g), expect)


def test_caps():
    with pytest.raises(CapExceededError):
        sb.check_cap(25, sb.SUBSET_CAP, "edges")
    with pytest.raises(CapExceededError):
        sb.subset_table(2, np.zeros((25, 2), dtype=np.int64), lambda lab: lab[:, 0])
