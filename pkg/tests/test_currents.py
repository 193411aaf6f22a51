import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ising_currents import currents as cu
from ising_currents import exact as ex
from ising_currents.corpus import random_instance
from ising_currents.errors import DegenerateError, EmptySupportError, PreconditionError
from ising_currents.graph import WeightedGraph, complete_graph, cycle_graph, grid_graph, path_graph

from . import oracles

Current = cu.Current


def test_sources_trace_weight():
    assert cu.sources(Current(3)) == frozenset()
    path = Current.from_mapping(3, {(0, 1): 1, (1, 2): 1})
    assert cu.sources(path) == {0, 2}
    assert cu.sources(Current.from_mapping(3, {(0, 1): 2})) == frozenset()
    assert cu.trace(path) == {(0, 1), (1, 2)}
    g = path_graph(3, beta=0.5, J=2.0)
    assert cu.weight(g, Current.from_mapping(3, {(0, 1): 3})) == pytest.approx(1.0 / 6)
    assert cu.weight(g, Current.from_mapping(3, {(0, 2): 1})) == 0.0


def test_ghost_never_a_source():
    n = Current.from_mapping(2, {(0, 2): 1})
    assert cu.sources(n) == {0}


def test_current_validation():
    with pytest.raises(PreconditionError):
        Current.from_mapping(3, {(0, 1): -1})
    with pytest.raises(PreconditionError):
        Current.from_mapping(3, {(1, 1): 1})


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)), max_size=8), st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)), max_size=8))
def test_trace_of_sum_is_union(a, b):
    make = lambda items: Current.from_mapping(4, {(x, y): k for x, y, k in items if x != y})
    n1, n2 = make(a), make(b)
    assert cu.trace(n1 + n2) == cu.trace(n1) | cu.trace(n2)
    assert cu.sources(n1 + n2) == cu.sources(n1) ^ cu.sources(n2)


# --- backbone -----------------------------------------------------------------------


def test_backbone_hand_examples():
    d = cu.backbone_peel(Current.from_mapping(3, {(0, 1): 1, (1, 2): 1}), {0, 2})
    assert d.backbone_walks == ((0, 1, 2),) and d.loops == ()
    d = cu.backbone_peel(Current.from_mapping(3, {(0, 1): 2}), ())
    assert d.backbone_walks == () and d.loops == ((0, 1, 0),)
    d = cu.backbone_peel(Current.from_mapping(2, {(0, 2): 1}), {0})
    assert d.backbone_walks == ((0, 2),)


def test_backbone_rejects_wrong_sources():
    with pytest.raises(PreconditionError):
        cu.backbone_peel(Current.from_mapping(3, {(0, 1): 1}), {0, 2})


def test_backbone_restart_case():
    # a current where a restart at an already-used source would strand an odd vertex
    n = Current.from_mapping(5, {(0, 2): 1, (0, 3): 1, (0, 4): 1, (1, 2): 2, (1, 4): 1, (2, 3): 2, (2, 4): 1})
    A = cu.sources(n)
    assert A == {0, 1, 3, 4}
    d = cu.backbone_peel(n, A)
    assert cu.backbone_valid(d, A)
    assert cu.backbone_reconstruct(d) == n


SHAPES = [((0, 1), (1, 2), (2, 3), (0, 3)), ((0, 1), (0, 2), (0, 3), (1, 2)), ((0, 1), (1, 2), (0, 2)), ((0, 1), (0, 4), (1, 4), (2, 4))]


@pytest.mark.parametrize("edges", SHAPES)
def test_backbone_equivalence_exhaustive(edges):
    n_vertices = 4
    candidate_sets = [frozenset(v for v in range(n_vertices) if k >> v & 1) for k in range(16)]
    for counts in itertools.product(range(4), repeat=len(edges)):
        n = Current.from_mapping(n_vertices, dict(zip(edges, counts)))
        S = cu.sources(n)
        for A in candidate_sets:
            if A == S:
                d = cu.backbone_peel(n, A)
                assert cu.backbone_valid(d, A)
                assert cu.backbone_reconstruct(d) == n
                assert cu.walk_family_sources(n_vertices, d.walks) == A
            else:
                with pytest.raises(PreconditionError):
                    cu.backbone_peel(n, A)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_walk_families_have_the_right_sources(data):
    """Any family of open walks pairing up A plus closed loops reconstructs a current with sources A."""
    n = 5
    k = data.draw(st.integers(0, 2))
    ends = data.draw(st.lists(st.integers(0, n - 1), min_size=2 * k, max_size=2 * k, unique=True))
    walks = []
    for i in range(k):
        middle = data.draw(st.lists(st.integers(0, n - 1), max_size=4))
        walk = [ends[2 * i]] + middle + [ends[2 * i + 1]]
        if all(a != b for a, b in zip(walk, walk[1:])):
            walks.append(tuple(walk))
    for _ in range(data.draw(st.integers(0, 2))):
        loop = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=4))
        loop = loop + [loop[0]]
        if all(a != b for a, b in zip(loop, loop[1:])) and len(loop) > 2:
            walks.append(tuple(loop))
    current = cu.backbone_reconstruct(cu.BackboneDecomposition(n, tuple(walks), (), (), ()))
    assert cu.sources(current) == cu.walk_family_sources(n, walks)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.data())
def test_peel_reconstruct_round_trip(k, data):
    pairs = [(x, y) for x in range(k + 1) for y in range(x + 1, k + 1)]
    counts = data.draw(st.lists(st.integers(0, 4), min_size=len(pairs), max_size=len(pairs)))
    n = Current.from_mapping(k, dict(zip(pairs, counts)))
    A = cu.sources(n)
    d = cu.backbone_peel(n, A)
    assert cu.backbone_valid(d, A)
    assert cu.backbone_reconstruct(d) == n


def test_backbone_other_orders():
    n = Current.from_mapping(4, {(0, 1): 1, (1, 2): 2, (2, 3): 1, (0, 3): 2, (1, 3): 1})
    A = cu.sources(n)
    base = cu.backbone_peel(n, A)
    alt = cu.backbone_peel(n, A, vertex_order=[3, 2, 1, 0, 4], edge_order=[(2, 3), (1, 3), (1, 2), (0, 3), (0, 1)])
    assert cu.backbone_valid(alt, A) and cu.backbone_reconstruct(alt) == n
    assert base == cu.backbone_peel(n, A)
    with pytest.raises(PreconditionError):
        cu.backbone_peel(n, A, edge_order=[(0, 1)])


# --- trace laws ---------------------------------------------------------------------


def test_single_edge_trace_law():
    g = path_graph(2, beta=0.8)
    law = cu.trace_law_exact(g, ())
    assert law.prob(0) == pytest.approx(1 / math.cosh(0.8))
    assert law.prob([(0, 1)]) == pytest.approx(1 - 1 / math.cosh(0.8))
    assert cu.trace_law_exact(g, {0, 1}).prob(1) == pytest.approx(1.0)


@pytest.mark.parametrize("h,A", [(0.0, ()), (0.0, (0, 2)), (0.3, (0,)), (0.3, (0, 1, 2))])
def test_trace_marginals_against_truncated_series(h, A):
    couplings = [(0, 1, 1.0), (1, 2, 0.5), (0, 2, 0.8)]
    g = WeightedGraph(3, couplings, beta=0.6, h=h)
    law = cu.trace_law_exact(g, A)
    assert law.pmf.sum() == pytest.approx(1.0, abs=1e-12)
    expect = oracles.trace_edge_marginals(3, couplings, 0.6, h, A, cutoff=40)
    got = dict(zip([e[:2] for e in g.edges], law.edge_marginals()))
    for pair, value in expect.items():
        assert got[pair] == pytest.approx(value, abs=1e-12)
    pmf_marg = [sum(law.pmf[m] for m in range(len(law.pmf)) if m >> i & 1) for i in range(g.n_edges)]
    np.testing.assert_allclose(pmf_marg, law.edge_marginals(), atol=1e-12)


def test_trace_law_support_contains_parity_set():
    g = cycle_graph(4, beta=0.4)
    law = cu.trace_law_exact(g, {0, 2})
    for m in np.flatnonzero(law.pmf > 0):
        assert any((int(m) & int(E)) == int(E) for E in law.parity_sets)


def test_empty_support():
    with pytest.raises(EmptySupportError):
        cu.trace_law_exact(path_graph(3), {0})


def test_trace_law_sampling():
    g = complete_graph(3, beta=0.7)
    law = cu.trace_law_exact(g, ())
    draws = law.sample(np.random.default_rng(0), 200_000)
    freq = np.bincount(draws, minlength=8) / len(draws)
    np.testing.assert_allclose(freq, law.pmf, atol=5e-3)


def test_union_law_against_pairwise_sum():
    g = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 0.5), (0, 2, 0.8)], beta=0.6, h=0.3)
    l1, l2 = cu.trace_law_exact(g, {0}), cu.trace_law_exact(g, {1, 2})
    expect = np.zeros(len(l1.pmf))
    for a, b in itertools.product(range(len(l1.pmf)), repeat=2):
        expect[a | b] += l1.pmf[a] * l2.pmf[b]
    np.testing.assert_allclose(cu.union_pmf(l1, l2), expect, atol=1e-15)


# --- switching consequences ---------------------------------------------------------------


def _pairwise_union(g, A, B):
    l1, l2 = cu.trace_law_exact(g, A), cu.trace_law_exact(g, B)
    out = np.zeros(len(l1.pmf))
    for a in np.flatnonzero(l1.pmf):
        for b in np.flatnonzero(l2.pmf):
            out[a | b] += l1.pmf[a] * l2.pmf[b]
    return out, l1.partition * l2.partition


@pytest.mark.parametrize("g", [complete_graph(4, beta=0.4, h=0.2), cycle_graph(4, beta=0.6), grid_graph(2, 2, beta=0.3, h=0.5), complete_graph(3, beta=1.1)])
def test_switching_identities(g):
    rng = np.random.default_rng(7)
    subsets = ex.all_subsets(g.n_vertices)
    for A in subsets:
        s = cu.squared_corr_identity(g, A)
        assert s.lhs == pytest.approx(s.rhs, abs=1e-12)
    table = rng.random(1 << g.n_edges)
    for A, B in itertools.product(subsets, repeat=2):
        sv = cu.switching_verify(g, A, B, table)
        assert sv.lhs == pytest.approx(sv.rhs, rel=1e-10, abs=1e-12)
        if ex.z_spin(g, A ^ B) > 1e-12:
            gg = cu.griffiths2_gap(g, A, B)
            assert gg.spin == pytest.approx(gg.currents, abs=1e-10)
            assert gg.currents >= -1e-15


def test_switching_left_side_against_pairwise_union():
    g = cycle_graph(4, beta=0.5, h=0.2)
    A, B = {0, 1}, {1, 3}
    F = lambda mask: float(bin(mask).count("1") ** 2)
    union, zz = _pairwise_union(g, A, B)
    table = cu.subset_functional(g, F)
    assert cu.switching_verify(g, A, B, F).lhs == pytest.approx(zz * float(union @ table), rel=1e-12)


def test_switching_functional_validation():
    g = path_graph(3, beta=0.5)
    with pytest.raises(PreconditionError):
        cu.switching_verify(g, {0, 1}, {1, 2}, np.ones(3))


def test_griffiths_gap_degenerate():
    with pytest.raises(DegenerateError):
        cu.griffiths2_gap(path_graph(3, beta=0.5), {0}, {0, 1})


@pytest.mark.parametrize("g", [complete_graph(4, beta=0.5), cycle_graph(4, beta=0.8, h=0.3), grid_graph(2, 3, beta=0.4)])
def test_ursell_all_orderings(g):
    for xs in itertools.permutations(range(4)):
        u = cu.ursell4(g, *xs)
        assert u.direct == pytest.approx(u.via_currents, abs=1e-12)
        assert u.direct <= 1e-12


def test_ursell_preconditions():
    g = complete_graph(4, beta=0.5)
    with pytest.raises(PreconditionError):
        cu.ursell4(g, 0, 0, 1, 2)
    two = WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)], beta=0.5)
    with pytest.raises(DegenerateError):
        cu.ursell4(two, 0, 1, 2, 3)


def test_truncated_switching_diagnostic_matches_double_enumeration():
    g = complete_graph(3, beta=0.5)
    A, B = {0, 1}, {1, 2}
    F = lambda n: float(np.cos(n.sum()) + 2)
    cutoff = 3
    K = g.edge_strengths()
    w = lambda n: np.prod(K**n / np.array([math.factorial(k) for k in n]))
    ind = ex.fk_indicator(g, A)
    lhs = rhs = 0.0
    for n1 in itertools.product(range(cutoff + 1), repeat=3):
        n1 = np.array(n1)
        s1 = cu.sources(Current.from_array(g, n1))
        for n2 in itertools.product(range(cutoff + 1), repeat=3):
            n2 = np.array(n2)
            total = n1 + n2
            if total.max() > cutoff:
                continue
            s2 = cu.sources(Current.from_array(g, n2))
            if s1 == A and s2 == B:
                lhs += w(n1) * w(n2) * F(total)
            mask = sum(1 << i for i in range(3) if total[i])
            if not s1 and s2 == A ^ B and ind[mask]:
                rhs += w(n1) * w(n2) * F(total)
    r = cu.switching_truncated(g, A, B, F, cutoff)
    assert r.lhs == pytest.approx(lhs, rel=1e-12)
    assert r.rhs == pytest.approx(rhs, rel=1e-12)
    assert 0 < r.tail < 1


def test_truncation_tail():
    direct = sum(0.7**k / math.factorial(k) for k in range(6, 60))
    assert cu.truncation_tail(0.7, 5) == pytest.approx(direct, rel=1e-14)


def test_question2_examples():
    g = path_graph(2)
    betas = [0.0, 0.2, 0.5, 1.0]
    rows = cu.question2_scan(g, {0}, {1}, betas)
    # the two traces miss the edge with probability 1/cosh^2
    for row, b in zip(rows, betas):
        assert row["value"] == pytest.approx(1 - 1 / math.cosh(b) ** 2)
    assert rows[0]["value"] == 0.0 and rows[0]["diff"] is None
    assert all(r["diff"] > 0 for r in rows[1:])
    tri = cu.question2_scan(complete_graph(3), {0}, {1}, [0.1 * k for k in range(1, 11)])
    assert all(r["diff"] > 0 for r in tri[1:])


def test_double_connection_against_pairwise_union():
    g = cycle_graph(4, beta=0.45)
    union, _ = _pairwise_union(g, (), ())
    hit = np.array([1.0 if _joined(m, g, {0}, {2}) else 0.0 for m in range(len(union))])
    assert cu.double_connection_probability(g, {0}, {2}) == pytest.approx(float(union @ hit))


def _joined(mask, g, A, B):
    import networkx as nx

    G = nx.Graph()
    G.add_nodes_from(range(g.n_sites))
    G.add_edges_from(e[:2] for i, e in enumerate(g.edges) if mask >> i & 1)
    return any(nx.has_path(G, a, b) for a in A for b in B)
