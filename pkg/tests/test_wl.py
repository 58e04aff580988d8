from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ihgnn.exceptions import InputError
from ihgnn.fixtures import bundled_data_dir, random_graph, triangle, wl_pair
from ihgnn.graph import Graph
from ihgnn.tud import load_dataset
from ihgnn.wl import (
    Coloring,
    Verdict,
    wl_node_order,
    wl_refine,
    wl_refine_step,
    wl_signature,
    wl_test,
)

G1_ROUND1 = (7, 7, 12, 11, 13, 9)
G2_ROUND1 = (6, 5, 10, 8, 14, 12)


def test_signature_examples():
    g1, g2 = wl_pair()
    c = Coloring.initial([g1, g2])
    assert wl_signature(g1, c, g1.node_labels.index(4)) == "4|1,1,3"
    assert wl_signature(g2, c, 0, graph_index=1) == "1|1,3,4"


def test_signature_isolated_node():
    assert wl_signature(Graph(1, [], [2]), [2], 0) == "2|"


def test_signature_coloring_size_mismatch():
    with pytest.raises(InputError):
        wl_signature(triangle(), [1, 2], 0)


def test_wl_pair_round_one_colors():
    c = wl_refine(list(wl_pair()), 1)
    assert c.colors == [G1_ROUND1, G2_ROUND1]
    assert c.round == 1 and c.next_color == 15


def test_wl_pair_duplicates_and_shared_color():
    c = wl_refine(list(wl_pair()), 1)
    ms1, ms2 = Counter(c.colors[0]), Counter(c.colors[1])
    assert [col for col, k in ms1.items() if k > 1] == [7]
    assert all(k == 1 for k in ms2.values())
    assert set(ms1) & set(ms2) == {12}


def test_bundled_pair_matches_builtin():
    d = load_dataset(bundled_data_dir(), "FIG2")
    assert d.graphs == wl_pair()


def test_wl_test_pair():
    res = wl_test(*wl_pair(), max_rounds=5)
    assert res.verdict is Verdict.NON_ISOMORPHIC
    assert res.round == 1
    assert str(res) == "NonIsomorphic round=1"


def test_wl_test_self():
    g1, _ = wl_pair()
    assert wl_test(g1, g1, 10).verdict is Verdict.POSSIBLY_ISOMORPHIC


def test_wl_test_round_zero_labels():
    res = wl_test(triangle((1, 1, 1)), triangle((1, 1, 2)), 3)
    assert (res.verdict, res.round) == (Verdict.NON_ISOMORPHIC, 0)


def test_wl_test_round_zero_sizes():
    res = wl_test(triangle(), Graph(2, [(0, 1)], [1, 1]), 3)
    assert (res.verdict, res.round) == (Verdict.NON_ISOMORPHIC, 0)


def test_wl_test_zero_rounds_is_possibly():
    g1, g2 = wl_pair()
    assert wl_test(g1, g2, 0).verdict is Verdict.POSSIBLY_ISOMORPHIC


def test_wl_test_negative_rounds():
    with pytest.raises(InputError):
        wl_test(triangle(), triangle(), -1)


def test_hexagon_vs_two_triangles_indistinguishable():
    hexagon = Graph(6, [(i, (i + 1) % 6) for i in range(6)], [1] * 6)
    two = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], [1] * 6)
    assert wl_test(hexagon, two, 10).verdict is Verdict.POSSIBLY_ISOMORPHIC


def test_two_triangles_uniform_single_color():
    two = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], [1] * 6)
    for r in range(4):
        assert len(set(wl_refine([two], r).colors[0])) == 1


def test_distinct_colors_stable_partition():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)], [1, 2, 3, 4])
    c0 = Coloring.initial([g])
    c1 = wl_refine_step([g], c0)
    assert len(set(c1.colors[0])) == 4


def test_node_order_examples():
    g1, g2 = wl_pair()
    o1 = wl_node_order(g1, 1, others=[g2])
    assert [G1_ROUND1[v] for v in o1] == [7, 7, 9, 11, 12, 13]
    assert o1[:2] == [0, 1]  # ties keep index order
    o2 = wl_node_order(g2, 1, others=[g1])
    assert [G2_ROUND1[v] for v in o2] == [5, 6, 8, 10, 12, 14]


def test_node_order_edgeless_uniform_identity():
    assert wl_node_order(Graph(5, [], [3] * 5), 3) == [0, 1, 2, 3, 4]


def test_refine_negative_rounds():
    with pytest.raises(InputError):
        wl_refine([triangle()], -1)


seeds = st.integers(0, 2**32 - 1)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_refinement_never_merges(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, rng.integers(1, 10), connected=False)
    c = Coloring.initial([g])
    for _ in range(g.num_nodes + 1):
        nxt = wl_refine_step([g], c)
        for u in range(g.num_nodes):
            for v in range(g.num_nodes):
                if c.colors[0][u] != c.colors[0][v]:
                    assert nxt.colors[0][u] != nxt.colors[0][v]
        c = nxt


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_stabilises_within_n_rounds(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, rng.integers(1, 10), connected=False)
    classes = [len(set(wl_refine([g], r).colors[0])) for r in range(g.num_nodes + 2)]
    assert classes[g.num_nodes] == classes[g.num_nodes + 1]


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_isomorphic_copies_possibly_isomorphic(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, rng.integers(1, 10))
    h = g.permute(rng.permutation(g.num_nodes))
    for rounds in (0, 1, 3, g.num_nodes):
        assert wl_test(g, h, rounds).verdict is Verdict.POSSIBLY_ISOMORPHIC


@given(seeds, seeds)
@settings(max_examples=40, deadline=None)
def test_wl_test_symmetric(s1, s2):
    r1, r2 = np.random.default_rng(s1), np.random.default_rng(s2)
    g = random_graph(r1, r1.integers(1, 8), num_labels=2)
    h = random_graph(r2, r2.integers(1, 8), num_labels=2)
    a, b = wl_test(g, h, 6), wl_test(h, g, 6)
    assert (a.verdict, a.round) == (b.verdict, b.round)


def test_alphabet_injective():
    c = wl_refine(list(wl_pair()), 3)
    assert len(set(c.alphabet.values())) == len(c.alphabet)
