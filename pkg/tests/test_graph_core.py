from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturbed.graph_core import (
    Embedding,
    Graph,
    HostSpec,
    check_partial,
    complete_graph,
    cycle_graph,
    derive_seed,
    format_edge_list,
    gnp_sample,
    image_graph,
    is_embedding,
    make_host,
    min_degree,
    parse_edge_list,
    union,
)


@st.composite
def graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph(n, chosen)


# -- Graph invariants ------------------------------------------------------


def test_graph_rejects_loops_and_out_of_range():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 3)])


def test_graph_normalises_duplicates():
    g = Graph(3, [(0, 1), (1, 0), (0, 1)])
    assert g.num_edges == 1


@given(graphs())
def test_adjacency_symmetric_and_degree_sum(g):
    for a in range(g.n):
        for b in g.adj[a]:
            assert a in g.adj[b]
    assert sum(g.degrees()) == 2 * g.num_edges


# -- gnp_sample ------------------------------------------------------------


def test_gnp_extremes():
    assert gnp_sample(5, 0.0, 1).num_edges == 0
    assert gnp_sample(5, 1.0, 1) == complete_graph(5)


def test_gnp_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gnp_sample(5, 1.5, 0)
    with pytest.raises(ValueError):
        gnp_sample(0, 0.5, 0)


def test_gnp_mean_edge_count():
    # binomial oracle: C(200,2)=19900 pairs, p=0.1
    counts = np.array([gnp_sample(200, 0.1, s).num_edges for s in range(500)])
    mean, var = 0.1 * 19900, 19900 * 0.1 * 0.9
    se = math.sqrt(var / len(counts))
    assert abs(counts.mean() - mean) < 3 * se


def test_gnp_pair_marginals_uniform():
    # every pair should appear with probability p; check the first and last pair
    n, p, reps = 12, 0.3, 3000
    first = sum(gnp_sample(n, p, s).has_edge(0, 1) for s in range(reps))
    last = sum(gnp_sample(n, p, s).has_edge(n - 2, n - 1) for s in range(reps))
    se = math.sqrt(p * (1 - p) / reps)
    assert abs(first / reps - p) < 4 * se
    assert abs(last / reps - p) < 4 * se


@given(st.integers(1, 40), st.floats(0, 1), st.integers(0, 2**32))
@settings(max_examples=50)
def test_gnp_reproducible(n, p, seed):
    assert gnp_sample(n, p, seed) == gnp_sample(n, p, seed)


def test_derive_seed_depends_on_both_arguments():
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert len({derive_seed(1, i) for i in range(100)}) == 100
    assert derive_seed(1, 0) != derive_seed(2, 0)


# -- hosts -----------------------------------------------------------------


def test_complete_bipartite_unbalanced():
    g = make_host(HostSpec("complete-bipartite-unbalanced", 10, 0.2))
    assert g.num_edges == 16
    assert min_degree(g) == 2
    assert all(not g.has_edge(0, 1) for _ in [0])


def test_complete_bipartite_alias():
    assert make_host(HostSpec("complete-bipartite", 10, 0.2)) == make_host(
        HostSpec("complete-bipartite-unbalanced", 10, 0.2)
    )


def test_clique_union_degree_arithmetic():
    with pytest.raises(ValueError):
        make_host(HostSpec("clique-union", 12, 0.25, cliques=4))
    g = make_host(HostSpec("clique-union", 12, 1 / 6, cliques=4))
    assert min_degree(g) == 2
    assert len(g.components()) == 4


def test_random_min_degree():
    for seed in range(5):
        assert min_degree(make_host(HostSpec("random-min-degree", 100, 0.3), seed)) >= 30


def test_unknown_host_and_bad_alpha():
    with pytest.raises(ValueError):
        make_host(HostSpec("star", 5, 0.5))
    with pytest.raises(ValueError):
        make_host(HostSpec("complete", 5, 0.0))
    with pytest.raises(ValueError):
        make_host(HostSpec("complete-bipartite-unbalanced", 10, 0.6))


@given(st.sampled_from(["complete-bipartite-unbalanced", "random-min-degree", "clique-union", "complete"]),
       st.integers(6, 40), st.floats(0.05, 0.5), st.integers(0, 1000))
@settings(max_examples=60, deadline=None)
def test_host_min_degree_property(kind, n, alpha, seed):
    spec = HostSpec(kind, n, alpha)
    try:
        g = make_host(spec, seed)
    except ValueError:
        return  # infeasible combination, reported
    assert min_degree(g) >= spec.required_degree


# -- union and min_degree --------------------------------------------------


def test_union_examples():
    assert union(Graph(5), complete_graph(5)) == complete_graph(5)
    assert union(cycle_graph(5), cycle_graph(5)) == cycle_graph(5)
    assert union(Graph(4, [(0, 1), (2, 3)]), Graph(4, [(1, 2)])).sorted_edges() == [(0, 1), (1, 2), (2, 3)]
    with pytest.raises(ValueError):
        union(Graph(3), Graph(4))


@given(graphs(6), graphs(6), graphs(6))
def test_union_commutative_associative(a, b, c):
    if not (a.n == b.n == c.n):
        return
    assert union(a, b) == union(b, a)
    assert union(union(a, b), c) == union(a, union(b, c))


def test_min_degree_examples():
    assert min_degree(make_host(HostSpec("complete-bipartite-unbalanced", 10, 0.2))) == 2
    assert min_degree(cycle_graph(7)) == 2
    assert min_degree(complete_graph(6)) == 5


# -- embeddings ------------------------------------------------------------


def test_is_embedding_examples():
    c4, k4 = cycle_graph(4), complete_graph(4)
    assert is_embedding(Embedding(c4, k4, (0, 1, 2, 3)))
    assert is_embedding(Embedding(c4, c4, (1, 2, 3, 0)))
    v = is_embedding(Embedding(complete_graph(3), c4, (0, 1, 2)))
    assert not v and v.reason == "missing-edge"


def test_is_embedding_collision_and_partial():
    v = is_embedding(Embedding(Graph(2), Graph(3), (1, 1)))
    assert not v and v.reason == "collision"
    with pytest.raises(ValueError):
        is_embedding(Embedding(Graph(2), Graph(3), (1, None)))


@given(graphs())
def test_identity_embedding_valid(g):
    assert is_embedding(Embedding(g, g, tuple(range(g.n))))


def test_partial_check_and_image():
    e = Embedding(cycle_graph(4), complete_graph(5), (0, 1, None, 3))
    assert check_partial(e)
    assert image_graph(e).sorted_edges() == [(0, 1), (0, 3)]


# -- edge-list format ------------------------------------------------------


@given(graphs())
def test_edge_list_round_trip(g):
    assert parse_edge_list(format_edge_list(g)) == g


@pytest.mark.parametrize("text", ["n 3\n0 0\n", "n 3\n0 1\n0 1\n", "n 3\n2 1\n", "3\n0 1\n"])
def test_edge_list_rejects(text):
    with pytest.raises(ValueError):
        parse_edge_list(text)
