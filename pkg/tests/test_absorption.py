from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import random_instance
from perturbed.absorption import (
    build_auxiliary,
    build_reservoirs,
    resolve_switching,
    switch_many,
    switch_one,
)
from perturbed.graph_core import (
    Embedding,
    Graph,
    check_partial,
    complete_graph,
    cycle_graph,
    is_embedding,
    union,
)

MATCHING6 = [(0, 1), (2, 3), (4, 5)]


def matching_fhat(n: int) -> Embedding:
    f = Graph(n, MATCHING6)
    mp = tuple(list(range(6)) + [None] * (n - 6))
    return Embedding(f, Graph(n, MATCHING6), mp)


def c6_plus_vertex() -> Graph:
    return Graph(7, [(i, (i + 1) % 6) for i in range(6)] + [(6, 1), (6, 5)])


def brute_reservoirs(host: Graph, fhat: Embedding, wstar) -> list[set[int]]:
    out = []
    for u in range(host.n):
        r = set()
        for v in wstar:
            w = fhat.map[v]
            if all(host.has_edge(u, fhat.map[a]) for a in fhat.target.adj[v]):
                r.add(w)
        out.append(r)
    return out


# -- reservoirs ------------------------------------------------------------


def test_complete_host_reservoirs():
    fhat = matching_fhat(6)
    res = build_reservoirs(complete_graph(6), fhat, [0, 2, 4])
    # no loops: w is excluded from R(u) when u is w's own partner
    assert res.R[0] == {0, 2, 4}
    assert res.R[1] == {2, 4}
    for u in range(6):
        assert res.R[u] == {w for w in (0, 2, 4) if w + 1 != u}


def test_c6_reservoir():
    fhat = matching_fhat(6)
    res = build_reservoirs(cycle_graph(6), fhat, [0, 2, 4])
    assert res.R[0] == {0, 4}
    assert res.W == {0, 2, 4}
    assert res.matrix()[0].tolist() == [True, False, False, False, True, False]


def test_empty_host_reservoirs():
    f = Graph(6, [(0, 1)])
    fhat = Embedding(f, Graph(6, [(0, 1)]), (0, 1, 2, 3, 4, 5))
    res = build_reservoirs(Graph(6), fhat, [0, 2, 4])
    assert all(r == {2, 4} for r in res.R)  # only isolated w qualify


def test_reservoir_rejects_bad_wstar():
    fhat = matching_fhat(6)
    with pytest.raises(ValueError, match="2-independent"):
        build_reservoirs(complete_graph(6), fhat, [0, 1])
    fhat7 = Embedding(Graph(7, MATCHING6 + [(4, 6)]), Graph(7, MATCHING6), (0, 1, 2, 3, 4, 5, None))
    with pytest.raises(ValueError, match="outside"):
        build_reservoirs(complete_graph(7), fhat7, [4])


@pytest.mark.parametrize("seed", range(40))
def test_reservoirs_match_brute_force(seed):
    host, fhat, wstar = random_instance(seed)
    res = build_reservoirs(host, fhat, wstar)
    assert [set(r) for r in res.R] == brute_reservoirs(host, fhat, wstar)


# -- switching -------------------------------------------------------------


def test_switch_examples():
    fhat = Embedding(Graph(7, MATCHING6), Graph(7, MATCHING6), (0, 1, 2, 3, 4, 5, None))
    res = build_reservoirs(complete_graph(7), fhat, [0, 2, 4])
    out = switch_one(fhat, complete_graph(7), res, 6, 0)
    assert out.map[:6] == (6, 1, 2, 3, 4, 5)
    assert check_partial(out)

    host = c6_plus_vertex()
    res = build_reservoirs(host, fhat, [0, 2, 4])
    assert res.R[6] == {0, 4}
    assert check_partial(switch_one(fhat, host, res, 6, 0))
    with pytest.raises(ValueError):
        switch_one(fhat, host, res, 6, 2)
    with pytest.raises(ValueError, match="already used"):
        switch_one(fhat, host, res, 1, 0)


@given(st.integers(0, 10**6), st.data())
@settings(max_examples=150, deadline=None)
def test_simultaneous_switches_valid(seed, data):
    host, fhat, wstar = random_instance(seed)
    res = build_reservoirs(host, fhat, wstar)
    used = fhat.image()
    free = [u for u in range(host.n) if u not in used]
    pairs, taken = [], set()
    for u in data.draw(st.permutations(free)):
        opts = sorted(res.R[u] - taken)
        if opts:
            w = data.draw(st.sampled_from(opts))
            pairs.append((u, w))
            taken.add(w)
    out = switch_many(fhat, host, res, pairs)
    assert check_partial(out)
    assert out.host.edges >= host.edges


# -- auxiliary instance ----------------------------------------------------


def test_auxiliary_three_edge_rule():
    f = Graph(3)
    fhat = Embedding(f, Graph(3), (None, None, None))
    host = Graph(3, [(0, 1)])
    res = build_reservoirs(host, fhat, [])
    aux = build_auxiliary(host, fhat, res, [0, 1, 2])
    assert aux.g_aux.n == 6
    assert aux.g_aux.sorted_edges() == [(0, 4), (1, 3), (3, 4)]


def test_auxiliary_empty_host_keeps_fhat_edges():
    fhat = Embedding(Graph(7, MATCHING6), Graph(7, MATCHING6), (0, 1, 2, 3, 4, 5, None))
    res = build_reservoirs(Graph(7), fhat, [0, 2, 4])
    aux = build_auxiliary(Graph(7), fhat, res, [6])
    assert aux.g_aux.edges == frozenset(MATCHING6)


def test_auxiliary_b_sets_and_labels():
    fhat = Embedding(Graph(7, MATCHING6), Graph(7, MATCHING6), (0, 1, 2, 3, 4, 5, None))
    host = c6_plus_vertex()
    res = build_reservoirs(host, fhat, [0, 2, 4])
    aux = build_auxiliary(host, fhat, res, [6])
    assert aux.z_labels == {6: 6}
    assert aux.b_sets[6] == {7, 11}
    assert aux.b_array(6).tolist() == [7, 11]
    with pytest.raises(ValueError, match="free host"):
        build_auxiliary(host, fhat, res, [])


# -- resolving the switching map ---------------------------------------------


def _n7_instance(extra_edges=()):
    f = Graph(7, MATCHING6 + list(extra_edges))
    fhat = Embedding(f, Graph(7, MATCHING6), (0, 1, 2, 3, 4, 5, None))
    host = c6_plus_vertex()
    res = build_reservoirs(host, fhat, [0, 2, 4])
    aux = build_auxiliary(host, fhat, res, [6])
    return f, fhat, host, aux


def test_resolve_collision_case():
    f, fhat, host, aux = _n7_instance()
    gp = Embedding(f, aux.g_aux, (0, 1, 2, 3, 4, 5, 7))
    g, plan = resolve_switching(aux, gp, fhat)
    assert g.map == (6, 1, 2, 3, 4, 5, 0)
    assert plan.z0 == (6,) and plan.z1 == (0,)
    assert plan.cases == {6: "drop", 0: "swap"}
    assert is_embedding(g)
    doc = json.loads(plan.to_json())
    assert doc["Z0"] == [6] and doc["Z1"] == [0] and doc["cases"] == {"0": "swap", "6": "drop"}


def test_resolve_no_switches():
    # nothing unembedded: g equals g'
    f = Graph(6, MATCHING6)
    fhat = Embedding(f, Graph(6, MATCHING6), tuple(range(6)))
    res = build_reservoirs(cycle_graph(6), fhat, [0, 2, 4])
    aux = build_auxiliary(cycle_graph(6), fhat, res, [])
    g, plan = resolve_switching(aux, Embedding(f, aux.g_aux, tuple(range(6))), fhat)
    assert g.map == tuple(range(6)) and plan.z0 == () and plan.z1 == ()


def test_resolve_single_switch_without_collision():
    # vertex 6 of F lands on the shadow of a free host vertex... build n=8 with two free
    f = Graph(8, MATCHING6)
    fhat = Embedding(f, Graph(8, MATCHING6), (0, 1, 2, 3, 4, 5, None, None))
    host = union(Graph(8, [(i, (i + 1) % 6) for i in range(6)]), Graph(8, [(6, 1), (6, 5), (7, 1)]))
    res = build_reservoirs(host, fhat, [0, 2, 4])
    aux = build_auxiliary(host, fhat, res, [6, 7])
    assert aux.b_sets[6] == {8, 12} and aux.b_sets[7] == {8}
    gp = Embedding(f, aux.g_aux, (0, 1, 2, 3, 4, 5, 12, 8))
    g, plan = resolve_switching(aux, gp, fhat)
    assert sorted(g.map) == list(range(8))
    assert is_embedding(g)


def test_resolve_rejects_outside_b_and_structural_violation():
    f, fhat, host, aux = _n7_instance()
    with pytest.raises(ValueError, match="outside B"):
        resolve_switching(aux, Embedding(f, aux.g_aux, (0, 1, 2, 3, 4, 5, 9)), fhat)
    f2 = Graph(7, MATCHING6 + [(0, 6)])
    with pytest.raises(RuntimeError, match="switching claim"):
        resolve_switching(aux, Embedding(f2, aux.g_aux, (0, 1, 2, 3, 4, 5, 7)), fhat)
