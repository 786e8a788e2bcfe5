from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import random_bounded_degree, two_adjacent_k5
from perturbed.decomposition import (
    DenseClass,
    Decomposition,
    decompose,
    decomposition_from_json,
    decomposition_to_json,
    minimally_dense_sets,
    verify,
)
from perturbed.canon import canonical_form
from perturbed.density import gamma, is_minimally_dense
from perturbed.graph_core import Graph, complete_graph, cycle_graph
from perturbed.targets import parse_target, realize


def test_k5_factor_n15():
    dec = decompose(realize(parse_target("factor:K5", 15)), 5, 1.0)
    assert dec.f_prime == ()
    assert len(dec.classes) == 1 and len(dec.classes[0].members) == 3 and dec.classes[0].s_h == 5
    assert verify(dec).ok


def test_cycle_has_no_spots():
    dec = decompose(cycle_graph(20), 5, 0.1)
    assert dec.classes == () and dec.f_prime == tuple(range(20))
    assert verify(dec).ok


def test_adjacent_k5s_split():
    dec = decompose(two_adjacent_k5(), 5, 1.0)
    assert len(dec.classes) == 2
    assert verify(dec).ok


def test_p4_budget_error():
    with pytest.raises(ValueError, match="P4"):
        decompose(realize(parse_target("factor:K5", 15)), 5, 0.2)


def test_degree_precondition():
    with pytest.raises(ValueError):
        decompose(complete_graph(7), 5, 0.5)


@pytest.mark.parametrize("n", [15, 25, 50])
def test_k5_factors_verify(n):
    dec = decompose(realize(parse_target("factor:K5", n)), 5, 0.4 if n == 15 else 0.2)
    rep = verify(dec)
    assert rep.ok, rep.failed()
    assert sum(len(c.members) for c in dec.classes) == n // 5


def test_random_corpus_verifies():
    for seed in range(20):
        g = random_bounded_degree(random.Random(seed).randint(20, 60), 5, seed)
        dec = decompose(g, 5, 0.5)
        rep = verify(dec)
        assert rep.ok, (seed, rep.failed())
        assert dec.f_prime == () or len(dec.f_prime) < 3 or gamma(g.induced(list(dec.f_prime))) <= 3


def test_constructed_p2_violation():
    f = Graph(8, [(a, b) for a in range(4) for b in range(a + 1, 4)])
    dec = Decomposition(f, tuple(range(4, 8)), (DenseClass(canonical_form(complete_graph(4)), ((0, 1, 2, 3),), 4),), 5, 1.0)
    assert verify(dec).failed() == ["P2"]


def test_constructed_p5_violation():
    f = two_adjacent_k5()
    iso = canonical_form(complete_graph(5))
    dec = Decomposition(f, (), (DenseClass(iso, ((0, 1, 2, 3, 4), (5, 6, 7, 8, 9)), 5),), 5, 1.0)
    rep = verify(dec)
    assert rep.failed() == ["P5"]
    assert "adjacent" in rep.p5.detail


def test_constructed_p4_and_p3_violations():
    f = realize(parse_target("factor:K5", 15))
    iso = canonical_form(complete_graph(5))
    dec = Decomposition(f, (), (DenseClass(iso, ((0, 1, 2, 3, 4), (5, 6, 7, 8, 9), (10, 11, 12, 13, 14)), 5),), 5, 0.5)
    assert verify(dec).failed() == ["P4"]
    # a K5 spot placed in a class whose type is a different dense graph
    wheel = Graph(5, [(0, i) for i in range(1, 5)] + [(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)])
    dec = Decomposition(f, tuple(range(5, 15)), (DenseClass(canonical_form(wheel), ((0, 1, 2, 3, 4),), 5),), 5, 1.0)
    assert "P3" in verify(dec).failed()


def test_partition_violation():
    f = realize(parse_target("factor:K5", 10))
    iso = canonical_form(complete_graph(5))
    dec = Decomposition(f, (0, 5, 6, 7, 8), (DenseClass(iso, ((0, 1, 2, 3, 4),), 5),), 5, 1.0)
    assert "PARTITION" in verify(dec).failed()


def test_json_round_trip():
    dec = decompose(two_adjacent_k5(), 5, 1.0)
    text = decomposition_to_json(dec)
    doc = json.loads(text)
    assert doc["ok"] and set(doc["verdicts"]) == {"PARTITION", "P1", "P2", "P3", "P4", "P5"}
    back = decomposition_from_json(text)
    assert back.classes == dec.classes and back.f_prime == dec.f_prime
    assert decomposition_to_json(back) == text


def test_decompose_deterministic():
    g = random_bounded_degree(40, 5, 3)
    assert decompose(g, 5, 0.5) == decompose(g, 5, 0.5)


@st.composite
def bounded_graphs(draw):
    n = draw(st.integers(3, 10))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    es = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=25))
    deg = [0] * n
    keep = []
    for a, b in es:
        if deg[a] < 4 and deg[b] < 4:
            keep.append((a, b))
            deg[a] += 1
            deg[b] += 1
    return Graph(n, keep)


@given(bounded_graphs())
@settings(max_examples=60, deadline=None)
def test_minimally_dense_sets_match_brute_force(g):
    from itertools import combinations

    found = set(minimally_dense_sets(g, 4))
    brute = set()
    for r in range(3, g.n + 1):
        for s in combinations(range(g.n), r):
            if is_minimally_dense(g.induced(list(s)), 4):
                brute.add(s)
    assert found == brute


@given(bounded_graphs())
@settings(max_examples=60, deadline=None)
def test_decompose_always_verifies(g):
    assert verify(decompose(g, 4, 1.0)).ok
