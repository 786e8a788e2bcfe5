"""Good decompositions of bounded-degree targets into a sparse remainder and
classes of isomorphic, pairwise remote, minimally dense spots.

Properties checked by :func:`verify`:

* P1  the remainder F' is sparse, gamma(F') <= (delta+1)/2;
* P2  every spot is minimally dense;
* P3  all spots of a class are isomorphic;
* P4  each class covers at most ``epsilon_op * n`` vertices;
* P5  spots of one class are non-adjacent and share no neighbours.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import networkx as nx
import numpy as np

from .canon import canonical_form
from .density import (
    _closure,
    connected_triples,
    dense_threshold,
    is_dense,
    is_minimally_dense,
    subset_edge_counts,
)
from .graph_core import Graph

__all__ = [
    "DenseClass",
    "Decomposition",
    "PropertyCheck",
    "DecompositionReport",
    "decompose",
    "verify",
    "minimally_dense_sets",
    "decomposition_to_json",
    "decomposition_from_json",
]


@dataclass(frozen=True)
class DenseClass:
    iso_type: tuple  # canonical form (s_h, sorted edges)
    members: tuple[tuple[int, ...], ...]
    s_h: int

    def iso_graph(self) -> Graph:
        return Graph(self.iso_type[0], self.iso_type[1])


@dataclass(frozen=True)
class Decomposition:
    target: Graph
    f_prime: tuple[int, ...]
    classes: tuple[DenseClass, ...]
    delta: int
    epsilon_op: float

    @property
    def k(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class PropertyCheck:
    passed: bool
    detail: str = ""
    witness: tuple = ()


@dataclass(frozen=True)
class DecompositionReport:
    partition: PropertyCheck
    p1: PropertyCheck
    p2: PropertyCheck
    p3: PropertyCheck
    p4: PropertyCheck
    p5: PropertyCheck

    @property
    def ok(self) -> bool:
        return all(c.passed for c in (self.partition, self.p1, self.p2, self.p3, self.p4, self.p5))

    def failed(self) -> list[str]:
        names = ("partition", "p1", "p2", "p3", "p4", "p5")
        return [nm.upper() for nm in names if not getattr(self, nm).passed]

    def to_dict(self) -> dict:
        return {
            nm.upper(): {"passed": c.passed, "detail": c.detail}
            for nm, c in (
                ("partition", self.partition),
                ("p1", self.p1),
                ("p2", self.p2),
                ("p3", self.p3),
                ("p4", self.p4),
                ("p5", self.p5),
            )
        }


# --------------------------------------------------------------------------
# search


def _ball(g: Graph, seed, radius: int, alive: set[int]) -> list[int]:
    seen = set(seed)
    frontier = list(seed)
    for _ in range(radius):
        nxt = []
        for v in frontier:
            for w in g.adj[v]:
                if w in alive and w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return sorted(seen)


def _dense_subsets(g: Graph, region: list[int], delta: int) -> list[tuple[int, ...]]:
    """Minimally dense vertex sets inside ``region`` (as sorted tuples)."""
    sub = g.induced(region)
    counts, sizes = subset_edge_counts(sub)
    thr = dense_threshold(delta)
    c64, s64 = counts.astype(np.int64), sizes.astype(np.int64)
    dense = (s64 >= 3) & (c64 * thr.denominator > thr.numerator * (s64 - 2))
    # below[m]: some subset of m (m included) is dense
    k = len(region)
    below = dense.copy()
    idx = np.arange(1 << k)
    for i in range(k):
        hi = (idx >> i & 1).astype(bool)
        below[hi] |= below[idx[hi] ^ (1 << i)]
    proper = np.zeros_like(dense)
    for i in range(k):
        hi = (idx >> i & 1).astype(bool)
        proper[hi] |= below[idx[hi] ^ (1 << i)]
    out = []
    for mask in np.flatnonzero(dense & ~proper).tolist():
        out.append(tuple(region[i] for i in range(k) if mask >> i & 1))
    return out


def minimally_dense_sets(g: Graph, delta: int, within=None) -> list[tuple[int, ...]]:
    """All minimally dense vertex sets of ``g[within]``, sorted by (size, lex).

    Every minimally dense set is connected and contains a path on three
    vertices; the minimal maximiser of ``b*e(S) - a*|S|`` over sets containing
    that path contains it, so enumerating inside those regions finds them all.
    """
    if g.max_degree() > delta and within is None:
        raise ValueError(f"max degree {g.max_degree()} exceeds delta={delta}")
    alive = set(range(g.n)) if within is None else set(within)
    thr = dense_threshold(delta)
    a, b = thr.numerator, thr.denominator
    found = set()
    for triple in connected_triples(g, alive):
        ball = _ball(g, triple, 2 * delta, alive)
        value, region = _closure(g, ball, a, b, triple)
        if value <= -2 * a:
            continue
        if len(region) > 20:
            raise RuntimeError(f"dense region of {len(region)} vertices; is delta={delta} an upper bound on degrees?")
        found.update(_dense_subsets(g, region, delta))
    return sorted(found, key=lambda s: (len(s), s))


def decompose(f: Graph, delta: int, epsilon_op: float) -> Decomposition:
    if f.max_degree() > delta:
        raise ValueError(f"target max degree {f.max_degree()} exceeds delta={delta}")
    if not (0 < epsilon_op <= 1):
        raise ValueError(f"epsilon_op must lie in (0, 1], got {epsilon_op}")
    n = f.n
    taken: set[int] = set()
    spots = []
    for s in minimally_dense_sets(f, delta):
        if taken.isdisjoint(s):
            spots.append(s)
            taken.update(s)
    by_type: dict[tuple, list[tuple[int, ...]]] = {}
    for s in spots:
        by_type.setdefault(canonical_form(f.induced(s)), []).append(s)
    cap = epsilon_op * n + 1e-9
    classes = []
    for iso in sorted(by_type, key=lambda t: (t[0], t[1])):
        s_h = iso[0]
        if s_h > cap:
            raise ValueError(
                f"P4 budget: a single spot of {s_h} vertices exceeds epsilon_op*n = {epsilon_op * n:g}"
            )
        groups: list[list[tuple[int, ...]]] = []
        reach: list[set[int]] = []  # closed neighbourhoods of members per group
        for s in sorted(by_type[iso]):
            closed = set(s)
            for v in s:
                closed.update(f.adj[v])
            for grp, cover in zip(groups, reach):
                if (len(grp) + 1) * s_h <= cap and cover.isdisjoint(closed):
                    grp.append(s)
                    cover.update(closed)
                    break
            else:
                groups.append([s])
                reach.append(set(closed))
        for grp in groups:
            classes.append(DenseClass(iso, tuple(grp), s_h))
    f_prime = tuple(v for v in range(n) if v not in taken)
    return Decomposition(f, f_prime, tuple(classes), delta, epsilon_op)


# --------------------------------------------------------------------------
# verification


def _nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def verify(dec: Decomposition) -> DecompositionReport:
    f, n, delta = dec.target, dec.target.n, dec.delta
    # partition
    seen: dict[int, str] = {}
    part = PropertyCheck(True)
    owners = [("F'", v) for v in dec.f_prime]
    for ci, c in enumerate(dec.classes):
        for mi, s in enumerate(c.members):
            owners.extend((f"S{ci}.{mi}", v) for v in s)
    for tag, v in owners:
        if not (0 <= v < n):
            part = PropertyCheck(False, f"vertex {v} out of range", (tag, v))
            break
        if v in seen:
            part = PropertyCheck(False, f"vertex {v} in both {seen[v]} and {tag}", (v,))
            break
        seen[v] = tag
    if part.passed and len(seen) != n:
        missing = sorted(set(range(n)) - set(seen))
        part = PropertyCheck(False, f"{len(missing)} vertices uncovered", tuple(missing[:5]))

    # P1
    if len(dec.f_prime) >= 3 and is_dense(f.induced(list(dec.f_prime)), delta):
        p1 = PropertyCheck(False, "F' contains a dense subgraph")
    else:
        p1 = PropertyCheck(True)

    # P2
    p2 = PropertyCheck(True)
    for ci, c in enumerate(dec.classes):
        for s in c.members:
            if len(s) < 3 or not is_minimally_dense(f.induced(list(s)), delta):
                p2 = PropertyCheck(False, f"class {ci} member {list(s)} is not minimally dense", tuple(s))
                break
        if not p2.passed:
            break

    # P3, checked with networkx rather than the canonical form
    p3 = PropertyCheck(True)
    for ci, c in enumerate(dec.classes):
        ref = _nx(c.iso_graph())
        for s in c.members:
            if len(s) != c.s_h or not nx.is_isomorphic(ref, _nx(f.induced(list(s)))):
                p3 = PropertyCheck(False, f"class {ci} member {list(s)} not isomorphic to the class type", tuple(s))
                break
        if not p3.passed:
            break

    # P4
    p4 = PropertyCheck(True)
    for ci, c in enumerate(dec.classes):
        size = sum(len(s) for s in c.members)
        if size > dec.epsilon_op * n + 1e-9:
            p4 = PropertyCheck(False, f"class {ci} covers {size} > {dec.epsilon_op * n:g} vertices", (ci,))
            break

    # P5
    p5 = PropertyCheck(True)
    for ci, c in enumerate(dec.classes):
        for s, t in combinations(c.members, 2):
            ss, tt = set(s), set(t)
            nb_s = set().union(*(f.adj[v] for v in s))
            nb_t = set().union(*(f.adj[v] for v in t))
            if ss & tt:
                why = "overlap"
            elif nb_s & tt:
                why = "adjacent"
            elif (nb_s - ss) & (nb_t - tt):
                why = "common neighbour"
            else:
                continue
            p5 = PropertyCheck(False, f"class {ci}: members {list(s)} and {list(t)} {why}", (ci, s, t))
            break
        if not p5.passed:
            break
    return DecompositionReport(part, p1, p2, p3, p4, p5)


# --------------------------------------------------------------------------
# JSON


def decomposition_to_json(dec: Decomposition, report: DecompositionReport | None = None) -> str:
    report = report if report is not None else verify(dec)
    doc = {
        "n": dec.target.n,
        "delta": dec.delta,
        "epsilon_op": dec.epsilon_op,
        "target_edges": [list(e) for e in dec.target.sorted_edges()],
        "f_prime": list(dec.f_prime),
        "classes": [
            {
                "s_h": c.s_h,
                "iso_type": {"n": c.iso_type[0], "edges": [list(e) for e in c.iso_type[1]]},
                "members": [list(s) for s in c.members],
            }
            for c in dec.classes
        ],
        "verdicts": report.to_dict(),
        "ok": report.ok,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def decomposition_from_json(text: str) -> Decomposition:
    doc = json.loads(text)
    f = Graph(doc["n"], [tuple(e) for e in doc["target_edges"]])
    classes = tuple(
        DenseClass(
            (c["iso_type"]["n"], tuple(tuple(e) for e in c["iso_type"]["edges"])),
            tuple(tuple(s) for s in c["members"]),
            c["s_h"],
        )
        for c in doc["classes"]
    )
    return Decomposition(f, tuple(doc["f_prime"]), classes, doc["delta"], doc["epsilon_op"])
