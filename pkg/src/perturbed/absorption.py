"""Reservoir sets, the doubled auxiliary graph and the switching map.

A copy F-hat of the almost-spanning structure sits in the host. A vertex w of
a 2-independent set W may be traded for an unused vertex u whenever every
F-hat neighbour of w is a G_alpha neighbour of u; those w form R(u). The
auxiliary graph on 2n vertices lets a completion search choose such trades
implicitly: vertex ``w + n`` stands for "the slot of w, moved elsewhere".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .graph_core import Embedding, Graph, image_graph, union

__all__ = [
    "ReservoirFamily",
    "AuxiliaryInstance",
    "SwitchPlan",
    "build_reservoirs",
    "switch_one",
    "switch_many",
    "build_auxiliary",
    "resolve_switching",
    "adjacency_matrix",
]


def adjacency_matrix(g: Graph) -> np.ndarray:
    a = np.zeros((g.n, g.n), dtype=bool)
    if g.edges:
        e = np.array(sorted(g.edges), dtype=np.int64)
        a[e[:, 0], e[:, 1]] = True
        a[e[:, 1], e[:, 0]] = True
    return a


def _preimage(fhat: Embedding) -> dict[int, int]:
    return {x: v for v, x in enumerate(fhat.map) if x is not None}


def _fhat_neighbours(fhat: Embedding, v: int) -> list[int]:
    return [fhat.map[a] for a in fhat.target.neighbors(v) if fhat.map[a] is not None]


@dataclass(frozen=True)
class ReservoirFamily:
    host_alpha: Graph
    fhat: Embedding
    wstar: tuple[int, ...]
    W: frozenset[int]
    R: tuple[frozenset[int], ...]

    def matrix(self) -> np.ndarray:
        """Boolean ``n x n`` matrix with ``M[u, w]`` iff ``w`` in ``R(u)``."""
        m = np.zeros((self.host_alpha.n, self.host_alpha.n), dtype=bool)
        for u, r in enumerate(self.R):
            if r:
                m[u, sorted(r)] = True
        return m


def _check_wstar(f: Graph, fhat: Embedding, wstar) -> None:
    ws = sorted(set(wstar))
    for v in ws:
        if fhat.map[v] is None:
            raise ValueError(f"W* vertex {v} is not embedded")
        for a in f.adj[v]:
            if fhat.map[a] is None:
                raise ValueError(f"W* vertex {v} has neighbour {a} outside the embedded part")
    owner: dict[int, int] = {}
    for v in ws:
        for a in (v, *f.adj[v]):
            if a in owner:
                raise ValueError(f"W* not 2-independent: {owner[a]} and {v} meet at {a}")
        owner[v] = v
        for a in f.adj[v]:
            owner[a] = v


def build_reservoirs(host_alpha: Graph, fhat: Embedding, wstar) -> ReservoirFamily:
    """``R(u) = {w in W : N_Fhat(w) subset of N_{G_alpha}(u)}`` for every host vertex."""
    if fhat.host.n != host_alpha.n:
        raise ValueError("F-hat host and G_alpha differ in vertex count")
    _check_wstar(fhat.target, fhat, wstar)
    n = host_alpha.n
    adj = adjacency_matrix(host_alpha)
    members = np.zeros((n, n), dtype=bool)
    W = []
    for v in sorted(set(wstar)):
        w = fhat.map[v]
        W.append(w)
        nb = _fhat_neighbours(fhat, v)
        members[:, w] = adj[:, nb].all(axis=1) if nb else True
    R = tuple(frozenset(np.flatnonzero(members[u]).tolist()) for u in range(n))
    return ReservoirFamily(host_alpha, fhat, tuple(sorted(set(wstar))), frozenset(W), R)


def _switched_host(host_alpha: Graph, fhat: Embedding) -> Graph:
    return union(host_alpha, image_graph(fhat, host_alpha.n))


def switch_many(fhat: Embedding, host_alpha: Graph, res: ReservoirFamily, pairs) -> Embedding:
    """Apply the trades ``(u, w)`` simultaneously: the preimage of w moves to u."""
    pre = _preimage(fhat)
    us = [u for u, _ in pairs]
    ws = [w for _, w in pairs]
    if len(set(us)) != len(us) or len(set(ws)) != len(ws):
        raise ValueError("switch pairs must use distinct u and distinct w")
    new = list(fhat.map)
    for u, w in pairs:
        if u in pre:
            raise ValueError(f"vertex {u} is already used by F-hat")
        if w not in res.R[u]:
            raise ValueError(f"{w} is not in R({u})")
        new[pre[w]] = u
    return Embedding(fhat.target, _switched_host(host_alpha, fhat), tuple(new))


def switch_one(fhat: Embedding, host_alpha: Graph, res: ReservoirFamily, u: int, w: int) -> Embedding:
    return switch_many(fhat, host_alpha, res, [(u, w)])


# --------------------------------------------------------------------------
# auxiliary instance


@dataclass(frozen=True)
class AuxiliaryInstance:
    n: int
    host_alpha: Graph
    g_aux: Graph
    unembedded: tuple[int, ...]
    z_labels: dict
    b_sets: dict

    def b_array(self, v: int) -> np.ndarray:
        return np.array(sorted(self.b_sets[v]), dtype=np.int64)


def build_auxiliary(host_alpha: Graph, fhat: Embedding, res: ReservoirFamily, unembedded) -> AuxiliaryInstance:
    n = host_alpha.n
    unembedded = tuple(sorted(unembedded))
    used = fhat.image()
    free = [x for x in range(n) if x not in used]
    if len(free) != len(unembedded):
        raise ValueError(f"{len(unembedded)} unembedded target vertices but {len(free)} free host vertices")
    for v in unembedded:
        if fhat.map[v] is not None:
            raise ValueError(f"target vertex {v} is already embedded")
    es = set(image_graph(fhat, 2 * n).edges)
    for u, w in host_alpha.edges:
        es.add((w, u + n))
        es.add((u, w + n))
        es.add((u + n, w + n))
    z = {v: x for v, x in zip(unembedded, free)}
    b = {v: frozenset(w + n for w in res.R[z[v]]) for v in unembedded}
    return AuxiliaryInstance(n, host_alpha, Graph(2 * n, es), unembedded, z, b)


@dataclass(frozen=True)
class SwitchPlan:
    g_prime: Embedding
    z0: tuple[int, ...]
    z1: tuple[int, ...]
    cases: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "Z0": list(self.z0),
            "Z1": list(self.z1),
            "g_prime": list(self.g_prime.map),
            "cases": {str(v): tag for v, tag in sorted(self.cases.items())},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def resolve_switching(
    aux: AuxiliaryInstance, g_prime: Embedding, fhat: Embedding, host: Graph | None = None
) -> tuple[Embedding, SwitchPlan]:
    """Turn an embedding into the auxiliary graph into one into ``[n]``.

    Unembedded vertices placed on shadows drop to the original vertex; the
    F-hat vertex displaced there moves to the unembedded vertex's z-label.
    """
    n = aux.n
    f = g_prime.target
    if not g_prime.is_total():
        raise ValueError("g' must be total")
    for v, x in enumerate(fhat.map):
        if x is not None and g_prime.map[v] != x:
            raise ValueError(f"g' does not extend F-hat at vertex {v}")
    z0 = tuple(v for v in aux.unembedded)
    for v in z0:
        if g_prime.map[v] not in aux.b_sets[v]:
            raise ValueError(f"g'({v}) = {g_prime.map[v]} is outside B({v})")
    where = {x: v for v, x in enumerate(g_prime.map)}
    displaced = {}
    for u in z0:
        x = where.get(g_prime.map[u] - n)
        if x is not None:
            displaced[x] = u
    z1 = tuple(sorted(displaced))
    bad = [(x, y) for x in z1 for y in f.adj[x] if y in displaced or y in aux.b_sets]
    if bad:
        raise RuntimeError(f"switching claim violated: F-edge {bad[0]} joins Z1 to Z0 or Z1")
    g = list(g_prime.map)
    cases = {}
    for v in z0:
        g[v] = g_prime.map[v] - n
        cases[v] = "drop"
    for x, u in displaced.items():
        g[x] = aux.z_labels[u]
        cases[x] = "swap"
    if host is None:
        host = _switched_host(aux.host_alpha, fhat)
    return Embedding(f, host, tuple(g)), SwitchPlan(g_prime, z0, z1, cases)
