"""Maximum-ratio densities over subgraphs.

Two ratios matter here: the 1-density ``e(S) / (v(S) - 1)`` over subgraphs
with at least two vertices and ``e(S) / (v(S) - 2)`` over subgraphs with at
least three. Both maxima are attained on induced subgraphs, so we only ever
search vertex subsets.

Small graphs (up to ``max_enum`` vertices) are handled by enumerating every
vertex subset with numpy bit tricks. Larger graphs use a parametric max-closure
formulation solved with min cuts, seeded by every edge (1-density) or every
connected triple (the three-vertex offset), which is exact as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .graph_core import Graph

DEFAULT_MAX_ENUM = 22


# --------------------------------------------------------------------------
# exhaustive subset enumeration


def subset_edge_counts(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Edge count and size of the induced subgraph for every vertex bitmask."""
    v = g.n
    if v > 26:
        raise ValueError(f"refusing to enumerate 2^{v} subsets")
    masks = [sum(1 << w for w in g.adj[i]) for i in range(v)]
    counts = np.zeros(1 << v, dtype=np.int32)
    for i in range(v):
        lo = 1 << i
        low = np.arange(lo, dtype=np.int64)
        counts[lo : 2 * lo] = counts[:lo] + np.bitwise_count(low & masks[i])
    sizes = np.bitwise_count(np.arange(1 << v, dtype=np.int64)).astype(np.int32)
    return counts, sizes


def _mask_to_vertices(mask: int) -> tuple[int, ...]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _enum_max_ratio(g: Graph, offset: int) -> tuple[Fraction, tuple[int, ...], int] | None:
    counts, sizes = subset_edge_counts(g)
    ok = sizes >= offset + 1
    if not ok.any():
        return None
    denom = np.where(ok, sizes - offset, 1).astype(np.float64)
    ratio = np.where(ok, counts / denom, -1.0)
    best_mask = int(np.argmax(ratio))
    best = Fraction(int(counts[best_mask]), int(sizes[best_mask]) - offset)
    # exact tie count: e * q == p * (size - offset)
    ties = ok & (counts.astype(np.int64) * best.denominator == best.numerator * (sizes.astype(np.int64) - offset))
    return best, _mask_to_vertices(best_mask), int(ties.sum())


# --------------------------------------------------------------------------
# max-closure via min cut


def _closure(g: Graph, vertices: Sequence[int], a: int, b: int, forced: Iterable[int]) -> tuple[int, list[int]]:
    """Maximise ``b*e(S) - a*|S|`` over ``forced ⊆ S ⊆ vertices``.

    Returns the optimum value and the minimal optimal set.
    """
    vs = list(vertices)
    index = {v: i for i, v in enumerate(vs)}
    es = [(index[x], index[y]) for x in vs for y in g.adj[x] if y in index and x < y]
    m, k = len(es), len(vs)
    src, snk = 0, 1
    enode = 2
    vnode = 2 + m
    inf = b * m + a * k + 1
    rows, cols, caps = [], [], []
    for j, (x, y) in enumerate(es):
        rows += [src, enode + j, enode + j]
        cols += [enode + j, vnode + x, vnode + y]
        caps += [b, inf, inf]
    forced_idx = {index[v] for v in forced}
    for i in range(k):
        rows.append(vnode + i)
        cols.append(snk)
        caps.append(a)
        if i in forced_idx:
            rows.append(src)
            cols.append(vnode + i)
            caps.append(inf)
    size = 2 + m + k
    cap = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(size, size))
    res = maximum_flow(cap, src, snk, method="dinic")
    resid = (cap - res.flow).tocsr()
    resid.data[resid.data < 0] = 0
    resid.eliminate_zeros()
    reach = breadth_first_order(resid, src, directed=True, return_predecessors=False)
    chosen = sorted(vs[i - vnode] for i in reach if i >= vnode)
    value = b * m - int(res.flow_value)
    return value, chosen


def connected_triples(g: Graph, within: set[int] | None = None) -> Iterator[tuple[int, int, int]]:
    """Every vertex set ``{x, c, y}`` spanning a path ``x - c - y``, each once."""
    seen = set()
    for c in range(g.n):
        if within is not None and c not in within:
            continue
        nb = [w for w in g.neighbors(c) if within is None or w in within]
        for x, y in combinations(nb, 2):
            key = tuple(sorted((x, c, y)))
            if key not in seen:
                seen.add(key)
                yield key


def exceeds_ratio(
    g: Graph,
    offset: int,
    threshold: Fraction,
    within: Sequence[int] | None = None,
) -> list[tuple[tuple[int, ...], list[int]]]:
    """Seeds whose closure beats ``threshold`` together with that closure.

    A returned pair ``(seed, region)`` means some vertex set containing the
    seed has ratio strictly above ``threshold``; every vertex set that does
    so and is minimal with that property (among sets containing the seed)
    lies inside ``region``.
    """
    threshold = Fraction(threshold)
    a, b = threshold.numerator, threshold.denominator
    vs = list(range(g.n)) if within is None else sorted(within)
    inside = set(vs)
    if offset == 1:
        seeds = [e for e in g.sorted_edges() if e[0] in inside and e[1] in inside]
    elif offset == 2:
        seeds = list(connected_triples(g, inside))
    else:
        raise ValueError("offset must be 1 or 2")
    hits = []
    for seed in seeds:
        # ratio > a/b  <=>  b*e - a*|S| > -a*offset
        value, region = _closure(g, vs, a, b, seed)
        if value > -a * offset:
            hits.append((seed, region))
    return hits


def _flow_max_ratio(g: Graph, offset: int) -> tuple[Fraction, tuple[int, ...]] | None:
    if offset == 1:
        seeds = g.sorted_edges()
    else:
        seeds = list(connected_triples(g))
    if not seeds:
        return None
    first = seeds[0]
    best_set = tuple(first)
    best = Fraction(g.edges_within(first), len(first) - offset)
    vs = list(range(g.n))
    while True:
        a, b = best.numerator, best.denominator
        improved = None
        for seed in seeds:
            value, region = _closure(g, vs, a, b, seed)
            if value > -a * offset:
                r = Fraction(g.edges_within(region), len(region) - offset)
                if improved is None or r > improved[0]:
                    improved = (r, tuple(region))
        if improved is None or improved[0] <= best:
            return best, best_set
        best, best_set = improved


def max_ratio(g: Graph, offset: int, max_enum: int = DEFAULT_MAX_ENUM) -> tuple[Fraction, tuple[int, ...], str] | None:
    """Maximum of ``e(S) / (|S| - offset)`` over ``|S| > offset``; None if no such S."""
    if g.n < offset + 1:
        return None
    if g.n <= max_enum:
        out = _enum_max_ratio(g, offset)
        return None if out is None else (out[0], out[1], "enumeration")
    out = _flow_max_ratio(g, offset)
    if out is not None:
        return out[0], out[1], "flow"
    # no seed at all: every component has at most one edge (offset 2) or no edges
    if offset == 1:
        return Fraction(0), (0, 1), "flow"
    if g.num_edges == 0:
        return Fraction(0), (0, 1, 2), "flow"
    a, b = g.sorted_edges()[0]
    c = next(v for v in range(g.n) if v not in (a, b))
    return Fraction(1), tuple(sorted((a, b, c))), "flow"


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class DensityReport:
    m1: Fraction | None
    gamma: Fraction | None
    m1_witness: tuple[int, ...]
    gamma_witness: tuple[int, ...]
    strictly_balanced: bool | None
    method: str

    def to_dict(self) -> dict:
        def frac(x):
            return None if x is None else f"{x.numerator}/{x.denominator}"

        return {
            "m1": frac(self.m1),
            "gamma": frac(self.gamma),
            "m1_witness": list(self.m1_witness),
            "gamma_witness": list(self.gamma_witness),
            "strictly_balanced": self.strictly_balanced,
            "method": self.method,
        }


def density_report(h: Graph, max_enum: int = DEFAULT_MAX_ENUM) -> DensityReport:
    if h.n < 2:
        raise ValueError("density needs at least two vertices")
    if h.n <= max_enum:
        m1 = _enum_max_ratio(h, 1)
        ga = _enum_max_ratio(h, 2)
        full = h.n
        strictly = m1[2] == 1 and len(m1[1]) == full
        return DensityReport(
            m1=m1[0],
            gamma=None if ga is None else ga[0],
            m1_witness=m1[1],
            gamma_witness=() if ga is None else ga[1],
            strictly_balanced=strictly,
            method="enumeration",
        )
    m1 = max_ratio(h, 1, max_enum)
    ga = max_ratio(h, 2, max_enum)
    strictly = m1[0] == Fraction(h.num_edges, h.n - 1)
    if strictly:
        # distinct ratios with denominators below n differ by more than 1/(2 n^2)
        below = m1[0] - Fraction(1, 2 * h.n * h.n)
        for v in range(h.n):
            rest = [w for w in range(h.n) if w != v]
            if exceeds_ratio(h, 1, below, within=rest):
                strictly = False
                break
    return DensityReport(m1[0], ga[0] if ga else None, m1[1], ga[1] if ga else (), strictly, "flow")


def m1(h: Graph) -> Fraction:
    return max_ratio(h, 1)[0]


def gamma(h: Graph) -> Fraction | None:
    out = max_ratio(h, 2)
    return None if out is None else out[0]


def dense_threshold(delta: int) -> Fraction:
    return Fraction(delta + 1, 2)


def is_dense(h: Graph, delta: int) -> bool:
    """``gamma(h) > (delta + 1) / 2``."""
    if h.n < 3:
        raise ValueError("density class needs at least three vertices")
    thr = dense_threshold(delta)
    if h.n <= DEFAULT_MAX_ENUM:
        g = _enum_max_ratio(h, 2)
        return g[0] > thr
    return bool(exceeds_ratio(h, 2, thr))


def is_minimally_dense(h: Graph, delta: int) -> bool:
    """Dense, and every subgraph with 3 <= v < v(h) is sparse."""
    if not is_dense(h, delta):
        return False
    thr = dense_threshold(delta)
    if h.n <= DEFAULT_MAX_ENUM:
        counts, sizes = subset_edge_counts(h)
        proper = (sizes >= 3) & (sizes < h.n)
        # e > thr * (s - 2)  <=>  e * den > num * (s - 2)
        dense = proper & (counts.astype(np.int64) * thr.denominator > thr.numerator * (sizes.astype(np.int64) - 2))
        return not dense.any()
    for vs in combinations(range(h.n), h.n - 1):
        if is_dense(h.induced(vs), delta):
            return False
    return True
