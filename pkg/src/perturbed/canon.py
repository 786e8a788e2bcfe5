"""Canonical forms of small graphs by individualisation and refinement.

The canonical form is the lexicographically smallest sorted edge list over
all discrete ordered partitions reachable from the equitable refinement.
Children of a search node that lie in the same orbit of the automorphisms
found so far (fixing the node's prefix pointwise) are skipped; they produce
the same set of leaves.
"""

from __future__ import annotations

from .graph_core import Graph

__all__ = ["canonical_form", "canonical_labeling", "CanonicalForm"]

CanonicalForm = tuple  # (n, sorted edge tuple)


def _refine(g: Graph, cells: list[list[int]]) -> list[list[int]]:
    """Coarsest equitable refinement of an ordered partition."""
    cells = [list(c) for c in cells]
    while True:
        where = {}
        for i, c in enumerate(cells):
            for v in c:
                where[v] = i
        k = len(cells)
        out = []
        changed = False
        for c in cells:
            if len(c) == 1:
                out.append(c)
                continue
            sig = {}
            for v in c:
                cnt = [0] * k
                for w in g.adj[v]:
                    cnt[where[w]] += 1
                sig.setdefault(tuple(cnt), []).append(v)
            if len(sig) > 1:
                changed = True
                for key in sorted(sig):
                    out.append(sorted(sig[key]))
            else:
                out.append(c)
        cells = out
        if not changed:
            return cells


def _form(g: Graph, pos: dict[int, int]) -> tuple:
    return tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b])) for a, b in g.edges))


class _Search:
    def __init__(self, g: Graph):
        self.g = g
        self.best = None
        self.best_pos = None
        self.autos: list[dict[int, int]] = []

    def run(self, cells, prefix):
        if all(len(c) == 1 for c in cells):
            pos = {c[0]: i for i, c in enumerate(cells)}
            form = _form(self.g, pos)
            if self.best is None or form < self.best:
                self.best, self.best_pos = form, pos
            elif form == self.best:
                inv = {i: v for v, i in self.best_pos.items()}
                self.autos.append({v: inv[pos[v]] for v in pos})
            return
        ci = next(i for i, c in enumerate(cells) if len(c) > 1)
        cell = cells[ci]
        explored = []
        for v in cell:
            if explored and self._same_orbit(v, explored, prefix):
                continue
            explored.append(v)
            rest = [w for w in cell if w != v]
            child = cells[:ci] + [[v], rest] + cells[ci + 1 :]
            self.run(_refine(self.g, child), prefix + (v,))

    def _same_orbit(self, v, explored, prefix) -> bool:
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        for a in self.autos:
            if all(a[x] == x for x in prefix):
                for x, y in a.items():
                    rx, ry = find(x), find(y)
                    if rx != ry:
                        parent[rx] = ry
        rv = find(v)
        return any(find(u) == rv for u in explored)


def canonical_labeling(g: Graph) -> tuple[CanonicalForm, list[int]]:
    """Canonical form and the relabelling ``perm`` with ``perm[v]`` = new label."""
    if g.n == 0:
        return (0, ()), []
    s = _Search(g)
    s.run(_refine(g, [list(range(g.n))]), ())
    perm = [s.best_pos[v] for v in range(g.n)]
    return (g.n, s.best), perm


def canonical_form(g: Graph) -> CanonicalForm:
    return canonical_labeling(g)[0]
