"""Simple undirected graphs, host and random-graph generators, embedding checks.

Vertices are always ``0..n-1``. Graphs are immutable once built, so they can
be shared freely between trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Graph",
    "HostSpec",
    "Embedding",
    "EmbeddingVerdict",
    "HOST_KINDS",
    "make_rng",
    "derive_seed",
    "gnp_sample",
    "make_host",
    "union",
    "min_degree",
    "is_embedding",
    "check_partial",
    "image_graph",
    "complete_graph",
    "cycle_graph",
    "path_graph",
    "read_edge_list",
    "write_edge_list",
    "format_edge_list",
    "parse_edge_list",
]


class Graph:
    """Undirected simple graph on ``range(n)``.

    Adjacency is kept twice: sorted neighbour tuples for iteration and
    frozensets for constant-time edge tests.
    """

    __slots__ = ("n", "edges", "adj", "_nbrs")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        norm = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range for n={n}")
            norm.add((a, b) if a < b else (b, a))
        adj: list[set[int]] = [set() for _ in range(n)]
        for a, b in norm:
            adj[a].add(b)
            adj[b].add(a)
        self.n = n
        self.edges = frozenset(norm)
        self.adj = tuple(frozenset(s) for s in adj)
        self._nbrs = tuple(tuple(sorted(s)) for s in adj)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adj[a]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        return [len(s) for s in self.adj]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def max_degree(self) -> int:
        return max((len(s) for s in self.adj), default=0)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def edges_within(self, vertices: Iterable[int]) -> int:
        vs = set(vertices)
        return sum(len(self.adj[v] & vs) for v in vs) // 2

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph relabelled so that ``vertices[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        if len(index) != len(vertices):
            raise ValueError("duplicate vertices in induced()")
        es = []
        for v in vertices:
            for w in self.adj[v]:
                if w in index and v < w:
                    es.append((index[v], index[w]))
        return Graph(len(vertices), es)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("relabel needs a permutation of range(n)")
        return Graph(self.n, ((perm[a], perm[b]) for a, b in self.edges))

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self._nbrs[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={len(self.edges)})"


def complete_graph(n: int) -> Graph:
    return Graph(n, ((a, b) for a in range(n) for b in range(a + 1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


# --------------------------------------------------------------------------
# randomness


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(master_seed: int, index: int) -> int:
    """Per-trial seed that depends only on (master seed, trial index)."""
    state = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _pair_from_index(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # pairs (u, v), u < v, ordered by v then u: k = v(v-1)/2 + u
    v = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k)) / 2.0).astype(np.int64)
    v = np.where(v * (v - 1) // 2 > k, v - 1, v)
    v = np.where((v + 1) * v // 2 <= k, v + 1, v)
    u = k - v * (v - 1) // 2
    return u, v


def gnp_sample(n: int, p: float, seed) -> Graph:
    """Binomial random graph G(n, p) via geometric skips over the pair list."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return Graph(n)
    if p == 1.0:
        return complete_graph(n)
    rng = make_rng(seed)
    picked = []
    pos = -1
    while True:
        expect = p * (total - pos - 1)
        size = int(expect + 6.0 * math.sqrt(expect) + 16)
        # cap skips so tiny p cannot overflow the running sum
        steps = np.minimum(rng.geometric(p, size=size), total + 1)
        idx = pos + np.cumsum(steps)
        inside = idx[idx < total]
        picked.append(inside)
        if inside.size < idx.size:
            break
        pos = int(idx[-1])
    k = np.concatenate(picked).astype(np.int64)
    u, v = _pair_from_index(k)
    return Graph(n, zip(u.tolist(), v.tolist()))


# --------------------------------------------------------------------------
# hosts

HOST_KINDS = ("complete-bipartite-unbalanced", "random-min-degree", "clique-union", "complete", "empty")
HOST_ALIASES = {"complete-bipartite": "complete-bipartite-unbalanced"}

_RESAMPLE_CAP = 100


@dataclass(frozen=True)
class HostSpec:
    """Deterministic part of the perturbed model.

    ``cliques`` only matters for ``clique-union``; when left unset the number
    of cliques is the largest one that keeps every clique above the degree
    requirement. ``empty`` (alpha = 0) is the pure random-graph control arm.
    """

    kind: str
    n: int
    alpha: float
    cliques: int | None = None

    @property
    def required_degree(self) -> int:
        # guard against float noise such as 0.3 * 10 = 3.0000000000000004
        return math.ceil(round(self.alpha * self.n, 9))


def make_host(spec: HostSpec, seed=None) -> Graph:
    kind, n, alpha = HOST_ALIASES.get(spec.kind, spec.kind), spec.n, spec.alpha
    if kind not in HOST_KINDS:
        raise ValueError(f"unknown host kind {kind!r}; expected one of {HOST_KINDS}")
    if n <= 0:
        raise ValueError(f"host needs n >= 1, got {n}")
    if kind == "empty":
        if alpha != 0:
            raise ValueError("empty host must have alpha = 0")
        return Graph(n)
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    need = spec.required_degree

    if kind == "complete":
        return complete_graph(n)

    if kind == "complete-bipartite-unbalanced":
        if need > n - need:
            raise ValueError(
                f"complete-bipartite-unbalanced infeasible: small part {need} exceeds large part {n - need}"
            )
        return Graph(n, ((a, b) for a in range(need) for b in range(need, n)))

    if kind == "clique-union":
        r = spec.cliques if spec.cliques is not None else max(1, n // (need + 1))
        if not (1 <= r <= n):
            raise ValueError(f"clique-union needs 1 <= cliques <= n, got {r}")
        sizes = [n // r + (1 if i < n % r else 0) for i in range(r)]
        if min(sizes) - 1 < need:
            raise ValueError(
                f"clique-union infeasible: min degree {min(sizes) - 1} < required {need}"
            )
        es, start = [], 0
        for size in sizes:
            block = range(start, start + size)
            es.extend((a, b) for a in block for b in block if a < b)
            start += size
        return Graph(n, es)

    # random-min-degree
    if need > n - 1:
        raise ValueError(f"random-min-degree infeasible: required degree {need} > n-1")
    q = min(1.0, 3.0 * alpha)
    rng = make_rng(seed)
    for _ in range(_RESAMPLE_CAP):
        g = gnp_sample(n, q, rng)
        if min_degree(g) >= need:
            return g
    raise RuntimeError(
        f"random-min-degree: no sample reached min degree {need} in {_RESAMPLE_CAP} tries"
    )


def union(g1: Graph, g2: Graph) -> Graph:
    if g1.n != g2.n:
        raise ValueError(f"vertex counts differ: {g1.n} vs {g2.n}")
    return Graph(g1.n, g1.edges | g2.edges)


def min_degree(g: Graph) -> int:
    if g.n < 1:
        raise ValueError("min_degree of the null graph")
    return min(len(s) for s in g.adj)


# --------------------------------------------------------------------------
# embeddings


@dataclass(frozen=True)
class Embedding:
    """Map from target vertices to host vertices; ``None`` marks unset entries."""

    target: Graph
    host: Graph
    map: tuple

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(self.map))
        if len(self.map) != self.target.n:
            raise ValueError(f"map has {len(self.map)} entries, target has {self.target.n} vertices")

    @property
    def domain(self) -> list[int]:
        return [v for v, x in enumerate(self.map) if x is not None]

    def image(self) -> set[int]:
        return {x for x in self.map if x is not None}

    def is_total(self) -> bool:
        return all(x is not None for x in self.map)


@dataclass(frozen=True)
class EmbeddingVerdict:
    valid: bool
    reason: str = ""
    witness: tuple = field(default=())

    def __bool__(self) -> bool:
        return self.valid


def is_embedding(e: Embedding) -> EmbeddingVerdict:
    """Injective and edge-preserving check; reports the first violation."""
    for v, x in enumerate(e.map):
        if x is None:
            raise ValueError(f"partial map: target vertex {v} is unset")
    seen: dict[int, int] = {}
    for v, x in enumerate(e.map):
        if not (0 <= x < e.host.n):
            return EmbeddingVerdict(False, "out-of-range", (v, x))
        if x in seen:
            return EmbeddingVerdict(False, "collision", (seen[x], v, x))
        seen[x] = v
    for a, b in e.target.sorted_edges():
        if not e.host.has_edge(e.map[a], e.map[b]):
            return EmbeddingVerdict(False, "missing-edge", (a, b, e.map[a], e.map[b]))
    return EmbeddingVerdict(True)


def check_partial(e: Embedding) -> EmbeddingVerdict:
    """Like :func:`is_embedding` but only over the defined part of the map."""
    seen: dict[int, int] = {}
    for v, x in enumerate(e.map):
        if x is None:
            continue
        if not (0 <= x < e.host.n):
            return EmbeddingVerdict(False, "out-of-range", (v, x))
        if x in seen:
            return EmbeddingVerdict(False, "collision", (seen[x], v, x))
        seen[x] = v
    for a, b in e.target.sorted_edges():
        x, y = e.map[a], e.map[b]
        if x is not None and y is not None and not e.host.has_edge(x, y):
            return EmbeddingVerdict(False, "missing-edge", (a, b, x, y))
    return EmbeddingVerdict(True)


def image_graph(e: Embedding, n: int | None = None) -> Graph:
    """Images of the target edges whose endpoints are both mapped."""
    n = e.host.n if n is None else n
    es = []
    for a, b in e.target.edges:
        x, y = e.map[a], e.map[b]
        if x is not None and y is not None:
            es.append((x, y))
    return Graph(n, es)


# --------------------------------------------------------------------------
# edge-list text format


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{a} {b}" for a, b in g.sorted_edges())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty edge list")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise ValueError(f"first line must be 'n <N>', got {lines[0]!r}")
    n = int(head[1])
    seen = set()
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {ln!r}")
        a, b = int(parts[0]), int(parts[1])
        if a == b:
            raise ValueError(f"line {lineno}: self-loop {a}")
        if a > b:
            raise ValueError(f"line {lineno}: pairs must satisfy u < v, got {ln!r}")
        if (a, b) in seen:
            raise ValueError(f"line {lineno}: duplicate edge {a} {b}")
        seen.add((a, b))
    return Graph(n, seen)


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8")
