"""Target structures F, their almost-spanning subgraph families, gadgets.

Every target is realised with a canonical vertex order: powers of cycles
follow the cycle, factors keep each block contiguous, and path factors keep
each k-th power of a path contiguous.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .density import DensityReport, density_report, is_dense, is_minimally_dense
from .graph_core import Graph, complete_graph, cycle_graph, path_graph, read_edge_list

__all__ = [
    "TargetSpec",
    "parse_target",
    "named_graph",
    "realize",
    "power_path",
    "power_cycle",
    "density_report",
    "DensityReport",
    "is_dense",
    "is_minimally_dense",
    "two_independent_set",
    "connector_gadget",
    "ConnectorGadget",
    "PathFactorPlan",
    "path_factor_plan",
    "slack_budget",
    "SingleFamily",
    "FactorFamily",
    "DecompositionFamily",
    "suitable_family",
    "DEFAULT_EPS_OP",
]

DEFAULT_EPS_OP = 0.1
TARGET_KINDS = ("ham-power", "factor", "path-factor", "tree", "explicit")
TREE_SHAPES = ("path", "caterpillar", "kary", "random")


@dataclass(frozen=True)
class TargetSpec:
    """Declarative description of a spanning target.

    Only the fields relevant to ``kind`` are used: ``k`` for powers,
    ``h`` for factors, ``k, m, l`` for path factors, ``delta, shape, seed``
    for trees and ``graph`` for explicit targets.
    """

    kind: str
    n: int
    k: int | None = None
    h: Graph | None = None
    h_name: str | None = None
    m: int | None = None
    l: int | None = None
    delta: int | None = None
    shape: str | None = None
    seed: int = 0
    graph: Graph | None = field(default=None, compare=False)
    tag: str = ""

    def label(self) -> str:
        if self.tag:
            return self.tag
        if self.kind == "ham-power":
            return f"ham-power:k={self.k}"
        if self.kind == "factor":
            return f"factor:{self.h_name}"
        if self.kind == "path-factor":
            return f"path-factor:k={self.k},m={self.m},l={self.l}"
        if self.kind == "tree":
            return f"tree:D={self.delta},shape={self.shape}"
        return "explicit"


def named_graph(name: str) -> Graph:
    """``K<r>``, ``C<r>`` or ``P<r>`` (path on r vertices)."""
    mt = re.fullmatch(r"([KCP])(\d+)", name.strip())
    if not mt:
        raise ValueError(f"unknown graph name {name!r}; use K<r>, C<r> or P<r>")
    kind, r = mt.group(1), int(mt.group(2))
    if r < 1:
        raise ValueError(f"graph {name!r} needs at least one vertex")
    if kind == "K":
        return complete_graph(r)
    if kind == "C":
        return cycle_graph(r)
    return path_graph(r)


def _kv(body: str) -> dict[str, str]:
    out = {}
    for part in filter(None, (s.strip() for s in body.split(","))):
        if "=" not in part:
            raise ValueError(f"expected key=value, got {part!r}")
        key, val = part.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def parse_target(text: str, n: int | None = None) -> TargetSpec:
    """Parse ``ham-power:k=2``, ``factor:K5``, ``path-factor:k=2,m=20,l=6``,
    ``tree:D=3,shape=random``, ``file:<edge list>``."""
    if ":" not in text:
        raise ValueError(f"target spec {text!r} lacks a ':'")
    head, body = text.split(":", 1)
    head = head.strip()
    if head == "file":
        g = read_edge_list(body)
        if n is not None and n != g.n:
            raise ValueError(f"--n {n} disagrees with file vertex count {g.n}")
        return TargetSpec("explicit", g.n, graph=g, tag=text)
    if n is None:
        raise ValueError(f"target {text!r} needs a vertex count")
    if head == "ham-power":
        kv = _kv(body)
        return TargetSpec("ham-power", n, k=int(kv["k"]))
    if head == "factor":
        name = body.strip()
        return TargetSpec("factor", n, h=named_graph(name), h_name=name)
    if head == "path-factor":
        kv = _kv(body)
        k = int(kv["k"])
        return TargetSpec("path-factor", n, k=k, m=int(kv.get("m", 20)), l=int(kv.get("l", 2 * k + 2)))
    if head == "tree":
        kv = _kv(body)
        return TargetSpec(
            "tree", n, delta=int(kv.get("D", 3)), shape=kv.get("shape", "random"), seed=int(kv.get("seed", 0))
        )
    raise ValueError(f"unknown target kind {head!r}; expected one of {TARGET_KINDS} or file")


# --------------------------------------------------------------------------
# realisation


def power_path(m: int, k: int) -> Graph:
    """k-th power of the path on m vertices."""
    return Graph(m, ((i, j) for i in range(m) for j in range(i + 1, min(m, i + k + 1))))


def power_cycle(n: int, k: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle power needs n >= 3")
    es = set()
    for i in range(n):
        for d in range(1, k + 1):
            j = (i + d) % n
            if j != i:
                es.add((min(i, j), max(i, j)))
    return Graph(n, es)


def _disjoint(parts: Sequence[Graph]) -> Graph:
    es, off = [], 0
    for g in parts:
        es.extend((a + off, b + off) for a, b in g.edges)
        off += g.n
    return Graph(off, es)


def _tree(n: int, delta: int, shape: str, seed: int) -> Graph:
    if delta < 2 and n > 2:
        raise ValueError("trees on more than two vertices need max degree >= 2")
    if shape == "path":
        return path_graph(n)
    if shape == "caterpillar":
        spine = max(1, math.ceil(n / (delta - 1))) if delta > 2 else n
        spine = min(spine, n)
        es = [(i, i + 1) for i in range(spine - 1)]
        nxt, deg = spine, [2 if 0 < i < spine - 1 else 1 for i in range(spine)]
        if spine == 1:
            deg[0] = 0
        for i in range(spine):
            while nxt < n and deg[i] < delta:
                es.append((i, nxt))
                deg[i] += 1
                nxt += 1
        if nxt < n:
            raise ValueError("caterpillar layout ran out of room")
        return Graph(n, es)
    if shape == "kary":
        es, kids = [], [0] * n
        parent = 0
        for v in range(1, n):
            cap = delta if parent == 0 else delta - 1
            while kids[parent] >= cap:
                parent += 1
                cap = delta - 1
            es.append((parent, v))
            kids[parent] += 1
        return Graph(n, es)
    if shape == "random":
        rng = np.random.default_rng(seed)
        es, deg = [], [0] * n
        open_ = [0]
        for v in range(1, n):
            i = int(rng.integers(len(open_)))
            u = open_[i]
            es.append((u, v))
            deg[u] += 1
            deg[v] = 1
            if deg[u] >= delta:
                open_.pop(i)
            open_.append(v)
        return Graph(n, es)
    raise ValueError(f"unknown tree shape {shape!r}; expected one of {TREE_SHAPES}")


def realize(spec: TargetSpec) -> Graph:
    n = spec.n
    if spec.kind == "ham-power":
        if spec.k is None or spec.k < 1:
            raise ValueError("ham-power needs k >= 1")
        return power_cycle(n, spec.k)
    if spec.kind == "factor":
        h = spec.h
        if n % h.n:
            raise ValueError(f"factor of {h.n}-vertex blocks does not tile n={n}")
        return _disjoint([h] * (n // h.n))
    if spec.kind == "path-factor":
        plan = path_factor_plan(n, spec.k, spec.m, spec.l, eps_op=1.0)
        return _disjoint([power_path(len(p) + len(c), spec.k) for p, c in plan.blocks()])
    if spec.kind == "tree":
        return _tree(n, spec.delta, spec.shape, spec.seed)
    if spec.kind == "explicit":
        return spec.graph
    raise ValueError(f"unknown target kind {spec.kind!r}")


# --------------------------------------------------------------------------
# 2-independent sets


def two_independent_set(f: Graph, eligible) -> list[int]:
    """Greedy maximal set of eligible vertices at pairwise distance >= 3."""
    blocked = set()
    out = []
    for v in sorted(eligible):
        if v in blocked:
            continue
        out.append(v)
        blocked.add(v)
        for w in f.adj[v]:
            blocked.add(w)
            blocked.update(f.adj[w])
    return out


# --------------------------------------------------------------------------
# connector gadget


@dataclass(frozen=True)
class ConnectorGadget:
    graph: Graph
    k: int
    l: int
    j: int
    u: tuple[int, ...]
    w: tuple[int, ...]
    v: tuple[int, ...]


def connector_gadget(k: int, l: int) -> ConnectorGadget:
    """Sparse part of the connecting k-th power path u..., w_1..w_l, ...v.

    Edges inside the end tuples, ``u_k w_1``, ``w_l v_1`` and every
    consecutive ``w_i w_{i+1}`` except the middle one are dropped.
    """
    if k < 2:
        raise ValueError(f"connector needs k >= 2, got {k}")
    if l < 2 * k + 2:
        raise ValueError(f"connector needs l >= 2k+2 = {2 * k + 2}, got {l}")
    total = l + 2 * k
    us = tuple(range(k))
    ws = tuple(range(k, k + l))
    vs = tuple(range(k + l, total))
    j = l // 2  # 1-based index of the kept w_j w_{j+1}
    drop = set()
    drop.update((a, b) for a in us for b in us if a < b)
    drop.update((a, b) for a in vs for b in vs if a < b)
    drop.add((us[-1], ws[0]))
    drop.add((ws[-1], vs[0]))
    for i in range(l - 1):
        if i + 1 != j:
            drop.add((ws[i], ws[i + 1]))
    full = power_path(total, k)
    return ConnectorGadget(Graph(total, full.edges - drop), k, l, j, us, ws, vs)


# --------------------------------------------------------------------------
# path-factor plans


@dataclass(frozen=True)
class PathFactorPlan:
    n: int
    k: int
    m: int
    l: int
    s: int
    t: int
    j: int
    eps_op: float

    @property
    def core_size(self) -> int:
        return self.s * self.m + self.t

    @property
    def uncovered(self) -> int:
        return self.s * self.l

    @property
    def paper_regime(self) -> bool:
        """Whether the long-path constraint l^2 <= eps*m also holds."""
        return self.l * self.l <= self.eps_op * self.m

    def path_lengths(self) -> list[int]:
        return [self.m + 1] * self.t + [self.m] * (self.s - self.t)

    def blocks(self) -> list[tuple[list[int], list[int]]]:
        """(path vertices, connector vertices) per block in cycle order."""
        out, pos = [], 0
        for length in self.path_lengths():
            path = list(range(pos, pos + length))
            conn = list(range(pos + length, pos + length + self.l))
            out.append((path, conn))
            pos += length + self.l
        return out


def path_factor_plan(
    n: int, k: int, m: int, l: int, eps_op: float = DEFAULT_EPS_OP, strict: bool = False
) -> PathFactorPlan:
    """Split ``n = s(m+l) + t`` into t paths of m+1 and s-t paths of m vertices.

    ``strict`` additionally enforces ``l^2 <= eps_op * m``.
    """
    if k < 1 or m < 1 or l < 1:
        raise ValueError("k, m and l must be positive")
    if m + l > n:
        raise ValueError(f"plan infeasible: m+l = {m + l} exceeds n = {n} (s would be 0)")
    s, t = divmod(n, m + l)
    if t > s:
        raise ValueError(f"plan infeasible at n={n}: remainder t={t} exceeds path count s={s}")
    plan = PathFactorPlan(n, k, m, l, s, t, l // 2, eps_op)
    if plan.uncovered > eps_op * n + 1e-9:
        raise ValueError(f"plan leaves {plan.uncovered} vertices uncovered, more than eps_op*n = {eps_op * n:g}")
    if strict and not plan.paper_regime:
        raise ValueError(f"constraint l^2 <= eps_op*m violated: {l * l} > {eps_op * m:g}")
    return plan


def path_factor_core(plan: PathFactorPlan) -> Graph:
    """The realised F*: t copies of P_{m+1}^(k) followed by s-t copies of P_m^(k)."""
    return _disjoint([power_path(length, plan.k) for length in plan.path_lengths()])


# --------------------------------------------------------------------------
# suitable families


def slack_budget(eps_op: float, n: int, s_h: int, k: int) -> int:
    """Dense spots of one class allowed to stay out of the first round."""
    return math.floor(eps_op * n / (s_h * s_h * k) + 1e-9)


@dataclass(frozen=True)
class SingleFamily:
    """A single almost-spanning member F* (powers, path factors, trees).

    ``components`` lists F*'s components in target labels, in the order the
    first round embeds them; ``sites`` optionally fixes the completion order of
    the uncovered vertices (connector order for powers).
    """

    target: Graph
    core: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    sites: tuple[tuple[int, ...], ...] | None = None
    plan: PathFactorPlan | None = None

    @property
    def min_core(self) -> int:
        return len(self.core)


@dataclass(frozen=True)
class FactorFamily:
    """All unions of at least ``min_copies`` blocks of an H-factor."""

    target: Graph
    h: Graph
    blocks: tuple[tuple[int, ...], ...]
    min_copies: int

    @property
    def min_core(self) -> int:
        return self.min_copies * self.h.n


@dataclass(frozen=True)
class DecompositionFamily:
    """Graphs covering F' and all but ``slack[h]`` spots of each class h."""

    target: Graph
    decomposition: object
    slack: tuple[int, ...]

    @property
    def min_core(self) -> int:
        d = self.decomposition
        return len(d.f_prime) + sum(
            (len(c.members) - self.slack[i]) * c.s_h for i, c in enumerate(d.classes)
        )


def default_route(spec: TargetSpec) -> str:
    return {
        "ham-power": "power",
        "path-factor": "power",
        "factor": "factor",
        "tree": "tree",
        "explicit": "decomposition",
    }[spec.kind]


def _power_family(spec: TargetSpec, f: Graph, eps_op: float, m: int, l: int) -> SingleFamily:
    k = spec.k
    if k < 2:
        raise ValueError("power targets need k >= 2 for the connector construction")
    if l < k + 1:
        raise ValueError(f"connectors need l >= k+1 = {k + 1}, got {l}")
    if m < 2 * k:
        raise ValueError(f"paths need m >= 2k = {2 * k}, got {m}")
    plan = path_factor_plan(spec.n, k, m, l, eps_op)
    comps, sites, core = [], [], []
    for path, conn in plan.blocks():
        comps.append(tuple(path))
        core.extend(path)
        j = plan.j
        # w_1..w_j left to right, then w_l..w_{j+1} right to left
        sites.append(tuple(conn[:j]) + tuple(reversed(conn[j:])))
    return SingleFamily(f, tuple(core), tuple(comps), tuple(sites), plan)


def _tree_family(f: Graph, eps_op: float) -> SingleFamily:
    n = f.n
    remove = math.floor(eps_op * n + 1e-9)
    alive = set(range(n))
    removed = 0
    while removed < remove:
        leaves = [v for v in sorted(alive) if sum(1 for w in f.adj[v] if w in alive) <= 1]
        if len(alive) <= 2 or not leaves:
            break
        v = leaves[0]
        alive.discard(v)
        removed += 1
    core = tuple(sorted(alive))
    return SingleFamily(f, core, (core,), None, None)


def suitable_family(
    spec: TargetSpec,
    eps_op: float = DEFAULT_EPS_OP,
    route: str | None = None,
    m: int | None = None,
    l: int | None = None,
    decomposition=None,
    delta: int | None = None,
):
    """Finite description of the almost-spanning family used in round one."""
    f = realize(spec)
    n = spec.n
    route = route or default_route(spec)
    if route == "power":
        if spec.kind not in ("ham-power", "path-factor"):
            raise ValueError("power route only applies to ham-power and path-factor targets")
        k = spec.k
        m = m if m is not None else (spec.m if spec.m is not None else 20)
        l = l if l is not None else (spec.l if spec.l is not None else 2 * k + 2)
        fam = _power_family(spec, f, eps_op, m, l)
        if spec.kind == "path-factor":
            # connectors only attach to the preceding path
            fam = SingleFamily(f, fam.core, fam.components, tuple(tuple(sorted(s)) for s in fam.sites), fam.plan)
    elif route == "factor":
        if spec.kind != "factor":
            raise ValueError("factor route only applies to factor targets")
        hn = spec.h.n
        blocks = tuple(tuple(range(i, i + hn)) for i in range(0, n, hn))
        need = math.ceil((1 - eps_op) * n / hn - 1e-9)
        fam = FactorFamily(f, spec.h, blocks, need)
    elif route == "tree":
        fam = _tree_family(f, eps_op)
    elif route == "decomposition":
        from .decomposition import decompose

        dec = decomposition
        if dec is None:
            dec = decompose(f, delta if delta is not None else f.max_degree(), eps_op)
        k = len(dec.classes)
        slack = tuple(slack_budget(eps_op, n, c.s_h, k) for c in dec.classes)
        for i, (c, b) in enumerate(zip(dec.classes, slack)):
            if b == 0 and c.members:
                raise ValueError(
                    f"slack budget 0 for class {i} (s_h={c.s_h}, k={k}): eps_op={eps_op} too small at n={n}"
                )
        fam = DecompositionFamily(f, dec, slack)
    else:
        raise ValueError(f"unknown route {route!r}")
    if fam.min_core < (1 - eps_op) * n - 1e-9:
        raise ValueError(f"family members cover {fam.min_core} < (1-eps_op)n = {(1 - eps_op) * n:g} vertices")
    return fam
