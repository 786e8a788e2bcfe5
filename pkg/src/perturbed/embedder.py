"""End-to-end embedding of a spanning target into G_alpha ∪ G(n, p).

Pipeline: sample independent random rounds, embed an almost-spanning member
of the target's family into the first round(s), relabel it by a uniform
permutation, build reservoirs and the doubled auxiliary graph, complete the
missing sites through a rainbow matching of connection hypergraphs over a
fresh round on 2n vertices, and finally switch back to [n] and verify.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields
from itertools import combinations
from pathlib import Path

import numpy as np

from .absorption import SwitchPlan, build_auxiliary, build_reservoirs, resolve_switching
from .graph_core import (
    Embedding,
    Graph,
    HostSpec,
    gnp_sample,
    is_embedding,
    make_host,
    make_rng,
    union,
)
from .targets import (
    DecompositionFamily,
    FactorFamily,
    SingleFamily,
    TargetSpec,
    default_route,
    realize,
    suitable_family,
    two_independent_set,
)

__all__ = [
    "PipelineConfig",
    "parse_config",
    "load_config",
    "RoundSchedule",
    "make_schedule",
    "ConnectionHypergraph",
    "MatchingResult",
    "HallReport",
    "AlmostSpanning",
    "Failure",
    "PipelineResult",
    "iter_placements",
    "find_placement",
    "embed_almost_spanning",
    "build_connection_hypergraphs",
    "check_connection_edge",
    "rainbow_matching",
    "hall_condition_check",
    "project_round",
    "embed_perturbed",
    "FAILURE_STAGES",
]

FAILURE_STAGES = ("plan", "round1", "hall", "other")

_EPS_DEFAULTS = {"power": 0.15, "factor": 0.1, "tree": 0.1, "decomposition": 0.5}


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of the pipeline; ``None`` means a route-dependent default."""

    epsilon_op: float | None = None
    m: int | None = None
    l: int | None = None
    route: str | None = None
    delta: int | None = None
    try_host_first: bool = True
    host_budget: int = 20_000
    direct_fallback: bool = True
    round1_budget: int = 200_000
    pack_restarts: int = 4
    site_budget: int = 20_000
    max_edges_per_site: int = 200
    matching_budget: int = 50_000
    greedy_restarts: int = 50
    round1_share: float | None = None
    completion_share: float | None = None
    fprime_share: float | None = None
    spot_share: float | None = None

    def eps_for(self, route: str) -> float:
        return self.epsilon_op if self.epsilon_op is not None else _EPS_DEFAULTS[route]


def _coerce(kind, text: str):
    if kind is bool or kind == "bool":
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if text.strip().lower() in ("none", ""):
        return None
    if "float" in str(kind):
        return float(text)
    if "int" in str(kind):
        return int(text)
    return text.strip()


def parse_config(text: str) -> PipelineConfig:
    """``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(PipelineConfig)}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        kw[key] = _coerce(bool if types[key] in (bool, "bool") else types[key], val)
    return PipelineConfig(**kw)


def load_config(path) -> PipelineConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# round schedule


@dataclass(frozen=True)
class RoundSchedule:
    """Independent random rounds.

    ``effective`` is the edge probability each round contributes on [n]:
    ``q`` for rounds on n vertices and ``3q`` for completion rounds on 2n
    vertices, whose projection joins u, w if any of three pairs is present.
    """

    p: float
    probs: tuple[float, ...]
    tags: tuple[str, ...]
    sizes: tuple[str, ...]  # "n" or "2n"

    @property
    def effective(self) -> tuple[float, ...]:
        return tuple(q * (3 if s == "2n" else 1) for q, s in zip(self.probs, self.sizes))

    def check(self) -> None:
        if any(q < 0 for q in self.probs):
            raise ValueError("negative round probability")
        if sum(self.effective) > self.p + 1e-12:
            raise ValueError(f"rounds contribute {sum(self.effective)} > p = {self.p}")

    def to_dict(self) -> dict:
        return {"p": self.p, "rounds": [list(t) for t in zip(self.tags, self.sizes, self.probs)]}


def make_schedule(route: str, p: float, k: int = 0, config: PipelineConfig | None = None) -> RoundSchedule:
    cfg = config or PipelineConfig()
    if not (0 <= p <= 1):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if route == "decomposition":
        if k == 0:
            s = RoundSchedule(p, (p / 2,), ("round1:F'",), ("n",))
        elif cfg.fprime_share is not None or cfg.spot_share is not None:
            # override: F' round, k spot rounds sharing spot_share, the rest to completion
            fs = cfg.fprime_share if cfg.fprime_share is not None else 1 / 3
            ss = cfg.spot_share if cfg.spot_share is not None else 1 / 6
            if fs + ss >= 1:
                raise ValueError("fprime_share + spot_share must stay below 1")
            qs, qc = p * ss / k, p * (1 - fs - ss) / (3 * k)
            probs = [p * fs] + [qs] * k + [qc] * k
            tags = ["round1:F'"] + [f"round1:class{h}" for h in range(k)] + [f"completion:class{h}" for h in range(k)]
            s = RoundSchedule(p, tuple(probs), tuple(tags), tuple(["n"] * (k + 1) + ["2n"] * k))
        else:
            q = p / (6 * k)
            probs = [p / 3] + [q] * k + [q] * k
            tags = ["round1:F'"] + [f"round1:class{h}" for h in range(k)] + [f"completion:class{h}" for h in range(k)]
            sizes = ["n"] * (k + 1) + ["2n"] * k
            s = RoundSchedule(p, tuple(probs), tuple(tags), tuple(sizes))
    else:
        r1 = cfg.round1_share if cfg.round1_share is not None else 0.5
        c = cfg.completion_share if cfg.completion_share is not None else 1 / 6
        s = RoundSchedule(p, (p * r1, p * c), ("round1", "completion"), ("n", "2n"))
    s.check()
    return s


# --------------------------------------------------------------------------
# constrained placement search


class _BudgetExceeded(Exception):
    pass


def _connect_order(f: Graph, vertices, anchored=()) -> list[int]:
    """Vertices ordered so each one, where possible, follows a neighbour."""
    vs = list(vertices)
    inside = set(vs)
    done = set(anchored)
    out = []
    remaining = set(vs)
    while remaining:
        # prefer vertices touching what is already placed
        start = None
        for v in vs:
            if v in remaining and any(w in done for w in f.adj[v]):
                start = v
                break
        if start is None:
            start = next(v for v in vs if v in remaining)
        queue = [start]
        remaining.discard(start)
        while queue:
            v = queue.pop(0)
            out.append(v)
            done.add(v)
            for w in f.neighbors(v):
                if w in remaining and w in inside:
                    remaining.discard(w)
                    queue.append(w)
    return out


def iter_placements(
    f: Graph,
    order,
    adj,
    fixed: dict,
    universe,
    counter: list[int],
    rng=None,
    allowed: dict | None = None,
    forbidden=frozenset(),
):
    """Yield maps ``{x: image}`` for ``order`` consistent with ``fixed``.

    ``adj[h]`` is the neighbour set of host vertex h; every target edge from
    a vertex in ``order`` to an already placed or fixed vertex must land on
    a host edge. ``counter[0]`` is decremented per node and the search stops
    with ``_BudgetExceeded`` when it goes negative.
    """
    order = list(order)
    pos = {x: i for i, x in enumerate(order)}
    back = [[y for y in f.adj[x] if (y in pos and pos[y] < i) or y in fixed] for i, x in enumerate(order)]
    used = set(fixed.values()) | set(forbidden)
    assign: list[int] = []
    cands: list[list[int]] = []
    ptr: list[int] = []
    universe = list(universe)

    def image(y):
        return fixed[y] if y in fixed else assign[pos[y]]

    def candidates(i):
        x = order[i]
        reqs = [image(y) for y in back[i]]
        if reqs:
            reqs.sort(key=lambda h: len(adj[h]))
            s = set(adj[reqs[0]])
            for h in reqs[1:]:
                s &= adj[h]
                if not s:
                    break
            if allowed is not None and x in allowed:
                s &= allowed[x]
        elif allowed is not None and x in allowed:
            s = set(allowed[x])
        else:
            s = set(universe)
        s -= used
        lst = sorted(s)
        if rng is not None and len(lst) > 1:
            rng.shuffle(lst)
        return lst

    if not order:
        yield {}
        return
    cands.append(candidates(0))
    ptr.append(0)
    while True:
        i = len(assign)
        if i == len(order):
            yield {x: assign[j] for j, x in enumerate(order)}
            used.discard(assign.pop())
            continue
        if ptr[i] < len(cands[i]):
            counter[0] -= 1
            if counter[0] < 0:
                raise _BudgetExceeded
            h = cands[i][ptr[i]]
            ptr[i] += 1
            assign.append(h)
            used.add(h)
            if i + 1 < len(order):
                if len(cands) > i + 1:
                    cands[i + 1] = candidates(i + 1)
                    ptr[i + 1] = 0
                else:
                    cands.append(candidates(i + 1))
                    ptr.append(0)
        else:
            cands.pop()
            ptr.pop()
            if not assign:
                return
            used.discard(assign.pop())


def find_placement(f, order, adj, fixed, universe, budget: int, rng=None, allowed=None, forbidden=frozenset()):
    """First placement found, ``None`` if none exists, raises on budget."""
    counter = [budget]
    for sol in iter_placements(f, order, adj, fixed, universe, counter, rng, allowed, forbidden):
        return sol
    return None


# --------------------------------------------------------------------------
# almost-spanning round


@dataclass(frozen=True)
class Failure:
    stage: str
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class AlmostSpanning:
    """Partial map of the target into round-one graphs plus completion sites.

    ``waves`` groups the still missing vertices into sites (tuples in
    placement order); sites of one wave share no target edges.
    """

    map: tuple
    waves: tuple[tuple[tuple[int, ...], ...], ...]
    nodes: int = 0

    @property
    def unembedded(self) -> list[int]:
        return [v for v, x in enumerate(self.map) if x is None]


def _copies_through(f: Graph, block, v: int, g: Graph, blocked: set, counter, rng) -> list[tuple[int, ...]]:
    """H-copies in ``g`` through ``v`` avoiding ``blocked``, aligned with ``block``."""
    out, seen = [], set()
    for i, x in enumerate(block):
        rest = [y for y in _connect_order(f, block, (x,)) if y != x]
        for sol in iter_placements(f, rest, g.adj, {x: v}, (), counter, None, None, blocked):
            key = frozenset(sol.values()) | {v}
            if key not in seen:
                seen.add(key)
                sol[x] = v
                out.append(tuple(sol[y] for y in block))
        # for a clique, copies through one position already cover every copy
        if f.induced(list(block)).num_edges * 2 == len(block) * (len(block) - 1):
            break
    if rng is not None:
        rng.shuffle(out)
    return out


def _pack_factor(fam: FactorFamily, g: Graph, budget: int, rng, restarts: int = 1):
    """Disjoint H-copies covering all but a slack of vertices.

    Branches on the free vertex with the fewest free neighbours: either cover
    it by a copy through it or leave it out while slack remains. Once the
    required number of copies is reached the rest is packed greedily.
    """
    f, h = fam.target, fam.h.n
    block = fam.blocks[0]
    n = g.n
    best: list = []

    def attempt(need: int, budget_share: int) -> list:
        slack = n - need * h
        counter = [budget_share]
        free = set(range(n))
        chosen: list[tuple[int, ...]] = []
        top: list = []

        def go(skipped: int) -> bool:
            nonlocal top
            if len(chosen) > len(top):
                top = list(chosen)
            if len(chosen) >= need:
                return True
            if len(chosen) + len(free) // h < need:
                return False
            v = min(free, key=lambda x: (len(g.adj[x] & free), x))
            for cp in _copies_through(f, block, v, g, set(range(n)) - free, counter, rng):
                chosen.append(cp)
                free.difference_update(cp)
                if go(skipped):
                    return True
                free.update(cp)
                chosen.pop()
            if skipped < slack:
                free.discard(v)
                ok = go(skipped + 1)
                free.add(v)
                return ok
            return False

        try:
            go(0)
        except _BudgetExceeded:
            pass
        return top

    # a full factor first, then only the required number of copies
    best = attempt(len(fam.blocks), budget // 2)
    if len(best) < len(fam.blocks):
        alt = attempt(fam.min_copies, budget - budget // 2)
        if len(alt) > len(best):
            best = alt
    copies = list(best)
    # greedy top-up to shrink the completion work
    used = set(x for cp in copies for x in cp)
    try:
        for v in range(n):
            if v in used or len(copies) == len(fam.blocks):
                continue
            opts = _copies_through(f, block, v, g, used, [budget], None)
            if opts:
                copies.append(opts[0])
                used.update(opts[0])
    except _BudgetExceeded:
        pass
    fixed = {}
    for b, cp in zip(fam.blocks, copies):
        fixed.update(zip(b, cp))
    return fixed


def embed_almost_spanning(family, g1, budget: int = 200_000, seed=None, spot_rounds=None, restarts: int = 4):
    """Embed a member of ``family`` into the round-one graph(s).

    ``g1`` is the first-round graph; for decomposition families it hosts F'
    and ``spot_rounds[h]`` hosts the spots of class h (attachments may use
    any earlier round). Returns :class:`AlmostSpanning` or :class:`Failure`.
    """
    rng = make_rng(seed)
    f = family.target
    n = f.n
    counter = [budget]
    try:
        if isinstance(family, SingleFamily):
            fixed: dict = {}
            for comp in family.components:
                order = _connect_order(f, comp, fixed)
                sol = None
                for sol in iter_placements(f, order, g1.adj, fixed, range(n), counter, rng):
                    break
                else:
                    sol = None
                if sol is None:
                    return Failure("round1", f"no copy of component starting at {comp[0]} in round one")
                fixed.update(sol)
            if family.sites is not None:
                sites = family.sites
            else:
                missing = [v for v in range(n) if v not in fixed]
                sites = _sites_from(f, missing, fixed)
            waves = (tuple(sites),) if sites else ()
        elif isinstance(family, FactorFamily):
            fixed = _pack_factor(family, g1, budget, rng, restarts)
            copies = len(fixed) // family.h.n
            if copies < family.min_copies:
                return Failure("round1", f"packed {copies} copies, need {family.min_copies}")
            sites = tuple(b for b in family.blocks if b[0] not in fixed)
            waves = (sites,) if sites else ()
        elif isinstance(family, DecompositionFamily):
            dec = family.decomposition
            rounds = list(spot_rounds or [])
            if len(rounds) != len(dec.classes):
                raise ValueError(f"need {len(dec.classes)} spot rounds, got {len(rounds)}")
            fixed = {}
            fp = list(dec.f_prime)
            if fp:
                order = _connect_order(f, fp)
                sol = None
                for sol in iter_placements(f, order, g1.adj, fixed, range(n), counter, rng):
                    break
                else:
                    sol = None
                if sol is None:
                    return Failure("round1", "no copy of the sparse remainder")
                fixed.update(sol)
            waves_l = []
            acc = g1
            for h, (cls, gh) in enumerate(zip(dec.classes, rounds)):
                acc = union(acc, gh)
                missed = []
                for spot in cls.members:
                    order = _connect_order(f, spot, fixed)
                    sol = _spot_placement(f, order, gh, acc, fixed, n, counter, rng)
                    if sol is None:
                        missed.append(tuple(order))
                    else:
                        fixed.update(sol)
                if len(missed) > family.slack[h]:
                    return Failure("round1", f"class {h}: {len(missed)} spots missed, slack {family.slack[h]}")
                waves_l.append(tuple(missed))
            waves = tuple(w for w in waves_l if w)
        else:
            raise ValueError(f"unsupported family {type(family).__name__}")
    except _BudgetExceeded:
        return Failure("round1", f"search budget of {budget} nodes exhausted")
    m = tuple(fixed.get(v) for v in range(n))
    return AlmostSpanning(m, waves, budget - counter[0])


def _spot_placement(f, order, gh, acc, fixed, n, counter, rng):
    # attachments may use any round so far, the spot's own edges only its class round
    inner = set(order)
    own = [(a, b) for a in order for b in f.adj[a] if b in inner and a < b]
    for sol in iter_placements(f, order, acc.adj, fixed, range(n), counter, rng):
        if all(gh.has_edge(sol[a], sol[b]) for a, b in own):
            return sol
    return None


def _sites_from(f: Graph, missing, fixed) -> tuple[tuple[int, ...], ...]:
    """Components of the missing vertices, each ordered outward from F*."""
    miss = set(missing)
    sub = f.induced(sorted(miss))
    labels = sorted(miss)
    out = []
    for comp in sub.components():
        verts = [labels[i] for i in comp]
        out.append(tuple(_connect_order(f, verts, fixed)))
    return tuple(sorted(out))


# --------------------------------------------------------------------------
# connection hypergraphs


@dataclass(frozen=True)
class ConnectionHypergraph:
    """Candidate placements of one site onto shadow vertices.

    ``edges[i]`` lists images in the site's order; the hyperedge is its set.
    """

    site: tuple[int, ...]
    edges: tuple[tuple[int, ...], ...]
    capped: bool = False

    @property
    def uniformity(self) -> int:
        return len(self.site)

    def vertex_sets(self) -> list[frozenset]:
        return [frozenset(e) for e in self.edges]


def _completion_graph(aux, g2: Graph) -> Graph:
    n = aux.n
    # a pair (w, w + n) would project to a loop; it is never a usable edge
    extra = [(a, b) for a, b in g2.edges if b != a + n]
    return Graph(2 * n, set(aux.g_aux.edges) | set(extra))


def check_connection_edge(f: Graph, site, images, partial, aux, combined: Graph) -> bool:
    """Re-check a single hyperedge against its constraints."""
    if len(set(images)) != len(images):
        return False
    place = dict(zip(site, images))
    for x, t in place.items():
        if t not in aux.b_sets[x]:
            return False
        for y in f.adj[x]:
            other = place.get(y, partial[y])
            if other is not None and not combined.has_edge(t, other):
                return False
    return True


def build_connection_hypergraphs(
    f: Graph,
    partial,
    aux,
    g2: Graph,
    sites,
    max_edges_per_site: int = 200,
    budget: int = 20_000,
    forbidden=frozenset(),
    seed=None,
    combined: Graph | None = None,
) -> list[ConnectionHypergraph]:
    """All (up to the cap) placements of each site inside the B-sets.

    ``partial`` maps already placed target vertices to [2n]; each site vertex
    must land in its B-set and be joined in ``G_aux ∪ g2`` to the images of
    its placed neighbours. Candidates are explored in a seeded order and
    deduplicated by vertex set.

    A single depth-first run would fill the cap with placements sharing
    their first few images, which starves the matching step when sites
    compete for the same shadow vertices. The search is therefore split
    into short randomised probes, each contributing a few placements.
    """
    rng = make_rng(seed)
    combined = combined if combined is not None else _completion_graph(aux, g2)
    fixed = {v: x for v, x in enumerate(partial) if x is not None}
    per_probe = max(1, max_edges_per_site // 25)
    out = []
    for site in sites:
        site = tuple(site)
        counter = [budget]
        allowed = {x: aux.b_sets[x] for x in site}
        seen, edges = set(), []
        stale, finished = 0, False
        try:
            while len(edges) < max_edges_per_site and stale < 20 and not finished:
                fresh, taken_here, finished = 0, 0, True
                for sol in iter_placements(f, site, combined.adj, fixed, (), counter, rng, allowed, forbidden):
                    key = frozenset(sol.values())
                    if key not in seen:
                        seen.add(key)
                        edges.append(tuple(sol[x] for x in site))
                        fresh += 1
                    taken_here += 1
                    if taken_here >= per_probe or len(edges) >= max_edges_per_site:
                        finished = False
                        break
                stale = 0 if fresh else stale + 1
            if not finished and len(edges) < max_edges_per_site:
                # probes keep repeating themselves: the space is small, list it
                finished = True
                for sol in iter_placements(f, site, combined.adj, fixed, (), counter, rng, allowed, forbidden):
                    key = frozenset(sol.values())
                    if key not in seen:
                        seen.add(key)
                        edges.append(tuple(sol[x] for x in site))
                        if len(edges) >= max_edges_per_site:
                            finished = False
                            break
            capped = not finished
        except _BudgetExceeded:
            capped = True
        out.append(ConnectionHypergraph(site, tuple(edges), capped))
    return out


# --------------------------------------------------------------------------
# rainbow matchings and the Hall-type condition


@dataclass(frozen=True)
class MatchingResult:
    ok: bool
    selection: tuple[int, ...] = ()  # edge index per system
    blocking: tuple[int, ...] = ()
    method: str = ""
    nodes: int = 0


def _edge_sets(systems):
    out = []
    for s in systems:
        if isinstance(s, ConnectionHypergraph):
            out.append([frozenset(e) for e in s.edges])
        else:
            out.append([frozenset(e) for e in s])
    return out


def rainbow_matching(systems, budget: int = 50_000, restarts: int = 50, seed=0) -> MatchingResult:
    """One pairwise disjoint edge per system.

    Exact backtracking (sparsest system first) within ``budget`` nodes, then
    randomised greedy restarts. ``blocking`` names systems that could not be
    served together.
    """
    sets = _edge_sets(systems)
    t = len(sets)
    if t == 0:
        return MatchingResult(True, (), (), "exact")
    for i, es in enumerate(sets):
        if not es:
            return MatchingResult(False, (), (i,), "empty")
    order = sorted(range(t), key=lambda i: (len(sets[i]), i))
    choice = [0] * t
    sel = [-1] * t
    used: set = set()
    depth = 0
    deepest = 0
    nodes = 0
    exhausted = False
    while True:
        if depth == t:
            return MatchingResult(True, tuple(sel), (), "exact", nodes)
        i = order[depth]
        es = sets[i]
        placed = False
        while choice[depth] < len(es):
            j = choice[depth]
            choice[depth] += 1
            nodes += 1
            if nodes > budget:
                exhausted = True
                break
            if used.isdisjoint(es[j]):
                sel[i] = j
                used |= es[j]
                depth += 1
                deepest = max(deepest, depth)
                if depth < t:
                    choice[depth] = 0
                placed = True
                break
        if exhausted:
            break
        if not placed:
            if depth == 0:
                return MatchingResult(False, (), tuple(sorted(order[: deepest + 1])), "exact", nodes)
            depth -= 1
            prev = order[depth]
            used -= sets[prev][sel[prev]]
            sel[prev] = -1
    # budget exhausted: randomised greedy
    rng = make_rng(seed)
    worst = None
    for _ in range(max(1, restarts)):
        perm = list(order)
        rng.shuffle(perm)
        perm.sort(key=lambda i: len(sets[i]))
        used = set()
        pick = [-1] * t
        stuck = None
        for i in perm:
            idx = [j for j, e in enumerate(sets[i]) if used.isdisjoint(e)]
            if not idx:
                stuck = i
                break
            j = idx[int(rng.integers(len(idx)))]
            pick[i] = j
            used |= sets[i][j]
        if stuck is None:
            return MatchingResult(True, tuple(pick), (), "greedy", nodes)
        served = tuple(sorted([i for i in range(t) if pick[i] >= 0] + [stuck]))
        if worst is None or len(served) < len(worst):
            worst = served
    return MatchingResult(False, (), worst, "greedy", nodes)


def _max_matching(edges: list[frozenset], s: int, target: int) -> int:
    """Size of a maximum matching, stopping early once ``target`` is reached."""
    edges = sorted(set(edges), key=lambda e: sorted(e))
    best = 0
    verts = set().union(*edges) if edges else set()

    def go(start, used, size):
        nonlocal best
        if size > best:
            best = size
        if best >= target:
            return
        free = len(verts) - len(used)
        if size + free // max(s, 1) <= best:
            return
        for j in range(start, len(edges)):
            if used.isdisjoint(edges[j]):
                go(j + 1, used | edges[j], size + 1)
                if best >= target:
                    return

    go(0, frozenset(), 0)
    return best


@dataclass(frozen=True)
class HallReport:
    passed: bool
    violating: tuple[int, ...] = ()
    matching_size: int = 0
    needed: int = 0


def hall_condition_check(systems, s: int) -> HallReport:
    """For every index set I, does the union contain a matching of size > s(|I|-1)?"""
    sets = _edge_sets(systems)
    t = len(sets)
    if t > 20:
        raise ValueError(f"Hall scan limited to 20 systems, got {t}")
    for size in range(1, t + 1):
        for idx in combinations(range(t), size):
            need = s * (size - 1) + 1
            edges = [e for i in idx for e in sets[i]]
            got = _max_matching(edges, s, need)
            if got < need:
                return HallReport(False, idx, got, need)
    return HallReport(True)


# --------------------------------------------------------------------------
# pipeline


def project_round(g2: Graph, n: int) -> Graph:
    """Edges uw of [n] with {u, w+n}, {u+n, w} or {u+n, w+n} in ``g2``."""
    es = set()
    for a, b in g2.edges:
        if b < n:
            continue
        u = a - n if a >= n else a
        w = b - n
        if u != w:
            es.add((min(u, w), max(u, w)))
    return Graph(n, es)


@dataclass
class PipelineResult:
    ok: bool
    stage: str = ""
    reason: str = ""
    embedding: Embedding | None = None
    union_graph: Graph | None = None
    host_alpha: Graph | None = None
    target: Graph | None = None
    schedule: RoundSchedule | None = None
    switch_plan: SwitchPlan | None = None
    selection: tuple = ()
    timings: dict = field(default_factory=dict)

    @property
    def failure_stage(self) -> str | None:
        return None if self.ok else self.stage


def _seeds(seed, count: int):
    return np.random.SeedSequence(int(seed) if seed is not None else None).spawn(count)


def _permute(g: Graph, sigma) -> Graph:
    return Graph(g.n, ((sigma[a], sigma[b]) for a, b in g.edges))


def embed_perturbed(
    target: TargetSpec,
    host: HostSpec,
    p: float,
    config: PipelineConfig | None = None,
    seed=0,
) -> PipelineResult:
    cfg = config or PipelineConfig()
    clock = {}
    t0 = time.perf_counter()
    s_host, s_r1, s_perm, s_comp, s_search, s_match = _seeds(seed, 6)
    if target.n != host.n:
        raise ValueError(f"target has {target.n} vertices, host {host.n}")
    n = host.n
    g_alpha = make_host(host, s_host)
    f = realize(target)
    clock["setup"] = time.perf_counter() - t0

    def done(res: PipelineResult) -> PipelineResult:
        res.timings = clock
        res.host_alpha = g_alpha
        res.target = f
        if res.ok:
            verdict = is_embedding(res.embedding)
            if not verdict:
                raise RuntimeError(f"pipeline produced an invalid embedding: {verdict.reason} {verdict.witness}")
            if res.embedding.host is not res.union_graph and not res.union_graph.edges >= res.embedding.host.edges:
                raise RuntimeError("embedding host is not part of the reported union graph")
        return res

    # stage 0: the deterministic graph alone
    if cfg.try_host_first and g_alpha.num_edges >= f.num_edges:
        t = time.perf_counter()
        try:
            sol = find_placement(f, _connect_order(f, range(n)), g_alpha.adj, {}, range(n), cfg.host_budget, make_rng(s_search))
        except _BudgetExceeded:
            sol = None
        clock["host"] = time.perf_counter() - t
        if sol is not None:
            emb = Embedding(f, g_alpha, tuple(sol[v] for v in range(n)))
            sched = RoundSchedule(p, (), (), ())
            return done(PipelineResult(True, "host", "found in G_alpha", emb, g_alpha, schedule=sched))

    # plan
    route = cfg.route or default_route(target)
    eps = cfg.eps_for(route)
    t = time.perf_counter()
    try:
        kw = {}
        if route == "power":
            kw["m"], kw["l"] = _power_params(target, cfg, eps)
        fam = suitable_family(target, eps, route=route, delta=cfg.delta, **kw)
        k = len(fam.decomposition.classes) if isinstance(fam, DecompositionFamily) else 0
        sched = make_schedule(route, p, k, cfg)
    except ValueError as exc:
        clock["plan"] = time.perf_counter() - t
        if not cfg.direct_fallback:
            return done(PipelineResult(False, "plan", str(exc)))
        return done(_direct(f, g_alpha, n, p, cfg, s_r1, s_search, str(exc), clock))
    clock["plan"] = time.perf_counter() - t

    # round one
    t = time.perf_counter()
    r1_seeds = s_r1.spawn(len(sched.probs))
    first = [gnp_sample(n, q, r1_seeds[i]) for i, (q, sz) in enumerate(zip(sched.probs, sched.sizes)) if sz == "n"]
    g1, spot_rounds = first[0], first[1:]
    almost = embed_almost_spanning(fam, g1, cfg.round1_budget, s_search, spot_rounds, cfg.pack_restarts)
    clock["round1"] = time.perf_counter() - t
    if isinstance(almost, Failure):
        return done(PipelineResult(False, almost.stage, almost.reason, schedule=sched))

    # symmetrise the copy
    sigma = make_rng(s_perm).permutation(n).tolist()
    first = [_permute(g, sigma) for g in first]
    round1_union = first[0]
    for g in first[1:]:
        round1_union = union(round1_union, g)
    pmap = tuple(None if x is None else sigma[x] for x in almost.map)
    fhat = Embedding(f, round1_union, pmap)
    base_union = union(g_alpha, round1_union)
    if not almost.waves:
        emb = Embedding(f, base_union, pmap)
        return done(PipelineResult(True, "round1", "no completion needed", emb, base_union, schedule=sched))

    # reservoirs and the auxiliary instance
    t = time.perf_counter()
    core = [v for v, x in enumerate(pmap) if x is not None]
    in_core = set(core)
    eligible = [v for v in core if all(w in in_core for w in f.adj[v])]
    wstar = two_independent_set(f, eligible)
    res = build_reservoirs(g_alpha, fhat, wstar)
    missing = [v for v, x in enumerate(pmap) if x is None]
    aux = build_auxiliary(g_alpha, fhat, res, missing)
    clock["reservoirs"] = time.perf_counter() - t

    # completion waves
    t = time.perf_counter()
    comp_probs = [q for q, sz in zip(sched.probs, sched.sizes) if sz == "2n"]
    comp_seeds = s_comp.spawn(max(1, len(comp_probs)))
    waves = list(almost.waves)
    if len(comp_probs) == 1 and len(waves) > 1:
        waves = [tuple(s for w in waves for s in w)]
    if len(waves) > len(comp_probs):
        raise RuntimeError("more completion waves than completion rounds")
    g2_union = Graph(2 * n)
    partial = list(pmap)
    taken: set = set()
    selection_log = []
    for wi, wave in enumerate(waves):
        g2 = gnp_sample(2 * n, comp_probs[wi], comp_seeds[wi])
        g2_union = union(g2_union, g2)
        combined = _completion_graph(aux, g2_union)
        hyper = build_connection_hypergraphs(
            f, partial, aux, g2_union, wave, cfg.max_edges_per_site, cfg.site_budget, taken, s_match, combined
        )
        match = rainbow_matching(hyper, cfg.matching_budget, cfg.greedy_restarts, s_match)
        if not match.ok:
            clock["completion"] = time.perf_counter() - t
            empty = [i for i, h in enumerate(hyper) if not h.edges]
            why = f"site {hyper[empty[0]].site[0]} has no candidates" if empty else f"no rainbow matching, blocking {list(match.blocking)}"
            return done(PipelineResult(False, "hall", why, schedule=sched))
        for hg, j in zip(hyper, match.selection):
            imgs = hg.edges[j]
            if not check_connection_edge(f, hg.site, imgs, partial, aux, combined):
                raise RuntimeError(f"selected hyperedge for site {hg.site} fails its constraints")
            for x, img in zip(hg.site, imgs):
                partial[x] = img
                taken.add(img)
        selection_log.append(tuple(match.selection))
    clock["completion"] = time.perf_counter() - t

    # switch back to [n] and verify
    t = time.perf_counter()
    aux_host = _completion_graph(aux, g2_union)
    g_prime = Embedding(f, aux_host, tuple(partial))
    v = is_embedding(g_prime)
    if not v:
        raise RuntimeError(f"auxiliary embedding invalid: {v.reason} {v.witness}")
    final = union(base_union, project_round(g2_union, n))
    g, plan = resolve_switching(aux, g_prime, fhat, host=final)
    clock["resolve"] = time.perf_counter() - t
    return done(
        PipelineResult(True, "completion", "completed", g, final, schedule=sched, switch_plan=plan, selection=tuple(selection_log))
    )


def _direct(f, g_alpha, n, p, cfg, s_round, s_search, why, clock) -> PipelineResult:
    """No absorption plan at this n: one G(n, p) round and a plain search."""
    t = time.perf_counter()
    sched = RoundSchedule(p, (p,), ("direct",), ("n",))
    g = union(g_alpha, gnp_sample(n, p, s_round))
    try:
        sol = find_placement(f, _connect_order(f, range(n)), g.adj, {}, range(n), cfg.host_budget, make_rng(s_search))
    except _BudgetExceeded:
        sol = None
    clock["direct"] = time.perf_counter() - t
    if sol is None:
        return PipelineResult(False, "plan", f"{why}; direct search found no copy", schedule=sched)
    emb = Embedding(f, g, tuple(sol[v] for v in range(n)))
    return PipelineResult(True, "direct", f"no plan ({why}); found by direct search", emb, g, schedule=sched)


def _power_params(target: TargetSpec, cfg: PipelineConfig, eps: float) -> tuple[int, int]:
    """Gadget lengths for power targets.

    Each connector needs about ``l`` reservoir vertices from its own path, and
    reservoir vertices sit at least ``2k+1`` apart, so paths get at least
    ``(2k+1)(l+2) + 2k`` vertices. ``m`` is then stretched so that the
    remainder ``t`` stays below the number of paths.
    """
    k = target.k
    l = cfg.l if cfg.l is not None else (target.l if target.kind == "path-factor" and target.l else 2 * k + 2)
    if cfg.m is not None:
        return cfg.m, l
    if target.kind == "path-factor" and target.m is not None:
        return target.m, l
    m_min = (2 * k + 1) * (l + 2) + 2 * k
    s = target.n // (m_min + l)
    if s == 0:
        return m_min, l
    return target.n // s - l, l
