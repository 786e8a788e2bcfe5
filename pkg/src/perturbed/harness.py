"""Bound calculators, exhaustive oracles and Monte Carlo sweeps."""

from __future__ import annotations

import csv
import io
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from pathlib import Path

import networkx as nx
from scipy.stats import binomtest

from .embedder import PipelineConfig, embed_perturbed
from .graph_core import Graph, HostSpec, derive_seed, make_host
from .targets import TargetSpec, parse_target, realize

__all__ = [
    "epsilon_of",
    "JansonReport",
    "janson_report",
    "seqdep_bound",
    "oracle_contains",
    "oracle_contains_nx",
    "SweepGrid",
    "SweepRow",
    "sweep",
    "rows_to_csv",
    "plot_rows_svg",
    "compare_models",
    "Comparison",
    "wilson_interval",
    "default_master_seed",
    "CSV_FIELDS",
    "parse_p_grid",
]

CSV_FIELDS = (
    "n",
    "alpha",
    "p",
    "target",
    "host",
    "trials",
    "successes",
    "rate",
    "ci_lo",
    "ci_hi",
    "fail_round1",
    "fail_hall",
    "fail_other",
    "seed",
)


def default_master_seed() -> int:
    return int(os.environ.get("PERTURB_SEED", "0"))


# --------------------------------------------------------------------------
# analytic bounds


def epsilon_of(alpha, delta: int):
    """``(alpha / (4 delta)) ** (2 delta)``; exact when ``alpha`` is a Fraction."""
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if isinstance(alpha, (Fraction, int)):
        return (Fraction(alpha) / (4 * delta)) ** (2 * delta)
    return (alpha / (4 * delta)) ** (2 * delta)


@dataclass(frozen=True)
class JansonReport:
    mu: float
    delta: float
    gamma: float
    bound: float
    pairs: int

    def to_dict(self) -> dict:
        return asdict(self)


def janson_report(family, p: float, gamma: float) -> JansonReport:
    """Lower-tail bound for the number of family members present in G(n, p).

    ``delta`` sums ``p^(e_i + e_j - e_ij)`` over ordered pairs i != j that
    share at least one edge; candidate pairs come from an edge index.
    """
    if not (0 < gamma < 1):
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if not (0 <= p <= 1):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    edge_sets = [frozenset(g.edges) if isinstance(g, Graph) else frozenset(tuple(sorted(e)) for e in g) for g in family]
    mu = math.fsum(p ** len(es) for es in edge_sets)
    index: dict = {}
    for i, es in enumerate(edge_sets):
        for e in es:
            index.setdefault(e, []).append(i)
    terms = []
    pairs = 0
    for i, es in enumerate(edge_sets):
        partners = set()
        for e in es:
            partners.update(index[e])
        partners.discard(i)
        for j in partners:
            shared = len(es & edge_sets[j])
            terms.append(p ** (len(es) + len(edge_sets[j]) - shared))
            pairs += 1
    delta = math.fsum(terms)
    bound = 1.0 if mu == 0 else math.exp(-(gamma**2) * mu**2 / (2 * (mu + delta)))
    return JansonReport(mu, delta, gamma, bound, pairs)


def seqdep_bound(delta: float, gamma: float, m: int) -> float:
    """``exp(-gamma^2 delta m / 3)`` for sums of sequentially dependent indicators."""
    if not (0 < gamma < 1):
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if not (0 <= delta <= 1):
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return math.exp(-(gamma**2) * delta * m / 3)


# --------------------------------------------------------------------------
# exhaustive oracles (deliberately separate from the pipeline's search)

_ORACLE_PERM_CAP = 10
_ORACLE_FACTOR_CAP = 14


def _oracle_target_edges(t: TargetSpec) -> tuple[int, set]:
    n = t.n
    if t.kind == "ham-power":
        es = set()
        for i in range(n):
            for d in range(1, t.k + 1):
                j = (i + d) % n
                if i != j:
                    es.add((min(i, j), max(i, j)))
        return n, es
    if t.kind == "factor":
        name = t.h_name
        kind, r = name[0], int(name[1:])
        if kind == "K":
            block = {(a, b) for a in range(r) for b in range(a + 1, r)}
        elif kind == "C":
            block = {(min(i, (i + 1) % r), max(i, (i + 1) % r)) for i in range(r)}
        else:
            block = {(i, i + 1) for i in range(r - 1)}
        if n % r:
            raise ValueError("factor does not tile n")
        return n, {(a + o, b + o) for o in range(0, n, r) for a, b in block}
    g = realize(t)
    return g.n, set(g.edges)


def _perm_search(host: Graph, n: int, edges: set) -> bool:
    back = [[] for _ in range(n)]
    for a, b in edges:
        back[max(a, b)].append(min(a, b))
    img = [-1] * n
    used = [False] * host.n

    def go(i: int) -> bool:
        if i == n:
            return True
        for x in range(host.n):
            if used[x]:
                continue
            if all(host.has_edge(img[j], x) for j in back[i]):
                img[i] = x
                used[x] = True
                if go(i + 1):
                    return True
                used[x] = False
        return False

    return go(0)


def _factor_search(host: Graph, r: int, block: set) -> bool:
    perms = list(permutations(range(r)))

    def is_copy(vs) -> bool:
        return any(all(host.has_edge(vs[pm[a]], vs[pm[b]]) for a, b in block) for pm in perms)

    free = set(range(host.n))

    def go() -> bool:
        if not free:
            return True
        v = min(free)
        rest = sorted(free - {v})
        for others in combinations(rest, r - 1):
            vs = (v,) + others
            if is_copy(vs):
                free.difference_update(vs)
                if go():
                    return True
                free.update(vs)
        return False

    return go()


def oracle_contains(g: Graph, target: TargetSpec) -> bool:
    """Exhaustive containment test of the realised target in ``g``."""
    n, edges = _oracle_target_edges(target)
    if n != g.n:
        raise ValueError(f"target has {n} vertices, graph has {g.n}")
    if len(edges) > g.num_edges:
        return False
    if target.kind == "factor":
        if n > _ORACLE_FACTOR_CAP:
            raise ValueError(f"factor oracle limited to n <= {_ORACLE_FACTOR_CAP}")
        r = int(target.h_name[1:])
        block = {(a, b) for a, b in edges if a < r and b < r}
        return _factor_search(g, r, block)
    if n > _ORACLE_PERM_CAP:
        raise ValueError(f"permutation oracle limited to n <= {_ORACLE_PERM_CAP}")
    return _perm_search(g, n, edges)


def oracle_contains_nx(g: Graph, target: TargetSpec) -> bool:
    """Second, independent oracle: networkx monomorphism search."""
    n, edges = _oracle_target_edges(target)
    big = nx.Graph()
    big.add_nodes_from(range(g.n))
    big.add_edges_from(g.edges)
    small = nx.Graph()
    small.add_nodes_from(range(n))
    small.add_edges_from(edges)
    return nx.algorithms.isomorphism.GraphMatcher(big, small).subgraph_is_monomorphic()


# --------------------------------------------------------------------------
# sweeps


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    if trials == 0:
        return (float("nan"), float("nan"))
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return (float(ci.low), float(ci.high))


@dataclass(frozen=True)
class SweepGrid:
    n: int
    alpha: float
    ps: tuple[float, ...]
    target: str
    host: str
    trials: int
    config: PipelineConfig = field(default_factory=PipelineConfig)
    cliques: int | None = None


@dataclass(frozen=True)
class SweepRow:
    n: int
    alpha: float
    p: float
    target: str
    host: str
    trials: int
    successes: int
    rate: float
    ci_lo: float
    ci_hi: float
    fail_round1: int
    fail_hall: int
    fail_other: int
    seed: int
    reason: str = ""

    def csv_values(self) -> list[str]:
        def num(x):
            return "" if isinstance(x, float) and math.isnan(x) else repr(float(x))

        return [
            str(self.n),
            repr(float(self.alpha)),
            repr(float(self.p)),
            self.target,
            self.host,
            str(self.trials),
            str(self.successes),
            num(self.rate),
            num(self.ci_lo),
            num(self.ci_hi),
            str(self.fail_round1),
            str(self.fail_hall),
            str(self.fail_other),
            str(self.seed),
        ]


def _trial(args) -> str:
    target_text, n, host_kind, alpha, cliques, p, config, seed = args
    spec = parse_target(target_text, n)
    res = embed_perturbed(spec, HostSpec(host_kind, n, alpha, cliques), p, config, seed)
    return "ok" if res.ok else res.stage


def _tally(outcomes: list[str]) -> tuple[int, int, int, int]:
    ok = sum(o == "ok" for o in outcomes)
    r1 = sum(o == "round1" for o in outcomes)
    hall = sum(o == "hall" for o in outcomes)
    return ok, r1, hall, len(outcomes) - ok - r1 - hall


def _feasibility(grid: SweepGrid) -> str:
    try:
        spec = parse_target(grid.target, grid.n)
        realize(spec)
        make_host(HostSpec(grid.host, grid.n, grid.alpha, grid.cliques), 0)
    except (ValueError, RuntimeError, KeyError) as exc:
        return f"infeasible: {exc}"
    return ""


def _run_all(jobs: list, parallelism: int) -> list[str]:
    if parallelism <= 1 or len(jobs) < 2:
        return [_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as ex:
        return list(ex.map(_trial, jobs, chunksize=max(1, len(jobs) // (4 * parallelism))))


def sweep(grid: SweepGrid, master_seed: int | None = None, parallelism: int = 1) -> list[SweepRow]:
    """One row per p. Trial i of every cell uses ``derive_seed(master, i)``."""
    seed = default_master_seed() if master_seed is None else master_seed
    reason = _feasibility(grid)
    rows = []
    nan = float("nan")
    if reason:
        for p in sorted(grid.ps):
            rows.append(SweepRow(grid.n, grid.alpha, p, grid.target, grid.host, 0, 0, nan, nan, nan, 0, 0, 0, seed, reason))
        return rows
    seeds = [derive_seed(seed, i) for i in range(grid.trials)]
    jobs = [
        (grid.target, grid.n, grid.host, grid.alpha, grid.cliques, p, grid.config, s)
        for p in sorted(grid.ps)
        for s in seeds
    ]
    outcomes = _run_all(jobs, parallelism)
    for ci, p in enumerate(sorted(grid.ps)):
        chunk = outcomes[ci * grid.trials : (ci + 1) * grid.trials]
        ok, r1, hall, other = _tally(chunk)
        lo, hi = wilson_interval(ok, grid.trials)
        rate = ok / grid.trials if grid.trials else nan
        rows.append(SweepRow(grid.n, grid.alpha, p, grid.target, grid.host, grid.trials, ok, rate, lo, hi, r1, hall, other, seed))
    return rows


def rows_to_csv(rows, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in sorted(rows, key=lambda r: (r.n, r.alpha, r.p, r.target, r.host)):
        w.writerow(r.csv_values())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def plot_rows_svg(rows, path, title: str = "") -> None:
    """Success rate with Wilson intervals against p, one line per host kind."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "perturbed"
    fig, ax = plt.subplots(figsize=(6, 4))
    by_host: dict = {}
    for r in rows:
        if r.trials:
            by_host.setdefault(r.host, []).append(r)
    for host in sorted(by_host):
        rs = sorted(by_host[host], key=lambda r: r.p)
        ps = [r.p for r in rs]
        rates = [r.rate for r in rs]
        err = [[r.rate - r.ci_lo for r in rs], [r.ci_hi - r.rate for r in rs]]
        ax.errorbar(ps, rates, yerr=err, marker="o", capsize=3, label=host)
    ax.set_xscale("log")
    ax.set_xlabel("p")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.05, 1.05)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


@dataclass(frozen=True)
class Comparison:
    perturbed: SweepRow
    pure: SweepRow

    @property
    def difference(self) -> float:
        return self.perturbed.rate - self.pure.rate


def compare_models(
    n: int,
    alpha: float,
    p: float,
    target: str,
    trials: int,
    seed: int | None = None,
    host: str = "random-min-degree",
    config: PipelineConfig | None = None,
    parallelism: int = 1,
) -> Comparison:
    """Perturbed versus pure model on common per-trial seeds."""
    cfg = config or PipelineConfig()
    seed = default_master_seed() if seed is None else seed
    pert = sweep(SweepGrid(n, alpha, (p,), target, host, trials, cfg), seed, parallelism)[0]
    pure = sweep(SweepGrid(n, 0.0, (p,), target, "empty", trials, cfg), seed, parallelism)[0]
    return Comparison(pert, pure)


def parse_p_grid(text: str, n: int) -> tuple[float, ...]:
    """Comma list of floats, or ``log:lo,hi,count``, or ``n^e*10^(i/d),i=a..b``."""
    text = text.strip()
    mt = re.fullmatch(r"n\^(-?[\d./]+)\*10\^\(i/(\d+)\),i=(-?\d+)\.\.(-?\d+)", text.replace(" ", ""))
    if mt:
        e = float(Fraction(mt.group(1)))
        d, a, b = int(mt.group(2)), int(mt.group(3)), int(mt.group(4))
        return tuple(min(1.0, n**e * 10 ** (i / d)) for i in range(a, b + 1))
    if text.startswith("log:"):
        lo, hi, cnt = text[4:].split(",")
        lo, hi, cnt = float(lo), float(hi), int(cnt)
        if cnt == 1:
            return (lo,)
        return tuple(lo * (hi / lo) ** (i / (cnt - 1)) for i in range(cnt))
    return tuple(float(x) for x in text.split(",") if x.strip())
