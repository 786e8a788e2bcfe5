"""Command line entry point ``perturb``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .decomposition import decompose, decomposition_from_json, decomposition_to_json, verify as verify_decomposition
from .density import density_report
from .embedder import PipelineConfig, embed_perturbed, load_config
from .graph_core import (
    Embedding,
    Graph,
    HostSpec,
    format_edge_list,
    gnp_sample,
    is_embedding,
    make_host,
    read_edge_list,
)
from .harness import (
    SweepGrid,
    compare_models,
    default_master_seed,
    janson_report,
    parse_p_grid,
    plot_rows_svg,
    rows_to_csv,
    sweep,
)
from .targets import named_graph, parse_target, realize


def parse_host(text: str, n: int) -> HostSpec:
    """``kind`` or ``kind:alpha=0.3[,cliques=4]``."""
    kind, _, body = text.partition(":")
    opts = {}
    for part in filter(None, (s.strip() for s in body.split(","))):
        key, _, val = part.partition("=")
        opts[key.strip()] = val.strip()
    alpha = float(opts.get("alpha", 1.0 if kind == "complete" else 0.0))
    cliques = int(opts["cliques"]) if "cliques" in opts else None
    return HostSpec(kind.strip(), n, alpha, cliques)


def _graph_arg(text: str) -> Graph:
    if text.startswith("file:"):
        return read_edge_list(text[5:])
    if Path(text).exists():
        return read_edge_list(text)
    return named_graph(text)


def _target_or_graph(text: str, n: int | None) -> Graph:
    if ":" in text and not text.startswith("file:"):
        return realize(parse_target(text, n))
    return _graph_arg(text)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _config(args) -> PipelineConfig:
    return load_config(args.config) if getattr(args, "config", None) else PipelineConfig()


# --------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    if args.what == "gnp":
        g = gnp_sample(args.n, args.p, args.seed)
    elif args.what == "host":
        g = make_host(parse_host(args.host, args.n), args.seed)
    else:
        g = realize(parse_target(args.target, args.n))
    _emit(format_edge_list(g), args.out)
    return 0


def cmd_embed(args) -> int:
    spec = parse_target(args.target, args.n)
    host = parse_host(args.host, spec.n)
    res = embed_perturbed(spec, host, args.p, _config(args), args.seed)
    doc = {
        "ok": res.ok,
        "stage": res.stage,
        "reason": res.reason,
        "target": spec.label(),
        "host": host.kind,
        "n": spec.n,
        "p": args.p,
        "seed": args.seed,
        "map": list(res.embedding.map) if res.ok else None,
        "schedule": res.schedule.to_dict() if res.schedule else None,
    }
    _emit(_dump(doc), args.out)
    if args.union_out and res.ok:
        Path(args.union_out).write_text(format_edge_list(res.union_graph), encoding="utf-8")
    if args.emit_switch_plan:
        text = res.switch_plan.to_json() if res.switch_plan else _dump({"Z0": [], "Z1": [], "cases": {}})
        Path(args.emit_switch_plan).write_text(text, encoding="utf-8")
    if not res.ok:
        print(f"embed failed at stage {res.stage}: {res.reason}", file=sys.stderr)
        return 2
    return 0


def cmd_verify(args) -> int:
    if args.decomposition:
        dec = decomposition_from_json(Path(args.decomposition).read_text(encoding="utf-8"))
        rep = verify_decomposition(dec)
        _emit(_dump({"ok": rep.ok, "verdicts": rep.to_dict()}), args.out)
        return 0 if rep.ok else 1
    if not (args.target and args.host and args.map):
        print("verify needs --decomposition, or --target, --host and --map", file=sys.stderr)
        return 2
    target = _target_or_graph(args.target, args.n)
    host = _graph_arg(args.host)
    doc = json.loads(Path(args.map).read_text(encoding="utf-8"))
    mapping = doc["map"] if isinstance(doc, dict) else doc
    try:
        verdict = is_embedding(Embedding(target, host, tuple(mapping)))
    except ValueError as exc:
        _emit(_dump({"valid": False, "reason": str(exc), "witness": []}), args.out)
        return 1
    _emit(_dump({"valid": verdict.valid, "reason": verdict.reason, "witness": list(verdict.witness)}), args.out)
    return 0 if verdict.valid else 1


def cmd_decompose(args) -> int:
    f = _target_or_graph(args.target, args.n)
    delta = args.delta if args.delta is not None else f.max_degree()
    dec = decompose(f, delta, args.epsilon_op)
    _emit(decomposition_to_json(dec), args.out)
    return 0


def cmd_density(args) -> int:
    g = _target_or_graph(args.graph, args.n)
    rep = density_report(g, args.max_enum)
    _emit(_dump(rep.to_dict()), args.out)
    return 0


def _read_family(path: str) -> list[list[tuple[int, int]]]:
    fam = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fam.append([tuple(sorted(int(x) for x in tok.split("-"))) for tok in line.split()])
    return fam


def cmd_janson(args) -> int:
    if args.family == "k4-triangles":
        from itertools import combinations

        fam = [[(a, b), (a, c), (b, c)] for a, b, c in combinations(range(4), 3)]
    else:
        fam = _read_family(args.family)
    rep = janson_report(fam, args.p, args.gamma)
    _emit(_dump(rep.to_dict()), args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    ps = parse_p_grid(args.p, args.n)
    grid = SweepGrid(args.n, args.alpha, ps, args.target, args.host, args.trials, cfg, args.cliques)
    rows = sweep(grid, args.seed, args.workers)
    for r in rows:
        if r.reason:
            print(f"p={r.p}: {r.reason}", file=sys.stderr)
    text = rows_to_csv(rows, args.csv)
    if not args.csv:
        sys.stdout.write(text)
    if args.svg:
        plot_rows_svg(rows, args.svg, f"{args.target} on {args.host}, n={args.n}")
    return 0


def cmd_compare(args) -> int:
    cfg = _config(args)
    cmp_ = compare_models(args.n, args.alpha, args.p, args.target, args.trials, args.seed, args.host, cfg, args.workers)
    text = rows_to_csv([cmp_.perturbed, cmp_.pure], args.csv)
    if not args.csv:
        sys.stdout.write(text)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    seed_default = default_master_seed()
    ap = argparse.ArgumentParser(prog="perturb", description="Spanning structures in randomly perturbed graphs.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a graph as an edge list")
    g.add_argument("what", choices=["gnp", "host", "target"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--host", default="complete")
    g.add_argument("--target", default="ham-power:k=2")
    g.add_argument("--seed", type=int, default=seed_default)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("embed", help="run the pipeline once")
    e.add_argument("--target", required=True)
    e.add_argument("--host", required=True, help="kind[:alpha=A[,cliques=R]]")
    e.add_argument("--n", type=int)
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--seed", type=int, default=seed_default)
    e.add_argument("--config")
    e.add_argument("--out")
    e.add_argument("--union-out", help="write G_alpha plus all rounds as an edge list")
    e.add_argument("--emit-switch-plan")
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("verify", help="check an embedding or a decomposition")
    v.add_argument("--target", help="edge list, named graph, or a target spec with --n")
    v.add_argument("--n", type=int)
    v.add_argument("--host")
    v.add_argument("--map", help="JSON list, or embed output with a 'map' field")
    v.add_argument("--decomposition")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("decompose", help="dense-spot decomposition of a target")
    d.add_argument("--target", required=True)
    d.add_argument("--n", type=int)
    d.add_argument("--delta", type=int)
    d.add_argument("--epsilon-op", type=float, default=0.1)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    de = sub.add_parser("density", help="1-density and the three-vertex density")
    de.add_argument("--graph", required=True, help="K5 / C7 / P4, file:<path>, or a target spec with --n")
    de.add_argument("--n", type=int)
    de.add_argument("--max-enum", type=int, default=22)
    de.add_argument("--out")
    de.set_defaults(func=cmd_density)

    j = sub.add_parser("janson", help="Janson lower-tail bound")
    j.add_argument("--family", default="k4-triangles", help="'k4-triangles' or a file, one member per line as u-v pairs")
    j.add_argument("--p", type=float, required=True)
    j.add_argument("--gamma", type=float, default=0.5)
    j.add_argument("--out")
    j.set_defaults(func=cmd_janson)

    for name, func in (("sweep", cmd_sweep), ("compare", cmd_compare)):
        s = sub.add_parser(name, help="Monte Carlo success rates" if name == "sweep" else "perturbed vs pure model")
        s.add_argument("--n", type=int, required=True)
        s.add_argument("--alpha", type=float, required=True)
        s.add_argument("--target", required=True)
        s.add_argument("--host", default="random-min-degree")
        s.add_argument("--trials", type=int, default=50)
        s.add_argument("--seed", type=int, default=seed_default)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--config")
        s.add_argument("--csv")
        if name == "sweep":
            s.add_argument("--p", required=True, help="comma list, log:lo,hi,count or n^-2/3*10^(i/5),i=0..5")
            s.add_argument("--cliques", type=int)
            s.add_argument("--svg")
        else:
            s.add_argument("--p", type=float, required=True)
        s.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
