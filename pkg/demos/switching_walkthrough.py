"""Reservoir sets, one switch, and the auxiliary-graph round trip on 7 vertices.

Host: a 6-cycle plus vertex 6 joined to 1 and 5. The target is a perfect
matching on 0..5 plus an isolated vertex 6, already embedded identically
except for vertex 6.
"""

from __future__ import annotations

from perturbed.absorption import build_auxiliary, build_reservoirs, resolve_switching, switch_one
from perturbed.graph_core import Embedding, Graph, is_embedding

MATCHING = [(0, 1), (2, 3), (4, 5)]


def main() -> None:
    host = Graph(7, [(i, (i + 1) % 6) for i in range(6)] + [(6, 1), (6, 5)])
    f = Graph(7, MATCHING)
    fhat = Embedding(f, Graph(7, MATCHING), (0, 1, 2, 3, 4, 5, None))
    res = build_reservoirs(host, fhat, [0, 2, 4])
    for u in range(7):
        print(f"R({u}) = {sorted(res.R[u])}")

    out = switch_one(fhat, host, res, 6, 0)
    print("switch u=6 for w=0:", out.map)

    aux = build_auxiliary(host, fhat, res, [6])
    print("B(6) =", sorted(aux.b_sets[6]))
    gp = Embedding(f, aux.g_aux, (0, 1, 2, 3, 4, 5, 7))
    g, plan = resolve_switching(aux, gp, fhat)
    print("resolved map:", g.map, "valid:", bool(is_embedding(g)))
    print(plan.to_json())


if __name__ == "__main__":
    main()
