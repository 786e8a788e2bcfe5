"""Edge counts of the connector gadget against the bound l(k - 1/2)."""

from __future__ import annotations

from perturbed.targets import connector_gadget


def main() -> None:
    print(" k   l  edges  l(k-1/2)  holds")
    for k in (2, 3, 4):
        for l in range(2 * k + 2, 25):
            e = connector_gadget(k, l).graph.num_edges
            bound = l * (k - 0.5)
            print(f"{k:2d} {l:3d} {e:6d} {bound:9.1f}  {'yes' if e <= bound else 'NO'}")
    print("closed form: edges = (k-1)l + k(k+1)/2, so the bound holds iff l >= k(k+1)")


if __name__ == "__main__":
    main()
