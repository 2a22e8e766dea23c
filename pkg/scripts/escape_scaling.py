"""How escape time and the unique-vertex walk cost scale with lattice size.

Sweeps single-vertex escape on tori and grids plus the unique-vertex
search cost on odd tori, printing escape_time / ln N and
h_unique / (N ln N).  Both ratios should sit in a narrow band as N
grows; these are the scaling facts the partitioned search leans on when
it sizes sub-grids.

Usage: python3 scripts/escape_scaling.py [--sizes 4,8,16,32] [--out table.csv]
"""

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from walklab.graphs import build_grid, build_torus
from walklab.markov import walk_from_graph
from walklab.reporting import write_csv
from walklab.spectral import escape_time_subset
from walklab.szegedy import h_unique

FIELDS = ("kind", "n", "N", "escape", "escape_over_logN", "h_unique", "h_unique_norm")


def escape_row(kind: str, n: int) -> dict:
    graph = build_torus(n) if kind == "torus" else build_grid(n)
    P = walk_from_graph(graph)
    N = n * n
    esc = escape_time_subset(P, [0])
    return {
        "kind": kind, "n": n, "N": N,
        "escape": esc, "escape_over_logN": esc / math.log(N),
        "h_unique": None, "h_unique_norm": None,
    }


def unique_cost_row(n: int) -> dict:
    N = n * n
    h = h_unique(n)
    return {
        "kind": "torus-unique", "n": n, "N": N,
        "escape": None, "escape_over_logN": None,
        "h_unique": h, "h_unique_norm": h / (N * math.log(N)),
    }


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,8,16,32", help="lattice sides for the single-vertex escape sweep")
    ap.add_argument("--unique-sizes", default="5,9,17,33", help="odd torus sides for the unique-cost sweep")
    ap.add_argument("--out", default=None, help="write the rows as CSV")
    args = ap.parse_args()

    rows = []
    for n in (int(t) for t in args.sizes.split(",") if t):
        rows.append(escape_row("torus", n))
        rows.append(escape_row("grid", n))
    for n in (int(t) for t in args.unique_sizes.split(",") if t):
        rows.append(unique_cost_row(n))

    print(f"{'kind':14}{'n':>5}{'N':>7}{'escape':>12}{'esc/lnN':>10}{'h_unique':>10}{'h/(NlnN)':>10}")
    for r in rows:
        esc = f"{r['escape']:.5f}" if r["escape"] is not None else "-"
        eon = f"{r['escape_over_logN']:.4f}" if r["escape_over_logN"] is not None else "-"
        hu = str(r["h_unique"]) if r["h_unique"] is not None else "-"
        hn = f"{r['h_unique_norm']:.4f}" if r["h_unique_norm"] is not None else "-"
        print(f"{r['kind']:14}{r['n']:>5}{r['N']:>7}{esc:>12}{eon:>10}{hu:>10}{hn:>10}")

    for kind in ("torus", "grid", "torus-unique"):
        vals = [
            r["escape_over_logN"] if kind != "torus-unique" else r["h_unique_norm"]
            for r in rows
            if r["kind"] == kind
        ]
        if len(vals) > 1:
            print(f"{kind}: band ratio {max(vals) / min(vals):.4f}")

    if args.out:
        print(f"wrote {write_csv(args.out, rows, FIELDS)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
