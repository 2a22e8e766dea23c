"""Monte Carlo locality checks: how far does a T-step walk actually get?

Three experiments in one run: the infinite-line walk staying within
ceil(4 sqrt(T)) of its start, the same for the infinite grid (both
coordinates), and sub-grid coverage on a marked torus, where visiting a
marked vertex is related to landing in a marked sub-grid through the
p >= p_hat/5 and chain inequalities.

Usage: python3 scripts/locality_experiments.py [--trials 100000] [--seed 1]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from walklab.locality import (
    GRID_BOUND,
    LINE_BOUND,
    grid_localization,
    line_localization,
    subgrid_coverage,
)
from walklab.search import parse_marked_spec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--T", default="25,100,400", help="step counts for the line/grid sweep")
    args = ap.parse_args()

    Ts = [int(t) for t in args.T.split(",") if t]

    print(f"line walk, {args.trials} trials (floor {LINE_BOUND:.6f}):")
    print(f"{'T':>6}{'threshold':>11}{'fraction':>11}{'wilson_low':>12}{'tail':>10}")
    for T in Ts:
        r = line_localization(T, args.trials, args.seed)
        print(
            f"{T:>6}{r.threshold:>11}{r.localized_fraction:>11.6f}"
            f"{r.wilson_low:>12.6f}{r.end_tail_fraction:>10.6f}"
        )

    print(f"\ngrid walk, {args.trials} trials (floor {GRID_BOUND:.6f}):")
    print(f"{'T':>6}{'threshold':>11}{'fraction':>11}{'wilson_low':>12}")
    for T in Ts:
        r = grid_localization(T, args.trials, args.seed)
        print(f"{T:>6}{r.threshold:>11}{r.localized_fraction:>11.6f}{r.wilson_low:>12.6f}")

    print(f"\nsub-grid coverage, n=24 torus, one marked row, {args.trials} trials:")
    marked = parse_marked_spec("rows:0", 24)
    for T in (1, 2, 4):
        r = subgrid_coverage(24, marked, T, args.trials, args.seed)
        print(
            f"  T={T}: d={r.d} blocks={r.n_blocks}  p_hat={r.p_hat:.5f}  "
            f"p_ml={r.p_ml:.5f}  p_Gl={r.p_Gl:.5f}  p_G={r.p_G:.5f} (exact)"
        )
        print(
            f"        chain p_hat - 2/745 <= p_ml <= p_Gl <= 4 p_G: "
            f"{r.p_hat - 2.0 / 745.0:.5f} <= {r.p_ml:.5f} <= {r.p_Gl:.5f} <= {4.0 * r.p_G:.5f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
