"""PAPR at CCDF = 1e-2 per grid and the pilot overhead table.

    python3 scripts/run_papr_overhead.py --frames 2000
"""
import argparse

from zpotfs.config import FIG3_GRIDS
from zpotfs.harness import grid_for, overhead_table, papr_at_ccdf, papr_samples


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--frames", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("PAPR (dB) exceeded with probability 1e-2")
    print(f"{'grid':>9} {'proposed':>9} {'ep':>9}")
    for M, N in ((32, 32), (64, 64)):
        p = grid_for(M, N)
        vals = [papr_at_ccdf(papr_samples(p, s, args.frames, args.seed), 1e-2) for s in ("proposed", "ep")]
        print(f"{M:>4}x{N:<4} {vals[0]:9.2f} {vals[1]:9.2f}")

    print("\npilot + guard bins")
    print(f"{'M':>5} {'N':>4} {'l_max':>6} {'k_max':>6} {'proposed':>9} {'ep':>6}")
    for M, N, l_max, k_max, zp, ep in overhead_table(FIG3_GRIDS):
        print(f"{M:5d} {N:4d} {l_max:6d} {k_max:6d} {zp:9d} {ep:6d}")


if __name__ == "__main__":
    main()
