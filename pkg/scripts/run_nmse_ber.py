"""NMSE and BER versus SNR for the proposed receiver, the EP baseline and known CSI.

Writes one CSV per scheme plus a summary table. Worker processes follow
ZPOTFS_WORKERS.

    python3 scripts/run_nmse_ber.py --preset desk --frames 200 --outdir results/
"""
import argparse
from pathlib import Path

from zpotfs.config import resolve_config
from zpotfs.harness import aggregate, run_experiment, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--preset", default="desk")
    ap.add_argument("--frames", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    overrides = {k: v for k, v in (("frames", args.frames), ("seed", args.seed)) if v is not None}
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for scheme in ("proposed", "ep", "known-csi"):
        cfg, manifest = resolve_config(preset=args.preset, overrides={**overrides, "scheme": scheme})
        records = run_experiment(cfg)
        write_csv(records, outdir / f"{args.preset}-{scheme}.csv", manifest)
        summary.update(aggregate(records))

    print(f"{'scheme':>10} {'snr':>5} {'nmse1':>11} {'nmse2':>11} {'ber1':>11} {'ber2':>11}")
    for (scheme, snr), row in sorted(summary.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        print(f"{scheme:>10} {snr:5.1f} {row['nmse1']:11.3e} {row['nmse2']:11.3e} {row['ber1']:11.3e} {row['ber2']:11.3e}")


if __name__ == "__main__":
    main()
