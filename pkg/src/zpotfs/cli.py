"""Command line entry point: ``zpotfs {ber,nmse,papr,overhead}``."""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .config import FIG3_GRIDS, resolve_config
from .errors import InvalidConfiguration
from .harness import (
    aggregate,
    ccdf,
    grid_for,
    overhead_table,
    papr_at_ccdf,
    papr_samples,
    records_to_csv,
    run_experiment,
    write_csv,
)

PAPR_THRESHOLDS = np.arange(0.0, 16.0 + 1e-9, 0.25)


def _grids(text: str):
    out = []
    for item in text.split(","):
        m, _, n = item.strip().lower().partition("x")
        out.append((int(m), int(n)))
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; keys mirror the flags")
    common.add_argument("--preset", choices=["paper-fig2", "paper-fig3", "desk"])
    common.add_argument("--m", type=int, help="delay bins M")
    common.add_argument("--n", type=int, help="Doppler bins N")
    common.add_argument("--delta-f-khz", type=float)
    common.add_argument("--fc-ghz", type=float)
    common.add_argument("--speed-kmh", type=float)
    common.add_argument("--snr-db", help="comma separated SNR list in dB")
    common.add_argument("--frames", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--scheme", choices=["proposed", "ep", "known-csi"])
    common.add_argument("--profile", help="power-delay profile file (delay_ns, power_db per line)")
    common.add_argument("--out", help="output CSV path (default: stdout)")

    parser = argparse.ArgumentParser(prog="zpotfs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ber", parents=[common], help="BER vs SNR Monte-Carlo run")
    sub.add_parser("nmse", parents=[common], help="NMSE vs SNR Monte-Carlo run")
    papr = sub.add_parser("papr", parents=[common], help="PAPR CCDF of proposed and EP frames")
    papr.add_argument("--grids", type=_grids, help="e.g. 32x32,64x64 (default: --m x --n)")
    over = sub.add_parser("overhead", parents=[common], help="pilot overhead table")
    over.add_argument("--grids", type=_grids, help="e.g. 32x32,64x64 (default: the figure grid sweep)")
    return parser


def _resolve(args):
    overrides = {
        k: getattr(args, k)
        for k in ("m", "n", "delta_f_khz", "fc_ghz", "speed_kmh", "snr_db", "frames", "seed", "scheme", "profile", "out")
        if getattr(args, k, None) is not None
    }
    if isinstance(overrides.get("snr_db"), str):
        overrides["snr_db"] = tuple(float(x) for x in overrides["snr_db"].split(",") if x.strip())
    return resolve_config(args.config, overrides, args.preset)


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args, metric: str) -> int:
    cfg, manifest = _resolve(args)
    records = run_experiment(cfg)
    if cfg.out:
        write_csv(records, cfg.out, manifest)
    else:
        sys.stdout.write(records_to_csv(records, manifest))
    cols = ("nmse1", "nmse2") if metric == "nmse" else ("ber1", "ber2")
    print(f"{'scheme':>10} {'snr_db':>7} {'frames':>6} {cols[0]:>12} {cols[1]:>12}", file=sys.stderr)
    for (scheme, snr), row in sorted(aggregate(records).items()):
        print(f"{scheme:>10} {snr:7.2f} {row['frames']:6d} {row[cols[0]]:12.4e} {row[cols[1]]:12.4e}", file=sys.stderr)
    return 0


def cmd_papr(args) -> int:
    cfg, _ = _resolve(args)
    grids = args.grids or ((cfg.m, cfg.n),)
    rows = []
    for M, N in grids:
        p = grid_for(M, N, cfg.delta_f_khz * 1e3, cfg.fc_ghz * 1e9, cfg.speed_kmh, cfg.profile_table())
        for scheme in ("proposed", "ep"):
            values = papr_samples(p, scheme, cfg.frames, cfg.seed)
            print(f"{scheme:>9} {M:4d}x{N:<4d} PAPR@1e-2 = {papr_at_ccdf(values, 1e-2):6.2f} dB", file=sys.stderr)
            rows += [(scheme, M, N, repr(t), repr(c)) for t, c in ccdf(values, PAPR_THRESHOLDS)]
    lines = ["scheme,M,N,threshold_db,ccdf"] + [",".join(map(str, r)) for r in rows]
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def cmd_overhead(args) -> int:
    cfg, _ = _resolve(args)
    grids = args.grids or FIG3_GRIDS
    table = overhead_table(grids, cfg.delta_f_khz * 1e3, cfg.fc_ghz * 1e9, cfg.speed_kmh, cfg.profile_table())
    header = ("M", "N", "l_max", "k_max", "proposed", "ep")
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(table)
    print("".join(f"{h:>9}" for h in header))
    for row in table:
        print("".join(f"{v:>9}" for v in row))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("ber", "nmse"):
            return cmd_sweep(args, args.command)
        if args.command == "papr":
            return cmd_papr(args)
        return cmd_overhead(args)
    except (InvalidConfiguration, OSError) as exc:
        print(f"zpotfs: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
