"""Monte-Carlo driver: per-trial simulation, metrics, CSV output and aggregation."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .channel import add_awgn, apply_channel, derive_spread, generate_eva_jakes, noise_variance
from .config import ExperimentConfig, RunManifest
from .ep import EpConfig, ep_build_frame, ep_detect, ep_estimate, n_ep_data_bits, overhead_ep
from .errors import InvalidArgument
from .frame import assemble_frame, data_symbols, n_data_bits, overhead_proposed, qam4_demod
from .grid import GridParams, dzt, idzt
from .mrc import DetectorConfig
from .omp import OmpConfig
from .receiver import ReceiverConfig, detect_with, run_receiver

WORKERS_ENV = "ZPOTFS_WORKERS"
CSV_FIELDS = ("seed", "scheme", "M", "N", "snr_db", "nmse1", "nmse2", "ber1", "ber2", "papr_db", "support1", "support2")


@dataclass
class TrialRecord:
    seed: int
    scheme: str
    M: int
    N: int
    snr_db: float
    nmse1: float
    nmse2: float
    ber1: float
    ber2: float
    papr_db: float
    support1: int
    support2: int
    error: str | None = None


def nmse(h_hat, h) -> float:
    h = np.asarray(h)
    energy = float(np.vdot(h, h).real)
    if energy == 0:
        raise InvalidArgument("true channel is all zero")
    e = np.asarray(h_hat) - h
    return float(np.vdot(e, e).real) / energy


def papr(s) -> float:
    """Peak-to-average power ratio in dB."""
    power = np.abs(np.asarray(s)) ** 2
    mean = power.mean() if power.size else 0.0
    if mean == 0:
        raise InvalidArgument("PAPR of an all-zero signal is undefined")
    return float(10 * np.log10(power.max() / mean))


def ccdf(values, thresholds):
    """``[(t, P(value > t))]`` for every threshold."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        raise InvalidArgument("CCDF of an empty sample")
    thresholds = np.asarray(thresholds, dtype=float)
    exceed = values.size - np.searchsorted(values, thresholds, side="right")
    return [(float(t), float(c) / values.size) for t, c in zip(thresholds, exceed)]


def papr_at_ccdf(values, prob: float) -> float:
    """Level exceeded with probability ``prob``."""
    return float(np.quantile(np.asarray(values, dtype=float), 1 - prob))


def trial_seed(base_seed: int, snr_index: int, frame_index: int) -> int:
    ss = np.random.SeedSequence(base_seed, spawn_key=(snr_index, frame_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_streams(seed: int):
    """Independent generators for bits, channel and noise.

    Keeping them separate makes every scheme see the same channel and noise at a
    given trial seed.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


def receiver_config(cfg: ExperimentConfig) -> ReceiverConfig:
    return ReceiverConfig(
        omp=OmpConfig(max_taps=cfg.max_taps, residual_tol_factor=cfg.omp_delta),
        detector=DetectorConfig(cfg.mrc_iterations, cfg.mrc_tol),
        warm_start=cfg.warm_start,
    )


def _ber(bits, symbols) -> float:
    return float(np.mean(qam4_demod(symbols) != bits))


def run_trial(cfg: ExperimentConfig, snr_index: int, frame_index: int, p: GridParams | None = None) -> TrialRecord:
    p = p or cfg.grid()
    snr = float(cfg.snr_db[snr_index])
    seed = trial_seed(cfg.seed, snr_index, frame_index)
    rng_bits, rng_chan, rng_noise = trial_streams(seed)
    base = dict(seed=seed, scheme=cfg.scheme, M=p.M, N=p.N, snr_db=snr)
    try:
        h = generate_eva_jakes(p, rng_chan, cfg.speed_kmh, cfg.profile_table())
        sigma2 = noise_variance(snr)
        if cfg.scheme == "ep":
            ep_cfg = EpConfig(threshold_factor=cfg.ep_threshold)
            bits = rng_bits.integers(0, 2, n_ep_data_bits(p), dtype=np.int8)
            X = ep_build_frame(bits, p, ep_cfg)
            s = idzt(X, p)
            r, sigma2 = add_awgn(apply_channel(s, h, p), snr, rng_noise)
            h_hat = ep_estimate(dzt(r, p), p, ep_cfg, sigma2)
            ber = _ber(bits, ep_detect(r, h_hat, p, ep_cfg, sigma2))
            err = nmse(h_hat, h)
            support = int(np.count_nonzero(h_hat))
            return TrialRecord(**base, nmse1=err, nmse2=err, ber1=ber, ber2=ber,
                               papr_db=papr(s), support1=support, support2=support)

        bits = rng_bits.integers(0, 2, n_data_bits(p), dtype=np.int8)
        X, X_d, X_p = assemble_frame(bits, p)
        s_p = idzt(X_p, p)
        s = idzt(X_d, p) + s_p
        r, sigma2 = add_awgn(apply_channel(s, h, p), snr, rng_noise)
        rcfg = receiver_config(cfg)
        if cfg.scheme == "known-csi":
            det = detect_with(r, h, s_p, p, rcfg.detector)
            ber = _ber(bits, det.symbols)
            support = int(np.count_nonzero(h))
            return TrialRecord(**base, nmse1=0.0, nmse2=0.0, ber1=ber, ber2=ber,
                               papr_db=papr(s), support1=support, support2=support)
        out = run_receiver(r, s_p, p, sigma2, rcfg)
        return TrialRecord(
            **base,
            nmse1=nmse(out.h_hat_step1, h),
            nmse2=nmse(out.h_hat_step2, h),
            ber1=_ber(bits, data_symbols(out.X_dd_step1, p)),
            ber2=_ber(bits, data_symbols(out.X_dd_final, p)),
            papr_db=papr(s),
            support1=out.diagnostics["support1"],
            support2=out.diagnostics["support2"],
        )
    except Exception as exc:  # noqa: BLE001 - a failed trial is recorded, not fatal
        nan = math.nan
        return TrialRecord(**base, nmse1=nan, nmse2=nan, ber1=nan, ber2=nan, papr_db=nan,
                           support1=0, support2=0, error=f"{type(exc).__name__}: {exc}")


def _run_task(task):
    cfg, i, j = task
    return run_trial(cfg, i, j)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[TrialRecord]:
    """Run every (SNR, frame) trial. Output order is (SNR index, frame index) for any worker count."""
    cfg.grid()
    tasks = [(cfg, i, j) for i in range(len(cfg.snr_db)) for j in range(cfg.frames)]
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records, manifest: RunManifest | None = None) -> str:
    """CSV text with the manifest as leading ``#`` comments. Failed trials are counted, not written."""
    buf = io.StringIO()
    failed = [r for r in records if r.error]
    if manifest is not None:
        buf.write(manifest.to_text(include_timestamp=False, prefix="# "))
    buf.write(f"# failed_trials = {len(failed)}\n")
    for r in failed:
        buf.write(f"# failed seed={r.seed} snr_db={r.snr_db!r}: {r.error}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        if not r.error:
            writer.writerow([_fmt(v) for v in astuple(r)[: len(CSV_FIELDS)]])
    return buf.getvalue()


def write_csv(records, path, manifest: RunManifest | None = None) -> Path:
    path = Path(path)
    try:
        path.write_text(records_to_csv(records, manifest))
        if manifest is not None:
            path.with_name(path.name + ".manifest").write_text(manifest.to_text(include_timestamp=True))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_csv(path) -> list[TrialRecord]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    types = {f.name: f.type for f in fields(TrialRecord)}
    out = []
    for row in csv.DictReader(lines):
        kw = {}
        for k, v in row.items():
            t = types[k]
            kw[k] = int(v) if t == "int" else float(v) if t == "float" else v
        out.append(TrialRecord(**kw))
    return out


class RunningMean:
    """Welford accumulator."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, x: float):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)

    @property
    def variance(self) -> float:
        return self._m2 / (self.count - 1) if self.count > 1 else 0.0


def aggregate(records) -> dict:
    """Mean metrics per (scheme, snr_db). Trials are sorted first so the result ignores arrival order."""
    metrics = ("nmse1", "nmse2", "ber1", "ber2", "papr_db")
    groups: dict = {}
    for r in sorted(records, key=lambda r: (r.scheme, r.snr_db, r.seed)):
        g = groups.setdefault((r.scheme, r.snr_db), {"failed": 0, **{m: RunningMean() for m in metrics}})
        if r.error:
            g["failed"] += 1
            continue
        for m in metrics:
            g[m].add(getattr(r, m))
    return {
        key: {"frames": g["nmse1"].count, "failed": g["failed"], **{m: g[m].mean for m in metrics}}
        for key, g in groups.items()
    }


def papr_samples(p: GridParams, scheme: str, frames: int, seed: int = 0) -> np.ndarray:
    """PAPR (dB) of ``frames`` random transmit frames; the channel is not involved."""
    out = np.empty(frames)
    for j in range(frames):
        rng_bits = trial_streams(trial_seed(seed, 0, j))[0]
        if scheme == "ep":
            X = ep_build_frame(rng_bits.integers(0, 2, n_ep_data_bits(p), dtype=np.int8), p)
        elif scheme in ("proposed", "known-csi"):
            X = assemble_frame(rng_bits.integers(0, 2, n_data_bits(p), dtype=np.int8), p)[0]
        else:
            raise InvalidArgument(f"unknown scheme {scheme!r}")
        out[j] = papr(idzt(X, p))
    return out


def grid_for(M, N, delta_f=15e3, fc=4e9, speed_kmh=500.0, profile=None) -> GridParams:
    args = (M, N, delta_f, fc, speed_kmh) + ((profile,) if profile else ())
    l_max, k_max = derive_spread(*args)
    return GridParams(M, N, delta_f, fc, l_max, k_max)


def overhead_table(grids, delta_f=15e3, fc=4e9, speed_kmh=500.0, profile=None):
    """Rows ``(M, N, l_max, k_max, proposed, ep)`` of pilot-plus-guard bin counts."""
    rows = []
    for M, N in grids:
        p = grid_for(M, N, delta_f, fc, speed_kmh, profile)
        rows.append((M, N, p.l_max, p.k_max, overhead_proposed(p), overhead_ep(p)))
    return rows


__all__ = [
    "CSV_FIELDS",
    "TrialRecord",
    "aggregate",
    "ccdf",
    "nmse",
    "overhead_table",
    "papr",
    "papr_at_ccdf",
    "papr_samples",
    "records_to_csv",
    "run_experiment",
    "run_trial",
    "write_csv",
]
