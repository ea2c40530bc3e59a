"""Two-step joint channel estimation and data detection.

1. OMP on the interference-free pilot samples gives a first channel estimate.
2. The pilot response is cancelled and the MRC detector produces data decisions.
3. Pilots plus detected data act as a joint pilot; OMP over all samples refines
   the estimate, followed by a second cancellation and detection.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channel import apply_channel
from .dictionary import build_dictionary, pilot_rows
from .errors import InvalidArgument, StageError
from .grid import GridParams, vec
from .mrc import DetectorConfig, MrcResult, mrc_detect
from .omp import OmpConfig, OmpResult, omp


@dataclass(frozen=True)
class ReceiverConfig:
    omp: OmpConfig = OmpConfig()
    detector: DetectorConfig = DetectorConfig()
    warm_start: bool = False


@dataclass
class ReceiverOutput:
    h_hat_step1: np.ndarray
    h_hat_step2: np.ndarray
    X_dt_step1: np.ndarray
    X_dd_step1: np.ndarray
    X_dd_final: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def step1_estimate(r, s_p, p: GridParams, cfg: OmpConfig = OmpConfig()) -> OmpResult:
    """OMP on the last sample of every sub-symbol, where data never reaches."""
    rows = pilot_rows(p)
    psi = build_dictionary(s_p, rows, p)
    return omp(psi, np.asarray(r)[rows], cfg)


def cancel_pilot(r, h_hat, s_p, p: GridParams) -> np.ndarray:
    return np.asarray(r) - apply_channel(s_p, h_hat, p)


def step2_estimate(r, s_p, s_d_hat, p: GridParams, cfg: OmpConfig = OmpConfig(), initial_support=None) -> OmpResult:
    """OMP over every received sample with ``s_p + s_d_hat`` as the joint pilot."""
    psi = build_dictionary(np.asarray(s_p) + np.asarray(s_d_hat), "all", p)
    return omp(psi, np.asarray(r), cfg, initial_support=initial_support)


def detect_with(r, h_hat, s_p, p: GridParams, cfg: DetectorConfig = DetectorConfig()) -> MrcResult:
    """Cancel the pilot response of ``h_hat`` and run MRC detection."""
    return mrc_detect(cancel_pilot(r, h_hat, s_p, p), h_hat, p, cfg)


def run_receiver(r, s_p, p: GridParams, noise_variance: float, cfg: ReceiverConfig = ReceiverConfig()) -> ReceiverOutput:
    r = np.asarray(r)
    if r.shape != (p.MN,) or np.shape(s_p) != (p.MN,):
        raise InvalidArgument(f"r and s_p must have length {p.MN}")
    omp_cfg = replace(cfg.omp, noise_variance=noise_variance)

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:  # noqa: BLE001 - re-raised with the stage name
            raise StageError(name, exc) from exc

    est1 = stage("step1-estimate", step1_estimate, r, s_p, p, omp_cfg)
    det1 = stage("step1-detect", detect_with, r, est1.h_hat, s_p, p, cfg.detector)
    s_d_hat = vec(det1.dt_hard)
    warm = est1.support if cfg.warm_start else None
    est2 = stage("step2-estimate", step2_estimate, r, s_p, s_d_hat, p, omp_cfg, warm)
    det2 = stage("step2-detect", detect_with, r, est2.h_hat, s_p, p, cfg.detector)
    return ReceiverOutput(
        h_hat_step1=est1.h_hat,
        h_hat_step2=est2.h_hat,
        X_dt_step1=det1.dt_hard,
        X_dd_step1=det1.dd_hard,
        X_dd_final=det2.dd_hard,
        diagnostics={
            "residual_norm1": est1.residual_norm,
            "residual_norm2": est2.residual_norm,
            "support1": len(est1.support),
            "support2": len(est2.support),
            "rows1": p.N,
            "rows2": p.MN,
            "mrc_iterations1": int(det1.iterations.max()),
            "mrc_iterations2": int(det2.iterations.max()),
        },
    )
