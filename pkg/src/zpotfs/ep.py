"""Embedded-pilot baseline: one DD impulse inside a zero guard, threshold tap detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .channel import apply_channel, tap_table
from .errors import InvalidArgument, InvalidConfiguration
from .frame import qam4_hard, qam4_mod
from .grid import GridParams, dt_to_dd, idzt, unvec


@dataclass(frozen=True)
class EpConfig:
    """``pilot_position=None`` places the pilot at ``(0, N // 2)``."""

    pilot_position: tuple[int, int] | None = None
    threshold_factor: float = 3.0

    def position(self, p: GridParams) -> tuple[int, int]:
        return self.pilot_position if self.pilot_position is not None else (0, p.N // 2)


def ep_pilot_amplitude(p: GridParams) -> float:
    return float(np.sqrt((4 * p.k_max + 1) * (2 * p.l_max + 1)))


def overhead_ep(p: GridParams) -> int:
    return (2 * p.l_max + 1) * (4 * p.k_max + 1)


def guard_mask(p: GridParams, cfg: EpConfig = EpConfig()) -> np.ndarray:
    """Pilot plus guard bins, wrapping circularly around the grid."""
    if 2 * p.l_max + 1 > p.M or 4 * p.k_max + 1 > p.N:
        raise InvalidConfiguration(
            f"guard of {2 * p.l_max + 1}x{4 * p.k_max + 1} bins does not fit a {p.M}x{p.N} grid"
        )
    l_p, k_p = cfg.position(p)
    if not (0 <= l_p and l_p + p.l_max < p.M and 0 <= k_p < p.N):
        raise InvalidConfiguration(f"pilot position {(l_p, k_p)} leaves no room for the observation window")
    rows = (l_p + np.arange(-p.l_max, p.l_max + 1)) % p.M
    cols = (k_p + np.arange(-2 * p.k_max, 2 * p.k_max + 1)) % p.N
    mask = np.zeros((p.M, p.N), dtype=bool)
    mask[np.ix_(rows, cols)] = True
    return mask


def n_ep_data_bits(p: GridParams) -> int:
    return 2 * (p.MN - overhead_ep(p))


def ep_pilot_frame(p: GridParams, cfg: EpConfig = EpConfig()) -> np.ndarray:
    X = np.zeros((p.M, p.N), dtype=complex)
    X[cfg.position(p)] = ep_pilot_amplitude(p)
    return X


def ep_build_frame(bits, p: GridParams, cfg: EpConfig = EpConfig()) -> np.ndarray:
    """Pilot, zero guard, 4-QAM data on every other bin (column-major order).

    The pilot energy equals the number of guard bins, so the mean power per bin is 1.
    """
    mask = guard_mask(p, cfg)
    bits = np.asarray(bits)
    if bits.size != n_ep_data_bits(p):
        raise InvalidArgument(f"expected {n_ep_data_bits(p)} bits, got {bits.size}")
    X = ep_pilot_frame(p, cfg)
    X.T[~mask.T] = qam4_mod(bits)
    return X


def ep_data_symbols(X, p: GridParams, cfg: EpConfig = EpConfig()) -> np.ndarray:
    mask = guard_mask(p, cfg)
    return np.asarray(X).T[~mask.T]


def ep_estimate(Y, p: GridParams, cfg: EpConfig, noise_variance: float) -> np.ndarray:
    """Read the channel off the window ``l_p..l_p+l_max`` x ``k_p-k_max..k_p+k_max``.

    Bins above ``threshold_factor * sigma`` become taps. The delay-dependent
    Doppler phase ``exp(j2pi k l_p / MN)`` is removed from each gain.
    """
    Y = np.asarray(Y)
    if Y.shape != (p.M, p.N):
        raise InvalidArgument(f"expected an ({p.M}, {p.N}) frame")
    guard_mask(p, cfg)
    l_p, k_p = cfg.position(p)
    ls, ks = tap_table(p)
    window = Y[l_p + ls, (k_p + ks) % p.N]
    threshold = cfg.threshold_factor * np.sqrt(noise_variance)
    phase = np.exp(2j * np.pi * ks * l_p / p.MN)
    return np.where(np.abs(window) > threshold, window / (ep_pilot_amplitude(p) * phase), 0)


def sparse_channel_matrix(h, p: GridParams) -> sp.csr_matrix:
    ls, ks = tap_table(p)
    q = np.arange(p.MN)
    H = sp.csr_matrix((p.MN, p.MN), dtype=complex)
    for i in np.flatnonzero(h):
        l, k = int(ls[i]), int(ks[i])
        vals = h[i] * np.exp(2j * np.pi * k * (q - l) / p.MN)
        H = H + sp.csr_matrix((vals, (q, (q - l) % p.MN)), shape=(p.MN, p.MN))
    return H


def ep_detect(r, h_hat, p: GridParams, cfg: EpConfig, noise_variance: float) -> np.ndarray:
    """Frame-wide LMMSE detection in the DT domain, hard 4-QAM decisions on data bins."""
    h_hat = np.asarray(h_hat)
    data_mask = ~guard_mask(p, cfg)
    if not np.any(h_hat):
        return qam4_hard(np.zeros(int(data_mask.sum()), dtype=complex))
    r_d = np.asarray(r) - apply_channel(idzt(ep_pilot_frame(p, cfg), p), h_hat, p)
    H = sparse_channel_matrix(h_hat, p)
    HH = H.conj().T
    A = (HH @ H + max(noise_variance, 1e-12) * sp.identity(p.MN, format="csr")).tocsc()
    x = spsolve(A, HH @ r_d)
    X_dd = dt_to_dd(unvec(x, p), p)
    return qam4_hard(X_dd.T[data_mask.T])
