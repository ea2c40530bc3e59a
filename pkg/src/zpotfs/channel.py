"""Sparse delay-Doppler channel: tap indexing, EVA/Jakes generation, time-domain action, AWGN."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, InvalidConfiguration, ResourceLimit
from .grid import GridParams

SPEED_OF_LIGHT = 2.9979e8

# 3GPP Extended Vehicular A: (delay ns, relative power dB)
EVA_PROFILE = (
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
)


@dataclass(frozen=True)
class ChannelTap:
    l: int
    k: int
    gain: complex


def round_half_up(x):
    return np.floor(np.asarray(x, dtype=float) + 0.5).astype(int)


def load_profile(path) -> tuple[tuple[float, float], ...]:
    """Read ``delay_ns, power_db`` pairs, one per line; ``#`` starts a comment."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [x for x in line.replace(",", " ").split() if x]
        if len(parts) != 2:
            raise InvalidConfiguration(f"{path}:{lineno}: expected 'delay_ns, power_db'")
        rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise InvalidConfiguration(f"{path}: empty power-delay profile")
    return tuple(rows)


def max_doppler(fc: float, speed_kmh: float) -> float:
    """Maximum Doppler shift in Hz for carrier ``fc`` and speed in km/h."""
    return fc * (speed_kmh / 3.6) / SPEED_OF_LIGHT


def delay_bins(profile, M: int, delta_f: float) -> np.ndarray:
    delays = np.array([d for d, _ in profile]) * 1e-9
    return round_half_up(delays * M * delta_f)


def derive_spread(M, N, delta_f, fc, speed_kmh, profile=EVA_PROFILE) -> tuple[int, int]:
    """Smallest ``(l_max, k_max)`` that contain every integer tap the model can draw."""
    l_max = int(delay_bins(profile, M, delta_f).max())
    k_max = int(round_half_up(max_doppler(fc, speed_kmh) * N / delta_f))
    return l_max, k_max


@lru_cache(maxsize=64)
def _tap_table(l_max: int, k_max: int):
    idx = np.arange((l_max + 1) * (2 * k_max + 1))
    ls = idx % (l_max + 1)
    ks = idx // (l_max + 1)
    ks = np.where(ks <= k_max, ks, ks - (2 * k_max + 1))
    ls.setflags(write=False)
    ks.setflags(write=False)
    return ls, ks


def tap_table(p: GridParams):
    """Delay and Doppler bins of every channel-vector entry, 0-based array order."""
    return _tap_table(p.l_max, p.k_max)


def index_to_lk(i: int, p: GridParams) -> tuple[int, int]:
    """Map a 1-based channel-vector index to its ``(delay, Doppler)`` bins."""
    if not 1 <= i <= p.Q:
        raise InvalidArgument(f"index {i} outside 1..{p.Q}")
    l = (i - 1) % (p.l_max + 1)
    k = (i - 1) // (p.l_max + 1)
    if k > p.k_max:
        k -= 2 * p.k_max + 1
    return l, k


def lk_to_index(l: int, k: int, p: GridParams) -> int:
    if not 0 <= l <= p.l_max or abs(k) > p.k_max:
        raise InvalidArgument(f"(l={l}, k={k}) outside the channel support")
    return l + (p.l_max + 1) * (k % (2 * p.k_max + 1)) + 1


def taps_to_vector(taps, p: GridParams) -> np.ndarray:
    h = np.zeros(p.Q, dtype=complex)
    for t in taps:
        h[lk_to_index(t.l, t.k, p) - 1] += t.gain
    return h


def vector_to_taps(h, p: GridParams) -> list[ChannelTap]:
    ls, ks = tap_table(p)
    return [ChannelTap(int(ls[i]), int(ks[i]), complex(h[i])) for i in np.flatnonzero(h)]


def generate_eva_jakes(p: GridParams, rng, speed_kmh: float = 500.0, profile=EVA_PROFILE) -> np.ndarray:
    """Draw one integer-bin channel vector.

    Path gains are complex Gaussian with variances from the normalized power
    profile; each path gets a Jakes Doppler ``nu_max*cos(theta)``, uniform theta.
    Paths that land on the same bin are added.
    """
    powers = 10 ** (np.array([pw for _, pw in profile]) / 10)
    powers = powers / powers.sum()
    ls = delay_bins(profile, p.M, p.delta_f)
    if ls.max() > p.l_max:
        raise InvalidConfiguration(f"profile needs l_max >= {ls.max()}, grid has {p.l_max}")
    nu_max = max_doppler(p.fc, speed_kmh)
    if round_half_up(nu_max * p.N / p.delta_f) > p.k_max:
        raise InvalidConfiguration(
            f"nu_max={nu_max:.1f} Hz needs k_max >= {round_half_up(nu_max * p.N / p.delta_f)}, grid has {p.k_max}"
        )
    n = len(profile)
    gains = np.sqrt(powers / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    theta = rng.uniform(0.0, 2 * np.pi, n)
    ks = round_half_up(nu_max * np.cos(theta) * p.N / p.delta_f)
    h = np.zeros(p.Q, dtype=complex)
    idx = ls + (p.l_max + 1) * (ks % (2 * p.k_max + 1))
    np.add.at(h, idx, gains)
    return h


def _modulate_shift(s, l: int, k: int, MN: int) -> np.ndarray:
    # (Pi^l Delta^k s)[q] = z^{k(q-l)} s[(q-l) mod MN]
    q = np.arange(MN)
    return np.exp(2j * np.pi * k * (q - l) / MN) * np.roll(s, l)


def apply_channel(s, h, p: GridParams) -> np.ndarray:
    """Time-domain channel output ``H s`` without forming ``H``."""
    s = np.asarray(s)
    h = np.asarray(h)
    if s.shape != (p.MN,) or h.shape != (p.Q,):
        raise InvalidArgument(f"need s of length {p.MN} and h of length {p.Q}")
    ls, ks = tap_table(p)
    r = np.zeros(p.MN, dtype=complex)
    for i in np.flatnonzero(h):
        r += h[i] * _modulate_shift(s, int(ls[i]), int(ks[i]), p.MN)
    return r


def build_dense_H(h, p: GridParams, max_size: int = 4096) -> np.ndarray:
    """Explicit ``sum_i h_i Pi^{l_i} Delta^{k_i}``; meant as a test oracle."""
    if p.MN > max_size:
        raise ResourceLimit(f"MN={p.MN} exceeds the dense-matrix cap {max_size}")
    h = np.asarray(h)
    if h.shape != (p.Q,):
        raise InvalidArgument(f"need h of length {p.Q}")
    MN = p.MN
    z = np.exp(2j * np.pi / MN)
    Pi = np.roll(np.eye(MN), 1, axis=0)
    ls, ks = tap_table(p)
    H = np.zeros((MN, MN), dtype=complex)
    for i in np.flatnonzero(h):
        Delta = np.diag(z ** (ks[i] * np.arange(MN)))
        H += h[i] * np.linalg.matrix_power(Pi, int(ls[i])) @ Delta
    return H


def noise_variance(snr_db: float) -> float:
    """Per-sample noise variance for unit transmit power."""
    if np.isposinf(snr_db):
        return 0.0
    return 10 ** (-snr_db / 10)


def add_awgn(r, snr_db: float, rng):
    """Add circular complex Gaussian noise; returns ``(noisy, sigma2)``."""
    r = np.asarray(r)
    sigma2 = noise_variance(snr_db)
    if sigma2 == 0.0:
        return r.copy(), 0.0
    w = np.sqrt(sigma2 / 2) * (rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape))
    return r + w, sigma2
