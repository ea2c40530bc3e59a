"""Transmit frame: 4-QAM data above the zero-pad rows, Zadoff-Chu pilots inside them."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import InvalidArgument
from .grid import GridParams

QAM4_SCALE = 1 / np.sqrt(2)


@dataclass(frozen=True)
class PilotConfig:
    root: int = 1
    pilot_amplitude: float = 1.0

    def __post_init__(self):
        if self.pilot_amplitude <= 0:
            raise InvalidArgument("pilot_amplitude must be positive")


def zadoff_chu(length: int, root: int = 1) -> np.ndarray:
    """Constant-modulus Zadoff-Chu sequence of the given length and root."""
    if length < 1:
        raise InvalidArgument(f"length must be >= 1, got {length}")
    if gcd(root, length) != 1:
        raise InvalidArgument(f"root {root} is not coprime with length {length}")
    n = np.arange(length, dtype=float)
    if length % 2:
        return np.exp(-1j * np.pi * root * n * (n + 1) / length)
    return np.exp(-1j * np.pi * root * n * n / length)


def qam4_mod(bits) -> np.ndarray:
    """Gray 4-QAM, unit average power: ``(b0, b1) -> ((1-2b0) + j(1-2b1))/sqrt(2)``."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.ndim != 1 or bits.size % 2:
        raise InvalidArgument(f"need an even-length bit vector, got shape {bits.shape}")
    pairs = bits.reshape(-1, 2)
    return ((1 - 2 * pairs[:, 0]) + 1j * (1 - 2 * pairs[:, 1])) * QAM4_SCALE


def qam4_demod(symbols) -> np.ndarray:
    """Hard quadrant decision. Zero real or imaginary parts map to bit 0."""
    symbols = np.asarray(symbols)
    bits = np.empty((symbols.size, 2), dtype=np.int8)
    bits[:, 0] = symbols.real.ravel() < 0
    bits[:, 1] = symbols.imag.ravel() < 0
    return bits.ravel()


def qam4_hard(symbols) -> np.ndarray:
    """Nearest 4-QAM point, same tie rule as :func:`qam4_demod`."""
    symbols = np.asarray(symbols)
    re = np.where(symbols.real < 0, -1.0, 1.0)
    im = np.where(symbols.imag < 0, -1.0, 1.0)
    return (re + 1j * im) * QAM4_SCALE


def n_data_bits(p: GridParams) -> int:
    return 2 * p.n_data_rows * p.N


def pilot_block(p: GridParams, pc: PilotConfig = PilotConfig()) -> np.ndarray:
    """``(l_zp, N)`` pilot symbols: one ZC sequence of length ``l_zp*N`` filled column-major."""
    z = zadoff_chu(p.l_zp * p.N, pc.root)
    return pc.pilot_amplitude * z.reshape(p.l_zp, p.N, order="F")


def assemble_frame(bits, p: GridParams, pc: PilotConfig = PilotConfig()):
    """Build ``(X, X_d, X_p)`` for one frame.

    Data symbols fill rows ``0 .. M-l_zp-1`` column by column; the pilot block
    occupies the last ``l_zp`` rows.
    """
    bits = np.asarray(bits)
    if bits.size != n_data_bits(p):
        raise InvalidArgument(f"expected {n_data_bits(p)} bits, got {bits.size}")
    D = p.n_data_rows
    X_d = np.zeros((p.M, p.N), dtype=complex)
    X_d[:D] = qam4_mod(bits).reshape(D, p.N, order="F")
    X_p = np.zeros((p.M, p.N), dtype=complex)
    X_p[D:] = pilot_block(p, pc)
    return X_d + X_p, X_d, X_p


def data_symbols(X, p: GridParams) -> np.ndarray:
    """Data bins of a DD frame in transmit order (column-major over the data rows)."""
    return np.asarray(X)[: p.n_data_rows].reshape(-1, order="F")


def overhead_proposed(p: GridParams) -> int:
    return (p.l_max + 1) * p.N
