"""Delay-Doppler grid geometry and the transforms between DD, DT and time domain.

Conventions
-----------
* DD frames ``X`` are ``(M, N)`` arrays, rows are delay bins, columns Doppler bins.
* DT frames are ``X @ F_N^H`` with the unitary DFT matrix ``F_N``.
* Time vectors are the column-major vectorization of the DT frame, so sample
  ``n*M + m`` is delay row ``m`` of sub-symbol ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidConfiguration


@dataclass(frozen=True)
class GridParams:
    """Grid geometry and channel-spread bounds.

    ``l_zp`` defaults to ``l_max + 1``; any other value is rejected.
    """

    M: int
    N: int
    delta_f: float = 15e3
    fc: float = 4e9
    l_max: int = 2
    k_max: int = 8
    l_zp: int | None = None

    def __post_init__(self):
        if self.l_zp is None:
            object.__setattr__(self, "l_zp", self.l_max + 1)
        if self.M < 2 or self.N < 2:
            raise InvalidConfiguration(f"M and N must be >= 2, got M={self.M}, N={self.N}")
        if self.l_max < 0 or self.k_max < 0:
            raise InvalidConfiguration("l_max and k_max must be non-negative")
        if self.l_zp != self.l_max + 1:
            raise InvalidConfiguration(f"l_zp={self.l_zp} must equal l_max+1={self.l_max + 1}")
        if not 0 < self.l_zp < self.M:
            raise InvalidConfiguration(f"l_zp={self.l_zp} must lie in (0, M={self.M})")
        if 2 * self.k_max + 1 > self.N:
            raise InvalidConfiguration(f"2*k_max+1={2 * self.k_max + 1} exceeds N={self.N}")
        if self.delta_f <= 0 or self.fc <= 0:
            raise InvalidConfiguration("delta_f and fc must be positive")

    @property
    def T_s(self) -> float:
        return 1.0 / self.delta_f

    @property
    def MN(self) -> int:
        return self.M * self.N

    @property
    def Q(self) -> int:
        return (self.l_max + 1) * (2 * self.k_max + 1)

    @property
    def n_data_rows(self) -> int:
        return self.M - self.l_zp


def _check_frame(X, p: GridParams) -> np.ndarray:
    X = np.asarray(X)
    if X.shape != (p.M, p.N):
        raise InvalidArgument(f"expected an ({p.M}, {p.N}) frame, got shape {X.shape}")
    return X


def _check_vector(s, p: GridParams) -> np.ndarray:
    s = np.asarray(s)
    if s.shape != (p.MN,):
        raise InvalidArgument(f"expected a length-{p.MN} vector, got shape {s.shape}")
    return s


def dd_to_dt(X, p: GridParams) -> np.ndarray:
    """``X F_N^H``: inverse unitary DFT along each delay row."""
    return np.fft.ifft(_check_frame(X, p), axis=1, norm="ortho")


def dt_to_dd(X_dt, p: GridParams) -> np.ndarray:
    """``X_dt F_N``: forward unitary DFT along each delay row."""
    return np.fft.fft(_check_frame(X_dt, p), axis=1, norm="ortho")


def vec(X) -> np.ndarray:
    """Stack the columns of ``X``."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(s, p: GridParams) -> np.ndarray:
    return _check_vector(s, p).reshape(p.M, p.N, order="F")


def idzt(X, p: GridParams) -> np.ndarray:
    """Inverse discrete Zak transform, ``vec(X F_N^H)``."""
    return vec(dd_to_dt(X, p))


def dzt(r, p: GridParams) -> np.ndarray:
    """Discrete Zak transform, ``unvec(r) F_N``; exact inverse of :func:`idzt`."""
    return dt_to_dd(unvec(r, p), p)


def add_cp(s, cp_len: int) -> np.ndarray:
    s = np.asarray(s)
    if not 0 <= cp_len <= s.size:
        raise InvalidArgument(f"cp_len={cp_len} outside [0, {s.size}]")
    if cp_len == 0:
        return s.copy()
    return np.concatenate([s[-cp_len:], s])


def remove_cp(x, cp_len: int, p: GridParams | None = None) -> np.ndarray:
    x = np.asarray(x)
    if cp_len < 0 or cp_len > x.size:
        raise InvalidArgument(f"cp_len={cp_len} outside [0, {x.size}]")
    if p is not None and x.size != p.MN + cp_len:
        raise InvalidArgument(f"expected {p.MN + cp_len} samples, got {x.size}")
    return x[cp_len:].copy()
