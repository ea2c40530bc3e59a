"""Time-domain dictionaries whose columns are delayed, Doppler-modulated copies of a signal."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import tap_table
from .errors import InvalidArgument
from .grid import GridParams


@dataclass(frozen=True)
class Dictionary:
    """``matrix[:, i]`` is the atom of channel index ``i+1`` restricted to ``rows``."""

    matrix: np.ndarray
    rows: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, h):
        return self.matrix @ h


def psi_column(g, l: int, k: int, p: GridParams) -> np.ndarray:
    """``Pi^l Delta^k g``."""
    if not 0 <= l <= p.l_max or abs(k) > p.k_max:
        raise InvalidArgument(f"(l={l}, k={k}) outside the channel support")
    g = np.asarray(g)
    q = np.arange(p.MN)
    return np.exp(2j * np.pi * k * (q - l) / p.MN) * g[(q - l) % p.MN]


def pilot_rows(p: GridParams) -> np.ndarray:
    """Last sample of every sub-symbol; these see pilots only when ``l_zp = l_max + 1``."""
    return np.arange(p.N) * p.M + (p.M - 1)


def build_dictionary(g, rows, p: GridParams) -> Dictionary:
    """Stack all ``Q`` atoms of ``g``; ``rows="all"`` keeps every sample."""
    g = np.asarray(g)
    if g.shape != (p.MN,):
        raise InvalidArgument(f"generating signal must have length {p.MN}")
    if isinstance(rows, str):
        if rows != "all":
            raise InvalidArgument(f"unknown row selector {rows!r}")
        rows = np.arange(p.MN)
    else:
        rows = np.asarray(rows, dtype=int).ravel()
        if rows.size == 0:
            raise InvalidArgument("empty row set")
        if rows.min() < 0 or rows.max() >= p.MN:
            raise InvalidArgument("row index outside 0..MN-1")
    ls, ks = tap_table(p)
    shifted = rows[:, None] - ls[None, :]
    phase = np.exp(2j * np.pi * (ks[None, :] * shifted) / p.MN)
    return Dictionary(phase * g[shifted % p.MN], rows)
