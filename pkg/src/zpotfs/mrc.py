"""Delay-time maximal-ratio-combining detector for ZP frames.

After pilot cancellation, sub-symbol ``n`` of the received vector depends only on
the ``M - l_zp`` data samples of the same sub-symbol::

    y[m] = sum_l g[m, l] * d[m - l] + noise,    0 <= m - l < M - l_zp

The detector runs Gauss-Seidel MRC sweeps over the DT samples of every block,
each update combining the ``l_max + 1`` delay branches that carry that sample.
DT samples are not constellation points, so the hard decision is taken after
the DFT back to the delay-Doppler grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import tap_table
from .errors import DetectorDegenerate, InvalidArgument
from .frame import qam4_hard
from .grid import GridParams, dd_to_dt, dt_to_dd


@dataclass(frozen=True)
class DetectorConfig:
    max_iterations: int = 15
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be >= 1")
        if self.convergence_tol < 0:
            raise InvalidArgument("convergence_tol must be >= 0")


@dataclass
class MrcResult:
    dt_soft: np.ndarray
    dd_soft: np.ndarray
    dd_hard: np.ndarray
    dt_hard: np.ndarray
    iterations: np.ndarray
    residual_history: np.ndarray

    n_data_rows: int

    @property
    def symbols(self) -> np.ndarray:
        """Hard data symbols in transmit order."""
        return self.dd_hard[: self.n_data_rows].reshape(-1, order="F")


def all_block_gains(h_hat, p: GridParams) -> np.ndarray:
    """``(N, M, l_max+1)`` array with ``g[n, m, l] = sum_{i: l_i=l} h_i z^{k_i (nM+m-l)}``."""
    h_hat = np.asarray(h_hat)
    ls, ks = tap_table(p)
    q = np.arange(p.MN).reshape(p.N, p.M)
    g = np.zeros((p.N, p.M, p.l_max + 1), dtype=complex)
    for i in np.flatnonzero(h_hat):
        l = int(ls[i])
        g[:, :, l] += h_hat[i] * np.exp(2j * np.pi * ks[i] * (q - l) / p.MN)
    return g


def block_gains(h_hat, n: int, p: GridParams) -> np.ndarray:
    """Gains of block ``n``: ``H[nM+m, nM+m-l] = g[m, l]`` for ``m >= l``."""
    if not 0 <= n < p.N:
        raise InvalidArgument(f"block index {n} outside 0..{p.N - 1}")
    h_hat = np.asarray(h_hat)
    ls, ks = tap_table(p)
    m = np.arange(p.M)
    g = np.zeros((p.M, p.l_max + 1), dtype=complex)
    for i in np.flatnonzero(h_hat):
        l = int(ls[i])
        g[:, l] += h_hat[i] * np.exp(2j * np.pi * ks[i] * (n * p.M + m - l) / p.MN)
    return g


def block_matrix(g_block, p: GridParams) -> np.ndarray:
    """Dense ``(M, M - l_zp)`` per-block system built from one block's gains."""
    D = p.n_data_rows
    G = np.zeros((p.M, D), dtype=complex)
    for m in range(D):
        for l in range(p.l_max + 1):
            G[m + l, m] = g_block[m + l, l]
    return G


def mrc_detect(r_d, h_hat, p: GridParams, cfg: DetectorConfig = DetectorConfig()) -> MrcResult:
    """Detect the data frame from the pilot-cancelled received vector ``r_d``."""
    r_d = np.asarray(r_d)
    if r_d.shape != (p.MN,):
        raise InvalidArgument(f"r_d must have length {p.MN}")
    D = p.n_data_rows
    L = p.l_max + 1
    g = all_block_gains(h_hat, p)
    # coef[n, m, l] multiplies d[n, m] in received row m + l; m + l <= M - 2 always.
    m_idx = np.arange(D)[:, None] + np.arange(L)[None, :]
    coef = g[:, m_idx, np.arange(L)[None, :]]
    energy = np.sum(np.abs(coef) ** 2, axis=2)
    if np.any(energy == 0):
        n, m = np.argwhere(energy == 0)[0]
        raise DetectorDegenerate(int(n), int(m))
    weight = coef.conj() / energy[:, :, None]

    res = r_d.reshape(p.N, p.M).astype(complex, copy=True)
    d = np.zeros((p.N, D), dtype=complex)
    active = np.ones(p.N, dtype=bool)
    iterations = np.zeros(p.N, dtype=int)
    history = [np.linalg.norm(res, axis=1)]
    for _ in range(cfg.max_iterations):
        idx = np.flatnonzero(active)
        d_old = d[idx].copy()
        r_a = res[idx]
        d_a = d[idx]
        c_a = coef[idx]
        w_a = weight[idx]
        for m in range(D):
            rows = slice(m, m + L)
            upd = np.einsum("nl,nl->n", w_a[:, m, :], r_a[:, rows])
            d_a[:, m] += upd
            r_a[:, rows] -= c_a[:, m, :] * upd[:, None]
        res[idx] = r_a
        d[idx] = d_a
        iterations[idx] += 1
        history.append(np.linalg.norm(res, axis=1))
        change = np.linalg.norm(d_a - d_old, axis=1)
        scale = np.linalg.norm(d_a, axis=1)
        done = change <= cfg.convergence_tol * scale
        active[idx[done]] = False
        if not active.any():
            break

    dt_soft = np.zeros((p.M, p.N), dtype=complex)
    dt_soft[:D] = d.T
    dd_soft = dt_to_dd(dt_soft, p)
    dd_hard = np.zeros_like(dd_soft)
    dd_hard[:D] = qam4_hard(dd_soft[:D])
    return MrcResult(
        dt_soft=dt_soft,
        dd_soft=dd_soft,
        dd_hard=dd_hard,
        dt_hard=dd_to_dt(dd_hard, p),
        iterations=iterations,
        residual_history=np.array(history).T,
        n_data_rows=D,
    )
