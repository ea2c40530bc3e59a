"""Orthogonal matching pursuit with a noise-floor stopping rule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, InvalidArgument

# Relative residual below which a noiseless fit counts as exact.
EXACT_FIT_RTOL = 1e-12


@dataclass(frozen=True)
class OmpConfig:
    """Stop when ``||res||^2 <= (1+delta) * rows * noise_variance`` or ``max_taps`` atoms are chosen.

    ``max_taps=None`` means ``min(Q, rows, 2 * expected_paths)``. The noise-floor
    rule is only checked once ``min_taps`` atoms are in the support, since a
    physical channel always has at least one path.
    """

    max_taps: int | None = None
    min_taps: int = 1
    residual_tol_factor: float = 0.1
    noise_variance: float = 0.0
    expected_paths: int = 9

    def __post_init__(self):
        if self.max_taps is not None and self.max_taps < 1:
            raise InvalidArgument("max_taps must be >= 1")
        if self.min_taps < 0:
            raise InvalidArgument("min_taps must be >= 0")
        if self.residual_tol_factor < 0:
            raise InvalidArgument("residual_tol_factor must be >= 0")
        if self.noise_variance < 0:
            raise InvalidArgument("noise_variance must be >= 0")


@dataclass
class OmpResult:
    h_hat: np.ndarray
    support: list[int]
    residual_norm: float
    residual_history: list[float] = field(default_factory=list)


def omp(A, y, cfg: OmpConfig = OmpConfig(), initial_support=None) -> OmpResult:
    """Greedy sparse fit of ``y`` on the columns of ``A``.

    Atoms are ranked by ``|a_j^H res| / ||a_j||``; ties go to the lowest index and
    zero columns are never picked. Coefficients are the minimum-norm least-squares
    fit on the selected columns. ``support`` holds 0-based column indices in
    selection order.
    """
    A = np.asarray(getattr(A, "matrix", A))
    y = np.asarray(y)
    rows, Q = A.shape
    if y.shape != (rows,):
        raise InvalidArgument(f"y has shape {y.shape}, dictionary has {rows} rows")
    norms = np.linalg.norm(A, axis=0)
    if not np.any(norms > 0):
        raise DegenerateInput("all-zero dictionary")
    limit = min(Q, rows)
    if cfg.max_taps is None:
        max_taps = min(limit, 2 * cfg.expected_paths)
    elif cfg.max_taps > limit:
        raise InvalidArgument(f"max_taps={cfg.max_taps} exceeds min(rows, Q)={limit}")
    else:
        max_taps = cfg.max_taps

    y_energy = float(np.vdot(y, y).real)
    floor = max((1 + cfg.residual_tol_factor) * rows * cfg.noise_variance, (EXACT_FIT_RTOL**2) * y_energy)
    usable = norms > 0
    safe_norms = np.where(usable, norms, 1.0)

    support: list[int] = []
    coef = np.zeros(0, dtype=complex)
    res = y.astype(complex, copy=True)
    history = [float(np.sqrt(y_energy))]

    def refit():
        nonlocal coef, res
        coef = np.linalg.lstsq(A[:, support], y, rcond=None)[0]
        res = y - A[:, support] @ coef
        history.append(float(np.linalg.norm(res)))

    if initial_support:
        support = [int(j) for j in initial_support if usable[j]][:max_taps]
        if support:
            refit()

    min_taps = min(cfg.min_taps, max_taps)
    while len(support) < max_taps and history[-1] > 0 and (len(support) < min_taps or history[-1] ** 2 > floor):
        score = np.abs(A.conj().T @ res) / safe_norms
        score[~usable] = -1.0
        score[support] = -1.0
        j = int(np.argmax(score))
        if score[j] < 0:
            break
        support.append(j)
        refit()

    h_hat = np.zeros(Q, dtype=complex)
    if support:
        h_hat[support] = coef
    return OmpResult(h_hat, support, history[-1], history)
