"""Coordinate-descent NMF with held-out entries, for imputation-style
cross-validation, plus the held-out error metric and the per-iteration
cost model.

The mask is boolean with True marking a held-out entry.  Held-out entries
of A are never read: every row/column touched by the mask gets a private
Gram matrix restricted to its observed entries, while untouched rows and
columns share a single Gram matrix.
"""

import numpy as np

from ._backend import masked_update_h, masked_update_w
from .solver import ZERO_GUARD, FactorPair, _check_shapes


def _check_mask(A, M):
    if M.shape != A.shape:
        raise ValueError(f"mask shape {M.shape} does not match matrix shape {A.shape}")
    if M.all(axis=1).any() or M.all(axis=0).any():
        raise ValueError("mask holds out an entire row or column")


def masked_scd_step(A, M, f, stats=None):
    """One coordinate-descent iteration over the observed entries only.

    If ``stats`` is a dict, the number of Gram matrices constructed during
    this iteration is recorded under ``"gram_constructions"``.
    """
    _check_shapes(A, f)
    M = np.asarray(M, dtype=bool)
    _check_mask(A, M)
    A = np.ascontiguousarray(A, dtype=np.float64)
    obs = np.ascontiguousarray(~M)
    W = np.ascontiguousarray(f.W, dtype=np.float64).copy()
    H = np.ascontiguousarray(f.H, dtype=np.float64).copy()
    grams = masked_update_h(A, obs, W, H, ZERO_GUARD)
    grams += masked_update_w(A, obs, W, H, ZERO_GUARD)
    if stats is not None:
        stats["gram_constructions"] = grams
    return FactorPair(W, H, list(f.objective_trace))


def masked_objective(A, M, f):
    """Half squared Frobenius residual over the observed entries."""
    obs = ~np.asarray(M, dtype=bool)
    r = (A - f.W @ f.H)[obs]
    return 0.5 * float(r @ r)


def masked_fit(A, M, W0, H0, iterations=100, stats=None):
    """Fixed-budget masked coordinate descent; mirrors :func:`solver.fit`.

    The objective trace records the observed-entry objective.  If ``stats``
    is a dict, per-iteration Gram construction counts accumulate under
    ``"gram_constructions_per_iteration"``.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    A = np.asarray(A, dtype=np.float64)
    M = np.asarray(M, dtype=bool)
    f = FactorPair(np.asarray(W0, dtype=np.float64), np.asarray(H0, dtype=np.float64))
    _check_shapes(A, f)
    _check_mask(A, M)
    trace = []
    counts = []
    for _ in range(iterations):
        step_stats = {}
        f = masked_scd_step(A, M, f, stats=step_stats)
        counts.append(step_stats["gram_constructions"])
        trace.append(masked_objective(A, M, f))
    f.objective_trace = trace
    if stats is not None:
        stats["gram_constructions_per_iteration"] = counts
    return f


def masked_error(A, M, f):
    """Mean squared reconstruction error over the held-out entries."""
    _check_shapes(A, f)
    M = np.asarray(M, dtype=bool)
    held = int(M.sum())
    if held == 0:
        raise ValueError("masked error undefined for an empty mask")
    r = (A - f.W @ f.H)[M]
    return float(r @ r) / held


def estimate_iteration_cost(m, n, k, masked=False):
    """Multiplication/division count of one update iteration.

    Dense:  2mnk + 2mk^2 + 2nk^2.
    Masked: 2mnk^2 + 2mnk + mk^2 + nk^2 (per-row/column Gram matrices).
    """
    if m < 1 or n < 1 or k < 1:
        raise ValueError("dimensions must be >= 1")
    if masked:
        return 2 * m * n * k * k + 2 * m * n * k + m * k * k + n * k * k
    return 2 * m * n * k + 2 * m * k * k + 2 * n * k * k
