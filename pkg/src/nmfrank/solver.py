"""Dense NMF under the squared Frobenius objective.

Two update rules are provided: sequential coordinate descent (scd) and
multiplicative updates (mu).  Both run for a fixed iteration budget with no
early stopping, recording the objective once per iteration.
"""

from dataclasses import dataclass, field

import numpy as np

from ._backend import scd_update_h, scd_update_w

# floor on MU denominators / skip threshold on SCD Gram diagonals
ZERO_GUARD = 1e-16

ALGORITHMS = ("scd", "mu")


@dataclass
class FactorPair:
    """One factorization W (m x k), H (k x n) with its objective trace."""

    W: np.ndarray
    H: np.ndarray
    objective_trace: list = field(default_factory=list)

    @property
    def rank(self):
        return self.W.shape[1]

    def reconstruction(self):
        return self.W @ self.H


def _check_shapes(A, f):
    m, n = A.shape
    if f.W.shape[0] != m or f.H.shape[1] != n or f.W.shape[1] != f.H.shape[0]:
        raise ValueError(
            f"factor shapes {f.W.shape} x {f.H.shape} do not conform to "
            f"matrix shape {A.shape}"
        )


def objective(A, f):
    """Half squared Frobenius distance between A and W H."""
    _check_shapes(A, f)
    r = A - f.W @ f.H
    return 0.5 * float(np.vdot(r, r))


def relative_residual(A, f):
    """Frobenius norm of A - W H over the Frobenius norm of A."""
    _check_shapes(A, f)
    norm_a = np.linalg.norm(A)
    if norm_a == 0.0:
        raise ValueError("relative residual undefined for a zero matrix")
    return float(np.linalg.norm(A - f.W @ f.H) / norm_a)


def scd_step(A, f):
    """One full coordinate-descent iteration: all H rows, then all W columns.

    Each block solves its exact least-squares subproblem and clips at zero;
    the Gram and cross matrices are rebuilt between the two blocks.  Blocks
    whose Gram diagonal is at or below the zero guard are skipped.
    """
    _check_shapes(A, f)
    W = np.ascontiguousarray(f.W, dtype=np.float64).copy()
    H = np.ascontiguousarray(f.H, dtype=np.float64).copy()
    scd_update_h(H, np.ascontiguousarray(W.T @ W), np.ascontiguousarray(A.T @ W), ZERO_GUARD)
    scd_update_w(W, np.ascontiguousarray(H @ H.T), np.ascontiguousarray(A @ H.T), ZERO_GUARD)
    return FactorPair(W, H, list(f.objective_trace))


def mu_step(A, f):
    """One multiplicative-update iteration (H block then W block).

    Denominators are floored at the zero guard, so exact zeros in the
    factors stay exactly zero.
    """
    _check_shapes(A, f)
    W = f.W.copy()
    H = f.H * ((A.T @ W).T / np.maximum(W.T @ W @ f.H, ZERO_GUARD))
    W = W * ((A @ H.T) / np.maximum(W @ (H @ H.T), ZERO_GUARD))
    return FactorPair(W, H, list(f.objective_trace))


_STEPS = {"scd": scd_step, "mu": mu_step}


def fit(A, W0, H0, algorithm="scd", iterations=100):
    """Run a fixed number of update iterations from the given start.

    No early stopping; the objective is recorded after the W update of each
    iteration.  Purely deterministic in its arguments.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    A = np.asarray(A, dtype=np.float64)
    f = FactorPair(np.asarray(W0, dtype=np.float64), np.asarray(H0, dtype=np.float64))
    _check_shapes(A, f)
    if (f.W < 0).any() or (f.H < 0).any():
        raise ValueError("initial factors must be non-negative")
    step = _STEPS[algorithm]
    trace = []
    for _ in range(iterations):
        f = step(A, f)
        trace.append(objective(A, f))
    f.objective_trace = trace
    return f
