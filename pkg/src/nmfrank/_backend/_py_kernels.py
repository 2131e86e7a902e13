"""Pure-numpy fallback kernels for the coordinate-descent inner loops.

These mirror the Cython kernels in ``_cy_kernels.pyx`` exactly in terms of
update ordering; only the floating-point summation order may differ (BLAS
reductions vs explicit loops), so cross-backend agreement is to ~1e-12, not
bitwise.
"""

import numpy as np

BACKEND_NAME = "python"


def scd_update_h(H, G, B, eps):
    """Sequential row updates of H in place.

    G is the k-by-k Gram matrix of W, B is the n-by-k matrix A^T W.  Rows
    are visited in index order; each update sees the rows already updated
    this pass.  Rows whose Gram diagonal is at or below ``eps`` are skipped.
    """
    k = H.shape[0]
    for i in range(k):
        d = G[i, i]
        if d <= eps:
            continue
        np.maximum(0.0, H[i, :] + (B[:, i] - G[:, i] @ H) / d, out=H[i, :])


def scd_update_w(W, G, B, eps):
    """Sequential column updates of W in place.

    G is the k-by-k Gram matrix of H^T, B is the m-by-k matrix A H^T.
    """
    k = W.shape[1]
    for j in range(k):
        d = G[j, j]
        if d <= eps:
            continue
        np.maximum(0.0, W[:, j] + (B[:, j] - W @ G[:, j]) / d, out=W[:, j])


def masked_update_h(A, obs, W, H, eps):
    """Column-by-column H update under a holdout mask, in place.

    ``obs`` is a boolean m-by-n matrix, True where the entry of A is
    observed.  Columns with held-out entries get a private Gram matrix
    restricted to their observed rows; fully observed columns share one
    Gram matrix built from the whole of W.  Returns the number of Gram
    matrices constructed.
    """
    n = A.shape[1]
    k = W.shape[1]
    col_clean = obs.all(axis=0)
    grams = 0

    if col_clean.any():
        G = W.T @ W
        B = A[:, col_clean].T @ W
        grams += 1
        Hc = H[:, col_clean]
        for i in range(k):
            d = G[i, i]
            if d <= eps:
                continue
            np.maximum(0.0, Hc[i, :] + (B[:, i] - G[:, i] @ Hc) / d, out=Hc[i, :])
        H[:, col_clean] = Hc

    for j in np.flatnonzero(~col_clean):
        rows = obs[:, j]
        Wo = W[rows]
        G = Wo.T @ Wo
        b = Wo.T @ A[rows, j]
        grams += 1
        h = H[:, j]
        for i in range(k):
            d = G[i, i]
            if d <= eps:
                continue
            v = h[i] + (b[i] - G[i, :] @ h) / d
            h[i] = v if v > 0.0 else 0.0
    return grams


def masked_update_w(A, obs, W, H, eps):
    """Row-by-row W update under a holdout mask, in place.

    Symmetric to :func:`masked_update_h`; returns the Gram construction
    count for this half-step.
    """
    m = A.shape[0]
    k = W.shape[1]
    row_clean = obs.all(axis=1)
    grams = 0

    if row_clean.any():
        G = H @ H.T
        B = A[row_clean] @ H.T
        grams += 1
        Wc = W[row_clean]
        for j in range(k):
            d = G[j, j]
            if d <= eps:
                continue
            np.maximum(0.0, Wc[:, j] + (B[:, j] - Wc @ G[:, j]) / d, out=Wc[:, j])
        W[row_clean] = Wc

    for i in np.flatnonzero(~row_clean):
        cols = obs[i]
        Ho = H[:, cols]
        G = Ho @ Ho.T
        b = Ho @ A[i, cols]
        grams += 1
        w = W[i]
        for j in range(k):
            d = G[j, j]
            if d <= eps:
                continue
            v = w[j] + (b[j] - w @ G[:, j]) / d
            w[j] = v if v > 0.0 else 0.0
    return grams
