# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython kernels for the coordinate-descent inner loops.

Same update ordering as ``_py_kernels``; see that module for semantics.
The O(k^2)-per-coordinate bookkeeping runs in typed loops while the heavy
matrix products (Gram construction, right-hand sides, row/column sweeps)
go through BLAS, so the kernels stay competitive with the numpy fallback
at large sizes instead of fighting its dgemm calls with scalar code.
"""

import numpy as np
cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemv, dsyrk

cnp.import_array()

BACKEND_NAME = "cython"

cdef double ONE = 1.0
cdef double ZERO = 0.0
cdef int INC1 = 1
cdef char NOTRANS = b'N'
cdef char TRANS = b'T'
cdef char LOWER = b'L'


cdef inline void _mirror(double[:, ::1] G, Py_ssize_t k) noexcept nogil:
    # dsyrk with uplo='L' on column-major data fills the upper triangle of
    # the row-major view; copy it down
    cdef Py_ssize_t i, l
    for i in range(k):
        for l in range(i + 1, k):
            G[l, i] = G[i, l]


def scd_update_h(double[:, ::1] H, double[:, ::1] G, double[:, ::1] B, double eps):
    cdef int k = H.shape[0]
    cdef int n = H.shape[1]
    cdef Py_ssize_t i, j
    cdef double d, v
    cdef double[::1] t = np.empty(n)
    for i in range(k):
        d = G[i, i]
        if d <= eps:
            continue
        # t = H^T @ G[:, i]; row-major H is a column-major n x k matrix
        dgemv(&NOTRANS, &n, &k, &ONE, &H[0, 0], &n, &G[0, i], &k, &ZERO, &t[0], &INC1)
        for j in range(n):
            v = H[i, j] + (B[j, i] - t[j]) / d
            H[i, j] = v if v > 0.0 else 0.0


def scd_update_w(double[:, ::1] W, double[:, ::1] G, double[:, ::1] B, double eps):
    cdef int m = W.shape[0]
    cdef int k = W.shape[1]
    cdef Py_ssize_t i, j
    cdef double d, v
    cdef double[::1] t = np.empty(m)
    for j in range(k):
        d = G[j, j]
        if d <= eps:
            continue
        # t = W @ G[:, j]
        dgemv(&TRANS, &k, &m, &ONE, &W[0, 0], &k, &G[0, j], &k, &ZERO, &t[0], &INC1)
        for i in range(m):
            v = W[i, j] + (B[i, j] - t[i]) / d
            W[i, j] = v if v > 0.0 else 0.0


def masked_update_h(double[:, ::1] A, cnp.uint8_t[:, ::1] obs,
                    double[:, ::1] W, double[:, ::1] H, double eps):
    cdef int m = A.shape[0]
    cdef int n = A.shape[1]
    cdef int k = W.shape[1]
    cdef int mo
    cdef Py_ssize_t i, j, l, r, c
    cdef double d, acc, v
    cdef int grams = 0
    cdef bint clean, have_shared = False

    cdef double[:, ::1] Gs = np.empty((k, k))
    cdef double[:, ::1] Gp = np.empty((k, k))
    cdef double[:, ::1] Wo = np.empty((m, k))   # gathered observed rows
    cdef double[::1] a = np.empty(m)
    cdef double[::1] b = np.empty(k)
    cdef double[:, ::1] G

    for j in range(n):
        clean = True
        for r in range(m):
            if not obs[r, j]:
                clean = False
                break
        if clean:
            if not have_shared:
                # shared Gram of W, built once per half-step
                dsyrk(&LOWER, &NOTRANS, &k, &m, &ONE, &W[0, 0], &k,
                      &ZERO, &Gs[0, 0], &k)
                _mirror(Gs, k)
                have_shared = True
                grams += 1
            G = Gs
            # b = W^T @ A[:, j]
            dgemv(&NOTRANS, &k, &m, &ONE, &W[0, 0], &k, &A[0, j], &n,
                  &ZERO, &b[0], &INC1)
        else:
            mo = 0
            for r in range(m):
                if obs[r, j]:
                    for l in range(k):
                        Wo[mo, l] = W[r, l]
                    a[mo] = A[r, j]
                    mo += 1
            dsyrk(&LOWER, &NOTRANS, &k, &mo, &ONE, &Wo[0, 0], &k,
                  &ZERO, &Gp[0, 0], &k)
            _mirror(Gp, k)
            grams += 1
            G = Gp
            dgemv(&NOTRANS, &k, &mo, &ONE, &Wo[0, 0], &k, &a[0], &INC1,
                  &ZERO, &b[0], &INC1)
        for i in range(k):
            d = G[i, i]
            if d <= eps:
                continue
            acc = 0.0
            for l in range(k):
                acc += G[i, l] * H[l, j]
            v = H[i, j] + (b[i] - acc) / d
            H[i, j] = v if v > 0.0 else 0.0
    return grams


def masked_update_w(double[:, ::1] A, cnp.uint8_t[:, ::1] obs,
                    double[:, ::1] W, double[:, ::1] H, double eps):
    cdef int m = A.shape[0]
    cdef int n = A.shape[1]
    cdef int k = W.shape[1]
    cdef int mo
    cdef Py_ssize_t i, j, l, c
    cdef double d, acc, v
    cdef int grams = 0
    cdef bint clean, have_shared = False

    cdef double[:, ::1] Gs = np.empty((k, k))
    cdef double[:, ::1] Gp = np.empty((k, k))
    cdef double[:, ::1] Ho = np.empty((n, k))   # gathered observed columns, transposed
    cdef double[::1] a = np.empty(n)
    cdef double[::1] b = np.empty(k)
    cdef double[:, ::1] G

    for i in range(m):
        clean = True
        for c in range(n):
            if not obs[i, c]:
                clean = False
                break
        if clean:
            if not have_shared:
                # shared Gram of H^T, built once per half-step
                dsyrk(&LOWER, &TRANS, &k, &n, &ONE, &H[0, 0], &n,
                      &ZERO, &Gs[0, 0], &k)
                _mirror(Gs, k)
                have_shared = True
                grams += 1
            G = Gs
            # b = H @ A[i, :]
            dgemv(&TRANS, &n, &k, &ONE, &H[0, 0], &n, &A[i, 0], &INC1,
                  &ZERO, &b[0], &INC1)
        else:
            mo = 0
            for c in range(n):
                if obs[i, c]:
                    for l in range(k):
                        Ho[mo, l] = H[l, c]
                    a[mo] = A[i, c]
                    mo += 1
            dsyrk(&LOWER, &NOTRANS, &k, &mo, &ONE, &Ho[0, 0], &k,
                  &ZERO, &Gp[0, 0], &k)
            _mirror(Gp, k)
            grams += 1
            G = Gp
            dgemv(&NOTRANS, &k, &mo, &ONE, &Ho[0, 0], &k, &a[0], &INC1,
                  &ZERO, &b[0], &INC1)
        for j in range(k):
            d = G[j, j]
            if d <= eps:
                continue
            acc = 0.0
            for l in range(k):
                acc += W[i, l] * G[l, j]
            v = W[i, j] + (b[j] - acc) / d
            W[i, j] = v if v > 0.0 else 0.0
    return grams
