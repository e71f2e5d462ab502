# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch orthogonal matching pursuit.

Codes every target column against a fixed dictionary using only the Gram
matrix D'D and the correlation matrix D'Y, maintaining a growing Cholesky
factor of the selected sub-Gram so each refit costs O(s^2) instead of a
fresh least-squares solve. This is the hot inner loop of dictionary
learning; the pure NumPy twin lives in ``datm.kernels``.
"""

from libc.math cimport fabs, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

# Correlations below RELATIVE_FLOOR * ||y|| are treated as zero: the
# residual is numerically orthogonal to every remaining atom.
cdef double RELATIVE_FLOOR = 1e-13


def batch_omp(double[:, ::1] gram,
              double[:, ::1] corr,
              double[::1] norms_sq,
              double[::1] tol_sq,
              int t0,
              int[:, ::1] out_idx,
              double[:, ::1] out_coef,
              int[::1] out_count,
              unsigned char[::1] needs_fallback):
    """Greedy sparse coding of ``corr.shape[1]`` columns.

    gram : (K, K) dictionary Gram matrix D'D, C-contiguous.
    corr : (K, V) correlations D'Y.
    norms_sq : (V,) squared l2 norms of the target columns.
    tol_sq : (V,) squared residual-norm stopping tolerances.
    t0 : maximum atoms per column.
    out_idx, out_coef : (V, t0) selected atom ids and coefficients.
    out_count : (V,) number of atoms actually selected per column.
    needs_fallback : (V,) set to 1 when the selected span went rank
        deficient; the caller must re-solve those columns.
    """
    cdef Py_ssize_t K = gram.shape[0]
    cdef Py_ssize_t V = corr.shape[1]
    cdef Py_ssize_t col, i, m, n
    cdef Py_ssize_t best
    cdef int count
    cdef double best_val, val, acc, diag, resid_sq, floor

    cdef double[::1] alpha = np.empty(K)
    cdef double[::1] alpha0 = np.empty(K)
    cdef double[:, ::1] L = np.zeros((t0, t0))
    cdef double[::1] w = np.empty(t0)
    cdef double[::1] b = np.empty(t0)
    cdef double[::1] c = np.empty(t0)
    cdef int[::1] sel = np.empty(t0, dtype=np.int32)
    cdef unsigned char[::1] used = np.zeros(K, dtype=np.uint8)

    for col in range(V):
        resid_sq = norms_sq[col]
        count = 0
        needs_fallback[col] = 0
        floor = RELATIVE_FLOOR * sqrt(norms_sq[col])
        for i in range(K):
            alpha0[i] = corr[i, col]
            alpha[i] = alpha0[i]
            used[i] = 0

        while count < t0 and resid_sq > tol_sq[col]:
            # argmax |alpha| over unselected atoms; lowest index wins ties
            best = -1
            best_val = floor
            for i in range(K):
                if used[i]:
                    continue
                val = fabs(alpha[i])
                if val > best_val:
                    best_val = val
                    best = i
            if best < 0:
                break

            # grow the Cholesky factor of gram[sel, sel]
            if count > 0:
                for m in range(count):
                    acc = gram[sel[m], best]
                    for n in range(m):
                        acc -= L[m, n] * w[n]
                    w[m] = acc / L[m, m]
                diag = gram[best, best]
                for m in range(count):
                    diag -= w[m] * w[m]
                if diag <= 1e-12:
                    needs_fallback[col] = 1
                    break
                for m in range(count):
                    L[count, m] = w[m]
                L[count, count] = sqrt(diag)
            else:
                L[0, 0] = sqrt(gram[best, best])
            sel[count] = best
            used[best] = 1
            count += 1

            # refit: solve L L' c = alpha0[sel] by two triangular sweeps
            for m in range(count):
                acc = alpha0[sel[m]]
                for n in range(m):
                    acc -= L[m, n] * b[n]
                b[m] = acc / L[m, m]
            for m in range(count - 1, -1, -1):
                acc = b[m]
                for n in range(m + 1, count):
                    acc -= L[n, m] * c[n]
                c[m] = acc / L[m, m]

            # residual correlations and squared residual norm
            for i in range(K):
                acc = alpha0[i]
                for m in range(count):
                    acc -= gram[i, sel[m]] * c[m]
                alpha[i] = acc
            resid_sq = norms_sq[col]
            for m in range(count):
                resid_sq -= c[m] * alpha0[sel[m]]
            if resid_sq < 0.0:
                resid_sq = 0.0

        for m in range(count):
            out_idx[col, m] = sel[m]
            out_coef[col, m] = c[m]
        out_count[col] = count
