# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: sparse pairwise cosine and the LDA variational E-step.

Mirrors _pure.py operation-for-operation; digamma comes from the same cephes
implementation scipy.special.psi wraps, so the backends differ only by
floating-point summation order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt
from scipy.special.cython_special cimport psi

cnp.import_array()

cdef double PHI_EPS = 1e-100


def pairwise_cosine(const cnp.int64_t[::1] indptr,
                    const cnp.int64_t[::1] indices,
                    const double[::1] data,
                    Py_ssize_t n_rows,
                    Py_ssize_t n_cols):
    """Dense cosine similarity between CSR rows (canonical form: sorted,
    duplicate-free column indices)."""
    out_arr = np.zeros((n_rows, n_rows), dtype=np.float64)
    norms_arr = np.zeros(n_rows, dtype=np.float64)
    buffer_arr = np.zeros(n_cols, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] norms = norms_arr
    cdef double[::1] buffer = buffer_arr
    cdef Py_ssize_t i, j, p
    cdef double acc

    for i in range(n_rows):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * data[p]
        norms[i] = sqrt(acc)

    for i in range(n_rows):
        if norms[i] == 0.0:
            continue
        out[i, i] = 1.0
        # scatter row i, gather against every later row, then clear
        for p in range(indptr[i], indptr[i + 1]):
            buffer[indices[p]] = data[p]
        for j in range(i + 1, n_rows):
            if norms[j] == 0.0:
                continue
            acc = 0.0
            for p in range(indptr[j], indptr[j + 1]):
                acc += data[p] * buffer[indices[p]]
            acc /= norms[i] * norms[j]
            if acc < 0.0:
                acc = 0.0
            elif acc > 1.0:
                acc = 1.0
            out[i, j] = acc
            out[j, i] = acc
        for p in range(indptr[i], indptr[i + 1]):
            buffer[indices[p]] = 0.0
    return out_arr


def lda_estep(const cnp.int64_t[::1] indptr,
              const cnp.int64_t[::1] indices,
              const double[::1] counts,
              const double[:, ::1] exp_elog_beta,
              double alpha,
              const double[:, ::1] gamma_in,
              double tol,
              int max_inner):
    """Variational E-step over a CSR corpus; see _pure.lda_estep for semantics."""
    cdef Py_ssize_t n_docs = indptr.shape[0] - 1
    cdef Py_ssize_t n_topics = exp_elog_beta.shape[0]
    cdef Py_ssize_t n_terms = exp_elog_beta.shape[1]

    gamma_arr = np.array(gamma_in, dtype=np.float64, copy=True)
    sstats_arr = np.zeros((n_topics, n_terms), dtype=np.float64)
    cdef double[:, ::1] gamma = gamma_arr
    cdef double[:, ::1] sstats = sstats_arr

    cdef Py_ssize_t max_nnz = 0, nd
    cdef Py_ssize_t d, k, w, it, s, e
    for d in range(n_docs):
        nd = indptr[d + 1] - indptr[d]
        if nd > max_nnz:
            max_nnz = nd

    gd_arr = np.empty(n_topics, dtype=np.float64)
    newg_arr = np.empty(n_topics, dtype=np.float64)
    expel_arr = np.empty(n_topics, dtype=np.float64)
    phin_arr = np.empty(max(max_nnz, 1), dtype=np.float64)
    cdef double[::1] gd = gd_arr
    cdef double[::1] newg = newg_arr
    cdef double[::1] expel = expel_arr
    cdef double[::1] phin = phin_arr

    cdef double gsum, psig, acc, ng, meanchange, ratio
    cdef cnp.int64_t col

    for d in range(n_docs):
        s = indptr[d]; e = indptr[d + 1]
        nd = e - s
        if nd == 0:
            continue
        gsum = 0.0
        for k in range(n_topics):
            gd[k] = gamma[d, k]
            gsum += gd[k]
        psig = psi(gsum)
        for k in range(n_topics):
            expel[k] = exp(psi(gd[k]) - psig)
        for w in range(nd):
            col = indices[s + w]
            acc = 0.0
            for k in range(n_topics):
                acc += expel[k] * exp_elog_beta[k, col]
            phin[w] = acc + PHI_EPS

        for it in range(max_inner):
            meanchange = 0.0
            for k in range(n_topics):
                acc = 0.0
                for w in range(nd):
                    acc += (counts[s + w] / phin[w]) * exp_elog_beta[k, indices[s + w]]
                ng = alpha + expel[k] * acc
                meanchange += fabs(ng - gd[k])
                newg[k] = ng
            gsum = 0.0
            for k in range(n_topics):
                gd[k] = newg[k]
                gsum += gd[k]
            psig = psi(gsum)
            for k in range(n_topics):
                expel[k] = exp(psi(gd[k]) - psig)
            for w in range(nd):
                col = indices[s + w]
                acc = 0.0
                for k in range(n_topics):
                    acc += expel[k] * exp_elog_beta[k, col]
                phin[w] = acc + PHI_EPS
            if meanchange / n_topics < tol:
                break

        for k in range(n_topics):
            gamma[d, k] = gd[k]
        for w in range(nd):
            col = indices[s + w]
            ratio = counts[s + w] / phin[w]
            for k in range(n_topics):
                sstats[k, col] += expel[k] * ratio
    return gamma_arr, sstats_arr
