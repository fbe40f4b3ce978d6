"""Pure numpy/scipy fallback for the compiled kernels.

Semantics here are the reference: the Cython module in _speedups.pyx mirrors
these loops operation-for-operation (same digamma, same update order), so the
two backends agree to floating-point noise.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.special import psi

PHI_EPS = 1e-100


def pairwise_cosine(
    indptr: np.ndarray,
    indices: np.ndarray,
    data: np.ndarray,
    n_rows: int,
    n_cols: int,
) -> np.ndarray:
    """Dense cosine similarity between the rows of a CSR matrix.

    Zero rows get zero similarity everywhere (their direction is undefined);
    the diagonal of nonzero rows is exactly 1.
    """
    X = sparse.csr_matrix((data, indices, indptr), shape=(n_rows, n_cols))
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    Xn = sparse.diags(inv) @ X
    S = np.asarray((Xn @ Xn.T).todense(), dtype=np.float64)
    S = (S + S.T) / 2.0
    np.clip(S, 0.0, 1.0, out=S)
    np.fill_diagonal(S, np.where(norms > 0, 1.0, 0.0))
    return S


def lda_estep(
    indptr: np.ndarray,
    indices: np.ndarray,
    counts: np.ndarray,
    exp_elog_beta: np.ndarray,
    alpha: float,
    gamma_in: np.ndarray,
    tol: float,
    max_inner: int,
) -> tuple[np.ndarray, np.ndarray]:
    """One variational E-step sweep over a CSR bag-of-words corpus.

    Per document, iterate the collapsed gamma update (optimal phi substituted
    back) until the mean absolute gamma change drops below tol. Returns
    (gamma, raw sufficient statistics); the caller multiplies the statistics
    elementwise by exp_elog_beta before the M-step.
    """
    n_docs = len(indptr) - 1
    n_topics, n_terms = exp_elog_beta.shape
    gamma = np.array(gamma_in, dtype=np.float64, copy=True)
    sstats = np.zeros((n_topics, n_terms))
    for d in range(n_docs):
        s, e = indptr[d], indptr[d + 1]
        if s == e:
            continue
        ids = indices[s:e]
        cts = counts[s:e]
        gammad = gamma[d]
        beta_d = exp_elog_beta[:, ids]
        elog = psi(gammad) - psi(gammad.sum())
        exp_elog = np.exp(elog)
        phinorm = exp_elog @ beta_d + PHI_EPS
        for _ in range(max_inner):
            last = gammad
            gammad = alpha + exp_elog * ((cts / phinorm) @ beta_d.T)
            elog = psi(gammad) - psi(gammad.sum())
            exp_elog = np.exp(elog)
            phinorm = exp_elog @ beta_d + PHI_EPS
            if np.mean(np.abs(gammad - last)) < tol:
                break
        gamma[d] = gammad
        sstats[:, ids] += np.outer(exp_elog, cts / phinorm)
    return gamma, sstats
