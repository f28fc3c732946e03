"""Jitted batched kernels for the per-sample inner loops.

Import of this module requires numba; the backend dispatcher falls back
to _kernels_numpy when it is missing or disabled.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def _matmul_batch(A, B, idx, sgn, out):
    S, n, p, d = A.shape
    q = B.shape[2]
    for s in prange(S):
        for i in range(n):
            for j in range(q):
                for c in range(d):
                    out[s, i, j, c] = 0.0
                for l in range(p):
                    for a in range(d):
                        xa = A[s, i, l, a]
                        for b in range(d):
                            out[s, i, j, idx[a, b]] += sgn[a, b] * xa * B[s, l, j, b]


@njit(cache=True, parallel=True)
def _orthonormalize_batch(X, idx, sgn, out, n_chunks):
    S, n, k, d = X.shape
    chunk = (S + n_chunks - 1) // n_chunks
    for t in prange(n_chunks):
        # per-chunk scratch keeps allocations off the per-sample path
        v = np.empty((n, d))
        c = np.empty(d)
        for s in range(t * chunk, min((t + 1) * chunk, S)):
            for j in range(k):
                for r in range(n):
                    for a in range(d):
                        v[r, a] = X[s, r, j, a]
                for _ in range(2):
                    for i in range(j):
                        # c = sum_r conj(q_i[r]) * v[r]
                        for a in range(d):
                            c[a] = 0.0
                        for r in range(n):
                            for a in range(d):
                                qa = out[s, r, i, a] if a == 0 else -out[s, r, i, a]
                                for b in range(d):
                                    c[idx[a, b]] += sgn[a, b] * qa * v[r, b]
                        # v -= q_i * c
                        for r in range(n):
                            for a in range(d):
                                qa = out[s, r, i, a]
                                for b in range(d):
                                    v[r, idx[a, b]] -= sgn[a, b] * qa * c[b]
                nrm = 0.0
                for r in range(n):
                    for a in range(d):
                        nrm += v[r, a] * v[r, a]
                nrm = np.sqrt(nrm)
                for r in range(n):
                    for a in range(d):
                        out[s, r, j, a] = v[r, a] / nrm


def matmul_batch(A, B, d):
    from .fields import _MULT_INDEX, _MULT_SIGN

    S, n, p, _ = A.shape
    q = B.shape[2]
    out = np.empty((S, n, q, d))
    _matmul_batch(
        np.ascontiguousarray(A), np.ascontiguousarray(B),
        _MULT_INDEX[d], _MULT_SIGN[d], out,
    )
    return out


def orthonormalize_batch(X, d):
    from .fields import _MULT_INDEX, _MULT_SIGN

    out = np.empty_like(X)
    n_chunks = min(64, max(1, X.shape[0] // 256))
    _orthonormalize_batch(
        np.ascontiguousarray(X), _MULT_INDEX[d], _MULT_SIGN[d], out, n_chunks
    )
    return out
