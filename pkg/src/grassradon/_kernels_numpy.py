"""Pure-numpy reference implementations of the hot batched kernels.

Shapes: a batch of field matrices is (S, n, k, d). These are the
fallback path when numba is unavailable or disabled via
GRASSRADON_BACKEND=numpy; semantics must match _kernels_numba exactly.
"""

import numpy as np

from .fields import _MULT_TENSOR


def matmul_batch(A, B, d):
    """Batched field matmul: (S,n,p,d) @ (S,p,q,d) -> (S,n,q,d)."""
    return np.einsum("sipa,spjb,abc->sijc", A, B, _MULT_TENSOR[d], optimize=True)


def _col_dot(Q, V, d):
    # sum_r conj(Q[s,r,:]) * V[s,r,:] -> (S, d)
    Qc = Q.copy()
    Qc[..., 1:] *= -1.0
    return np.einsum("sra,srb,abc->sc", Qc, V, _MULT_TENSOR[d], optimize=True)


def _col_scale(Q, c, d):
    # right-multiply each column vector Q[s,:,:] by the scalar c[s,:]
    return np.einsum("sra,sb,abc->src", Q, c, _MULT_TENSOR[d], optimize=True)


def orthonormalize_batch(X, d):
    """Batched Gram-Schmidt over the field, columns orthonormalized in order.

    Two projection passes per column; the triangular factor has positive
    real diagonal, so Gaussian input maps to exactly invariant frames.
    """
    S, n, k, _ = X.shape
    Q = np.empty_like(X)
    for j in range(k):
        v = X[:, :, j, :].copy()
        for _ in range(2):
            for i in range(j):
                c = _col_dot(Q[:, :, i, :], v, d)
                v -= _col_scale(Q[:, :, i, :], c, d)
        nrm = np.sqrt(np.sum(v * v, axis=(1, 2)))
        Q[:, :, j, :] = v / nrm[:, None, None]
    return Q
