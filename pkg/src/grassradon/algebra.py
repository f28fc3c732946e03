"""Matrix arithmetic over R, C, H and the spectral toolbox.

A matrix over the field is a float64 array of shape (..., n, k, d); an
optional single leading axis batches independent samples. Self-adjoint
matrices (elements of the Jordan algebra of rank k) additionally satisfy
a = adjoint(a), and their determinant `delta_det` is the Jordan
determinant: the ordinary determinant over R and C, and the half-spectrum
product of the complex embedding over H.
"""

import numpy as np

from . import backend
from .fields import QUATERNION, FieldTag

HERM_TOL = 1e-12  # relative self-adjointness defect accepted


# ---------------------------------------------------------------------------
# basic constructors and involutions
# ---------------------------------------------------------------------------

def zeros(field, n, k):
    return np.zeros((n, k, field.d))


def identity(field, k):
    e = np.zeros((k, k, field.d))
    e[np.arange(k), np.arange(k), 0] = 1.0
    return e


def from_real(field, m):
    """Lift a real matrix into the field (imaginary components zero)."""
    m = np.asarray(m, dtype=float)
    out = np.zeros(m.shape + (field.d,))
    out[..., 0] = m
    return out


def scalar(field, *components):
    s = np.zeros((1, 1, field.d))
    s[0, 0, : len(components)] = components
    return s


def conj(x):
    out = x.copy()
    out[..., 1:] *= -1.0
    return out


def adjoint(x):
    return np.ascontiguousarray(conj(x).swapaxes(-3, -2))


def matmul(field, a, b):
    """Field matrix product; either argument may carry a batch axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a_batched = a.ndim == 4
    b_batched = b.ndim == 4
    if not (a_batched or b_batched):
        return backend.matmul_batch(a[None], b[None], field.d)[0]
    if a_batched and not b_batched:
        b = np.broadcast_to(b[None], (a.shape[0],) + b.shape)
    elif b_batched and not a_batched:
        a = np.broadcast_to(a[None], (b.shape[0],) + a.shape)
    elif a.shape[0] != b.shape[0]:
        if a.shape[0] == 1:
            a = np.broadcast_to(a, (b.shape[0],) + a.shape[1:])
        elif b.shape[0] == 1:
            b = np.broadcast_to(b, (a.shape[0],) + b.shape[1:])
        else:
            raise ValueError(f"batch sizes disagree: {a.shape[0]} vs {b.shape[0]}")
    return backend.matmul_batch(a, b, field.d)


def re_trace(x):
    """Real part of the trace; the trace form used throughout."""
    return np.einsum("...iic->...ic", x)[..., 0].sum(axis=-1)


def inner(x, y):
    """Euclidean pairing Re tr(x y*) = componentwise dot product."""
    return np.sum(x * y, axis=(-3, -2, -1))


def fro_norm(x):
    return np.sqrt(np.sum(np.square(x), axis=(-3, -2, -1)))


def herm_defect(x):
    return fro_norm(x - adjoint(x))


def check_self_adjoint(field, a, tol=HERM_TOL):
    d = herm_defect(a)
    if np.any(d > tol * np.maximum(1.0, fro_norm(a))):
        raise ValueError(f"matrix not self-adjoint (defect {np.max(d):.3e})")


# ---------------------------------------------------------------------------
# complex realizations
# ---------------------------------------------------------------------------

def complex_embed(x):
    """Embed a quaternionic (..., n, k, 4) matrix as complex (..., 2n, 2k).

    Convention: a + b j -> [[a, b], [-conj(b), conj(a)]], applied blockwise.
    The map is an algebra homomorphism and intertwines adjoints.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 4:
        raise ValueError("complex_embed expects quaternionic input (d = 4)")
    alpha = x[..., 0] + 1j * x[..., 1]
    beta = x[..., 2] + 1j * x[..., 3]
    n, k = x.shape[-3], x.shape[-2]
    out = np.zeros(x.shape[:-3] + (2 * n, 2 * k), dtype=complex)
    out[..., 0::2, 0::2] = alpha
    out[..., 0::2, 1::2] = beta
    out[..., 1::2, 0::2] = -beta.conj()
    out[..., 1::2, 1::2] = alpha.conj()
    return out


def complex_unembed(z):
    """Inverse of complex_embed on its image."""
    alpha = z[..., 0::2, 0::2]
    beta = z[..., 0::2, 1::2]
    return np.stack([alpha.real, alpha.imag, beta.real, beta.imag], axis=-1)


def as_complex(field, x):
    """Realize over C: identity for R (complex dtype), embedding for H."""
    if field.d == 1:
        return x[..., 0].astype(complex)
    if field.d == 2:
        return x[..., 0] + 1j * x[..., 1]
    return complex_embed(x)


# ---------------------------------------------------------------------------
# determinant and eigencalculus
# ---------------------------------------------------------------------------

def delta_det(field, a):
    """Jordan determinant of a self-adjoint matrix.

    Over H the eigenvalues of the complex embedding occur in pairs; the
    determinant is the product of the deduplicated half, which equals
    sqrt(det embed) on the positive cone.
    """
    a = np.asarray(a, dtype=float)
    check_self_adjoint(field, a)
    if field.d == 4:
        lam = np.linalg.eigvalsh(complex_embed(a))
        return np.prod(lam[..., 0::2], axis=-1)
    return np.linalg.det(as_complex(field, a)).real


def delta_batch(field, a):
    """delta_det over a batch, closed form for k <= 3 (no symmetry audit)."""
    k = a.shape[-2]
    if k == 1:
        return a[..., 0, 0, 0]
    if k == 2:
        return a[..., 0, 0, 0] * a[..., 1, 1, 0] - np.sum(a[..., 0, 1, :] ** 2, axis=-1)
    if k == 3:
        d0, d1, d2 = a[..., 0, 0, 0], a[..., 1, 1, 0], a[..., 2, 2, 0]
        p, q, r = a[..., 0, 1, :], a[..., 1, 2, :], a[..., 0, 2, :]
        n_p = np.sum(p * p, axis=-1)
        n_q = np.sum(q * q, axis=-1)
        n_r = np.sum(r * r, axis=-1)
        pq = _scalar_mul(field, p, q)
        cross = np.sum(pq * r, axis=-1)  # Re(p q conj(r))
        return d0 * d1 * d2 - d0 * n_q - d1 * n_r - d2 * n_p + 2.0 * cross
    if a.ndim == 3:
        return delta_det(field, a)
    return np.array([delta_det(field, ai) for ai in a])


def _scalar_mul(field, a, b):
    # product of scalar arrays (..., d)
    return np.einsum("...a,...b,abc->...c", a, b, field.mult_tensor)


def _scalar_conj(field, a):
    return a * field.conj_sign


def eig_herm(field, a, tol=1e-13, max_sweeps=100):
    """Eigendecomposition of a self-adjoint matrix, Jacobi sweeps in field
    arithmetic. Returns (eigenvalues descending, unitary frame V) with
    a = V diag(lam) V*.

    Each off-diagonal entry is first rotated onto the reals by its unit
    phase, then killed by a real Givens rotation; this is the one-sided
    Jacobi scheme valid verbatim for all three fields.
    """
    a = np.asarray(a, dtype=float)
    check_self_adjoint(field, a)
    k = a.shape[-2]
    A = 0.5 * (a + adjoint(a))
    V = identity(field, k)
    if k == 1:
        return A[0, 0, :1].copy(), V
    for _ in range(max_sweeps):
        off = np.sqrt(sum(np.sum(A[p, q] ** 2) for p in range(k) for q in range(p + 1, k)))
        scale = max(np.max(np.abs(np.diagonal(A[..., 0]))), 1e-300)
        if off <= tol * scale * k:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                m = np.sqrt(np.sum(A[p, q] ** 2))
                if m <= tol * scale:
                    continue
                u = A[p, q] / m
                ubar = _scalar_conj(field, u)
                alpha, beta = A[p, p, 0], A[q, q, 0]
                tau = (beta - alpha) / (2.0 * m)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # 2x2 unitary G = diag(1, conj(u)) . R(theta)
                g_pp = scalar(field, c)[0, 0]
                g_pq = scalar(field, s)[0, 0]
                g_qp = -s * ubar
                g_qq = c * ubar
                for M in (A, V):
                    col_p = M[:, p].copy()
                    col_q = M[:, q].copy()
                    M[:, p] = _scalar_mul(field, col_p, g_pp) + _scalar_mul(field, col_q, g_qp)
                    M[:, q] = _scalar_mul(field, col_p, g_pq) + _scalar_mul(field, col_q, g_qq)
                gs_pp, gs_pq = g_pp, -s * u
                gs_qp, gs_qq = g_pq, c * u
                row_p = A[p].copy()
                row_q = A[q].copy()
                A[p] = _scalar_mul(field, gs_pp, row_p) + _scalar_mul(field, gs_pq, row_q)
                A[q] = _scalar_mul(field, gs_qp, row_p) + _scalar_mul(field, gs_qq, row_q)
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p, 1:] = 0.0
                A[q, q, 1:] = 0.0
    else:
        raise RuntimeError(
            f"Jacobi eigensolver did not converge; off-diagonal residual {off:.3e}"
        )
    lam = np.diagonal(A[..., 0]).copy()
    order = np.argsort(-lam)
    return lam[order], np.ascontiguousarray(V[:, order])


def herm_apply(field, a, fn):
    """Spectral calculus: V diag(fn(lam)) V*."""
    lam, V = eig_herm(field, a)
    D = identity(field, len(lam))
    D[np.arange(len(lam)), np.arange(len(lam)), 0] = fn(lam)
    return matmul(field, matmul(field, V, D), adjoint(V))


def herm_sqrt(field, a):
    return herm_apply(field, a, lambda lam: np.sqrt(np.maximum(lam, 0.0)))


def herm_inv_sqrt(field, a):
    return herm_apply(field, a, lambda lam: 1.0 / np.sqrt(lam))


def herm_eigvals(field, a):
    return eig_herm(field, a)[0]


def eigvals_batch(field, a):
    """Ascending Jordan eigenvalues over a batch of self-adjoint matrices."""
    lam = np.linalg.eigvalsh(as_complex(field, a))
    if field.d == 4:
        lam = lam[..., 0::2]
    return lam


def sqrt_batch(field, a):
    """Principal square root over a batch of PD matrices, k <= 2 closed form."""
    k = a.shape[-2]
    if k == 1:
        out = np.zeros_like(a)
        out[..., 0, 0, 0] = np.sqrt(a[..., 0, 0, 0])
        return out
    if k == 2:
        det = delta_batch(field, a)
        tr = a[..., 0, 0, 0] + a[..., 1, 1, 0]
        g = np.sqrt(np.maximum(det, 0.0))
        h = np.sqrt(tr + 2.0 * g)
        out = a.copy()
        out[..., 0, 0, 0] += g
        out[..., 1, 1, 0] += g
        return out / h[..., None, None, None]
    if a.ndim == 3:
        return herm_sqrt(field, a)
    return np.stack([herm_sqrt(field, ai) for ai in a])


def polar_decompose(field, x, rank_tol=1e-12):
    """Unique polar factorization x = v r^{1/2} with v a frame, r = x*x > 0.

    Rank-deficient input (smallest eigenvalue of x*x below
    rank_tol * tr(x*x)) is rejected; that set has measure zero.
    """
    r = matmul(field, adjoint(x), x)
    r = 0.5 * (r + adjoint(r))
    lam, V = eig_herm(field, r)
    if lam[-1] <= rank_tol * np.sum(lam):
        raise ValueError(f"rank-deficient input to polar decomposition (min eig {lam[-1]:.3e})")
    D = identity(field, len(lam))
    D[np.arange(len(lam)), np.arange(len(lam)), 0] = 1.0 / np.sqrt(lam)
    v = matmul(field, x, matmul(field, matmul(field, V, D), adjoint(V)))
    return v, r


# ---------------------------------------------------------------------------
# real coordinates on the Jordan algebra
# ---------------------------------------------------------------------------

def herm_dim(field, k):
    """Real dimension N = k + (d/2) k (k-1) of the self-adjoint matrices."""
    return k + (field.d * k * (k - 1)) // 2


def herm_coord_weights(field, k):
    """Pairing weights: Re tr(x y*) = sum_a w_a x_a y_a in these coordinates."""
    n_off = (k * (k - 1)) // 2 * field.d
    return np.concatenate([np.ones(k), 2.0 * np.ones(n_off)])


def herm_to_coords(field, a):
    k = a.shape[-2]
    coords = [a[i, i, 0] for i in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            coords.extend(a[i, j, :])
    return np.array(coords)


def coords_to_herm(field, k, v):
    a = np.zeros((k, k, field.d))
    v = np.asarray(v, dtype=float)
    for i in range(k):
        a[i, i, 0] = v[i]
    pos = k
    for i in range(k):
        for j in range(i + 1, k):
            a[i, j, :] = v[pos : pos + field.d]
            a[j, i, :] = v[pos : pos + field.d] * field.conj_sign
            pos += field.d
    return a
