"""Frames, Grassmannian points, angle matrices and the block unitaries
used to parametrize incidence between planes of different ranks.

Conventions: reference frames are x0 = [I_k; 0] and xhat0 = [0; I_k].
The special unitaries j(a) and h(a) act on the block decomposition of
the ambient space into (k'-k, k, n-k'-k, k) and (k, n-k'-k, k'-k, k)
coordinates respectively; only their actions on reference frames and
projections are needed downstream, and those are pinned by tests.
"""

from dataclasses import dataclass

import numpy as np

from . import algebra as la

FRAME_TOL = 1e-10
GRASS_EQ_TOL = 1e-9


@dataclass
class StiefelFrame:
    """Isometric n x k matrix over the field (orthonormal k-frame)."""

    field: object
    x: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        defect = frame_defect(self.field, self.x)
        if defect > FRAME_TOL:
            raise ValueError(f"not a frame (isometry defect {defect:.3e})")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def k(self):
        return self.x.shape[1]


@dataclass
class GrassmannPoint:
    """Right-unitary orbit of a frame; identified with its projection."""

    frame: StiefelFrame

    @property
    def field(self):
        return self.frame.field

    def projection(self):
        y = self.frame.x
        return la.matmul(self.field, y, la.adjoint(y))

    def __eq__(self, other):
        if not isinstance(other, GrassmannPoint):
            return NotImplemented
        return bool(la.fro_norm(self.projection() - other.projection()) < GRASS_EQ_TOL)


def frame_defect(field, x):
    k = x.shape[-2]
    return float(np.max(la.fro_norm(la.matmul(field, la.adjoint(x), x) - la.identity(field, k))))


def reference_frame(field, n, k, hat=False):
    """x0 = [I_k; 0] or (hat) xhat0 = [0; I_k]."""
    x = la.zeros(field, n, k)
    rows = np.arange(n - k, n) if hat else np.arange(k)
    x[rows, np.arange(k), 0] = 1.0
    return x


def projection(field, y):
    """Orthogonal projection onto the span of the frame y: P = y y*."""
    if isinstance(y, GrassmannPoint):
        return y.projection()
    if isinstance(y, StiefelFrame):
        field, y = y.field, y.x
    return la.matmul(field, y, la.adjoint(y))


def cos2(field, eta, x):
    """Squared-cosine angle matrix x* P_eta x (k x k, between 0 and I)."""
    if isinstance(eta, GrassmannPoint):
        eta = eta.frame.x
    elif isinstance(eta, StiefelFrame):
        eta = eta.x
    if isinstance(x, StiefelFrame):
        x = x.x
    m = la.matmul(field, la.adjoint(eta), x)
    return la.matmul(field, la.adjoint(m), m)


# ---------------------------------------------------------------------------
# block unitaries j(a), h(a)
# ---------------------------------------------------------------------------

def _contraction_parts(field, a, tol=1e-10):
    aa = la.matmul(field, la.adjoint(a), a)
    lam = la.herm_eigvals(field, aa)
    if lam[0] > 1.0 + tol:
        raise ValueError(f"spectral norm of a exceeds 1 (largest eig of a*a = {lam[0]:.6g})")
    eye = la.identity(field, a.shape[0])
    ssq = la.herm_sqrt(field, eye - aa)
    ssq_t = la.herm_sqrt(field, eye - la.matmul(field, a, la.adjoint(a)))
    return ssq, ssq_t


def _place(out, offs, bi, bj, block):
    out[offs[bi] : offs[bi] + block.shape[0], offs[bj] : offs[bj] + block.shape[1]] = block


def j_mat(field, n, k, kprime, a):
    """Unitary mixing the second and fourth blocks of (k'-k, k, n-k'-k, k)."""
    if n < k + kprime:
        raise ValueError(f"need n >= k + k' (got n={n}, k={k}, k'={kprime})")
    ssq, ssq_t = _contraction_parts(field, a)
    sizes = [kprime - k, k, n - kprime - k, k]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    out = la.zeros(field, n, n)
    _place(out, offs, 0, 0, la.identity(field, sizes[0]))
    _place(out, offs, 1, 1, ssq)
    _place(out, offs, 1, 3, la.adjoint(a))
    _place(out, offs, 2, 2, la.identity(field, sizes[2]))
    _place(out, offs, 3, 1, -a)
    _place(out, offs, 3, 3, ssq_t)
    return out


def h_mat(field, n, k, kprime, a):
    """Unitary mixing the first and fourth blocks of (k, n-k'-k, k'-k, k)."""
    if n < k + kprime:
        raise ValueError(f"need n >= k + k' (got n={n}, k={k}, k'={kprime})")
    ssq, ssq_t = _contraction_parts(field, a)
    sizes = [k, n - kprime - k, kprime - k, k]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    out = la.zeros(field, n, n)
    _place(out, offs, 0, 0, la.adjoint(a))
    _place(out, offs, 0, 3, ssq)
    _place(out, offs, 1, 1, la.identity(field, sizes[1]))
    _place(out, offs, 2, 2, la.identity(field, sizes[2]))
    _place(out, offs, 3, 0, -ssq_t)
    _place(out, offs, 3, 3, a)
    return out


def h_on_reference(field, n, a):
    """h(a) applied to xhat0: the frame [(I - a*a)^(1/2); 0; a]."""
    k = a.shape[0]
    ssq, _ = _contraction_parts(field, a)
    out = la.zeros(field, n, k)
    out[:k] = ssq
    out[n - k :] = a
    return out


def j_inv_on_reference(field, n, k, kprime, b):
    """j(b)^-1 applied to y0 = [I_k'; 0]: columns [[I, 0], [0, s], [0, 0], [0, b]]
    with s = (I - b*b)^(1/2)."""
    ssq, _ = _contraction_parts(field, b)
    out = la.zeros(field, n, kprime)
    for i in range(kprime - k):
        out[i, i, 0] = 1.0
    out[kprime - k : kprime, kprime - k :] = ssq
    out[n - k :, kprime - k :] = b
    return out


# ---------------------------------------------------------------------------
# completions and decompositions
# ---------------------------------------------------------------------------

def complete_to_unitary(field, x, placement="last"):
    """Deterministic unitary completion g of a frame.

    placement='last' gives g with g xhat0 = x, placement='first' gives
    g x0 = x. The added columns come from Gram-Schmidt over the standard
    basis, at each step taking the basis vector with the largest residual.
    """
    if isinstance(x, StiefelFrame):
        x = x.x
    n, k = x.shape[0], x.shape[1]
    ortho = [np.ascontiguousarray(x[:, j]) for j in range(k)]
    added = []
    for _ in range(n - k):
        best, best_norm = None, -1.0
        for i in range(n):
            e = la.zeros(field, n, 1)[:, 0]
            e[i, 0] = 1.0
            r = e
            for _pass in range(2):
                for q in ortho + added:
                    c = np.einsum("ra,rb,abc->c", q * field.conj_sign, r, field.mult_tensor)
                    r = r - np.einsum("ra,b,abc->rc", q, c, field.mult_tensor)
            nrm = np.sqrt(np.sum(r * r))
            if nrm > best_norm + 1e-12:
                best, best_norm = r, nrm
        added.append(best / best_norm)
    cols = added + ortho if placement == "last" else ortho + added
    return np.stack(cols, axis=1)


def bi_stiefel_decompose(field, w, kprime, tol=1e-10):
    """Split a frame w into w = [u r^(1/2); v (I - r)^(1/2)] with
    u in S_{k',k}, v in S_{n-k',k}, r = w1* w1 in the open interval."""
    if isinstance(w, StiefelFrame):
        w = w.x
    k = w.shape[1]
    w1, w2 = w[:kprime], w[kprime:]
    r = la.matmul(field, la.adjoint(w1), w1)
    r = 0.5 * (r + la.adjoint(r))
    lam = la.herm_eigvals(field, r)
    if lam[-1] <= tol or lam[0] >= 1.0 - tol:
        raise ValueError("boundary decomposition rejected (block lost rank)")
    eye = la.identity(field, k)
    u = la.matmul(field, w1, la.herm_inv_sqrt(field, r))
    v = la.matmul(field, w2, la.herm_inv_sqrt(field, eye - r))
    return u, v, r


def decompose_j_frame(field, n, k, kprime, a, v, tol=1e-10):
    """Factor j(a)^-1 [v; 0] as diag(l, I_k) h(b) xhat0 with l unitary on the
    first n-k coordinates and b = [0 a] v."""
    aa = la.matmul(field, la.adjoint(a), a)
    lam = la.herm_eigvals(field, aa)
    if lam[0] >= 1.0 - tol or lam[-1] <= tol:
        raise ValueError("need strict contraction 0 < a a* < I")
    v_top, v_bot = v[: kprime - k], v[kprime - k :]
    b = la.matmul(field, a, v_bot)
    bb = la.matmul(field, la.adjoint(b), b)
    if la.herm_eigvals(field, bb)[0] >= 1.0 - tol:
        raise ValueError("degenerate b (b*b has a unit eigenvalue)")
    eye = la.identity(field, k)
    ssq = la.herm_sqrt(field, eye - aa)
    q = la.zeros(field, n - k, k)
    q[: kprime - k] = v_top
    q[kprime - k : kprime] = la.matmul(field, ssq, v_bot)
    u = la.matmul(field, q, la.herm_inv_sqrt(field, eye - bb))
    l = complete_to_unitary(field, u, placement="first")
    return l, b
