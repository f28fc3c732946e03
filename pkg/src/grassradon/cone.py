"""The symmetric cone of positive matrices: Gamma/Beta functions, the
quadratic representation and fractional integration on the interval (0, I).

The fractional integral of order lam acting on functions of the matrix
interval is

    (I^lam f)(s) = Gamma_cone(lam)^-1 * integral over 0 < t < s of
                   delta(s - t)^(lam - N/k) f(t) dt,

computed here either by Gauss-Jacobi quadrature (k = 1), by closed-form
coefficients on the delta-power class (any k), or by importance-sampled
Monte Carlo with a matrix-Beta proposal (any k, lam > N/k - 1).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, roots_jacobi
from scipy.special import gamma as _gamma

from . import algebra as la


def cone_dim(field, k):
    """Real dimension N = k + (d/2) k (k-1) of the rank-k Jordan algebra."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return la.herm_dim(field, k)


def _check_gamma_poles(field, k, lam):
    for j in range(1, k + 1):
        z = lam - 0.5 * field.d * (j - 1)
        zr = complex(z)
        if abs(zr.imag) < 1e-12 and zr.real <= 0 and abs(zr.real - round(zr.real)) < 1e-12:
            raise ValueError(
                f"gamma_cone pole: factor j={j} has argument {zr.real:g} "
                f"(lambda={lam}, field={field}, k={k})"
            )


def gamma_cone(field, k, lam):
    """Gamma function of the rank-k cone: (2 pi)^((N-k)/2) prod_j Gamma(lam - (d/2)(j-1))."""
    _check_gamma_poles(field, k, lam)
    N = cone_dim(field, k)
    args = np.array([lam - 0.5 * field.d * (j - 1) for j in range(1, k + 1)])
    val = (2.0 * np.pi) ** (0.5 * (N - k)) * np.prod(_gamma(args))
    return val if np.iscomplexobj(args) else float(val)


def log_gamma_cone(field, k, lam):
    """log of gamma_cone for real lam in the convergence range (overflow safe)."""
    _check_gamma_poles(field, k, lam)
    N = cone_dim(field, k)
    args = np.array([lam - 0.5 * field.d * (j - 1) for j in range(1, k + 1)])
    if np.any(args <= 0):
        raise ValueError("log_gamma_cone needs every Gamma factor argument positive")
    return 0.5 * (N - k) * np.log(2.0 * np.pi) + float(np.sum(gammaln(args)))


def beta_cone(field, k, lam, mu):
    """Beta function of the cone: Gamma(lam) Gamma(mu) / Gamma(lam + mu)."""
    return gamma_cone(field, k, lam) * gamma_cone(field, k, mu) / gamma_cone(field, k, lam + mu)


def log_beta_cone(field, k, lam, mu):
    return (
        log_gamma_cone(field, k, lam)
        + log_gamma_cone(field, k, mu)
        - log_gamma_cone(field, k, lam + mu)
    )


def polar_constant(field, n, k):
    """Constant pi^(dnk/2) / Gamma_cone(dn/2) relating Lebesgue measure on
    the n x k matrices to the frame x cone polar coordinates."""
    return np.pi ** (0.5 * field.d * n * k) / gamma_cone(field, k, 0.5 * field.d * n)


def quad_rep(field, x, y):
    """Quadratic representation P(x) y = x y x; maps the cone to itself for
    x in the cone, with delta(P(x) y) = delta(x)^2 delta(y)."""
    return la.matmul(field, la.matmul(field, x, y), x)


# ---------------------------------------------------------------------------
# cone / interval points
# ---------------------------------------------------------------------------

POSDEF_TOL = 1e-12


@dataclass
class ConePoint:
    """Self-adjoint matrix with all eigenvalues strictly positive."""

    field: object
    a: np.ndarray

    def __post_init__(self):
        la.check_self_adjoint(self.field, self.a)
        lam = la.herm_eigvals(self.field, self.a)
        if lam[-1] <= POSDEF_TOL * max(1.0, lam[0]):
            raise ValueError(f"not in the open cone (min eigenvalue {lam[-1]:.3e})")

    @property
    def k(self):
        return self.a.shape[-2]


@dataclass
class IntervalPoint:
    """Self-adjoint matrix with all eigenvalues strictly inside (0, 1)."""

    field: object
    t: np.ndarray

    def __post_init__(self):
        la.check_self_adjoint(self.field, self.t)
        lam = la.herm_eigvals(self.field, self.t)
        if lam[-1] >= 1.0 - POSDEF_TOL or lam[0] <= POSDEF_TOL:
            raise ValueError(
                f"not in the open interval (0, I): eigenvalues in [{lam[-1]:.3e}, {lam[0]:.3e}]"
            )

    @property
    def k(self):
        return self.t.shape[-2]


# ---------------------------------------------------------------------------
# fractional integration
# ---------------------------------------------------------------------------

def frac_integral_power(field, k, lam, mu):
    """Coefficient c in I^lam [delta^(mu - N/k)] = c delta^(lam + mu - N/k).

    Exact on the power class; serves as the oracle for the numerical routes.
    """
    nk = cone_dim(field, k) / k
    if np.real(lam) <= nk - 1 or np.real(mu) <= nk - 1:
        raise ValueError(f"need Re lam, Re mu > N/k - 1 = {nk - 1:g}")
    return gamma_cone(field, k, mu) / gamma_cone(field, k, lam + mu)


def frac_integral_quad_k1(f, lam, s, nodes=64):
    """Scalar (k = 1) fractional integral by Gauss-Jacobi quadrature.

    f must be vectorized on arrays of points in (0, s]. Exact up to
    rounding for polynomial f of degree < 2 * nodes.
    """
    if lam <= 0:
        raise ValueError("quadrature route needs lam > 0")
    x, w = roots_jacobi(nodes, lam - 1.0, 0.0)
    t = 0.5 * s * (1.0 + x)
    return (0.5 * s) ** lam / _gamma(lam) * float(np.dot(w, np.asarray(f(t), dtype=float)))


def default_beta_proposal(field, k, lam):
    """Integer matrix-Beta parameters whose density roughly matches the
    delta(I - v)^(lam - N/k) weight of the transformed integral."""
    n2 = max(k, round(2.0 * lam / field.d))
    return k, int(n2)


def frac_integral_mc(field, k, f, lam, s, n_samples, seed, shards=1, proposal=None):
    """Unbiased importance-sampling estimate of (I^lam f)(s), s <= I.

    Change of variables t = s^(1/2) v s^(1/2) maps the integral to the
    fixed interval (0, I); v is drawn from a matrix-Beta proposal and
    reweighted by the exact densities. Non-finite weights abort.
    f takes a batch (m, k, k, d) of interval points and returns (m,) values.
    """
    from .sampling import matrix_beta_batch, mc_expect

    nk = cone_dim(field, k) / k
    if lam <= nk - 1:
        raise ValueError(f"direct-integral regime needs lam > N/k - 1 = {nk - 1:g}")
    if isinstance(s, ConePoint):
        s = s.a
    s = np.asarray(s, dtype=float)
    lam_s = la.herm_eigvals(field, s)
    if lam_s[0] > 1.0 + 1e-10 or lam_s[-1] <= 0:
        raise ValueError("evaluation point must satisfy 0 < s <= I")
    n1, n2 = proposal if proposal is not None else default_beta_proposal(field, k, lam)
    sq = la.herm_sqrt(field, s)
    log_const = lam * np.log(la.delta_det(field, s)) - log_gamma_cone(field, k, lam)
    eye = la.identity(field, k)
    stochastic = getattr(f, "stochastic", False)

    def sampler(rng, m):
        v, log_q, _ = matrix_beta_batch(field, k, n1, n2, rng, m)
        return v, log_q, rng

    def integrand(batch):
        v, log_q, rng = batch
        log_w = (lam - nk) * np.log(la.delta_batch(field, eye[None] - v)) - log_q + log_const
        t = la.matmul(field, la.matmul(field, sq, v), sq)
        vals = f(t, rng) if stochastic else f(t)
        return np.exp(log_w) * np.asarray(vals, dtype=float)

    return mc_expect(integrand, sampler, n_samples, seed, shards=shards)
