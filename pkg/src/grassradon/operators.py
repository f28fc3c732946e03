"""The Radon transform between Grassmannians, its companion averaging
operators, angle profiles, and the rank-one inversion pipeline.

All operators are Monte Carlo averages over compact groups, evaluated
batched: an InvariantFunction's evaluator receives a whole batch of
frames (S, n, k, d) and returns (S,) values. Stochastic evaluators
(themselves single-draw Monte Carlo estimates, used to compose operators
without nesting full estimators) additionally receive the block RNG, so
composition stays unbiased, seeded and shard-independent.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.special import gamma as _gamma

from . import algebra as la
from . import geometry as geo
from .cone import cone_dim, gamma_cone, log_gamma_cone, polar_constant
from .sampling import haar_stiefel, haar_unitary, mc_expect, stream, subseed


# ---------------------------------------------------------------------------
# functions on frames
# ---------------------------------------------------------------------------

RIGHT_UNITARY = "right-unitary"
NO_INVARIANCE = "none"
RIGHT_UNITARY_IN_LAW = "right-unitary-in-law"  # stochastic evaluators


@dataclass
class InvariantFunction:
    """Evaluatable function on frames with a declared invariance contract.

    evaluator(frames) -> values for deterministic functions;
    evaluator(frames, rng) -> values when stochastic=True. A declared
    right-unitary invariance is audited on construction with a few
    random (frame, unitary) pairs.
    """

    field: object
    n: int
    k: int
    evaluator: object
    invariance: str = RIGHT_UNITARY
    label: str = ""
    stochastic: bool = False

    def __post_init__(self):
        if self.invariance == RIGHT_UNITARY and not self.stochastic:
            rng = stream(0xA0D17)
            x = haar_stiefel(self.field, self.n, self.k, rng, 4)
            u = haar_unitary(self.field, self.k, rng, 4)
            xu = la.matmul(self.field, x, u)
            gap = np.max(np.abs(np.asarray(self.evaluator(xu)) - np.asarray(self.evaluator(x))))
            if gap > 1e-9:
                raise ValueError(
                    f"function {self.label!r} declared right-unitary invariant "
                    f"but audit found a gap of {gap:.3e}"
                )

    def __call__(self, frames, rng=None):
        if self.stochastic:
            return self.evaluator(frames, rng)
        return self.evaluator(frames)


def constant_one(field, n, k):
    return InvariantFunction(
        field, n, k, lambda fr: np.ones(fr.shape[0]), RIGHT_UNITARY, "1"
    )


def trace_quadratic(field, n, k, a):
    """f(x) = Re tr(a x x*), a self-adjoint n x n; a function of the span only."""
    la.check_self_adjoint(field, a)

    def ev(frames):
        p = la.matmul(field, frames, la.adjoint(frames))
        return np.sum(a * p, axis=(-3, -2, -1))

    return InvariantFunction(field, n, k, ev, RIGHT_UNITARY, "tr(A P)")


def radon_closed_form_quadratic(field, k, kprime, a, eta):
    """Reference value (k/k') Re tr(a P_eta) for the trace_quadratic family."""
    return k / kprime * float(np.sum(a * geo.projection(field, eta)))


# ---------------------------------------------------------------------------
# the transform and the averaging operators
# ---------------------------------------------------------------------------

def _frame_array(x):
    return x.frame.x if isinstance(x, geo.GrassmannPoint) else (
        x.x if isinstance(x, geo.StiefelFrame) else np.asarray(x, dtype=float)
    )


def radon(f, target, n_samples, seed, shards=1):
    """Average of f over the k-planes inside the span of the target frame.

    Group definition: integrate f(g_y diag(tau, I) x0) over Haar tau in the
    unitary group of rank k'; since g_y y0 = y, the integrand is f(y v) with
    v = tau[:, :k] Haar on the (k', k) frames, which is what gets sampled.
    """
    y = _frame_array(target)
    kprime = y.shape[1]
    if f.k > kprime:
        raise ValueError(f"transform needs k <= k' (got k={f.k}, k'={kprime})")
    if f.n != y.shape[0]:
        raise ValueError("ambient dimensions of function and target disagree")
    field = f.field

    def sampler(rng, m):
        return haar_stiefel(field, kprime, f.k, rng, m), rng

    def integrand(batch):
        v, rng = batch
        frames = la.matmul(field, y, v)
        return f(frames, rng) if f.stochastic else f(frames)

    return mc_expect(integrand, sampler, n_samples, seed, shards=shards)


def radon_function(f, kprime):
    """The transform of f as a stochastic function on (n, k') frames:
    each evaluation is one unbiased draw of the inner average."""
    field = f.field

    def ev(frames, rng):
        v = haar_stiefel(field, kprime, f.k, rng, frames.shape[0])
        return f.evaluator(la.matmul(field, frames, v))

    if f.stochastic:
        raise ValueError("cannot push forward an already stochastic function")
    return InvariantFunction(
        field, f.n, kprime, ev, RIGHT_UNITARY_IN_LAW, f"radon[{f.label}]", stochastic=True
    )


def t_op(phi, b, x, n_samples, seed, shards=1, completion=None):
    """Average of phi over the k'-planes at squared-angle spectrum b*b with x.

    Implements the group integral over diag(alpha, delta) acting on the
    fixed frame j(b)^(-1) y0; only the first k' columns of alpha act, so a
    Haar (n-k, k') frame is drawn in place of the full unitary (same law).
    """
    x = _frame_array(x)
    field, (n, k) = phi.field, x.shape[:2]
    kprime = phi.k
    if phi.n != n:
        raise ValueError("ambient dimensions of function and base frame disagree")
    if n < k + kprime:
        raise ValueError(f"need n >= k + k' (got n={n}, k={k}, k'={kprime})")
    g_x = complete_to_unitary_cached(field, x) if completion is None else completion
    F = geo.j_inv_on_reference(field, n, k, kprime, b)
    F_top = F[:kprime]  # rows k'..n-k-1 of the top block vanish
    F_bot = F[n - k :]

    def sampler(rng, m):
        return (
            haar_stiefel(field, n - k, kprime, rng, m),
            haar_unitary(field, k, rng, m),
            rng,
        )

    def integrand(batch):
        alpha, delta, rng = batch
        top = la.matmul(field, alpha, F_top)
        bot = la.matmul(field, delta, F_bot)
        frames = la.matmul(field, g_x, np.concatenate([top, bot], axis=1))
        return phi(frames, rng) if phi.stochastic else phi(frames)

    return mc_expect(integrand, sampler, n_samples, seed, shards=shards)


def w_op(f, b, x, n_samples, seed, shards=1, completion=None):
    """Mean value of f over frames [alpha (I - b*b)^(1/2); b] rotated to x."""
    x = _frame_array(x)
    field, (n, k) = f.field, x.shape[:2]
    if f.n != n or f.k != k:
        raise ValueError("function and base frame dimensions disagree")
    base = geo.h_on_reference(field, n, b)
    base_top = base[:k]  # rows k..n-k-1 vanish
    g_x = complete_to_unitary_cached(field, x) if completion is None else completion

    def sampler(rng, m):
        return haar_stiefel(field, n - k, k, rng, m), rng

    def integrand(batch):
        alpha_k, rng = batch
        top = la.matmul(field, alpha_k, base_top)
        bot = np.broadcast_to(base[n - k :], (top.shape[0],) + base[n - k :].shape)
        frames = la.matmul(field, g_x, np.concatenate([top, bot], axis=1))
        return f(frames, rng) if f.stochastic else f(frames)

    return mc_expect(integrand, sampler, n_samples, seed, shards=shards)


_completion_cache = {}


def complete_to_unitary_cached(field, x):
    key = (field.name,) + (x.tobytes(),)
    if key not in _completion_cache:
        if len(_completion_cache) > 256:
            _completion_cache.clear()
        _completion_cache[key] = geo.complete_to_unitary(field, x, "last")
    return _completion_cache[key]


# ---------------------------------------------------------------------------
# profiles in the angle variable
# ---------------------------------------------------------------------------

@dataclass
class ProfileSamples:
    """Angle profile of a transformed function at a base frame: the
    prefactored average at each grid point, with per-point seeds."""

    field: object
    grid: np.ndarray
    values: list
    x: np.ndarray
    k: int
    kprime: int
    seeds: list = dc_field(default_factory=list)

    def means(self):
        return np.array([v.mean for v in self.values])

    def stderrs(self):
        return np.array([v.stderr for v in self.values])


def profile_exponent(field, k, kprime):
    """Exponent of delta(s) in the profile: (d/2)(k' - (k-1)) - 1."""
    return 0.5 * field.d * (kprime - (k - 1)) - 1.0


def phi_profile(phi, x, grid, n_samples, seed, shards=1):
    """Profile s -> delta(s)^pw * (T_{s^(1/2)} phi)(x) over a grid in (0, 1)
    (k = 1: floats; otherwise interval points)."""
    x = _frame_array(x)
    field, k = phi.field, x.shape[1]
    pw = profile_exponent(field, k, phi.k)
    grid = np.asarray(grid, dtype=float)
    if k == 1:
        if np.any(grid <= 0.0) or np.any(grid >= 1.0) or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing inside (0, 1)")
        bs = [la.scalar(field, np.sqrt(s)) for s in grid]
        deltas = grid
    else:
        from .cone import IntervalPoint

        for t in grid:
            IntervalPoint(field, t)  # rejects grid points touching 0 or I
        bs = [la.herm_sqrt(field, t) for t in grid]
        deltas = np.array([la.delta_det(field, t) for t in grid])
    completion = complete_to_unitary_cached(field, x)
    values, seeds = [], []
    for i, b in enumerate(bs):
        point_seed = subseed(seed, i)
        est = t_op(phi, b, x, n_samples, point_seed, shards=shards, completion=completion)
        scale = deltas[i] ** pw
        values.append(
            type(est)(mean=est.mean * scale, stderr=est.stderr * abs(scale),
                      n_samples=est.n_samples, seed=est.seed)
        )
        seeds.append(point_seed)
    return ProfileSamples(field=field, grid=grid, values=values, x=x, k=k,
                          kprime=phi.k, seeds=seeds)


def chebyshev_grid(lo=0.02, hi=0.98, count=24):
    nodes = np.cos((2 * np.arange(count) + 1) * np.pi / (2 * count))
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes)


def phi1_function(phi, x):
    """The transformed-side profile as a stochastic function of interval
    points t: delta(t)^((d/2)(k'-(k-1))-1) times a one-draw average of phi
    over the orbit at angle t. Feeds the fractional-integral estimators."""
    x = _frame_array(x)
    field, (n, k) = phi.field, x.shape[:2]
    kprime = phi.k
    g_x = complete_to_unitary_cached(field, x)
    pw = profile_exponent(field, k, kprime)
    eye = la.identity(field, k)

    def ev(t_batch, rng):
        m = t_batch.shape[0]
        root = la.sqrt_batch(field, t_batch)
        croot = la.sqrt_batch(field, eye[None] - t_batch)
        # j(root)^-1 y0 assembled per sample: [[I, 0], [0, croot], [0, 0], [0, root]]
        F_top = np.zeros((m, kprime, kprime, field.d))
        for i in range(kprime - k):
            F_top[:, i, i, 0] = 1.0
        F_top[:, kprime - k :, kprime - k :] = croot
        F_bot = np.zeros((m, k, kprime, field.d))
        F_bot[:, :, kprime - k :] = root
        alpha = haar_stiefel(field, n - k, kprime, rng, m)
        delta = haar_unitary(field, k, rng, m)
        frames = la.matmul(
            field, g_x,
            np.concatenate(
                [la.matmul(field, alpha, F_top), la.matmul(field, delta, F_bot)], axis=1
            ),
        )
        vals = phi(frames, rng) if phi.stochastic else phi(frames)
        return la.delta_batch(field, t_batch) ** pw * np.asarray(vals)

    return InvariantFunction(field, n, k, ev, NO_INVARIANCE,
                             f"profile1[{phi.label}]", stochastic=True)


def phi0_function(f, x):
    """The mean-value-side profile as a stochastic function of interval
    points t: delta(t)^(d/2 - 1) times a one-draw unitary average of the
    mean-value operator at contraction u t^(1/2)."""
    x = _frame_array(x)
    field, (n, k) = f.field, x.shape[:2]
    g_x = complete_to_unitary_cached(field, x)
    eye = la.identity(field, k)

    def ev(t_batch, rng):
        m = t_batch.shape[0]
        root = la.sqrt_batch(field, t_batch)
        croot = la.sqrt_batch(field, eye[None] - t_batch)
        u = haar_unitary(field, k, rng, m)
        alpha_k = haar_stiefel(field, n - k, k, rng, m)
        frames = la.matmul(
            field, g_x,
            np.concatenate(
                [la.matmul(field, alpha_k, croot), la.matmul(field, u, root)], axis=1
            ),
        )
        vals = f(frames, rng) if f.stochastic else f(frames)
        return la.delta_batch(field, t_batch) ** (0.5 * field.d - 1.0) * np.asarray(vals)

    return InvariantFunction(field, n, k, ev, NO_INVARIANCE,
                             f"profile0[{f.label}]", stochastic=True)


# ---------------------------------------------------------------------------
# the constant tying the two profiles together
# ---------------------------------------------------------------------------

def _c3_at(field, k, kprime, eps):
    nk = cone_dim(field, k) / k
    if kprime == k:
        return 1.0
    if kprime - k >= k:
        c_eps = polar_constant(field, kprime - k, k) * (
            gamma_cone(field, k, eps + nk)
            * gamma_cone(field, k, 0.5 * field.d * (kprime - k))
            / gamma_cone(field, k, eps + nk + 0.5 * field.d * (kprime - k))
        )
    else:
        kk = kprime - k
        nkk = cone_dim(field, kk) / kk
        c_eps = polar_constant(field, k, kk) * (
            gamma_cone(field, kk, eps + 1 + 0.5 * field.d * (kk - 1))
            * gamma_cone(field, kk, 0.5 * field.d * k)
            / gamma_cone(field, kk, eps + nkk + 0.5 * field.d * k)
        )
    c_big = c_eps * polar_constant(field, k, k) * gamma_cone(
        field, k, 0.5 * field.d * (kprime - k) + eps + nk
    )
    return c_big / (polar_constant(field, kprime, k) * gamma_cone(field, k, eps + nk))


def c3_constant(field, k, kprime, eps_pair=(0.0, 0.7)):
    """Normalization constant between the two fractional-integral profiles,
    computed from its defining integrals; independence of the auxiliary
    epsilon is asserted rather than assumed."""
    v0, v1 = (_c3_at(field, k, kprime, e) for e in eps_pair)
    if abs(v0 - v1) > 1e-10 * max(1.0, abs(v0)):
        raise RuntimeError(f"profile constant depends on epsilon: {v0!r} vs {v1!r}")
    return v0


def c3_printed_forms(field, k, kprime):
    """Known closed forms for the constant (secondary cross-check for the suite)."""
    if kprime == k:
        return 1.0
    if kprime - k >= k:
        return (
            polar_constant(field, kprime - k, k)
            * polar_constant(field, k, k)
            * gamma_cone(field, k, 0.5 * field.d * (kprime - k))
            / polar_constant(field, kprime, k)
        )
    kk = kprime - k
    return (
        polar_constant(field, k, kk)
        * polar_constant(field, k, k)
        * gamma_cone(field, kk, 0.5 * field.d * k)
        / polar_constant(field, kprime, k)
    )


# ---------------------------------------------------------------------------
# rank-one inversion
# ---------------------------------------------------------------------------

@dataclass
class InversionResult:
    value: float
    eval_points: np.ndarray
    eval_values: np.ndarray
    richardson: np.ndarray
    condition_number: float
    coefficients: np.ndarray
    m: int
    frac_order: float
    c3: float


def minimal_derivative_order(field, kprime, k=1):
    """Smallest admissible integer order m > (d/2)(k' - 1)."""
    nu = 0.5 * field.d * (kprime - 1)
    return int(np.floor(nu + 1e-12)) + 1


def invert_k1(profile, m=None, fit_degree=12, richardson_levels=(2, 3, 4, 5),
              max_condition=1e10):
    """Recover f at the profile's base point (k = 1 pipeline).

    The profile carries a known prefactor s^pw, so the smooth part
    psi(s) = profile / s^pw is fitted by (stderr-weighted) least squares;
    fractional integration of order m - (d/2)(k'-1) and the m derivatives
    are then exact on the monomial basis s^(pw+j). The boundary limit at
    s = 1 is Richardson-extrapolated and normalized by the profile constant.
    """
    if profile.k != 1:
        raise ValueError("closed-form inversion pipeline is rank-one only")
    field, kprime = profile.field, profile.kprime
    nu = 0.5 * field.d * (kprime - 1)
    if m is None:
        m = minimal_derivative_order(field, kprime)
    if m <= nu:
        raise ValueError(f"derivative order m={m} violates m > (d/2)(k'-1) = {nu:g}")
    grid = profile.grid
    if fit_degree > len(grid) - 2:
        raise ValueError("fit degree too large for the grid")
    pw = profile_exponent(field, 1, kprime)
    psi = profile.means() / grid**pw
    se = profile.stderrs() / grid**pw
    weights = 1.0 / se if np.all(se > 0) else None
    cheb = np.polynomial.chebyshev.Chebyshev.fit(
        grid, psi, fit_degree, w=weights, domain=[grid[0], grid[-1]]
    )
    u = (2 * grid - (grid[0] + grid[-1])) / (grid[-1] - grid[0])
    design = np.polynomial.chebyshev.chebvander(u, fit_degree)
    if weights is not None:
        design = design * weights[:, None]
    sv = np.linalg.svd(design, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    if cond > max_condition:
        raise ValueError(f"ill-conditioned profile fit (condition number {cond:.3e})")
    coeffs = cheb.convert(kind=np.polynomial.Polynomial).coef  # monomial in s

    # I^lam s^g = Gamma(g+1)/Gamma(g+1+lam) s^(g+lam); then m exact derivatives
    lam = m - nu
    c3 = c3_constant(field, 1, kprime)
    gs = pw + np.arange(len(coeffs))
    amp = coeffs * _gamma(gs + 1) / _gamma(gs + 1 + lam)
    powers = gs + lam - m  # = pw + j - nu
    for i in range(m):
        amp = amp * (gs + lam - i)

    def g(s):
        return float(np.sum(amp * s**powers)) / c3

    s_eval = 1.0 - np.power(2.0, -np.asarray(richardson_levels, dtype=float))
    gv = np.array([g(s) for s in s_eval])
    table = [gv.copy()]
    cur = gv
    for level in range(1, len(gv)):
        nxt = cur[1:] + (cur[1:] - cur[:-1]) / (2.0**level - 1.0)
        table.append(nxt)
        cur = nxt
    return InversionResult(
        value=float(cur[-1]),
        eval_points=s_eval,
        eval_values=gv,
        richardson=np.array([t[-1] for t in table]),
        condition_number=cond,
        coefficients=coeffs,
        m=m,
        frac_order=lam,
        c3=c3,
    )
