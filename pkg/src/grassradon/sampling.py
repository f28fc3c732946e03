"""Seeded sampling on the compact groups and the Monte Carlo engine.

Reproducibility contract: every estimator is a pure function of
(seed, configuration). Sample streams are counter-based (Philox keyed by
seed and a block index), work is cut into fixed-size blocks, and partial
sums are reduced in block order, so the result is bit-identical for any
shard count and any scheduling of the shards.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import algebra as la

_MASK64 = (1 << 64) - 1
BLOCK = 16384  # samples per RNG block; part of the reproducibility contract


def parse_seed(text):
    """Accept a decimal or hex (0x...) seed string, or an int."""
    if isinstance(text, (int, np.integer)):
        return int(text) & _MASK64
    return int(str(text).strip(), 0) & _MASK64


def stream(seed, index=0):
    """Independent generator for (seed, index); counter-based, splittable."""
    key = np.array([parse_seed(seed), index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def subseed(seed, *indices):
    """Derived 64-bit seed for a labelled subtask (stable across runs)."""
    ss = np.random.SeedSequence((parse_seed(seed),) + tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Haar samplers
# ---------------------------------------------------------------------------

def haar_stiefel(field, n, k, rng, count):
    """Haar-distributed frames: Gaussian matrices over the field followed by
    Gram-Schmidt with positive real diagonal, which is exactly invariant."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    from . import backend

    g = rng.standard_normal((count, n, k, field.d))
    return backend.orthonormalize_batch(g, field.d)


def haar_unitary(field, n, rng, count):
    return haar_stiefel(field, n, n, rng, count)


def sample_haar_stiefel(field, n, k, seed):
    """Single frame from a fresh stream (convenience wrapper)."""
    return haar_stiefel(field, n, k, stream(seed), 1)[0]


def sample_haar_unitary(field, n, seed):
    return haar_unitary(field, n, stream(seed), 1)[0]


# ---------------------------------------------------------------------------
# matrix-variate Beta sampler
# ---------------------------------------------------------------------------

BOUNDARY_TOL = 1e-12


@dataclass
class BetaMatrixSample:
    """One interval point with the log of its normalized density."""

    r: np.ndarray
    log_density: float


def matrix_beta_batch(field, k, n1, n2, rng, count):
    """Draw r = w1* w1 for Haar w on S_{n1+n2, k}, w1 the top n1 x k block.

    Returns (r, log_density, redraws). The density on the matrix interval is
    delta(r)^(d n1/2 - N/k) delta(I - r)^(d n2/2 - N/k) / B_cone(d n1/2, d n2/2).
    Samples with an eigenvalue within BOUNDARY_TOL of {0, 1} are redrawn.
    """
    if n1 < k or n2 < k:
        raise ValueError(f"matrix-Beta needs n1 >= k and n2 >= k, got ({n1}, {n2}, k={k})")
    from .cone import cone_dim, log_beta_cone

    n = n1 + n2
    w = haar_stiefel(field, n, k, rng, count)
    w1 = w[:, :n1]
    r = la.matmul(field, la.adjoint(w1), w1)
    redraws = 0
    for _ in range(100):
        lam = la.eigvals_batch(field, r)
        bad = (lam[:, 0] < BOUNDARY_TOL) | (lam[:, -1] > 1.0 - BOUNDARY_TOL)
        if not np.any(bad):
            break
        idx = np.nonzero(bad)[0]
        redraws += len(idx)
        wnew = haar_stiefel(field, n, k, rng, len(idx))
        w1n = wnew[:, :n1]
        r[idx] = la.matmul(field, la.adjoint(w1n), w1n)
    else:
        raise RuntimeError("matrix-Beta sampler kept hitting the interval boundary")
    r = 0.5 * (r + la.adjoint(r))
    nk = cone_dim(field, k) / k
    alpha, beta = 0.5 * field.d * n1, 0.5 * field.d * n2
    eye = la.identity(field, k)
    log_density = (
        (alpha - nk) * np.log(la.delta_batch(field, r))
        + (beta - nk) * np.log(la.delta_batch(field, eye[None] - r))
        - log_beta_cone(field, k, alpha, beta)
    )
    return r, log_density, redraws


def sample_matrix_beta(field, k, n1, n2, seed):
    r, logd, _ = matrix_beta_batch(field, k, n1, n2, stream(seed), 1)
    return BetaMatrixSample(r=r[0], log_density=float(logd[0]))


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------

@dataclass
class McEstimate:
    """Monte Carlo mean with standard error; seed makes it re-runnable."""

    mean: float
    stderr: float
    n_samples: int
    seed: int
    extra: dict = dc_field(default_factory=dict, repr=False)

    def z_against(self, reference, extra_var=0.0):
        denom = np.sqrt(self.stderr**2 + extra_var)
        if denom == 0.0:
            return 0.0 if np.allclose(self.mean, reference) else np.inf
        return float((np.asarray(self.mean) - reference) / denom)


def mc_expect(f, sampler, n_samples, seed, shards=1):
    """Mean and standard error of f over draws from sampler.

    sampler(rng, m) must return a batch of m samples and f(batch) an
    array of m values (or an (m, p) array for vector statistics). The
    estimate is identical for every shard count.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    seed = parse_seed(seed)
    n_blocks = (n_samples + BLOCK - 1) // BLOCK

    def run_block(b):
        m = min(BLOCK, n_samples - b * BLOCK)
        rng = stream(seed, b)
        values = np.asarray(f(sampler(rng, m)), dtype=float)
        if values.shape[0] != m:
            raise ValueError(f"integrand returned {values.shape[0]} values for {m} samples")
        finite = np.isfinite(values)
        if not finite.all():
            bad = int(np.argwhere(~finite.reshape(m, -1).all(axis=1))[0, 0])
            raise ValueError(f"non-finite integrand value at sample {b * BLOCK + bad}")
        return values.sum(axis=0), (values * values).sum(axis=0), m

    if shards > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            partials = list(pool.map(run_block, range(n_blocks)))
    else:
        partials = [run_block(b) for b in range(n_blocks)]

    s1 = partials[0][0] * 0.0
    s2 = s1.copy() if isinstance(s1, np.ndarray) else 0.0
    for p1, p2, _ in partials:  # fixed order: bit-exact for any shard count
        s1 = s1 + p1
        s2 = s2 + p2
    mean = s1 / n_samples
    var = np.maximum(s2 - n_samples * mean * mean, 0.0) / (n_samples - 1)
    stderr = np.sqrt(var / n_samples)
    if np.ndim(mean) == 0:
        mean, stderr = float(mean), float(stderr)
    return McEstimate(mean=mean, stderr=stderr, n_samples=n_samples, seed=seed)
