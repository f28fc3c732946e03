"""The Cayley-type differential operator delta(d/dx) on the Jordan algebra.

The operator is the unique constant-coefficient operator of order k in the
N real coordinates of the self-adjoint matrices satisfying

    delta(d/dx) exp(<x, y>) = delta(y) exp(<x, y>),

with <x, y> = Re tr(x y*). In coordinates <x, y> = sum_a w_a x_a y_a with
weights w_a = 1 (diagonal) or 2 (off-diagonal component), so acting on the
exponential turns each d/dx_a into w_a y_a; matching the monomial expansion
of delta(y) fixes the coefficients. Applying the calibrated operator to
polynomials is exact, which is what the inversion pipeline relies on.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from . import algebra as la

# --- tiny sparse multivariate polynomials: {exponent tuple: coefficient} ---

def poly_mul(p, q):
    out = {}
    for a, ca in p.items():
        for b, cb in q.items():
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0.0) + ca * cb
    return {a: c for a, c in out.items() if c != 0.0}

def poly_pow(p, m):
    nvars = len(next(iter(p)))
    out = {tuple([0] * nvars): 1.0}
    for _ in range(m):
        out = poly_mul(out, p)
    return out

def poly_diff(p, var):
    out = {}
    for a, c in p.items():
        if a[var] == 0:
            continue
        b = list(a)
        b[var] -= 1
        out[tuple(b)] = out.get(tuple(b), 0.0) + c * a[var]
    return out

def poly_eval(p, v):
    v = np.asarray(v, dtype=float)
    total = 0.0
    for a, c in p.items():
        total += c * np.prod(v ** np.array(a))
    return total

def poly_sub(p, q):
    out = dict(p)
    for a, c in q.items():
        out[a] = out.get(a, 0.0) - c
    return {a: c for a, c in out.items() if abs(c) > 0.0}


def _monomials(nvars, degree):
    for combo in combinations_with_replacement(range(nvars), degree):
        alpha = [0] * nvars
        for i in combo:
            alpha[i] += 1
        yield tuple(alpha)


def delta_poly(field, k):
    """Monomial expansion of delta in the N real coordinates.

    Fitted by least squares against delta_det on seeded sample points
    (delta is homogeneous of degree k, so the system is square-ish and
    well conditioned at these sizes); verified on fresh points.
    """
    N = la.herm_dim(field, k)
    monos = list(_monomials(N, k))
    rng = np.random.default_rng(12345)
    pts = rng.standard_normal((2 * len(monos) + 8, N))
    design = np.empty((len(pts), len(monos)))
    for j, alpha in enumerate(monos):
        design[:, j] = np.prod(pts ** np.array(alpha), axis=1)
    target = np.array([la.delta_det(field, la.coords_to_herm(field, k, v)) for v in pts])
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    poly = {a: c for a, c in zip(monos, coef) if abs(c) > 1e-9}
    check = rng.standard_normal((24, N))
    for v in check:
        ref = la.delta_det(field, la.coords_to_herm(field, k, v))
        if abs(poly_eval(poly, v) - ref) > 1e-10 * max(1.0, abs(ref)):
            raise RuntimeError("delta expansion failed verification; calibration bug")
    return poly


@dataclass
class CayleyOperator:
    """Constant-coefficient order-k operator as (multi-index, coefficient) terms."""

    field: object
    k: int
    terms: list

    def apply_to_exponential(self, y):
        """Value of op[exp(<x, y>)] / exp(<x, y>); equals delta(y) by design."""
        w = la.herm_coord_weights(self.field, self.k)
        yv = la.herm_to_coords(self.field, y) * w
        return sum(c * np.prod(yv ** np.array(alpha)) for alpha, c in self.terms)

    def apply_to_poly(self, p):
        """Exact action on a sparse polynomial in the N coordinates."""
        out = {}
        for alpha, c in self.terms:
            q = p
            for var, power in enumerate(alpha):
                for _ in range(power):
                    q = poly_diff(q, var)
                if not q:
                    break
            for a, ca in q.items():
                out[a] = out.get(a, 0.0) + c * ca
        return {a: c for a, c in out.items() if c != 0.0}


def cayley_calibrate(field, k):
    """Build the operator from the delta expansion (k <= 4 guard)."""
    if k > 4:
        raise ValueError("operator calibration guarded to k <= 4")
    dpoly = delta_poly(field, k)
    w = la.herm_coord_weights(field, k)
    terms = []
    for alpha, c in sorted(dpoly.items()):
        terms.append((alpha, c / np.prod(w ** np.array(alpha))))
    op = CayleyOperator(field=field, k=k, terms=terms)
    rng = np.random.default_rng(991)
    for _ in range(8):
        y = rng.standard_normal((k, k, field.d))
        y = 0.5 * (y + la.adjoint(y))
        ref = la.delta_det(field, y)
        got = op.apply_to_exponential(y)
        if abs(got - ref) > 1e-8 * max(1.0, abs(ref)):
            raise RuntimeError("calibrated operator fails the defining exponential identity")
    return op


def capelli_power_product(field, k, lam, m=1):
    """Coefficient of delta^(lam - m) in op^m [delta^lam]:
    prod over i < m, 1 <= j <= k of (lam - i + (d/2)(j - 1))."""
    total = 1.0
    for i in range(m):
        for j in range(1, k + 1):
            total *= lam - i + 0.5 * field.d * (j - 1)
    return total


def cayley_apply_power(op, lam, m=1):
    """Same coefficient, exposed on a calibrated operator."""
    return capelli_power_product(op.field, op.k, lam, m)


def cayley_apply_power_numeric(op, lam, m=1):
    """Apply the calibrated operator m times to the polynomial delta^lam
    (integer lam >= m) and return the observed coefficient of delta^(lam-m);
    raises if the result is not proportional to delta^(lam-m)."""
    if not (isinstance(lam, (int, np.integer)) and lam >= m):
        raise ValueError("numeric route needs integer lam >= m")
    dpoly = delta_poly(op.field, op.k)
    p = poly_pow(dpoly, int(lam))
    for _ in range(m):
        p = op.apply_to_poly(p)
    target = poly_pow(dpoly, int(lam) - m)
    ratios = [p.get(a, 0.0) / c for a, c in target.items() if abs(c) > 1e-10]
    coeff = np.median(ratios)
    resid = poly_sub(p, {a: coeff * c for a, c in target.items()})
    scale = max(abs(c) for c in p.values()) if p else 1.0
    if resid and max(abs(c) for c in resid.values()) > 1e-8 * scale:
        raise RuntimeError("op^m delta^lam is not proportional to delta^(lam-m)")
    return float(coeff)


def n_monomials(nvars, degree):
    return comb(nvars + degree - 1, degree)
