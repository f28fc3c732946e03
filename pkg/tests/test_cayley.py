import numpy as np
import pytest

from grassradon import algebra as la
from grassradon import cayley
from grassradon.fields import ALL_FIELDS, COMPLEX, QUATERNION, REAL

rng = np.random.default_rng(314)


def rand_herm(field, k):
    a = rng.standard_normal((k, k, field.d))
    return 0.5 * (a + la.adjoint(a))


def test_polynomial_helpers():
    p = {(1, 0): 2.0, (0, 1): 1.0}  # 2x + y
    q = {(1, 0): 1.0, (0, 0): -1.0}  # x - 1
    prod = cayley.poly_mul(p, q)
    assert prod == {(2, 0): 2.0, (1, 1): 1.0, (1, 0): -2.0, (0, 1): -1.0}
    assert cayley.poly_diff(prod, 0) == {(1, 0): 4.0, (0, 1): 1.0, (0, 0): -2.0}
    assert cayley.poly_eval(prod, [2.0, 3.0]) == pytest.approx((2 * 2 + 3) * (2 - 1))


def test_rank_one_operator_is_plain_derivative():
    op = cayley.cayley_calibrate(REAL, 1)
    assert op.terms == [((1,), pytest.approx(1.0))]


def test_real_rank_two_operator_coefficients():
    op = cayley.cayley_calibrate(REAL, 2)
    terms = {alpha: coeff for alpha, coeff in op.terms}
    # coordinates (s11, s22, s12): d11 d22 - (1/4) d12^2
    assert terms[(1, 1, 0)] == pytest.approx(1.0, abs=1e-12)
    assert terms[(0, 0, 2)] == pytest.approx(-0.25, abs=1e-12)
    assert len(terms) == 2


@pytest.mark.parametrize("field,k", [(REAL, 2), (REAL, 3), (COMPLEX, 2), (QUATERNION, 2)])
def test_operator_homogeneous_of_order_k(field, k):
    op = cayley.cayley_calibrate(field, k)
    for alpha, _ in op.terms:
        assert sum(alpha) == k


@pytest.mark.parametrize("field,k", [(REAL, 2), (REAL, 4), (COMPLEX, 2), (COMPLEX, 3), (QUATERNION, 2)])
def test_defining_exponential_identity(field, k):
    op = cayley.cayley_calibrate(field, k)
    for _ in range(5):
        y = rand_herm(field, k)
        ref = la.delta_det(field, y)
        assert op.apply_to_exponential(y) == pytest.approx(ref, rel=1e-8, abs=1e-8)


def test_size_guard():
    with pytest.raises(ValueError, match="k <= 4"):
        cayley.cayley_calibrate(REAL, 5)


class TestCapelliProducts:
    def test_spec_values(self):
        assert cayley.capelli_power_product(REAL, 1, 3.0, 1) == pytest.approx(3.0)
        assert cayley.capelli_power_product(COMPLEX, 2, 3.0, 1) == pytest.approx(12.0)
        assert cayley.capelli_power_product(REAL, 2, 2.0, 2) == pytest.approx(7.5)

    @pytest.mark.parametrize("field,k", [(REAL, 2), (COMPLEX, 2), (QUATERNION, 2), (REAL, 3)])
    @pytest.mark.parametrize("lam,m", [(3, 1), (4, 2), (3, 3)])
    def test_numeric_operator_matches_closed_form(self, field, k, lam, m):
        op = cayley.cayley_calibrate(field, k)
        got = cayley.cayley_apply_power_numeric(op, lam, m)
        want = cayley.capelli_power_product(field, k, float(lam), m)
        assert got == pytest.approx(want, rel=1e-10)

    def test_cayley_apply_power_wrapper(self):
        op = cayley.cayley_calibrate(COMPLEX, 2)
        assert cayley.cayley_apply_power(op, 3.0, 1) == pytest.approx(12.0)

    def test_numeric_route_rejects_fractional_exponent(self):
        op = cayley.cayley_calibrate(REAL, 2)
        with pytest.raises(ValueError):
            cayley.cayley_apply_power_numeric(op, 2.5, 1)


@pytest.mark.parametrize("field", ALL_FIELDS)
def test_delta_poly_evaluates_like_delta(field):
    poly = cayley.delta_poly(field, 2)
    for _ in range(4):
        y = rand_herm(field, 2)
        v = la.herm_to_coords(field, y)
        assert cayley.poly_eval(poly, v) == pytest.approx(la.delta_det(field, y), rel=1e-10, abs=1e-10)
