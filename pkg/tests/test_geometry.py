import numpy as np
import pytest

from grassradon import algebra as la
from grassradon import geometry as geo
from grassradon import sampling
from grassradon.fields import ALL_FIELDS, COMPLEX, QUATERNION, REAL

rng = np.random.default_rng(2024)


def contraction(field, k, scale=0.6, seed_offset=0):
    x = np.random.default_rng(100 + seed_offset).standard_normal((k, k, field.d))
    top = np.sqrt(la.herm_eigvals(field, la.matmul(field, la.adjoint(x), x))[0])
    return scale * x / top


def test_frame_type_validates():
    x = sampling.haar_stiefel(REAL, 4, 2, sampling.stream(1), 1)[0]
    geo.StiefelFrame(REAL, x)
    with pytest.raises(ValueError, match="frame"):
        geo.StiefelFrame(REAL, 2.0 * x)


def test_grassmann_equality_by_projection():
    x = sampling.haar_stiefel(COMPLEX, 4, 2, sampling.stream(2), 1)[0]
    u = sampling.haar_unitary(COMPLEX, 2, sampling.stream(3), 1)[0]
    p1 = geo.GrassmannPoint(geo.StiefelFrame(COMPLEX, x))
    p2 = geo.GrassmannPoint(geo.StiefelFrame(COMPLEX, la.matmul(COMPLEX, x, u)))
    other = sampling.haar_stiefel(COMPLEX, 4, 2, sampling.stream(4), 1)[0]
    assert p1 == p2
    assert p1 != geo.GrassmannPoint(geo.StiefelFrame(COMPLEX, other))


class TestProjection:
    def test_reference_point(self):
        y0 = geo.reference_frame(COMPLEX, 5, 3)
        p = geo.projection(COMPLEX, y0)
        want = la.from_real(COMPLEX, np.diag([1, 1, 1, 0, 0]).astype(float))
        assert np.allclose(p, want)

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_representative_invariance_idempotence_rank(self, field):
        y = sampling.haar_stiefel(field, 5, 2, sampling.stream(5), 1)[0]
        u = sampling.haar_unitary(field, 2, sampling.stream(6), 1)[0]
        p1 = geo.projection(field, y)
        p2 = geo.projection(field, la.matmul(field, y, u))
        assert la.fro_norm(p1 - p2) < 1e-12
        assert la.fro_norm(la.matmul(field, p1, p1) - p1) < 1e-12
        assert la.fro_norm(p1 - la.adjoint(p1)) < 1e-13
        assert la.re_trace(p1) == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_rotated_reference_block_formula(self, field):
        # closed-form block matrix for the projection, checked entrywise;
        # flipping the off-diagonal signs gives the inverse rotation's projection
        n, k, kp = 6, 2, 3
        a = contraction(field, k)
        j = geo.j_mat(field, n, k, kp, a)
        eta = la.matmul(field, j, geo.reference_frame(field, n, kp))
        p = geo.projection(field, eta)
        eye = la.identity(field, k)
        asa = la.matmul(field, la.adjoint(a), a)
        ssq = la.herm_sqrt(field, eye - asa)
        sizes = [kp - k, k, n - kp - k, k]
        offs = np.concatenate([[0], np.cumsum(sizes)])
        want = la.zeros(field, n, n)

        def put(bi, bj, blk):
            want[offs[bi] : offs[bi] + blk.shape[0], offs[bj] : offs[bj] + blk.shape[1]] = blk

        put(0, 0, la.identity(field, kp - k))
        put(1, 1, eye - asa)
        put(1, 3, -la.matmul(field, ssq, la.adjoint(a)))
        put(3, 1, -la.matmul(field, a, ssq))
        put(3, 3, la.matmul(field, a, la.adjoint(a)))
        assert la.fro_norm(p - want) < 1e-12
        # the printed form is the projection of the inverse rotation
        eta_inv = la.matmul(field, geo.j_mat(field, n, k, kp, -a), geo.reference_frame(field, n, kp))
        p_inv = geo.projection(field, eta_inv)
        want[offs[1] : offs[1] + k, offs[3] :] *= -1.0
        want[offs[3] :, offs[1] : offs[1] + k] *= -1.0
        assert la.fro_norm(p_inv - want) < 1e-12


class TestCos2:
    def test_containment_gives_identity(self):
        # x0 spans the first k coordinates, eta0 the first k'
        x0 = geo.reference_frame(REAL, 5, 2)
        eta0 = geo.reference_frame(REAL, 5, 3)
        assert np.allclose(geo.cos2(REAL, eta0, x0), la.identity(REAL, 2))

    def test_orthogonal_gives_zero(self):
        x = geo.reference_frame(COMPLEX, 5, 2, hat=True)
        eta = geo.reference_frame(COMPLEX, 5, 3)
        assert la.fro_norm(geo.cos2(COMPLEX, eta, x)) < 1e-14

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_rotated_reference_equals_gram(self, field):
        n, k, kp = 6, 2, 3
        a = contraction(field, k)
        eta = la.matmul(field, geo.j_mat(field, n, k, kp, a), geo.reference_frame(field, n, kp))
        c2 = geo.cos2(field, eta, geo.reference_frame(field, n, k, hat=True))
        assert la.fro_norm(c2 - la.matmul(field, a, la.adjoint(a))) < 1e-12

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_spectral_bounds_and_equivariance(self, field):
        n, k, kp = 5, 2, 3
        eta = sampling.haar_stiefel(field, n, kp, sampling.stream(7), 1)[0]
        x = sampling.haar_stiefel(field, n, k, sampling.stream(8), 1)[0]
        c2 = geo.cos2(field, eta, x)
        lam = la.herm_eigvals(field, c2)
        assert lam[0] <= 1.0 + 1e-12 and lam[-1] >= -1e-12
        u = sampling.haar_unitary(field, k, sampling.stream(9), 1)[0]
        c2u = geo.cos2(field, eta, la.matmul(field, x, u))
        want = la.matmul(field, la.matmul(field, la.adjoint(u), c2), u)
        assert la.fro_norm(c2u - want) < 1e-10
        assert np.allclose(np.sort(lam), np.sort(la.herm_eigvals(field, c2u)), atol=1e-9)


class TestBlockUnitaries:
    def test_zero_contraction_is_identity(self):
        assert np.allclose(geo.j_mat(REAL, 5, 1, 2, la.scalar(REAL, 0.0)), la.identity(REAL, 5))

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_unitarity_and_inverses(self, field):
        n, k, kp = 6, 2, 3
        a = contraction(field, k, seed_offset=1)
        j = geo.j_mat(field, n, k, kp, a)
        h = geo.h_mat(field, n, k, kp, a)
        eye = la.identity(field, n)
        assert la.fro_norm(la.matmul(field, la.adjoint(j), j) - eye) < 1e-12
        assert la.fro_norm(la.matmul(field, la.adjoint(h), h) - eye) < 1e-12
        assert la.fro_norm(la.matmul(field, j, geo.j_mat(field, n, k, kp, -a)) - eye) < 1e-12
        # the inverse of h is its adjoint; h(a*) matches it except for the
        # sign of the two off-diagonal square-root blocks
        hinv = la.adjoint(h)
        hstar = geo.h_mat(field, n, k, kp, la.adjoint(a))
        assert la.fro_norm(la.matmul(field, h, hinv) - eye) < 1e-12
        diff = np.abs(hinv - hstar)
        assert np.allclose((hinv + hstar)[diff > 1e-12], 0.0, atol=1e-12)

    def test_spectral_norm_guard(self):
        with pytest.raises(ValueError, match="spectral"):
            geo.j_mat(REAL, 5, 1, 2, la.scalar(REAL, 1.5))

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_h_on_reference_formula(self, field):
        n, k, kp = 7, 2, 3
        a = contraction(field, k, seed_offset=2)
        xhat = geo.reference_frame(field, n, k, hat=True)
        got = la.matmul(field, geo.h_mat(field, n, k, kp, a), xhat)
        eye = la.identity(field, k)
        ssq = la.herm_sqrt(field, eye - la.matmul(field, la.adjoint(a), a))
        want = la.zeros(field, n, k)
        want[:k] = ssq
        want[n - k :] = a
        assert la.fro_norm(got - want) < 1e-12
        assert np.allclose(geo.h_on_reference(field, n, a), want)

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_block_action_displays(self, field):
        # the closed-form block actions checked entrywise on random frames
        n, k, kp = 7, 2, 3
        a = contraction(field, k, seed_offset=3)
        v = sampling.haar_stiefel(field, kp, k, sampling.stream(10), 1)[0]
        v_pad = np.concatenate([v, la.zeros(field, n - kp, k)], axis=0)
        got = la.matmul(field, geo.j_mat(field, n, k, kp, -a), v_pad)
        eye = la.identity(field, k)
        ssq = la.herm_sqrt(field, eye - la.matmul(field, la.adjoint(a), a))
        want = la.zeros(field, n, k)
        want[: kp - k] = v[: kp - k]
        want[kp - k : kp] = la.matmul(field, ssq, v[kp - k :])
        want[n - k :] = la.matmul(field, a, v[kp - k :])
        assert la.fro_norm(got - want) < 1e-12
        assert np.allclose(geo.j_inv_on_reference(field, n, k, kp, a)[:, kp - k :],
                           la.matmul(field, geo.j_mat(field, n, k, kp, -a),
                                     geo.reference_frame(field, n, kp))[:, kp - k :])

        v_pad_h = np.concatenate([la.zeros(field, n - kp, k), v], axis=0)
        got_h = la.matmul(field, geo.h_mat(field, n, k, kp, a), v_pad_h)
        want_h = la.zeros(field, n, k)
        want_h[:k] = la.matmul(field, ssq, v[kp - k :])
        want_h[n - kp : n - k] = v[: kp - k]
        want_h[n - k :] = la.matmul(field, a, v[kp - k :])
        assert la.fro_norm(got_h - want_h) < 1e-12


class TestCompletion:
    def test_reference_completes_to_identity_like(self):
        xhat = geo.reference_frame(REAL, 4, 2, hat=True)
        g = geo.complete_to_unitary(REAL, xhat, "last")
        assert np.allclose(la.matmul(REAL, g, xhat) - xhat, 0.0, atol=1e-12)
        assert la.fro_norm(la.matmul(REAL, la.adjoint(g), g) - la.identity(REAL, 4)) < 1e-12

    @pytest.mark.parametrize("field", ALL_FIELDS)
    @pytest.mark.parametrize("placement", ["first", "last"])
    def test_property(self, field, placement):
        x = sampling.haar_stiefel(field, 5, 2, sampling.stream(11), 1)[0]
        g = geo.complete_to_unitary(field, x, placement)
        ref = geo.reference_frame(field, 5, 2, hat=(placement == "last"))
        assert la.fro_norm(la.matmul(field, la.adjoint(g), g) - la.identity(field, 5)) < 1e-10
        assert la.fro_norm(la.matmul(field, g, ref) - x) < 1e-10

    def test_deterministic(self):
        x = sampling.haar_stiefel(COMPLEX, 5, 2, sampling.stream(12), 1)[0]
        g1 = geo.complete_to_unitary(COMPLEX, x)
        g2 = geo.complete_to_unitary(COMPLEX, x)
        assert np.array_equal(g1, g2)


class TestDecompositions:
    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_bi_stiefel_roundtrip(self, field):
        n, k, kp = 6, 2, 3
        w = sampling.haar_stiefel(field, n, k, sampling.stream(13), 1)[0]
        u, v, r = geo.bi_stiefel_decompose(field, w, kp)
        eye = la.identity(field, k)
        rec = np.concatenate(
            [la.matmul(field, u, la.herm_sqrt(field, r)),
             la.matmul(field, v, la.herm_sqrt(field, eye - r))],
            axis=0,
        )
        assert la.fro_norm(rec - w) < 1e-10
        assert la.fro_norm(la.matmul(field, la.adjoint(u), u) - eye) < 1e-10
        assert la.fro_norm(la.matmul(field, la.adjoint(v), v) - eye) < 1e-10

    def test_bi_stiefel_boundary_rejected(self):
        # the reference frame has r = I, a boundary configuration
        x0 = geo.reference_frame(REAL, 5, 2)
        with pytest.raises(ValueError, match="boundary"):
            geo.bi_stiefel_decompose(REAL, x0, 3)

    def test_bi_stiefel_rank_one_top_norm(self):
        w = sampling.haar_stiefel(QUATERNION, 4, 1, sampling.stream(14), 1)[0]
        _, _, r = geo.bi_stiefel_decompose(QUATERNION, w, 2)
        assert r[0, 0, 0] == pytest.approx(float(np.sum(w[:2] ** 2)), rel=1e-12)

    @pytest.mark.parametrize("field", ALL_FIELDS)
    @pytest.mark.parametrize("n,k,kp", [(4, 1, 2), (6, 2, 3), (7, 2, 4)])
    def test_rotation_frame_factorization(self, field, n, k, kp):
        a = contraction(field, k, seed_offset=4)
        v = sampling.haar_stiefel(field, kp, k, sampling.stream(15), 1)[0]
        l, b = geo.decompose_j_frame(field, n, k, kp, a, v)
        bb = la.matmul(field, la.adjoint(b), b)
        assert la.herm_eigvals(field, bb)[0] < 1.0
        v_pad = np.concatenate([v, la.zeros(field, n - kp, k)], axis=0)
        lhs = la.matmul(field, geo.j_mat(field, n, k, kp, -a), v_pad)
        gl = la.zeros(field, n, n)
        gl[: n - k, : n - k] = l
        gl[n - k :, n - k :] = la.identity(field, k)
        rhs = la.matmul(field, gl, geo.h_on_reference(field, n, b))
        assert la.fro_norm(lhs - rhs) < 1e-10

    def test_rotation_frame_needs_strict_contraction(self):
        v = sampling.haar_stiefel(REAL, 2, 1, sampling.stream(16), 1)[0]
        with pytest.raises(ValueError, match="contraction"):
            geo.decompose_j_frame(REAL, 4, 1, 2, la.scalar(REAL, 1.0), v)


@pytest.mark.parametrize("field", ALL_FIELDS)
def test_angle_spectrum_of_rotated_orbit(field):
    # frames g_x rho j(r^(1/2))^(-1) eta0 sit at squared angle spectrum r from x
    n, k, kp = 6, 2, 3
    x = sampling.haar_stiefel(field, n, k, sampling.stream(17), 1)[0]
    g_x = geo.complete_to_unitary(field, x, "last")
    r_diag = np.array([0.7, 0.3])
    r = la.from_real(field, np.diag(r_diag))
    root = la.herm_sqrt(field, r)
    rng_local = sampling.stream(18)
    for _ in range(3):
        alpha = sampling.haar_unitary(field, n - k, rng_local, 1)[0]
        delta = sampling.haar_unitary(field, k, rng_local, 1)[0]
        rho = la.zeros(field, n, n)
        rho[: n - k, : n - k] = alpha
        rho[n - k :, n - k :] = delta
        frame = la.matmul(
            field,
            la.matmul(field, g_x, rho),
            la.matmul(field, geo.j_mat(field, n, k, kp, -root),
                      geo.reference_frame(field, n, kp)),
        )
        lam = la.herm_eigvals(field, geo.cos2(field, frame, x))
        assert np.allclose(np.sort(lam), np.sort(r_diag), atol=1e-9)
