import numpy as np
import pytest
from scipy.stats import kstest

from grassradon import algebra as la
from grassradon import sampling
from grassradon.cone import beta_cone, log_beta_cone
from grassradon.fields import ALL_FIELDS, COMPLEX, QUATERNION, REAL


def test_parse_seed_decimal_and_hex():
    assert sampling.parse_seed("42") == 42
    assert sampling.parse_seed("0x2A") == 42
    assert sampling.parse_seed(42) == 42


def test_streams_are_independent_and_deterministic():
    a1 = sampling.stream(9, 0).standard_normal(4)
    a2 = sampling.stream(9, 0).standard_normal(4)
    b = sampling.stream(9, 1).standard_normal(4)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert sampling.subseed(5, 1, 2) == sampling.subseed(5, 1, 2)
    assert sampling.subseed(5, 1, 2) != sampling.subseed(5, 2, 1)


class TestHaar:
    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_frames_are_isometries(self, field):
        v = sampling.haar_stiefel(field, 5, 3, sampling.stream(1), 64)
        defect = la.matmul(field, la.adjoint(v), v) - la.identity(field, 3)
        assert np.max(np.abs(defect)) < 1e-10

    def test_real_rank_one_signs(self):
        g = sampling.haar_unitary(REAL, 1, sampling.stream(2), 10_000)
        frac = np.mean(g[:, 0, 0, 0] > 0)
        assert abs(frac - 0.5) <= 3.0 * 0.5 / np.sqrt(10_000)

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_first_entry_second_moment(self, field):
        n, count = 4, 20_000
        g = sampling.haar_unitary(field, n, sampling.stream(3), count)
        m = np.sum(g[:, 0, 0, :] ** 2, axis=1)
        se = m.std() / np.sqrt(count)
        assert abs(m.mean() - 1.0 / n) <= 3.0 * se

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_frame_covariance_is_scaled_identity(self, field):
        n, k, count = 4, 2, 20_000
        v = sampling.haar_stiefel(field, n, k, sampling.stream(4), count)
        p = la.matmul(field, v, la.adjoint(v))
        mean = p.mean(axis=0)
        se = p.std(axis=0) / np.sqrt(count) + 1e-12
        target = (k / n) * la.identity(field, n)
        assert np.all(np.abs(mean - target) <= 3.5 * se + 1e-12)

    def test_circle_direction_uniform(self):
        v = sampling.haar_stiefel(REAL, 2, 1, sampling.stream(5), 4000)
        angles = np.arctan2(v[:, 1, 0, 0], v[:, 0, 0, 0])
        stat = kstest(angles, "uniform", args=(-np.pi, 2 * np.pi))
        assert stat.pvalue > 0.01

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_left_invariance_ten_moments(self, field):
        # ten functionals E Re tr(A_i g B_i g*) = Re tr(A_i) Re tr(B_i) / n
        n, count = 3, 30_000
        rng = np.random.default_rng(11)
        pairs = []
        for _ in range(10):
            a = rng.standard_normal((n, n, field.d))
            b = rng.standard_normal((n, n, field.d))
            pairs.append((0.5 * (a + la.adjoint(a)), 0.5 * (b + la.adjoint(b))))
        g = sampling.haar_unitary(field, n, sampling.stream(6), count)
        for a, b in pairs:
            gbg = la.matmul(field, la.matmul(field, g, b), la.adjoint(g))
            vals = np.sum(a * gbg, axis=(-3, -2, -1))
            want = la.re_trace(a) * la.re_trace(b) / n
            se = vals.std() / np.sqrt(count)
            assert abs(vals.mean() - want) <= 3.5 * se


class TestMatrixBeta:
    def test_arcsine_law(self):
        r, _, _ = sampling.matrix_beta_batch(REAL, 1, 1, 1, sampling.stream(7), 30_000)
        x = r[:, 0, 0, 0]
        # arcsine moments: E r = 1/2, E r^2 = 3/8
        for mom, want in [(x, 0.5), (x**2, 0.375)]:
            assert abs(mom.mean() - want) <= 3.0 * mom.std() / np.sqrt(len(x))

    @pytest.mark.parametrize("field", ALL_FIELDS)
    def test_scalar_mean(self, field):
        n1, n2 = 2, 3
        r, _, _ = sampling.matrix_beta_batch(field, 1, n1, n2, sampling.stream(8), 20_000)
        x = r[:, 0, 0, 0]
        assert abs(x.mean() - n1 / (n1 + n2)) <= 3.0 * x.std() / np.sqrt(len(x))

    @pytest.mark.parametrize("field,k,n1,n2", [(REAL, 2, 2, 3), (COMPLEX, 2, 2, 2), (QUATERNION, 1, 1, 2)])
    def test_delta_moment_matches_beta_ratio(self, field, k, n1, n2):
        r, _, _ = sampling.matrix_beta_batch(field, k, n1, n2, sampling.stream(9), 20_000)
        vals = la.delta_batch(field, r)
        al, be = 0.5 * field.d * n1, 0.5 * field.d * n2
        want = np.exp(log_beta_cone(field, k, al + 1, be) - log_beta_cone(field, k, al, be))
        assert abs(vals.mean() - want) <= 3.0 * vals.std() / np.sqrt(len(vals))

    def test_density_normalization(self):
        # E[1 / density] = Lebesgue volume of the interval
        for field, k, want in [(REAL, 1, 1.0), (REAL, 2, beta_cone(REAL, 2, 1.5, 1.5))]:
            r, logd, _ = sampling.matrix_beta_batch(field, k, k + 1, k + 1, sampling.stream(10), 40_000)
            vals = np.exp(-logd)
            assert abs(vals.mean() - want) <= 3.0 * vals.std() / np.sqrt(len(vals))

    def test_single_sample_wrapper(self):
        s = sampling.sample_matrix_beta(COMPLEX, 2, 2, 3, seed=77)
        assert np.isfinite(s.log_density)
        lam = la.herm_eigvals(COMPLEX, s.r)
        assert lam[0] < 1.0 and lam[-1] > 0.0

    def test_rejects_thin_blocks(self):
        with pytest.raises(ValueError, match="n1 >= k"):
            sampling.matrix_beta_batch(REAL, 2, 1, 3, sampling.stream(0), 4)


class TestMcExpect:
    def test_constant_function(self):
        est = sampling.mc_expect(
            lambda x: np.full(x.shape[0], 2.5),
            lambda rng, m: rng.standard_normal((m, 1)),
            5000, seed=1,
        )
        assert est.mean == 2.5 and est.stderr == 0.0

    def test_frame_trace_is_exact(self):
        est = sampling.mc_expect(
            lambda v: la.re_trace(la.matmul(COMPLEX, la.adjoint(v), v)),
            lambda rng, m: sampling.haar_stiefel(COMPLEX, 4, 2, rng, m),
            4000, seed=2,
        )
        assert est.mean == pytest.approx(2.0, abs=1e-12)
        assert est.stderr < 1e-12

    def test_shard_count_invariance_is_bit_exact(self):
        def f(v):
            return v[:, 0, 0, 0] ** 2

        sampler = lambda rng, m: sampling.haar_stiefel(REAL, 3, 1, rng, m)
        base = sampling.mc_expect(f, sampler, 50_000, seed=3, shards=1)
        for shards in (2, 3, 7):
            est = sampling.mc_expect(f, sampler, 50_000, seed=3, shards=shards)
            assert est.mean == base.mean
            assert est.stderr == base.stderr

    def test_seed_determinism(self):
        f = lambda x: x[:, 0]
        sampler = lambda rng, m: rng.standard_normal((m, 2))
        a = sampling.mc_expect(f, sampler, 9000, seed="0xBEEF")
        b = sampling.mc_expect(f, sampler, 9000, seed=0xBEEF)
        assert a.mean == b.mean

    def test_stderr_scales_like_root_n(self):
        f = lambda x: x[:, 0] ** 2
        sampler = lambda rng, m: rng.standard_normal((m, 1))
        ses = [
            sampling.mc_expect(f, sampler, n, seed=4).stderr
            for n in (4000, 8000, 16000, 32000, 64000)
        ]
        for lo, hi in zip(ses[1:], ses[:-1]):
            ratio = hi / lo
            assert np.sqrt(2.0) / 1.5 <= ratio <= np.sqrt(2.0) * 1.5

    def test_nonfinite_reports_sample_index(self):
        def f(x):
            out = np.ones(x.shape[0])
            out[5] = np.nan
            return out

        with pytest.raises(ValueError, match="sample 5"):
            sampling.mc_expect(f, lambda rng, m: rng.standard_normal((m, 1)), 3000, seed=5)

    def test_requires_two_samples(self):
        with pytest.raises(ValueError):
            sampling.mc_expect(lambda x: x, lambda rng, m: rng.standard_normal(m), 1, seed=0)
