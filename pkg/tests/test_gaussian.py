from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy import integrate
from scipy import stats as st

from invmeas import gaussian as gs
from invmeas import haar
from invmeas.errors import DomainError, NotContraction, SingularMatrix, SizeMismatch, VarianceExplosion
from invmeas.rng import RngHandle
from invmeas.stats import estimate, ks_test, majority


def vote3(check):
    return majority([check(RngHandle(s, stream=71)) for s in (1, 2, 3)])


class TestCameronMartin:
    def test_zero_shift(self, gen):
        x = gen.standard_normal((10, 4))
        assert np.all(gs.cameron_martin_rn(x, np.zeros(4)) == 1.0)

    def test_short_shift_pads(self, gen):
        x = gen.standard_normal((5, 4))
        assert np.allclose(gs.cameron_martin_rn(x, [0.3]), gs.cameron_martin_rn(x, [0.3, 0, 0, 0]))

    def test_too_long(self):
        with pytest.raises(SizeMismatch):
            gs.cameron_martin_rn(np.zeros((2, 2)), np.ones(3))

    def test_density_ratio(self, gen):
        # weight is phi(x + b) / phi(x)
        x, b = gen.standard_normal(3), gen.standard_normal(3)
        ratio = np.prod(st.norm.pdf(x + b) / st.norm.pdf(x))
        assert gs.cameron_martin_rn(x, b) == pytest.approx(ratio, rel=1e-12)

    def test_mean_one(self):
        def check(rng):
            x = gs.sample_gauss(10, rng, 100_000)
            return estimate(gs.cameron_martin_rn(x, np.full(10, 0.15))).within(1.0)

        assert vote3(check)

    def test_shifted_mean(self):
        # E[R x] = E[x - b] = -b with b = 1 in one dimension
        def check(rng):
            x = gs.sample_gauss(1, rng, 100_000)
            return estimate(gs.cameron_martin_rn(x, [1.0]) * x[:, 0]).within(-1.0)

        assert vote3(check)

    def test_shift_indicator(self):
        def check(rng):
            x = gs.sample_gauss(2, rng, 100_000)
            b = np.array([0.4, -0.3])
            w = gs.cameron_martin_rn(x, b) * (x[:, 0] + x[:, 1] > 0.5)
            return estimate(w).within(st.norm.sf((0.5 + b.sum()) / np.sqrt(2)))

        assert vote3(check)


class TestDiagonal:
    def test_zero(self, gen):
        assert np.all(gs.diag_rn(gen.standard_normal((10, 3)), np.zeros(3)) == 1.0)

    @pytest.mark.parametrize("lam", [0.5, -0.3, 2.0])
    def test_one_dim_quadrature(self, lam):
        val, _ = integrate.quad(lambda x: gs.diag_rn(np.array([x]), [lam]) * st.norm.pdf(x), -40, 40, points=[0.0])
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_box(self):
        lam = np.array([0.3, -0.2])
        lo, hi = np.array([0.2, -0.5]), np.array([1.0, 0.3])
        s = 1 + lam
        ref = np.prod(st.norm.cdf(s * hi) - st.norm.cdf(s * lo))

        def check(rng):
            x = gs.sample_gauss(2, rng, 100_000)
            inside = np.all((x >= lo) & (x <= hi), axis=1)
            return estimate(gs.diag_rn(x, lam) * inside).within(ref)

        assert vote3(check)

    def test_mean_one(self):
        def check(rng):
            x = gs.sample_gauss(8, rng, 100_000)
            return estimate(gs.diag_rn(x, np.linspace(-0.2, 0.2, 8))).within(1.0)

        assert vote3(check)

    def test_domain(self):
        with pytest.raises(DomainError):
            gs.diag_rn(np.zeros(2), [0.1, -1.0])


class TestRotation:
    def test_identity(self):
        assert vote3(lambda rng: gs.rotate_pushforward_test(np.eye(4), 20_000, rng).passed)

    def test_permutation(self):
        u = np.eye(5)[[3, 0, 4, 1, 2]]
        assert vote3(lambda rng: gs.rotate_pushforward_test(u, 20_000, rng).passed)

    def test_haar_rotation(self):
        u = haar.sample_haar(haar.GroupKind("O", 10), 5)
        assert vote3(lambda rng: gs.rotate_pushforward_test(u, 20_000, rng).passed)

    def test_not_orthogonal(self):
        with pytest.raises(DomainError):
            gs.rotate_pushforward_test(2 * np.eye(2), 100, 0)


class TestGLO:
    def test_orthogonal(self):
        u = haar.sample_haar(haar.GroupKind("O", 4), 3)
        f = gs.glo_factor(u)
        assert np.allclose(f.lam, 0, atol=1e-12)
        assert np.allclose(f.orthogonal, u)

    def test_diagonal(self):
        f = gs.glo_factor(np.diag([2.0, 0.5]))
        assert np.allclose(f.lam, [1.0, -0.5])
        assert np.allclose(np.abs(f.v1), np.eye(2)) and np.allclose(np.abs(f.v2), np.eye(2))

    def test_reconstruction(self, gen):
        for _ in range(20):
            a = gen.standard_normal((6, 6))
            f = gs.glo_factor(a)
            assert np.max(np.abs(f.matrix() - a)) < 1e-10
            t = f.hs_part
            assert np.allclose(t, t.T)
            assert np.max(np.abs(f.orthogonal @ (np.eye(6) + t) - a)) < 1e-10

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            gs.glo_factor(np.array([[1.0, 2.0], [2.0, 4.0]]))
        with pytest.raises(SizeMismatch):
            gs.glo_factor(np.ones((2, 3)))

    def test_rn_trivial(self, gen):
        x = gen.standard_normal((7, 3))
        assert np.allclose(gs.glo_rn(x, np.eye(3)), 1.0)
        u = haar.sample_haar(haar.GroupKind("O", 3), gen)
        assert np.allclose(gs.glo_rn(x, u), 1.0)

    @settings(max_examples=50, deadline=None)
    @given(hst.integers(0, 2**31))
    def test_rn_matches_direct(self, seed):
        gen = np.random.default_rng(seed)
        a = np.eye(4) + 0.4 * gen.standard_normal((4, 4))
        if np.linalg.cond(a) > 1e6:
            return
        x = gen.standard_normal((5, 4))
        assert np.allclose(gs.glo_rn(x, a), gs.glo_rn_direct(x, a), rtol=1e-9, atol=0)

    def test_rn_mean(self):
        a = np.array([[1.2, 0.3, 0.0], [0.0, 0.9, -0.2], [0.1, 0.0, 1.1]])

        def check(rng):
            return estimate(gs.glo_rn(gs.sample_gauss(3, rng, 100_000), a)).within(1.0)

        assert vote3(check)


class TestHermite:
    @pytest.mark.parametrize("j,k", [(0, 0), (1, 1), (3, 3), (6, 6), (2, 4), (1, 5)])
    def test_orthogonality(self, j, k):
        expect = factorial(k) if j == k else 0.0
        assert gs.hermite_inner(j, k) == pytest.approx(expect, abs=1e-9)

    def test_low_degrees(self):
        x = np.linspace(-2, 2, 7)
        assert np.allclose(gs.hermite(2, x), x**2 - 1)
        assert np.allclose(gs.hermite(3, x), x**3 - 3 * x)

    def test_generating_function(self):
        z, x = 0.3, 1.1
        series = sum(gs.hermite(k, x) * z**k / factorial(k) for k in range(30))
        assert gs.psi(np.array([z]), np.array([x])) == pytest.approx(series)

    def test_zero_pairing(self):
        est = gs.hermite_pairing_mc([0.0], [0.0], 1, 1000, 0)
        assert est.mean == 1.0 and est.stderr == 0.0

    def test_one_dim_pairing(self):
        assert vote3(lambda rng: gs.hermite_pairing_mc([0.5], [0.5], 1, 100_000, rng).within(np.exp(0.25)))

    def test_complex_pairing(self):
        z, u = np.array([0.3 + 0.2j, -0.1j]), np.array([0.2, 0.4 - 0.1j])
        ref = np.exp(z @ np.conj(u))
        assert vote3(lambda rng: gs.hermite_pairing_mc(z, u, 3, 100_000, rng).within(ref))

    def test_guard(self):
        with pytest.raises(VarianceExplosion):
            gs.hermite_pairing_mc([2.5], [2.5], 1, 20_000, 0, guard=10)

    def test_size(self):
        with pytest.raises(SizeMismatch):
            gs.hermite_pairing_mc([0.1, 0.2], [0.1], 1, 10, 0)


class TestIteratedLog:
    def test_ratio_is_order_one(self):
        r = gs.iterated_log_ratio(100_000, 50, RngHandle(1))
        assert r.shape == (50,) and 0.8 < np.median(r) < 1.3

    def test_bad_start(self):
        with pytest.raises(DomainError):
            gs.iterated_log_ratio(10, 1, 0, start=2)


class TestBrownian:
    def test_level_zero(self):
        p = gs.brownian_sample(0, RngHandle(3))
        t = np.linspace(0, 1, 11)
        assert np.allclose(p(t), p.coeffs[0] * t)

    def test_starts_at_zero(self):
        vals = gs.brownian_batch(6, 100, RngHandle(1), [0.0])
        assert np.all(vals == 0.0)

    def test_tent(self):
        assert gs.schauder(0, 0, 0.5) == pytest.approx(0.5)
        assert gs.schauder(2, 1, [0.25, 0.375, 0.5]).tolist() == pytest.approx([0.0, 0.25, 0.0])

    def test_dyadic_interpolation(self):
        # a path with levels L is linear between dyadic points of step 2^-L
        p = gs.brownian_sample(3, RngHandle(2))
        a, b = p(0.25), p(0.375)
        assert p(0.3125) == pytest.approx((a + b) / 2)

    def test_chunking_is_invisible(self):
        t = np.linspace(0, 1, 9)
        a = gs.brownian_batch(5, 37, RngHandle(8), t)
        b = gs.brownian_batch(5, 37, RngHandle(8), t, chunk=5)
        assert np.array_equal(a, b)

    def test_variance_at_one(self):
        def check(rng):
            return ks_test(gs.brownian_batch(8, 20_000, rng, [1.0])[:, 0], st.norm.cdf).passed

        assert vote3(check)

    def test_independent_increments(self):
        def check(rng):
            v = gs.brownian_batch(8, 50_000, rng, [0.25, 0.6, 0.9])
            r = np.corrcoef(v[:, 0], v[:, 2] - v[:, 1])[0, 1]
            return abs(r) < 3 / np.sqrt(50_000)

        assert vote3(check)

    def test_covariance(self):
        def check(rng):
            err, tol = gs.brownian_covariance(10, 20_000, rng)
            return err < tol

        assert vote3(check)

    def test_bad_levels(self):
        with pytest.raises(DomainError):
            gs.brownian_sample(25, 0)


class TestPolymorphism:
    def test_identity(self):
        x, y = gs.gaussian_polymorphism(np.eye(3)).sample(RngHandle(0), 100)
        assert np.max(np.abs(y - x)) < 1e-12

    def test_orthogonal_graph(self):
        u = haar.sample_haar(haar.GroupKind("SO", 3), 4)
        x, y = gs.gaussian_polymorphism(u).sample(RngHandle(0), 100)
        assert np.max(np.abs(y - x @ u.T)) < 1e-10

    def test_zero_is_independent(self):
        def check(rng):
            x, y = gs.gaussian_polymorphism(np.zeros((2, 2))).sample(rng, 50_000)
            r = np.corrcoef(x[:, 0], y[:, 0])[0, 1]
            return abs(r) < 3 / np.sqrt(50_000)

        assert vote3(check)

    def test_marginals_and_char(self):
        t = np.array([[0.5, 0.2], [-0.1, 0.3]])
        pol = gs.gaussian_polymorphism(t)

        def check(rng):
            x, y = pol.sample(rng, 50_000)
            ok = all(ks_test(v, st.norm.cdf).passed for v in (x[:, 0], x[:, 1], y[:, 0], y[:, 1]))
            for row in gs.CLOSURE_POINTS[:4]:
                ok &= gs.empirical_char(x, y, row[:2], row[2:]).within(pol.char(row[:2], row[2:]))
            return ok

        assert vote3(check)

    def test_cross_covariance(self):
        t = np.array([[0.6, 0.0], [0.3, -0.4]])

        def check(rng):
            x, y = gs.gaussian_polymorphism(t).sample(rng, 100_000)
            return np.max(np.abs(y.T @ x / x.shape[0] - t)) < 0.02

        assert vote3(check)

    def test_not_contraction(self):
        with pytest.raises(NotContraction):
            gs.gaussian_polymorphism(np.diag([1.1, 0.2]))

    def test_shape(self):
        with pytest.raises(SizeMismatch):
            gs.GaussPolymorphism(np.eye(2), 3)

    def test_closure_rotation(self):
        for k in (1, 3, 6):
            u = gs.closure_rotation(0.7, k)
            assert np.allclose(u.T @ u, np.eye(k + 2))
        c = gs.closure_compression(0.7, 12)
        assert np.allclose(c, np.diag([np.cos(0.7), 1.0]), atol=1e-3)

    def test_closure_experiment(self):
        def check(rng):
            res = gs.closure_experiment(np.pi / 3, range(1, 7), 100_000, rng)
            return res.passed

        assert vote3(check)
