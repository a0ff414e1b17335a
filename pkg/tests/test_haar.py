import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy import stats as st

from invmeas import haar, linalg, spectra
from invmeas.errors import BranchViolation, DegeneratePair, DomainError, SingularMatrix, SizeMismatch
from invmeas.rng import RngHandle
from invmeas.stats import estimate, ks_test, ks_two_sample, majority

KINDS = [haar.GroupKind(f, n) for f in ("O", "SO", "U", "Sp") for n in (1, 2, 3, 5)]


def vote3(check):
    return majority([check(RngHandle(s, stream=77)) for s in (1, 2, 3)])


class TestGroupKind:
    def test_sizes(self):
        assert haar.GroupKind("Sp", 3).size == 6
        assert haar.GroupKind("U", 3).size == 3
        assert haar.GroupKind("SO", 3).is_real and not haar.GroupKind("U", 3).is_real

    @pytest.mark.parametrize("family,n", [("GL", 2), ("U", 0), ("O", -1)])
    def test_rejects(self, family, n):
        with pytest.raises((DomainError, ValueError)):
            haar.GroupKind(family, n)


class TestMembership:
    @pytest.mark.parametrize("kind", KINDS, ids=str)
    def test_in_group(self, kind):
        g = haar.sample_haar(kind, RngHandle(3), 200)
        assert g.shape == (200, kind.size, kind.size)
        assert haar.in_group_residual(kind, g) < 1e-10

    @pytest.mark.parametrize("kind", KINDS, ids=str)
    def test_oracle_in_group(self, kind):
        g = haar.sample_haar_qr_oracle(kind, RngHandle(3), 200)
        assert haar.in_group_residual(kind, g) < 1e-10

    def test_single_draw_shape(self):
        g = haar.sample_haar(haar.GroupKind("U", 3), 0)
        assert g.shape == (3, 3)

    def test_seed_reproducible(self):
        kind = haar.GroupKind("Sp", 2)
        assert np.array_equal(haar.sample_haar(kind, RngHandle(5), 4), haar.sample_haar(kind, RngHandle(5), 4))

    def test_so_determinant(self):
        g = haar.sample_haar(haar.GroupKind("SO", 4), 1, 500)
        assert np.allclose(np.linalg.det(g), 1)

    def test_o_has_both_components(self):
        d = np.linalg.det(haar.sample_haar(haar.GroupKind("O", 3), 1, 500))
        assert 150 < np.sum(d < 0) < 350


class TestLaws:
    def test_u1_phase_uniform(self):
        ph = spectra.eigenphases(haar.sample_haar(haar.GroupKind("U", 1), RngHandle(1), 100_000))[:, 0]
        assert st.kstest(ph, st.uniform(0, 2 * np.pi).cdf).statistic < 0.01

    def test_o1_is_fair(self):
        x = haar.sample_haar(haar.GroupKind("O", 1), RngHandle(2), 10_000)[:, 0, 0]
        assert set(np.unique(x)) == {-1.0, 1.0}
        est = estimate(x > 0)
        assert est.within(0.5)

    @pytest.mark.parametrize("n", [3, 5])
    def test_first_row_on_sphere(self, n):
        def check(rng):
            row = haar.sample_haar(haar.GroupKind("O", n), rng, 20_000)[:, 0, :]
            beta = st.beta((n - 1) / 2, (n - 1) / 2)
            return all(ks_test((row[:, k] + 1) / 2, beta.cdf).passed for k in range(n))

        assert vote3(check)

    def test_u2_matches_oracle(self):
        def check(rng):
            k = haar.GroupKind("U", 2)
            a = spectra.eigenphases(haar.sample_haar(k, rng.spawn(0), 20_000))[:, 0]
            b = spectra.eigenphases(haar.sample_haar_qr_oracle(k, rng.spawn(1), 20_000))[:, 0]
            return ks_two_sample(a, b).passed

        assert vote3(check)

    def test_o3_trace_matches_oracle(self):
        def check(rng):
            k = haar.GroupKind("O", 3)
            a = np.trace(haar.sample_haar(k, rng.spawn(0), 20_000), axis1=1, axis2=2)
            b = np.trace(haar.sample_haar_qr_oracle(k, rng.spawn(1), 20_000), axis1=1, axis2=2)
            return ks_two_sample(a, b).passed

        assert vote3(check)

    def test_sp2_matches_oracle(self):
        def check(rng):
            k = haar.GroupKind("Sp", 2)
            a = spectra.half_phases(k, haar.sample_haar(k, rng.spawn(0), 20_000))[:, 1]
            b = spectra.half_phases(k, haar.sample_haar_qr_oracle(k, rng.spawn(1), 20_000))[:, 1]
            return ks_two_sample(a, b).passed

        assert vote3(check)

    def test_left_and_right_invariance(self):
        def check(rng):
            k = haar.GroupKind("SO", 3)
            h = haar.sample_haar(k, 99)
            g = haar.sample_haar(k, rng.spawn(0), 20_000)
            ref = np.trace(haar.sample_haar(k, rng.spawn(1), 20_000), axis1=1, axis2=2)
            left = ks_two_sample(np.trace(h @ g, axis1=1, axis2=2), ref).passed
            right = ks_two_sample(np.trace(g @ h, axis1=1, axis2=2), ref).passed
            return left and right

        assert vote3(check)


class TestReflection:
    def test_householder(self, gen):
        x = gen.standard_normal(4)
        x /= np.linalg.norm(x)
        s = haar.reflection_to(x, -x)
        assert np.allclose(s, np.eye(4) - 2 * np.outer(x, x))
        assert np.isrealobj(s)

    def test_scalar_case(self):
        x, y = np.array([1.0 + 0j]), np.array([np.exp(0.4j)])
        assert np.allclose(haar.reflection_to(x, y), y / x)

    @settings(max_examples=40, deadline=None)
    @given(hst.integers(0, 2**31))
    def test_postconditions(self, seed):
        gen = np.random.default_rng(seed)
        x = gen.standard_normal(4) + 1j * gen.standard_normal(4)
        y = gen.standard_normal(4) + 1j * gen.standard_normal(4)
        x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
        s = haar.reflection_to(x, y)
        assert np.allclose(s @ x, y, atol=1e-10)
        assert linalg.unitarity_residual(s) < 1e-10
        assert np.linalg.matrix_rank(s - np.eye(4), tol=1e-8) == 1

    def test_equal_vectors(self):
        x = np.array([1.0, 0.0])
        with pytest.raises(DegeneratePair):
            haar.reflection_to(x, x)

    def test_not_unit(self):
        with pytest.raises(DomainError):
            haar.reflection_to(np.array([2.0, 0.0]), np.array([0.0, 1.0]))

    def test_quaternion_frame_maps(self, gen):
        a, b = gen.standard_normal(2) + 1j * gen.standard_normal(2), gen.standard_normal(2) + 1j * gen.standard_normal(2)
        nrm = np.sqrt(np.sum(np.abs(a) ** 2 + np.abs(b) ** 2))
        x = haar.quaternion_frame(a / nrm, b / nrm)
        y = haar.quaternion_frame(np.array([1.0, 0.0]), np.array([0.0, 0.0]))
        s = haar.frame_reflection(x, y)
        assert np.allclose(s @ x, y, atol=1e-12)
        assert haar.in_group_residual(haar.GroupKind("Sp", 2), s[None]) < 1e-10


class TestGrassmann:
    def test_cauchy(self):
        def check(rng):
            return ks_test(haar.sample_grassmann(1, 1, rng, 20_000).T.ravel(), st.cauchy.cdf).passed

        assert vote3(check)

    def test_sign_symmetry(self):
        def check(rng):
            t = haar.sample_grassmann(1, 1, rng, 20_000).T.ravel()
            return ks_two_sample(t[:10_000], -t[10_000:]).passed

        assert vote3(check)

    def test_p1_q2_norm_law(self):
        # squared norm is (1 - x^2) / x^2 for a uniform coordinate x on S^2
        def check(rng):
            t = haar.sample_grassmann(1, 2, rng, 20_000).T
            s = np.sum(t**2, axis=(-2, -1))
            return ks_test(s, lambda v: 1 - 1 / np.sqrt(1 + v)).passed

        assert vote3(check)

    def test_single_shape(self):
        c = haar.sample_grassmann(2, 3, 0)
        assert c.T.shape == (2, 3) and (c.p, c.q) == (2, 3)

    def test_weight_at_zero(self):
        assert haar.grassmann_weight(np.zeros((2, 3))) == pytest.approx(1.0)


class TestTruncation:
    def test_no_truncation(self, gen):
        g = haar.sample_haar(haar.GroupKind("U", 3), gen)
        assert np.allclose(haar.truncate_unitary(g, 3), g)

    def test_block_diagonal(self, gen):
        u = haar.sample_haar(haar.GroupKind("U", 2), gen)
        v = haar.sample_haar(haar.GroupKind("U", 3), gen)
        g = np.zeros((5, 5), dtype=complex)
        g[:2, :2], g[2:, 2:] = u, v
        assert np.allclose(haar.truncate_unitary(g, 2), u)

    def test_unitary_and_cayley_corner(self, gen):
        for g in haar.sample_haar(haar.GroupKind("U", 5), gen, 20):
            u = haar.truncate_unitary(g, 2)
            assert linalg.unitarity_residual(u) < 1e-9
            assert np.max(np.abs(linalg.cayley(g)[:2, :2] - linalg.cayley(u))) < 1e-9

    def test_transitive(self, gen):
        g = haar.sample_haar(haar.GroupKind("U", 6), gen)
        assert np.allclose(haar.truncate_unitary(haar.truncate_unitary(g, 4), 2), haar.truncate_unitary(g, 2))

    def test_singular(self):
        g = np.diag([1.0, -1.0])
        with pytest.raises(SingularMatrix):
            haar.truncate_unitary(g, 1)

    def test_bad_size(self):
        with pytest.raises(SizeMismatch):
            haar.truncate_unitary(np.eye(3), 0)


class TestHua:
    def test_zero_exponents(self, gen):
        g = haar.sample_haar(haar.GroupKind("U", 3), gen, 10)
        assert np.allclose(haar.hua_weight(g, 0, 0), 1)

    @pytest.mark.parametrize("n,lam,value", [(1, 1, 2.0), (2, 1, 3.0), (3, 1, 4.0), (1, 0.5, 4 / np.pi)])
    def test_integral_values(self, n, lam, value):
        assert haar.hua_integral(n, lam, lam) == pytest.approx(value)

    def test_n2_monte_carlo(self):
        def check(rng):
            g = haar.sample_haar(haar.GroupKind("U", 2), rng, 100_000)
            return estimate(haar.hua_weight(g, 1, 1)).within(3.0)

        assert vote3(check)

    def test_positive_when_equal(self, gen):
        w = haar.hua_weight(haar.sample_haar(haar.GroupKind("U", 3), gen, 100), 0.7, 0.7)
        assert np.isrealobj(w) and np.all(w >= 0)

    def test_branch_violation(self):
        with pytest.raises(BranchViolation):
            haar.hua_weight(np.diag([1.0, -1.0]).astype(complex), 1, 1)

    def test_domain(self, gen):
        with pytest.raises(DomainError):
            haar.hua_weight(np.eye(2), -1, -0.5)
