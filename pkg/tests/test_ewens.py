from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from invmeas import ewens as ew
from invmeas.errors import DomainError, SizeMismatch
from invmeas.rng import RngHandle
from invmeas.stats import chi2_gof, estimate, majority

perms = hst.integers(1, 7).flatmap(lambda n: hst.permutations(list(range(n)))).map(lambda p: ew.Permutation(tuple(p)))


def vote3(check):
    return majority([check(RngHandle(s, stream=31)) for s in (1, 2, 3)])


def crp_chi2(n, t, rng, size=100_000):
    imgs = ew.crp_sample(n, t, rng, size)
    seen = Counter(tuple(r) for r in imgs.tolist())
    targets = ew.all_permutations(n)
    counts = [seen.get(p.images, 0) for p in targets]
    probs = [float(ew.ewens_weight(p, t)) for p in targets]
    return chi2_gof(counts, probs).passed


class TestPermutation:
    def test_cycles_round_trip(self):
        p = ew.Permutation.from_cycles([(1, 7, 5, 8, 4), (2, 3, 6)], 8)
        assert str(p) == "(1 7 5 8 4)(2 3 6)"
        assert p.num_cycles() == 2

    def test_one_line(self):
        p = ew.Permutation.from_one_line([2, 3, 1])
        assert p.one_line() == [2, 3, 1] and p.images == (1, 2, 0)

    def test_composition_order(self):
        a = ew.Permutation.from_one_line([2, 1, 3])
        b = ew.Permutation.from_one_line([1, 3, 2])
        # (a b)(1) = a(b(1)) = a(1) = 2
        assert (a * b).one_line()[0] == 2

    def test_rejects_non_bijection(self):
        with pytest.raises(DomainError):
            ew.Permutation((0, 0, 1))

    def test_degree_mismatch(self):
        with pytest.raises(SizeMismatch):
            ew.identity(2) * ew.identity(3)

    def test_embed(self):
        p = ew.Permutation.from_one_line([2, 1]).embed(4)
        assert p.one_line() == [2, 1, 3, 4]
        with pytest.raises(SizeMismatch):
            p.embed(2)

    @settings(max_examples=60, deadline=None)
    @given(perms)
    def test_inverse(self, p):
        assert p * p.inverse() == ew.identity(p.n)
        assert p.inverse() * p == ew.identity(p.n)

    @settings(max_examples=60, deadline=None)
    @given(hst.integers(1, 6).flatmap(lambda n: hst.tuples(*[hst.permutations(list(range(n)))] * 3)))
    def test_associative(self, triple):
        a, b, c = (ew.Permutation(tuple(x)) for x in triple)
        assert (a * b) * c == a * (b * c)


class TestProjection:
    def test_worked_example(self):
        p = ew.Permutation.from_cycles([(1, 7, 5, 8, 4), (2, 3, 6)], 8)
        assert str(ew.project(p)) == "(1 7 5 4)(2 3 6)"

    def test_identity(self):
        assert ew.project(ew.identity(5)) == ew.identity(4)

    def test_fixed_point_removed(self):
        p = ew.Permutation.from_cycles([(1, 2)], 3)
        assert ew.project(p) == ew.Permutation.from_cycles([(1, 2)], 2)

    def test_four_preimages(self):
        hits = Counter(ew.project(p).images for p in ew.all_permutations(4))
        assert len(hits) == 6 and set(hits.values()) == {4}

    @settings(max_examples=100, deadline=None)
    @given(perms.filter(lambda p: p.n >= 2))
    def test_rules_agree(self, p):
        assert ew.project(p) == ew.project_by_cycles(p)

    def test_embedding_is_section(self):
        for p in ew.all_permutations(4):
            assert ew.project(p.embed(5)) == p

    def test_cycle_count_drops_by_at_most_one(self):
        for p in ew.all_permutations(5):
            assert p.num_cycles() - ew.project(p).num_cycles() in (0, 1)

    def test_too_small(self):
        with pytest.raises(DomainError):
            ew.project(ew.identity(1))


class TestWeights:
    def test_trivial_group(self):
        assert ew.ewens_weight(ew.identity(1), Fraction(7, 3)) == 1

    def test_uniform_at_one(self):
        for p in ew.all_permutations(4):
            assert ew.ewens_weight(p, 1) == Fraction(1, 24)

    def test_s2_at_two(self):
        swap = ew.Permutation.from_one_line([2, 1])
        assert ew.ewens_weight(ew.identity(2), 2) == Fraction(2, 3)
        assert ew.ewens_weight(swap, 2) == Fraction(1, 3)

    @pytest.mark.parametrize("t", [Fraction(1, 3), 1, 2, Fraction(5, 2)])
    def test_normalised(self, t):
        assert sum(ew.ewens_weight(p, t) for p in ew.all_permutations(5)) == 1

    def test_float_parameter(self):
        total = sum(ew.ewens_weight(p, 0.7) for p in ew.all_permutations(4))
        assert isinstance(total, float) and total == pytest.approx(1.0, abs=1e-14)

    def test_rising(self):
        assert ew.rising(Fraction(1, 2), 3) == Fraction(15, 8)
        assert ew.rising(3, 0) == 1

    @pytest.mark.parametrize("t", [0, -1, -0.5])
    def test_bad_parameter(self, t):
        with pytest.raises(DomainError):
            ew.ewens_weight(ew.identity(2), t)


class TestRestaurant:
    def test_shapes_and_bijections(self):
        imgs = ew.crp_sample(6, 1.5, RngHandle(0), 500)
        assert imgs.shape == (500, 6)
        assert np.all(np.sort(imgs, axis=1) == np.arange(6))

    def test_extend_projects_back(self, gen):
        p = ew.Permutation.from_cycles([(1, 3), (2, 4, 5)], 5)
        for _ in range(50):
            assert ew.project(ew.crp_extend(p, 0.8, gen)) == p

    def test_batch_chain_is_consistent(self):
        # a CRP row on S_n restricted by projection is a CRP row on S_{n-1}
        imgs = ew.crp_sample(5, 2.0, RngHandle(4), 200)
        for row in imgs:
            p = ew.Permutation(tuple(row))
            assert ew.is_virtual_prefix(ew.virtual_prefix(p))

    def test_cycle_counts(self):
        imgs = np.array([[0, 1, 2], [1, 0, 2], [1, 2, 0]])
        assert ew.cycle_counts(imgs).tolist() == [3, 2, 1]

    @pytest.mark.parametrize("n,t", [(3, 1.0), (4, 0.5)])
    def test_law(self, n, t):
        assert vote3(lambda rng: crp_chi2(n, t, rng))

    def test_mean_cycle_count(self):
        def check(rng):
            c = ew.cycle_counts(ew.crp_sample(8, 3.0, rng, 50_000))
            return estimate(c).within(ew.expected_cycles(8, 3.0))

        assert vote3(check)


class TestPushforward:
    @pytest.mark.parametrize("n,t", [(3, 2), (5, Fraction(1, 3)), (4, 1), (6, Fraction(7, 2))])
    def test_exact(self, n, t):
        rep = ew.pushforward_exact_check(n, t)
        assert rep.passed and rep.exact and rep.max_error == 0.0
        assert rep.targets == len(ew.all_permutations(n))

    def test_float(self):
        rep = ew.pushforward_exact_check(4, 0.37)
        assert rep.passed and rep.max_error < 1e-12

    def test_limit(self):
        with pytest.raises(DomainError):
            ew.pushforward_exact_check(9, 1)


class TestLeftAction:
    def test_identity(self, gen):
        for p in ew.all_permutations(4):
            assert ew.left_action_rn(ew.identity(4), p, Fraction(3, 2)) == 1

    def test_transposition_on_identity(self):
        swap = ew.Permutation.from_one_line([2, 1])
        t = Fraction(5, 4)
        assert ew.left_action_rn(swap, ew.identity(2), t) == 1 / t

    def test_embedded_tau(self):
        swap = ew.Permutation.from_one_line([2, 1])
        assert ew.left_action_rn(swap, ew.identity(5), 3) == Fraction(1, 3)

    @settings(max_examples=80, deadline=None)
    @given(perms, hst.integers(0, 10**6), hst.fractions(Fraction(1, 10), 10))
    def test_matches_weight_ratio(self, sigma, seed, t):
        gen = np.random.default_rng(seed)
        k = int(gen.integers(1, sigma.n + 1))
        tau = ew.Permutation(tuple(gen.permutation(k)))
        assert ew.left_action_rn(tau, sigma, t) == ew.weight_ratio(tau, sigma, t)

    def test_reweighting_identity(self):
        # sum over sigma of mu(sigma) R(tau, sigma) f(tau sigma) = sum mu f
        t = Fraction(2, 5)
        tau = ew.Permutation.from_one_line([3, 1, 2, 4])
        f = {p.images: Fraction(i + 1, 7) for i, p in enumerate(ew.all_permutations(4))}
        lhs = sum(ew.ewens_weight(p, t) * ew.left_action_rn(tau, p, t) * f[(tau * p).images] for p in ew.all_permutations(4))
        rhs = sum(ew.ewens_weight(p, t) * f[p.images] for p in ew.all_permutations(4))
        assert lhs == rhs


class TestVirtualPrefix:
    def test_chain(self):
        p = ew.Permutation.from_cycles([(1, 7, 5, 8, 4), (2, 3, 6)], 8)
        chain = ew.virtual_prefix(p)
        assert [c.n for c in chain] == list(range(1, 9))
        assert chain[-1] == p and str(chain[-2]) == "(1 7 5 4)(2 3 6)"
        assert ew.is_virtual_prefix(chain)

    def test_broken_chain(self):
        chain = ew.virtual_prefix(ew.identity(3))
        chain[1] = ew.Permutation.from_one_line([2, 1])
        assert not ew.is_virtual_prefix(chain)
