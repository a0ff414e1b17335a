"""Verification suites behind ``invmeas verify``.

Each check produces one :class:`CheckRow`.  Statistical checks are run on
three independent child streams of the run seed and pass when at least
two of them pass.  Exact and deterministic checks run once.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import factorial

import numpy as np
from scipy import stats as _st

from . import ewens, finfourier, gaussian, haar, linalg, poisson, polymorph, spectra
from .errors import VarianceExplosion
from .rng import RngHandle
from .stats import chi2_gof, estimate, ks_test, ks_two_sample, majority

__all__ = ["CheckRow", "SUITES", "run_suite", "suite_names", "worker_count"]

SEEDS_PER_CHECK = 3


@dataclass(frozen=True)
class CheckRow:
    id: str
    anchor: str
    measured: object
    reference: object
    passed: bool
    detail: str = ""

    def to_json(self):
        d = asdict(self)
        for key in ("measured", "reference"):
            d[key] = _jsonable(d[key])
        return d


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass(frozen=True)
class Context:
    seed: int
    samples: int
    alpha: float

    def streams(self, key):
        base = RngHandle(self.seed).spawn(_stable_hash(key))
        return [base.spawn(i) for i in range(SEEDS_PER_CHECK)]


def _stable_hash(text):
    h = 0
    for ch in text.encode():
        h = (h * 131 + ch) % (2**31 - 1)
    return h


def _voted(cid, anchor, ctx, fn, reference=None):
    """Run ``fn(rng) -> (measured, passed)`` on three streams with a 2-of-3 vote."""
    results = [fn(r) for r in ctx.streams(cid)]
    passed = majority([p for _, p in results])
    votes = sum(bool(p) for _, p in results)
    return CheckRow(cid, anchor, results[0][0], reference, passed, f"{votes}/{SEEDS_PER_CHECK} seeds pass")


def _row(cid, anchor, measured, reference, passed, detail=""):
    return CheckRow(cid, anchor, measured, reference, bool(passed), detail)


# ---------------------------------------------------------------- haar


def _haar_checks(ctx):
    n_mc = ctx.samples
    tasks = []
    for fam, n in (("O", 4), ("SO", 4), ("U", 4), ("Sp", 2)):
        kind = haar.GroupKind(fam, n)

        def member(kind=kind):
            g = haar.sample_haar(kind, RngHandle(ctx.seed).spawn(1), 1000)
            res = haar.in_group_residual(kind, g)
            return _row(f"haar.membership.{kind}", "haar-reflection-product", res, 1e-10, res < 1e-10)

        tasks.append(member)

    def u1(rng):
        ph = spectra.eigenphases(haar.sample_haar(haar.GroupKind("U", 1), rng, n_mc))[:, 0]
        t = ks_test(ph, _st.uniform(0, 2 * np.pi).cdf, ctx.alpha)
        return t.pvalue, t.passed

    tasks.append(lambda: _voted("haar.u1-uniform-phase", "haar-reflection-product", ctx, u1, ctx.alpha))

    def oracle_u2(rng):
        a = spectra.eigenphases(haar.sample_haar(haar.GroupKind("U", 2), rng.spawn(0), n_mc))[:, 0]
        b = spectra.eigenphases(haar.sample_haar_qr_oracle(haar.GroupKind("U", 2), rng.spawn(1), n_mc))[:, 0]
        t = ks_two_sample(a, b, ctx.alpha)
        return t.pvalue, t.passed

    tasks.append(lambda: _voted("haar.oracle-u2-phase", "haar-reflection-product", ctx, oracle_u2, ctx.alpha))

    def oracle_sp2(rng):
        k = haar.GroupKind("Sp", 2)
        a = spectra.half_phases(k, haar.sample_haar(k, rng.spawn(0), n_mc))[:, 0]
        b = spectra.half_phases(k, haar.sample_haar_qr_oracle(k, rng.spawn(1), n_mc))[:, 0]
        t = ks_two_sample(a, b, ctx.alpha)
        return t.pvalue, t.passed

    tasks.append(lambda: _voted("haar.oracle-sp2-phase", "haar-reflection-product", ctx, oracle_sp2, ctx.alpha))

    def invariance(rng):
        k = haar.GroupKind("U", 3)
        h = haar.sample_haar(k, 12345)
        g = haar.sample_haar(k, rng.spawn(0), n_mc)
        g2 = haar.sample_haar(k, rng.spawn(1), n_mc)
        t = ks_two_sample(spectra.eigenphases(h @ g)[:, 0], spectra.eigenphases(g2)[:, 0], ctx.alpha)
        return t.pvalue, t.passed

    tasks.append(lambda: _voted("haar.left-invariance-u3", "haar-invariance", ctx, invariance, ctx.alpha))

    def grass(rng):
        t = haar.sample_grassmann(1, 1, rng, n_mc).T.ravel()
        res = ks_test(t, _st.cauchy.cdf, ctx.alpha)
        return res.pvalue, res.passed

    tasks.append(lambda: _voted("haar.grassmann-cauchy", "grassmann-density", ctx, grass, ctx.alpha))

    def cayley(rng):
        g = haar.sample_haar(haar.GroupKind("SO", 2), rng, n_mc)
        one = np.eye(2)
        t = np.linalg.solve(one + g, one - g)[:, 0, 1]
        res = ks_test(t, _st.cauchy.cdf, ctx.alpha)
        return res.pvalue, res.passed

    tasks.append(lambda: _voted("haar.cayley-so2-cauchy", "cayley-haar-density", ctx, cayley, ctx.alpha))

    def truncation_exact():
        g = haar.sample_haar(haar.GroupKind("U", 5), RngHandle(ctx.seed).spawn(2), 100)
        u = haar.truncate_unitary(g, 2)
        unit = max(linalg.unitarity_residual(x) for x in u)
        corner = 0.0
        for gi, ui in zip(g, u):
            cg = -np.eye(5) + 2 * np.linalg.inv(np.eye(5) + gi)
            cu = -np.eye(2) + 2 * np.linalg.inv(np.eye(2) + ui)
            corner = max(corner, float(np.max(np.abs(cg[:2, :2] - cu))))
        res = max(unit, corner)
        return _row("haar.truncation-residuals", "truncation-cayley-corner", res, 1e-9, res < 1e-9)

    tasks.append(truncation_exact)

    def truncation_law(rng):
        a = haar.truncate_unitary(haar.sample_haar(haar.GroupKind("U", 5), rng.spawn(0), n_mc), 2)
        b = haar.sample_haar(haar.GroupKind("U", 2), rng.spawn(1), n_mc)
        t = ks_two_sample(spectra.eigenphases(a)[:, 0], spectra.eigenphases(b)[:, 0], ctx.alpha)
        return t.pvalue, t.passed

    tasks.append(lambda: _voted("haar.truncation-pushforward", "truncation-pushforward", ctx, truncation_law, ctx.alpha))

    for n in (1, 2, 3):
        for lam in (0.5, 1.0, 2.0):

            def hua(rng, n=n, lam=lam):
                g = haar.sample_haar(haar.GroupKind("U", n), rng, n_mc)
                est = estimate(haar.hua_weight(g, lam, lam))
                return float(est.mean), est.within(haar.hua_integral(n, lam, lam))

            cid = f"haar.hua.n{n}.lam{lam}"
            tasks.append(lambda cid=cid, hua=hua, n=n, lam=lam: _voted(cid, "hua-integral", ctx, hua, haar.hua_integral(n, lam, lam)))
    return tasks


# ---------------------------------------------------------------- weyl


def _weyl_checks(ctx):
    tasks = []
    for n in (2, 3):
        kind = haar.GroupKind("U", n)
        for p in (1, 2, 3):

            def moment(rng, kind=kind, p=p):
                ph = spectra.eigenphases(haar.sample_haar(kind, rng, ctx.samples))
                est = estimate(np.sum(ph**p, axis=1))
                ref = spectra.weyl_expectation(kind, lambda x: np.sum(x**p, axis=1))
                return float(est.mean), est.within(ref)

            ref = spectra.weyl_expectation(kind, lambda x, p=p: np.sum(x**p, axis=1))
            tasks.append(lambda moment=moment, n=n, p=p, ref=ref: _voted(f"weyl.u{n}.p{p}", "weyl-density", ctx, moment, ref))

        def torus(n=n):
            val = spectra.vandermonde_torus_integral(n)
            ref = factorial(n) * (2 * np.pi) ** n
            return _row(f"weyl.torus-normalisation.n{n}", "vandermonde-normalisation", val, ref, abs(val / ref - 1) < 1e-3)

        tasks.append(torus)
    for fam, n in (("SO", 4), ("SO", 5), ("Sp", 2)):
        kind = haar.GroupKind(fam, n)

        def chi2(rng, kind=kind):
            ph = spectra.half_phases(kind, haar.sample_haar(kind, rng, ctx.samples))
            return _weyl_chi2(kind, ph, ctx.alpha)

        tasks.append(lambda chi2=chi2, kind=kind: _voted(f"weyl.chi2.{kind}", "weyl-density-zoo", ctx, chi2, ctx.alpha))
    return tasks


_CELL_CACHE = {}


def weyl_cells(kind, bins=8):
    key = (kind, bins)
    if key not in _CELL_CACHE:
        edges = np.linspace(0, np.pi, bins + 1)
        _CELL_CACHE[key] = (edges, spectra.weyl_cell_probabilities(kind, edges))
    return _CELL_CACHE[key]


def _weyl_chi2(kind, phases, alpha, bins=8):
    edges, probs = weyl_cells(kind, bins)
    counts, _, _ = np.histogram2d(phases[:, 0], phases[:, 1], bins=[edges, edges])
    iu = np.triu_indices(bins)
    res = chi2_gof(counts[iu], probs[iu], alpha)
    return res.pvalue, res.passed


# ---------------------------------------------------------------- schur


def partitions_up_to(total, n):
    """Partitions with at most ``n`` parts and size at most ``total``, padded to length ``n``."""
    out = []

    def rec(prefix, remaining, cap):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for v in range(min(remaining, cap), -1, -1):
            rec(prefix + [v], remaining - v, v)

    rec([], total, total)
    return sorted(set(out), key=lambda a: (sum(a), tuple(-v for v in a)))


def _schur_checks(ctx):
    tasks = []
    for n in (2, 3):
        parts = partitions_up_to(3, n)

        def ortho(rng, n=n, parts=parts):
            z_batches = list(spectra._unitary_eigenvalues(n, ctx.samples, rng))
            z = np.concatenate(z_batches)
            vals = np.stack([spectra.schur(a, z) for a in parts])
            ok = True
            worst = 0.0
            for i, a in enumerate(parts):
                for j, b in enumerate(parts):
                    est = estimate(vals[i] * np.conj(vals[j]))
                    ref = 1.0 if i == j else 0.0
                    worst = max(worst, est.deviation(ref))
                    ok = ok and est.within(ref)
            return worst, ok

        tasks.append(lambda ortho=ortho, n=n: _voted(f"schur.orthonormality.n{n}", "schur-characters", ctx, ortho, "all within 3 sigma"))
    for n in (2, 3, 4):

        def elems(rng, n=n):
            table = spectra.matrix_element_orthogonality_mc(n, ctx.samples, rng)
            worst = 0.0
            ok = True
            for (i, j, k, l), est in table.items():
                ref = (1.0 / n) if (i == k and j == l) else 0.0
                worst = max(worst, est.deviation(ref))
                ok = ok and est.within(ref)
            return worst, ok

        tasks.append(lambda elems=elems, n=n: _voted(f"schur.matrix-elements.n{n}", "matrix-element-orthogonality", ctx, elems, "all within 3 sigma"))

    def shift():
        gen = RngHandle(ctx.seed).spawn(3).generator()
        worst = 0.0
        for _ in range(100):
            z = gen.standard_normal(3) + 1j * gen.standard_normal(3)
            lhs = spectra.schur((3, 2, 1), z)
            rhs = np.prod(z) * spectra.schur((2, 1, 0), z)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        return _row("schur.shift-identity", "schur-shift", worst, 1e-9, worst < 1e-9)

    tasks.append(shift)
    return tasks


# ---------------------------------------------------------------- fourier


def golden_groups():
    groups = [finfourier.cyclic(n) for n in range(1, 13)]
    groups += [finfourier.symmetric(3), finfourier.symmetric(4), finfourier.dihedral(4), finfourier.quaternion(), finfourier.alternating(4)]
    return groups


def fourier_report(group, seed=0):
    """Residuals of every finite-Fourier identity on ``group``."""
    table, irreps = finfourier.all_irreps(group, rng=seed)
    gen = np.random.default_rng(seed)
    n = group.order
    f1 = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    f2 = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    b1, b2 = finfourier.fourier(group, f1, irreps), finfourier.fourier(group, f2, irreps)
    conv = finfourier.fourier(group, finfourier.convolve(group, f1, f2), irreps)
    return {
        "classes": len(table.classes),
        "irreps": table.count,
        "sum_dim_sq": int(sum(d * d for d in table.dims)),
        "order": n,
        "orthogonality": max(table.row_orthogonality_residual(), table.column_orthogonality_residual()),
        "homomorphism": max(r.homomorphism_residual(group) for r in irreps),
        "convolution": conv.max_difference(b1 @ b2),
        "plancherel": finfourier.plancherel_residual(group, f1, b1, irreps),
        "inversion": float(np.max(np.abs(finfourier.inverse_fourier(group, b1, irreps) - f1))),
    }


def _fourier_checks(ctx):
    tasks = []
    for group in golden_groups():

        def check(group=group):
            rep = fourier_report(group, ctx.seed % (2**32))
            counts_ok = rep["classes"] == rep["irreps"] and rep["sum_dim_sq"] == rep["order"]
            worst = max(rep[k] for k in ("orthogonality", "homomorphism", "convolution", "plancherel", "inversion"))
            detail = f"classes={rep['classes']} irreps={rep['irreps']} sum d^2={rep['sum_dim_sq']}"
            return _row(f"fourier.{group.name}", "finite-fourier", worst, 1e-8, counts_ok and worst < 1e-8, detail)

        tasks.append(check)
    return tasks


# ---------------------------------------------------------------- ewens


EWENS_T = (Fraction(1, 3), 1, 2, Fraction(7, 2))


def _ewens_checks(ctx):
    tasks = []
    for n in range(1, 7):
        for t in EWENS_T:

            def push(n=n, t=t):
                rep = ewens.pushforward_exact_check(n, t)
                return _row(f"ewens.pushforward.n{n}.t{t}", "ewens-pushforward", rep.exact, True, rep.passed, f"targets={rep.targets}")

            tasks.append(push)

    def projections():
        ok = all(ewens.project(s) == ewens.project_by_cycles(s) for n in range(2, 7) for s in ewens.all_permutations(n))
        return _row("ewens.projection-definitions", "ewens-projection", ok, True, ok)

    tasks.append(projections)
    for n in (3, 4, 5):
        for t in (0.5, 1.0, 2.0):

            def crp(rng, n=n, t=t):
                x = ewens.crp_sample(n, t, rng, ctx.samples)
                perms = ewens.all_permutations(n)
                index = {p.images: i for i, p in enumerate(perms)}
                codes = np.array([index[tuple(r)] for r in x.tolist()])
                counts = np.bincount(codes, minlength=len(perms))
                probs = [ewens.ewens_weight(p, t) for p in perms]
                res = chi2_gof(counts, probs, ctx.alpha)
                return res.pvalue, res.passed

            tasks.append(lambda crp=crp, n=n, t=t: _voted(f"ewens.crp-law.n{n}.t{t}", "chinese-restaurant", ctx, crp, ctx.alpha))
    return tasks


# ---------------------------------------------------------------- poisson


def _poisson_checks(ctx):
    tasks = []
    space2 = poisson.MeasureSpace1D.uniform(0.0, 2.0)
    unit = poisson.MeasureSpace1D.uniform(0.0, 1.0)

    def counts(rng):
        b = poisson.sample_batch(space2, rng, ctx.samples)
        k = np.bincount(b.counts)
        pmf = _st.poisson.pmf(np.arange(k.size), space2.mass)
        pmf[-1] += _st.poisson.sf(k.size - 1, space2.mass)
        res = chi2_gof(k, pmf, ctx.alpha)
        return res.pvalue, res.passed

    tasks.append(lambda: _voted("poisson.count-law", "poisson-count-law", ctx, counts, ctx.alpha))
    families = {
        "const": lambda x: np.full(np.shape(x), 0.5),
        "sine": lambda x: 0.7 * np.sin(3 * np.asarray(x)),
        "void": lambda x: -1.0 * (np.asarray(x) < 0.3),
    }
    for name, h in families.items():
        ref = poisson.campbell_reference(unit, h)

        def camp(rng, h=h, ref=ref):
            est = poisson.campbell_mc(unit, h, ctx.samples, rng)
            return float(est.mean), est.within(ref)

        tasks.append(lambda camp=camp, name=name, ref=ref: _voted(f"poisson.campbell.{name}", "campbell-formula", ctx, camp, ref))
    g = poisson.TransformG(unit, lambda x: x + 0.1 * np.sin(2 * np.pi * x), lambda x: 1 + 0.2 * np.pi * np.cos(2 * np.pi * x))

    def rn(rng):
        est = estimate(poisson.poisson_rn_batch(g, poisson.sample_batch(unit, rng, ctx.samples)))
        return float(est.mean), est.within(1.0)

    tasks.append(lambda: _voted("poisson.rn-mean", "poisson-quasi-invariance", ctx, rn, 1.0))
    scale = poisson.TransformG(unit, lambda x: 1.2 * np.asarray(x), lambda x: np.full(np.shape(x), 1.2))

    def rn_count(rng):
        b = poisson.sample_batch(unit, rng, ctx.samples)
        est = estimate(poisson.poisson_rn_batch(scale, b) * b.counts_in(0.2, 0.6))
        return float(est.mean), est.within(1.2 * 0.4)

    tasks.append(lambda: _voted("poisson.rn-change-of-variables", "poisson-quasi-invariance", ctx, rn_count, 0.48))

    def h_pair(x):
        return 0.4 * np.exp(2j * np.asarray(x))

    def f_pair(x):
        return 0.3 - 0.2j * np.asarray(x)

    pair_ref = poisson.pairing_reference(unit, h_pair, f_pair)

    def pairing(rng):
        try:
            est = poisson.pairing_mc(unit, h_pair, f_pair, ctx.samples, rng)
        except VarianceExplosion:
            return None, False
        return est.mean, est.within(pair_ref)

    tasks.append(lambda: _voted("poisson.pairing", "poisson-exponential-pairing", ctx, pairing, pair_ref))
    return tasks


# ---------------------------------------------------------------- gaussian


def _gaussian_checks(ctx):
    tasks = []
    n_dim = 20

    def cm(rng):
        x = gaussian.sample_gauss(n_dim, rng, ctx.samples)
        est = estimate(gaussian.cameron_martin_rn(x, np.full(n_dim, 0.5 / np.sqrt(n_dim))))
        return float(est.mean), est.within(1.0)

    tasks.append(lambda: _voted("gaussian.cameron-martin-mean", "cameron-martin", ctx, cm, 1.0))

    def diag(rng):
        x = gaussian.sample_gauss(n_dim, rng, ctx.samples)
        est = estimate(gaussian.diag_rn(x, np.linspace(-0.2, 0.2, n_dim)))
        return float(est.mean), est.within(1.0)

    tasks.append(lambda: _voted("gaussian.diagonal-mean", "diagonal-quasi-invariance", ctx, diag, 1.0))

    def glo():
        gen = RngHandle(ctx.seed).spawn(4).generator()
        worst = 0.0
        for _ in range(100):
            a = gen.standard_normal((5, 5))
            x = gen.standard_normal(5)
            worst = max(worst, abs(gaussian.glo_rn(x, a) / gaussian.glo_rn_direct(x, a) - 1))
        return _row("gaussian.glo-rn", "glo-radon-nikodym", worst, 1e-9, worst < 1e-9)

    tasks.append(glo)

    def pairing(rng):
        z, u = np.array([0.5, 0.2j]), np.array([0.3 - 0.1j, 0.4])
        est = gaussian.hermite_pairing_mc(z, u, 2, ctx.samples, rng)
        ref = np.exp(z @ np.conj(u))
        return est.mean, est.within(ref)

    tasks.append(lambda: _voted("gaussian.coherent-pairing", "segal-bargmann-pairing", ctx, pairing, complex(np.exp(np.array([0.5, 0.2j]) @ np.conj([0.3 - 0.1j, 0.4])))))

    def norms():
        worst = max(abs(gaussian.hermite_inner(k, k) / factorial(k) - 1) for k in range(9))
        return _row("gaussian.hermite-norms", "hermite-norms", worst, 1e-8, worst < 1e-8)

    tasks.append(norms)

    def brown(rng):
        err, tol = gaussian.brownian_covariance(14, min(ctx.samples, 10_000), rng)
        return err, err <= tol

    tasks.append(lambda: _voted("gaussian.brownian-covariance", "schauder-brownian", ctx, brown, "3 sigma + 2^-7"))

    def rotation(rng):
        u = haar.sample_haar(haar.GroupKind("O", 10), 777)
        res = gaussian.rotate_pushforward_test(u, ctx.samples, rng, ctx.alpha)
        return res.pvalue, res.passed

    tasks.append(lambda: _voted("gaussian.rotation-invariance", "gauss-rotation-invariance", ctx, rotation, ctx.alpha))

    def closure(rng):
        res = gaussian.closure_experiment(np.pi / 3, range(1, 9), ctx.samples, rng)
        return res.sup_errors[-1], res.passed

    tasks.append(lambda: _voted("gaussian.nelson-closure", "gaussian-polymorphism-closure", ctx, closure, 0.0))
    return tasks


# ---------------------------------------------------------------- polymorph


def random_polymorphism(gen, m, n):
    mu = polymorph.FiniteSpace(_simplex(gen, m))
    nu = polymorph.FiniteSpace(_simplex(gen, n))
    joint = _sinkhorn(gen.random((m, n)) + 0.05, mu.weights, nu.weights)
    return polymorph.FinitePolymorphism(mu, nu, joint)


def _simplex(gen, m):
    w = gen.random(m) + 0.1
    w = w / w.sum()
    w[-1] = 1 - w[:-1].sum()
    return w


def _sinkhorn(k, mu, nu, iters=2000):
    k = np.array(k, dtype=float)
    for _ in range(iters):
        k *= (mu / k.sum(axis=1))[:, None]
        k *= (nu / k.sum(axis=0))[None, :]
    # make the row sums exact; the column sums keep their residual
    k += np.outer(mu - k.sum(axis=1), nu)
    return k


def _polymorph_checks(ctx):
    def exact():
        gen = RngHandle(ctx.seed).spawn(5).generator()
        round_trip = comp = assoc = norm = 0.0
        for _ in range(50):
            s = random_polymorphism(gen, 4, 3)
            t = polymorph.to_markov(s)
            back = polymorph.from_markov(t, s.source, s.target, tol=1e-10)
            round_trip = max(round_trip, float(np.max(np.abs(back.joint - s.joint))))
            r = random_polymorphism(gen, 3, 5)
            r = polymorph.FinitePolymorphism(s.target, r.target, _sinkhorn(r.joint, s.target.weights, r.target.weights))
            c = polymorph.compose(s, r)
            comp = max(comp, float(np.max(np.abs(polymorph.to_markov(c).matrix - polymorph.to_markov(r).matrix @ t.matrix))))
            norm = max(norm, abs(t.norm() - 1), abs(polymorph.to_markov(c).norm() - 1))
            q = random_polymorphism(gen, 2, 2)
            q = polymorph.FinitePolymorphism(r.target, q.target, _sinkhorn(gen.random((5, 2)) + 0.05, r.target.weights, q.target.weights))
            lhs = polymorph.compose(polymorph.compose(s, r), q).joint
            rhs = polymorph.compose(s, polymorph.compose(r, q)).joint
            assoc = max(assoc, float(np.max(np.abs(lhs - rhs))))
        return [
            _row("polymorph.markov-round-trip", "markov-correspondence", round_trip, 1e-12, round_trip < 1e-12),
            _row("polymorph.composition", "polymorphism-composition", comp, 1e-12, comp < 1e-12),
            _row("polymorph.associativity", "polymorphism-composition", assoc, 1e-12, assoc < 1e-12),
            _row("polymorph.norm", "markov-norm", norm, 1e-10, norm < 1e-10),
        ]

    def approx():
        gen = RngHandle(ctx.seed).spawn(6).generator()
        worst = 0.0
        for _ in range(20):
            counts = _random_magic(gen, 3, 6)
            space = polymorph.uniform_space(3)
            sigma = polymorph.FinitePolymorphism(space, space, counts / 18.0)
            perm = polymorph.approximate_by_permutation(sigma, 6)
            ok = sorted(perm.tolist()) == list(range(18))
            worst = max(worst, float(np.max(np.abs(polymorph.induced_polymorphism(perm, 3, 6).joint - sigma.joint))), 0.0 if ok else 1.0)
        return [_row("polymorph.permutation-approximation", "ams-density", worst, 0.0, worst < 1e-15)]

    return [exact, approx]


def _random_magic(gen, m, total):
    """Non-negative integer matrix with all row and column sums equal to ``total``."""
    out = np.zeros((m, m), dtype=np.int64)
    for _ in range(total):
        out[np.arange(m), gen.permutation(m)] += 1
    return out


# ---------------------------------------------------------------- driver


SUITES = {
    "haar": _haar_checks,
    "weyl": _weyl_checks,
    "schur": _schur_checks,
    "fourier": _fourier_checks,
    "ewens": _ewens_checks,
    "poisson": _poisson_checks,
    "gaussian": _gaussian_checks,
    "polymorph": _polymorph_checks,
}


def suite_names():
    return list(SUITES) + ["all"]


def worker_count():
    raw = os.environ.get("INVMEAS_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def run_suite(name, seed, samples=100_000, alpha=0.01, workers=None):
    """Run one suite (or ``"all"``) and return rows sorted by check id."""
    if name not in suite_names():
        raise KeyError(name)
    ctx = Context(int(seed), int(samples), float(alpha))
    names = list(SUITES) if name == "all" else [name]
    tasks = [t for s in names for t in SUITES[s](ctx)]
    workers = workers or worker_count()
    if workers == 1:
        results = [t() for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: t(), tasks))
    rows = []
    for r in results:
        rows.extend(r if isinstance(r, list) else [r])
    return sorted(rows, key=lambda r: r.id)
