"""Standard Gaussian measure on ``R^N`` and its quasi-invariance.

Everything here lives at an explicit truncation dimension ``N``.  The
Radon-Nikodym derivatives are written as weights ``R(x)`` with
``E[R(x) f(x)] = E[f(S x)]`` for the transformation ``S`` named in each
function.

Hermite conventions: probabilists' polynomials ``He_k`` are orthogonal
under ``N(0, 1)`` with ``||He_k||^2 = k!``, and the coherent states
``Psi_z(x) = exp(x . z - z . z / 2) = sum_k He_k(x) z^k / k!`` satisfy
``E[Psi_z conj(Psi_u)] = exp(z . conj(u))``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy import stats as _st

from .errors import DomainError, NotContraction, SingularMatrix, SizeMismatch, VarianceExplosion
from .linalg import COND_LIMIT
from .rng import as_generator
from .stats import TestResult, estimate

__all__ = [
    "sample_gauss",
    "cameron_martin_rn",
    "diag_rn",
    "rotate_pushforward_test",
    "GLOFactorization",
    "glo_factor",
    "glo_rn",
    "glo_rn_direct",
    "hermite",
    "hermite_inner",
    "psi",
    "hermite_pairing_mc",
    "iterated_log_ratio",
    "BrownianPath",
    "schauder",
    "brownian_sample",
    "brownian_batch",
    "brownian_covariance",
    "GaussPolymorphism",
    "gaussian_polymorphism",
    "empirical_char",
    "closure_rotation",
    "closure_compression",
    "closure_experiment",
    "ClosureResult",
    "CLOSURE_POINTS",
]


def sample_gauss(n, rng, size):
    """``size`` independent standard Gaussian vectors in ``R^n``."""
    return as_generator(rng).standard_normal((int(size), int(n)))


# ---------------------------------------------------------------- shifts and scalings


def cameron_martin_rn(x, b):
    """``exp(-sum b_j x_j - sum b_j^2 / 2)``: weight realising the shift ``x -> x - b``.

    ``b`` may be shorter than the last axis of ``x``; missing entries are 0.
    """
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.size > x.shape[-1]:
        raise SizeMismatch("shift has more coordinates than the sample")
    xb = x[..., : b.size] @ b
    return np.exp(-xb - 0.5 * b @ b)


def diag_rn(x, lam):
    """``prod_k (1 + l_k) exp(-(l_k^2 + 2 l_k) x_k^2 / 2)``.

    Weight realising ``x_k -> x_k / (1 + l_k)``, so ``E[R 1_A] = P(x in (1 + l) A)``.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= -1):
        raise DomainError("diagonal factors need lambda_k > -1")
    if lam.size > x.shape[-1]:
        raise SizeMismatch("more factors than coordinates")
    xs = x[..., : lam.size]
    return np.prod(1 + lam) * np.exp(-0.5 * ((lam**2 + 2 * lam) * xs**2).sum(axis=-1))


def rotate_pushforward_test(u, samples, rng, alpha=0.01):
    """Test that ``U x`` is standard Gaussian for orthogonal ``U``.

    Each coordinate of ``U x`` gets a KS test against ``N(0, 1)`` and each
    pair a correlation test (``sqrt(n) r`` approximately ``N(0, 1)``); the
    returned p-value is the Bonferroni-adjusted minimum.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if np.max(np.abs(u.T @ u - np.eye(n))) > 1e-10:
        raise DomainError("U is not orthogonal within 1e-10")
    y = sample_gauss(n, rng, samples) @ u.T
    pvals, stat = [], 0.0
    for k in range(n):
        res = _st.kstest(y[:, k], "norm")
        pvals.append(res.pvalue)
        stat = max(stat, res.statistic)
    if n > 1:
        corr = np.corrcoef(y, rowvar=False)[np.triu_indices(n, 1)]
        pvals.extend(2 * _st.norm.sf(np.abs(corr) * np.sqrt(samples)))
    p = min(1.0, min(pvals) * len(pvals))
    return TestResult(float(stat), float(p), alpha)


# ---------------------------------------------------------------- GLO


@dataclass(frozen=True)
class GLOFactorization:
    """``A = V1 (1 + Lambda) V2`` with orthogonal ``V1, V2`` (an SVD)."""

    v1: np.ndarray
    lam: np.ndarray
    v2: np.ndarray

    def matrix(self):
        return self.v1 @ np.diag(1 + self.lam) @ self.v2

    @property
    def orthogonal(self):
        """``U = V1 V2`` in ``A = U (1 + T)``."""
        return self.v1 @ self.v2

    @property
    def hs_part(self):
        """Symmetric ``T = V2^t Lambda V2`` in ``A = U (1 + T)``."""
        return self.v2.T @ np.diag(self.lam) @ self.v2


def glo_factor(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SizeMismatch("A must be square")
    w, s, vh = np.linalg.svd(a)
    if s[-1] == 0 or s[0] / s[-1] >= COND_LIMIT:
        raise SingularMatrix("A is numerically singular")
    return GLOFactorization(w, s - 1, vh)


def glo_rn(x, a):
    """``exp(-x . (T + T^t + T^t T) x / 2) |det(1 + T)|`` for ``A = U (1 + T)``.

    Equals ``exp(-|A x|^2 / 2) |det A| / exp(-|x|^2 / 2)``, the density of
    the law of ``A^{-1} x``.
    """
    f = glo_factor(a)
    t = f.hs_part
    q = t + t.T + t.T @ t
    x = np.asarray(x, dtype=float)
    quad = np.einsum("...i,ij,...j->...", x, q, x)
    return np.exp(-0.5 * quad) * np.prod(1 + f.lam)


def glo_rn_direct(x, a):
    """Finite-dimensional change-of-variables oracle for :func:`glo_rn`."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    ax = x @ a.T
    return np.exp(-0.5 * (ax**2).sum(-1) + 0.5 * (x**2).sum(-1)) * abs(np.linalg.det(a))


# ---------------------------------------------------------------- Hermite and coherent states


def hermite(k, x):
    """Probabilists' Hermite polynomial ``He_k``."""
    return special.eval_hermitenorm(k, x)


def hermite_inner(j, k):
    """``int He_j He_k dN(0, 1)`` by adaptive quadrature (``k! delta_jk``)."""
    val, _ = integrate.quad(
        lambda x: hermite(j, x) * hermite(k, x) * np.exp(-x * x / 2) / np.sqrt(2 * np.pi),
        -np.inf,
        np.inf,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=400,
    )
    return val


def psi(z, x):
    """Coherent state ``exp(x . z - z . z / 2)`` (bilinear, not Hermitian, products)."""
    z = np.asarray(z, dtype=complex)
    x = np.asarray(x, dtype=float)
    return np.exp(x[..., : z.size] @ z - 0.5 * (z @ z))


def hermite_pairing_mc(z, u, n, samples, rng, guard=1e4):
    """Monte Carlo ``E[Psi_z conj(Psi_u)]``; exact value ``exp(z . conj(u))``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    if max(z.size, u.size) > n:
        raise SizeMismatch("z and u must live in C^N")
    x = sample_gauss(n, rng, samples)
    vals = psi(z, x) * np.conj(psi(u, x))
    est = estimate(vals)
    var = est.stderr**2 * est.count
    if var > guard:
        raise VarianceExplosion(f"pairing estimator variance {var:.3g} exceeds guard")
    return est


def iterated_log_ratio(n, paths, rng, start=16):
    """``max_{start <= k <= n} |x_k| / sqrt(2 ln k)`` for ``paths`` Gaussian sequences.

    A diagnostic only: the ratio tends to 1 almost surely but so slowly
    that no finite ``n`` gives a sharp test.
    """
    if not 3 <= start <= n:
        raise DomainError("need 3 <= start <= n")
    gen = as_generator(rng)
    k = np.arange(start, n + 1)
    scale = np.sqrt(2 * np.log(k))
    out = np.empty(int(paths))
    for p in range(out.size):
        out[p] = np.max(np.abs(gen.standard_normal(k.size)) / scale)
    return out


# ---------------------------------------------------------------- Brownian motion


def schauder(n, k, t):
    """Integral of the Haar function ``h_{n,k}``: a tent of height ``2^{-n/2-1}``."""
    t = np.asarray(t, dtype=float)
    scale = 2.0**n
    s = scale * t - k
    tent = np.where((s >= 0) & (s < 0.5), s, np.where((s >= 0.5) & (s < 1), 1 - s, 0.0))
    return tent * 2.0 ** (-n / 2)


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """``B(t) = c_0 t + sum_{n < levels} sum_k c_{n,k} S_{n,k}(t)``.

    Coefficients are level-major and left to right within a level, so
    ``coeffs`` has ``2^levels`` entries.
    """

    levels: int
    coeffs: np.ndarray = field(repr=False)

    def __call__(self, t):
        return _evaluate(self.levels, self.coeffs[None, :], t)[0]


def _evaluate(levels, coeffs, t):
    """Paths (rows of ``coeffs``) at times ``t``; one tent per level is non-zero."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = coeffs[:, :1] * t[None, :]
    for n in range(levels):
        k = np.minimum(np.floor(t * 2**n).astype(int), 2**n - 1)
        out = out + coeffs[:, 2**n + k] * schauder(n, k, t)[None, :]
    return out


def brownian_sample(levels, rng):
    if not 0 <= levels <= 24:
        raise DomainError("levels must be in 0..24")
    gen = as_generator(rng)
    return BrownianPath(levels, gen.standard_normal(2**levels))


def brownian_batch(levels, paths, rng, t, chunk=None):
    """Values at times ``t`` of ``paths`` independent paths (full coefficient draws)."""
    gen = as_generator(rng)
    width = 2**levels
    chunk = chunk or max(1, 2**22 // width)
    out = []
    left = int(paths)
    while left > 0:
        m = min(chunk, left)
        out.append(_evaluate(levels, gen.standard_normal((m, width)), t))
        left -= m
    return np.concatenate(out) if out else np.zeros((0, np.size(t)))


def brownian_covariance(levels, paths, rng, grid=None):
    """Grid covariance check.

    Returns ``(max_error, tolerance)`` for ``|E[B(s) B(t)] - min(s, t)|``
    over the grid, with tolerance ``3 sigma + 2^{-levels/2}`` where
    ``sigma`` is the largest standard error on the grid.
    """
    grid = np.arange(1, 10) / 10 if grid is None else np.asarray(grid, dtype=float)
    vals = brownian_batch(levels, paths, rng, grid)
    prods = vals[:, :, None] * vals[:, None, :]
    mean = prods.mean(axis=0)
    stderr = prods.std(axis=0, ddof=1) / np.sqrt(paths)
    err = np.abs(mean - np.minimum.outer(grid, grid))
    return float(err.max()), float(3 * stderr.max() + 2.0 ** (-levels / 2))


# ---------------------------------------------------------------- Gaussian polymorphisms


@dataclass(frozen=True, eq=False)
class GaussPolymorphism:
    """Joint Gaussian law of ``(x, y)`` with standard marginals and ``E[y x^t] = T``.

    Realised as ``y = T x + (I - T T^t)^{1/2} z`` with independent ``z``.
    """

    t: np.ndarray
    n: int
    root: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.shape != (self.n, self.n):
            raise SizeMismatch(f"T must be {self.n}x{self.n}")
        norm = np.linalg.norm(t, 2)
        if norm > 1 + 1e-10:
            raise NotContraction(f"operator norm {norm:.6g} exceeds 1")
        # I - T T^t = W (1 - s^2) W^t; gaps at rounding level are exact zeros
        w, s, _ = np.linalg.svd(t)
        gap = 1 - s**2
        gap[gap < 64 * np.finfo(float).eps] = 0.0
        root = (w * np.sqrt(gap)) @ w.T
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "root", root)

    def sample(self, rng, size):
        gen = as_generator(rng)
        x = gen.standard_normal((size, self.n))
        z = gen.standard_normal((size, self.n))
        return x, x @ self.t.T + z @ self.root.T

    def char(self, xi, eta):
        """``exp(-(|xi|^2 + |eta|^2 + 2 eta . T xi) / 2)``."""
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return float(np.exp(-0.5 * (xi @ xi + eta @ eta + 2 * eta @ self.t @ xi)))


def gaussian_polymorphism(t, n=None):
    t = np.atleast_2d(np.asarray(t, dtype=float))
    return GaussPolymorphism(t, t.shape[0] if n is None else n)


def empirical_char(x, y, xi, eta):
    """MCEstimate of ``E exp(i (xi . x + eta . y))``."""
    return estimate(np.exp(1j * (x @ np.asarray(xi) + y @ np.asarray(eta))))


def closure_rotation(theta, k):
    """Rotation of ``R^{k+2}`` by ``theta`` in the plane of ``e_0`` and ``f_k``.

    ``f_k = a e_1 + b e_{k+1}`` with ``a = 2^{-k}``, ``b = sqrt(1 - a^2)``.
    As ``k`` grows ``f_k`` escapes to ever new coordinates, so the
    rotations converge weakly to an operator whose compression to the
    coordinates ``{0, 1}`` is ``diag(cos theta, 1)``.
    """
    a = 2.0**-k
    b = np.sqrt(1 - a * a)
    dim = k + 2
    e0 = np.zeros(dim)
    e0[0] = 1
    f = np.zeros(dim)
    f[1] += a
    f[k + 1] += b
    c, s = np.cos(theta), np.sin(theta)
    return np.eye(dim) + (c - 1) * (np.outer(e0, e0) + np.outer(f, f)) + s * (np.outer(f, e0) - np.outer(e0, f))


def closure_compression(theta, k):
    """Block of :func:`closure_rotation` on the observed coordinates ``{0, 1}``."""
    return closure_rotation(theta, k)[:2, :2]


CLOSURE_POINTS = np.array(
    [
        [0.6, 0.0, 0.7, 0.0],
        [0.5, 0.5, 0.5, -0.5],
        [0.0, 0.8, 0.0, 0.6],
        [0.7, 0.3, -0.4, 0.4],
        [0.4, -0.6, 0.6, 0.3],
        [0.9, 0.2, 0.5, 0.1],
        [0.3, 0.3, 0.8, -0.2],
        [0.6, -0.4, 0.3, 0.7],
        [0.5, 0.1, 0.9, -0.3],
        [0.2, 0.7, 0.6, 0.2],
    ]
)


@dataclass(frozen=True)
class ClosureResult:
    ks: tuple
    sup_errors: tuple
    final_stderr: float

    @property
    def monotone(self):
        return all(b < a for a, b in zip(self.sup_errors, self.sup_errors[1:]))

    @property
    def converged(self):
        return self.sup_errors[-1] <= 3 * self.final_stderr

    @property
    def passed(self):
        return self.monotone and self.converged


def closure_experiment(theta, ks, samples, rng, points=CLOSURE_POINTS):
    """Empirical characteristic functions of ``(x_S, (U_k x)_S)``, ``S = {0, 1}``.

    The sup over ``points`` (rows ``(xi, eta)``) of the distance to the
    limit value ``exp(-(|xi|^2 + |eta|^2 + 2 eta . T xi) / 2)``,
    ``T = diag(cos theta, 1)``, is reported for each ``k``.  All ``k``
    share one sample: the escape coordinate ``e_{k+1}`` is relabelled to
    ``e_2``, a coordinate permutation that preserves the Gaussian measure
    and hence the law of the observed coordinates.
    """
    x = sample_gauss(3, rng, samples)
    limit = gaussian_polymorphism(np.diag([np.cos(theta), 1.0]))
    errors = []
    final_se = 0.0
    for k in ks:
        u = closure_rotation(theta, k)
        perm = list(range(k + 2))
        perm[2], perm[k + 1] = perm[k + 1], perm[2]
        u3 = u[np.ix_(perm, perm)][:3, :3]
        y = x @ u3.T
        sup = 0.0
        for row in points:
            xi, eta = row[:2], row[2:]
            est = empirical_char(x[:, :2], y[:, :2], xi, eta)
            gap = abs(est.mean - limit.char(xi, eta))
            if gap > sup:
                sup, se = gap, est.stderr
        errors.append(sup)
        final_se = se
    return ClosureResult(tuple(ks), tuple(errors), float(final_se))
