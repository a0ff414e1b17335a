"""Eigenvalue statistics of classical groups and invariant Hermitian ensembles.

Phase conventions
-----------------
``U(n)``
    ``n`` phases in ``[0, 2 pi)``, density with respect to Lebesgue measure
    on the ordered simplex ``0 <= phi_1 <= ... <= phi_n < 2 pi``.
``SO(2r)``, ``SO(2r+1)``, ``Sp(r)``
    ``r`` phases in ``[0, pi]``; the eigenvalues are ``exp(+-i phi_k)``
    (plus the fixed eigenvalue 1 for odd orthogonal groups, which is not
    stored).

The orthogonal and symplectic densities are known only up to a constant.
Each such integrand is an even trigonometric polynomial of period
``2 pi`` in every variable, so its integral over the period cube is
computed exactly by a periodic trapezoid rule with enough nodes.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy import integrate

from .errors import DegeneratePoints, DomainError
from .haar import GroupKind, sample_haar
from .rng import as_generator
from .stats import MCEstimate, estimate

__all__ = [
    "HermitianSample",
    "rank",
    "eigenphases",
    "half_phases",
    "group_phases",
    "phase_domain",
    "weyl_density",
    "weyl_constant",
    "weyl_expectation",
    "phase_marginal",
    "weyl_cell_probabilities",
    "vandermonde_torus_integral",
    "schur",
    "schur_jacobi_trudi",
    "schur_inner_mc",
    "matrix_element_orthogonality_mc",
    "sample_hermitian",
    "sample_hermitian_invariant",
    "hermitian_eigenvalues",
    "corner_spectra",
    "interlacing_violations",
    "histogram_rows",
]

TWO_PI = 2 * np.pi


# ---------------------------------------------------------------- phases


def rank(kind):
    """Number of stored phases for ``kind``."""
    if kind.family == "U":
        return kind.n
    if kind.family == "SO":
        return kind.n // 2
    if kind.family == "Sp":
        return kind.n
    raise DomainError("O(n) is disconnected; use SO(n)")


def phase_domain(kind):
    """Upper end of the phase interval (``2 pi`` for U, ``pi`` otherwise)."""
    return TWO_PI if kind.family == "U" else np.pi


def eigenphases(g):
    """Sorted eigenphases in ``[0, 2 pi)`` of a unitary matrix or a stack."""
    z = np.linalg.eigvals(np.asarray(g))
    phi = np.mod(np.angle(z), TWO_PI)
    phi[phi >= TWO_PI] = 0.0
    return np.sort(phi, axis=-1)


def half_phases(kind, g):
    """Sorted phases in ``[0, pi]`` of the eigenvalue pairs ``exp(+-i phi)``."""
    r = rank(kind)
    ang = np.sort(np.abs(np.angle(np.linalg.eigvals(np.asarray(g)))), axis=-1)
    if kind.family == "SO" and kind.n % 2 == 1:
        # the fixed eigenvalue 1 is the smallest |angle|
        ang = ang[..., 1:]
    pairs = ang.reshape(ang.shape[:-1] + (r, 2))
    return pairs.mean(axis=-1)


def group_phases(kind, g):
    """Phases of ``g`` in the fundamental domain of ``kind``."""
    return eigenphases(g) if kind.family == "U" else half_phases(kind, g)


# ---------------------------------------------------------------- Weyl densities


def _vandermonde_sq(phi):
    z = np.exp(1j * phi)
    n = phi.shape[-1]
    out = np.ones(phi.shape[:-1])
    for k in range(n):
        for l in range(k + 1, n):
            out = out * np.abs(z[..., k] - z[..., l]) ** 2
    return out


def _weyl_kernel(kind, phi):
    """Unnormalised density on the (ordered) fundamental domain."""
    if kind.family == "U":
        return _vandermonde_sq(phi)
    r = phi.shape[-1]
    out = np.ones(phi.shape[:-1])
    for k in range(r):
        for l in range(k + 1, r):
            out = out * (np.sin((phi[..., k] - phi[..., l]) / 2) * np.sin((phi[..., k] + phi[..., l]) / 2)) ** 2
    if kind.family == "SO" and kind.n % 2 == 1:
        out = out * np.prod(np.sin(phi / 2) ** 2, axis=-1)
    elif kind.family == "Sp":
        out = out * np.prod(np.sin(phi) ** 2, axis=-1)
    return out


def _periodic_grid(r, m):
    nodes = TWO_PI * np.arange(m) / m
    return np.stack(np.meshgrid(*([nodes] * r), indexing="ij"), axis=-1).reshape(-1, r)


@lru_cache(maxsize=None)
def weyl_constant(kind):
    """Normalising constant ``C`` of the density on the ordered domain.

    For ``U(n)`` this is ``(2 pi)^{-n}``.  Otherwise the kernel integral
    over ``[0, 2 pi)^r`` is taken by the periodic trapezoid rule with
    ``4 r + 5`` nodes per axis (exact: the degree per variable is at most
    ``2 r + 2``), halved per axis for ``[0, pi]^r`` and divided by ``r!``.
    """
    r = rank(kind)
    if kind.family == "U":
        return TWO_PI ** (-r)
    if r == 0:
        return 1.0
    m = 4 * r + 5
    grid = _periodic_grid(r, m)
    cube = np.mean(_weyl_kernel(kind, grid)) * TWO_PI**r
    return float(factorial(r) * 2**r / cube)


def weyl_density(kind, phi, check=True):
    """Weyl density of the eigenphases of a Haar element of ``kind``.

    ``phi`` has shape ``(..., r)``; values must be sorted and lie in the
    fundamental domain (see module docstring) unless ``check`` is False,
    in which case the symmetric kernel is evaluated anywhere.
    """
    phi = np.asarray(phi, dtype=float)
    r = rank(kind)
    if phi.shape[-1] != r:
        raise DomainError(f"{kind} has {r} phases, got {phi.shape[-1]}")
    if check:
        top = phase_domain(kind)
        upper_ok = phi < top if kind.family == "U" else phi <= top
        if np.any(phi < 0) or np.any(~upper_ok):
            raise DomainError("phases outside the fundamental domain")
        if r > 1 and np.any(np.diff(phi, axis=-1) < 0):
            raise DomainError("phases must be sorted ascending")
    return weyl_constant(kind) * _weyl_kernel(kind, phi)


def _gauss_cube(r, top, m):
    x, w = np.polynomial.legendre.leggauss(m)
    x = (x + 1) * top / 2
    w = w * top / 2
    grid = np.stack(np.meshgrid(*([x] * r), indexing="ij"), axis=-1).reshape(-1, r)
    weights = np.prod(np.stack(np.meshgrid(*([w] * r), indexing="ij"), axis=-1).reshape(-1, r), axis=-1)
    return grid, weights


def weyl_expectation(kind, f, nodes=48):
    """``E f(phi)`` under the Weyl density, for a symmetric ``f``.

    Tensor Gauss-Legendre quadrature over the full cube with the
    symmetrised density ``C kernel / r!``; ``f`` maps ``(M, r)`` phase
    arrays to ``M`` values.
    """
    r = rank(kind)
    grid, weights = _gauss_cube(r, phase_domain(kind), nodes)
    dens = weyl_constant(kind) * _weyl_kernel(kind, grid) / factorial(r)
    val = np.sum(weights * dens * np.asarray(f(grid)))
    return complex(val) if np.iscomplexobj(val) else float(val)


def vandermonde_torus_integral(n, nodes=None):
    """``int_{[0, 2 pi)^n} |Delta_0(e^{i phi})|^2 dphi`` by tensor Gauss-Legendre quadrature.

    The exact value is ``n! (2 pi)^n``.
    """
    nodes = nodes or 8 * n + 8
    grid, weights = _gauss_cube(n, TWO_PI, nodes)
    return float(np.sum(weights * _vandermonde_sq(grid)))


def phase_marginal(kind, phi, nodes=None):
    """Density of one uniformly chosen phase (averaged one-point marginal)."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    r = rank(kind)
    if r == 1:
        return weyl_density(kind, phi[:, None], check=False)
    if kind.family == "U":
        return np.full(phi.shape, 1 / TWO_PI)
    m = nodes or 4 * r + 5
    rest = _periodic_grid(r - 1, m)
    vol = TWO_PI ** (r - 1)
    out = np.empty(phi.shape)
    for i, p in enumerate(phi.ravel()):
        pts = np.concatenate([np.full((rest.shape[0], 1), p), rest], axis=1)
        # integrate the other r - 1 phases over [0, pi]: half of each period
        out.ravel()[i] = np.mean(_weyl_kernel(kind, pts)) * vol / 2 ** (r - 1)
    return weyl_constant(kind) * out / factorial(r)


def weyl_cell_probabilities(kind, edges):
    """Probabilities of the cells ``[e_i, e_{i+1}] x [e_j, e_{j+1}]`` for rank 2.

    Cells are intersected with the ordered chamber ``phi_1 <= phi_2``;
    the result is an upper-triangular matrix (``i <= j``) whose entries
    sum to 1 when ``edges`` cover the domain.
    """
    if rank(kind) != 2:
        raise DomainError("cell probabilities are implemented for rank 2")
    edges = np.asarray(edges, dtype=float)
    k = edges.size - 1
    c = weyl_constant(kind)

    def dens(y, x):
        return c * _weyl_kernel(kind, np.array([x, y]))

    probs = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            a, b = edges[i], edges[i + 1]
            lo, hi = edges[j], edges[j + 1]
            val, _ = integrate.dblquad(
                dens, a, b, lambda x, lo=lo, hi=hi: min(max(lo, x), hi), lambda x, hi=hi: hi, epsabs=1e-12, epsrel=1e-10
            )
            probs[i, j] = val
    return probs


def histogram_rows(kind, phases, bins=32):
    """Single-phase histogram with the analytic marginal averaged over each bin."""
    top = phase_domain(kind)
    edges = np.linspace(0.0, top, bins + 1)
    counts, _ = np.histogram(np.asarray(phases).ravel(), bins=edges)
    x, w = np.polynomial.legendre.leggauss(8)
    rows = []
    for lo, hi, cnt in zip(edges[:-1], edges[1:], counts):
        pts = lo + (x + 1) * (hi - lo) / 2
        avg = float(np.sum(w * phase_marginal(kind, pts)) / 2)
        rows.append((float(lo), float(hi), int(cnt), avg))
    return rows


# ---------------------------------------------------------------- Schur functions


def _complete_homogeneous(z, kmax):
    """``h_0 .. h_kmax`` of the variables ``z[..., :]`` by the standard recursion."""
    h = np.zeros(z.shape[:-1] + (kmax + 1,), dtype=complex)
    h[..., 0] = 1
    for j in range(z.shape[-1]):
        zj = z[..., j]
        for k in range(1, kmax + 1):
            h[..., k] = h[..., k] + zj * h[..., k - 1]
    return h


def _signature(alpha, n):
    a = tuple(int(v) for v in alpha)
    if len(a) != n:
        raise DomainError(f"signature has {len(a)} parts, expected {n}")
    if any(a[i] < a[i + 1] for i in range(n - 1)):
        raise DomainError("signature must be weakly decreasing")
    return a


def schur_jacobi_trudi(alpha, z):
    """Schur function through ``det[h_{alpha_i - i + j}]``; stable at coincident points."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    a = _signature(alpha, n)
    shift = a[-1]
    lam = [v - shift for v in a]
    kmax = lam[0] + n
    h = _complete_homogeneous(z, kmax)
    mat = np.zeros(z.shape[:-1] + (n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            k = lam[i] - i + j
            if 0 <= k <= kmax:
                mat[..., i, j] = h[..., k]
    out = np.linalg.det(mat)
    if shift:
        out = out * np.prod(z, axis=-1) ** shift
    return out


def schur(alpha, z, sep=1e-4):
    """Schur function ``s_alpha(z) = Delta_alpha(z) / Delta_0(z)``.

    ``Delta_alpha = det(z_i^{alpha_j + n - j})``.  Signatures may have
    negative parts (then all ``z_i`` must be non-zero).  Rows of ``z`` whose
    points are closer than ``sep`` are evaluated by the Jacobi-Trudi
    determinant instead, which has no ``0/0``.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 1
    z = np.atleast_2d(z)
    n = z.shape[-1]
    a = _signature(alpha, n)
    if a[-1] < 0 and np.any(z == 0):
        raise DegeneratePoints("negative exponents at z = 0")
    diff = np.abs(z[..., :, None] - z[..., None, :])
    diff[..., np.arange(n), np.arange(n)] = np.inf
    close = diff.min(axis=(-2, -1)) < sep if n > 1 else np.zeros(z.shape[:-1], dtype=bool)
    out = np.empty(z.shape[:-1], dtype=complex)
    good = ~close
    if good.any():
        zg = z[good]
        exps = np.array([a[j] + n - 1 - j for j in range(n)])
        num = np.linalg.det(zg[..., :, None] ** exps)
        den = np.ones(zg.shape[:-1], dtype=complex)
        for i in range(n):
            for j in range(i + 1, n):
                den = den * (zg[..., i] - zg[..., j])
        out[good] = num / den
    if close.any():
        out[close] = schur_jacobi_trudi(a, z[close])
    if not np.all(np.isfinite(out)):
        raise DegeneratePoints("Schur function evaluation is not finite")
    return out[0] if scalar else out


def _unitary_eigenvalues(n, samples, rng, chunk=50_000):
    gen = as_generator(rng)
    left = int(samples)
    while left > 0:
        m = min(chunk, left)
        yield np.linalg.eigvals(sample_haar(GroupKind("U", n), gen, m))
        left -= m


def schur_inner_mc(alpha, beta, n, samples, rng):
    """Monte Carlo ``<s_alpha, s_beta>`` over the eigenvalues of Haar ``U(n)``."""
    if samples < 1000:
        raise ValueError("schur_inner_mc needs at least 1000 samples")
    vals = [schur(alpha, z) * np.conj(schur(beta, z)) for z in _unitary_eigenvalues(n, samples, rng)]
    return estimate(np.concatenate(vals))


def matrix_element_orthogonality_mc(n, samples, rng):
    """Estimates of ``E[g_ij conj(g_kl)]`` over Haar ``U(n)``, keyed by 0-based ``(i, j, k, l)``.

    The exact value is ``delta_ik delta_jl / n``.
    """
    if samples < 1000:
        raise ValueError("matrix_element_orthogonality_mc needs at least 1000 samples")
    g = sample_haar(GroupKind("U", n), rng, samples).reshape(samples, n * n)
    prod = g[:, :, None] * g[:, None, :].conj()
    mean = prod.mean(axis=0)
    spread = np.sqrt(np.mean(np.abs(prod - mean) ** 2, axis=0) * samples / (samples - 1) / samples)
    table = {}
    for a in range(n * n):
        for b in range(n * n):
            i, j = divmod(a, n)
            k, l = divmod(b, n)
            table[(i, j, k, l)] = MCEstimate(complex(mean[a, b]), float(spread[a, b]), samples)
    return table


# ---------------------------------------------------------------- Hermitian ensembles


@dataclass(frozen=True)
class HermitianSample:
    """Self-adjoint matrix over R (d=1), C (d=2) or H (d=4).

    For ``d = 4`` the matrix is the ``2n x 2n`` complex representation, so
    every eigenvalue appears twice.  ``matrix`` may carry leading batch axes.
    """

    d: int
    n: int
    matrix: np.ndarray


def sample_hermitian(d, n, rng, size=None):
    """Gaussian self-adjoint matrices with eigenvalue density
    ``prop. to prod |l_k - l_l|^d exp(-sum l^2 / 2)``.
    """
    if d not in (1, 2, 4):
        raise DomainError("d must be 1, 2 or 4")
    gen = as_generator(rng)
    shape = () if size is None else (int(size),)

    def cgauss():
        return gen.standard_normal(shape + (n, n)) + 1j * gen.standard_normal(shape + (n, n))

    if d == 1:
        a = gen.standard_normal(shape + (n, n))
        return (a + np.swapaxes(a, -1, -2)) / 2
    if d == 2:
        a = cgauss()
        return (a + np.swapaxes(a.conj(), -1, -2)) / 2
    a, b = cgauss(), cgauss()
    m = np.block([[a, b], [-b.conj(), a.conj()]])
    return (m + np.swapaxes(m.conj(), -1, -2)) / 2


def sample_hermitian_invariant(d, n, rng):
    return HermitianSample(d, n, sample_hermitian(d, n, rng))


def hermitian_eigenvalues(d, x):
    """Ascending eigenvalues; for ``d = 4`` each doubled value is listed once."""
    lam = np.linalg.eigvalsh(np.asarray(x))
    return lam[..., ::2] if d == 4 else lam


def corner_spectra(x):
    """Eigenvalues of the upper-left corners ``[X]_1, ..., [X]_n``.

    Returns a list whose ``p``-th entry (0-based) has shape ``(..., p + 1)``.
    For ``d = 4`` the ``p``-corner is taken on the quaternionic indices,
    i.e. complex rows/columns ``0..p-1`` and ``n..n+p-1``.
    """
    m = np.asarray(x.matrix)
    out = []
    for p in range(1, x.n + 1):
        if x.d == 4:
            idx = np.r_[0:p, x.n : x.n + p]
        else:
            idx = np.arange(p)
        corner = m[..., idx[:, None], idx[None, :]]
        out.append(hermitian_eigenvalues(x.d, corner))
    return out


def interlacing_violations(corners, slack=1e-9):
    """Number of failed inequalities ``l_{p+1,j} <= l_{p,j} <= l_{p+1,j+1}``."""
    bad = 0
    for lo, hi in zip(corners[:-1], corners[1:]):
        bad += int(np.sum(hi[..., :-1] > lo + slack))
        bad += int(np.sum(lo > hi[..., 1:] + slack))
    return bad
