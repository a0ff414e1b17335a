"""Dense matrix kernel and closed-form matrix identities.

Conventions
-----------
Block matrices act on row vectors, ``x -> x g``.  A ``(p+q) x (p+q)``
matrix is split as ``[[alpha, beta], [gamma, delta]]`` with ``alpha`` of
size ``p x p``.  A ``p x q`` matrix ``T`` is the graph coordinate of the
``p``-dimensional subspace ``{(x, x T)}``, and ``g`` moves it to
``(alpha + T gamma)^{-1} (beta + T delta)``.

"Invertible" always means a 2-norm condition number below
:data:`COND_LIMIT`; anything worse raises :class:`SingularMatrix`.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import differentiate

from .errors import BothBlocksSingular, NotInvariant, SingularMatrix, SizeMismatch

__all__ = [
    "COND_LIMIT",
    "BlockSplit",
    "LieBasis",
    "Colligation",
    "is_unitary",
    "unitarity_residual",
    "solve",
    "inverse",
    "cayley",
    "block_det",
    "moebius",
    "moebius_jacobian",
    "numerical_jacobian_det",
    "modular_character",
    "rank_one_reflection",
    "colligation_char",
    "colligation_product",
    "identity_colligation",
]

COND_LIMIT = 1e12


def _check_cond(a, what="matrix"):
    a = np.asarray(a)
    if a.size == 0:
        return
    c = np.linalg.cond(a)
    if not np.isfinite(c) or c >= COND_LIMIT:
        raise SingularMatrix(f"{what} is numerically singular (cond={c:.3g})")


def solve(a, b, what="matrix"):
    """``a^{-1} b`` after a conditioning check (LU with partial pivoting)."""
    _check_cond(a, what)
    return np.linalg.solve(a, b)


def inverse(a, what="matrix"):
    _check_cond(a, what)
    return np.linalg.inv(a)


def unitarity_residual(g):
    """``max |g* g - I|`` entrywise."""
    g = np.asarray(g)
    return float(np.max(np.abs(g.conj().T @ g - np.eye(g.shape[1]))))


def is_unitary(g, tol=1e-10):
    return unitarity_residual(g) < tol


@dataclass(frozen=True)
class BlockSplit:
    """Square matrix with a ``p + q`` block partition."""

    matrix: np.ndarray
    p: int

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SizeMismatch("BlockSplit needs a square matrix")
        if not 0 <= self.p <= m.shape[0]:
            raise SizeMismatch(f"split p={self.p} outside 0..{m.shape[0]}")
        object.__setattr__(self, "matrix", m)

    @property
    def size(self):
        return self.matrix.shape[0]

    @property
    def q(self):
        return self.size - self.p

    @property
    def alpha(self):
        return self.matrix[: self.p, : self.p]

    @property
    def beta(self):
        return self.matrix[: self.p, self.p :]

    @property
    def gamma(self):
        return self.matrix[self.p :, : self.p]

    @property
    def delta(self):
        return self.matrix[self.p :, self.p :]

    def __matmul__(self, other):
        if other.p != self.p or other.size != self.size:
            raise SizeMismatch("block partitions differ")
        return BlockSplit(self.matrix @ other.matrix, self.p)


def cayley(g):
    """Cayley transform ``(1 + g)^{-1} (1 - g)``; an involution.

    Maps SO(n) (resp. U(n)) without eigenvalue -1 onto antisymmetric
    (resp. anti-Hermitian) matrices and back.
    """
    g = np.asarray(g)
    one = np.eye(g.shape[0], dtype=g.dtype)
    return solve(one + g, one - g, "1 + g")


def block_det(m):
    """Determinant via a Schur complement.

    Uses ``det A det(D - C A^{-1} B)`` when ``A`` is invertible, otherwise
    ``det D det(A - B D^{-1} C)``.
    """
    a, b, c, d = m.alpha, m.beta, m.gamma, m.delta
    try:
        if m.p == 0:
            return np.linalg.det(d) if d.size else 1.0
        if m.q == 0:
            return np.linalg.det(a)
        schur = d - c @ solve(a, b, "block A")
        return np.linalg.det(a) * (np.linalg.det(schur) if schur.size else 1.0)
    except SingularMatrix:
        pass
    try:
        schur = a - b @ solve(d, c, "block D")
        return np.linalg.det(d) * np.linalg.det(schur)
    except SingularMatrix:
        raise BothBlocksSingular("neither diagonal block is invertible") from None


def _check_chart(g, t):
    t = np.asarray(t)
    if t.shape != (g.p, g.q):
        raise SizeMismatch(f"T must be {g.p}x{g.q}, got {t.shape}")
    return t


def moebius(g, t):
    """Linear-fractional action ``T -> (alpha + T gamma)^{-1} (beta + T delta)``.

    Satisfies ``moebius(g @ h, T) == moebius(h, moebius(g, T))``.
    """
    t = _check_chart(g, t)
    return solve(g.alpha + t @ g.gamma, g.beta + t @ g.delta, "alpha + T gamma")


def moebius_jacobian(g, t):
    """Jacobian determinant ``det(alpha + T gamma)^{-p-q} det(g)^p`` of :func:`moebius`.

    The map is viewed as a map of the real ``p*q``-dimensional space of
    ``T`` (or complex, for complex entries), and the value is the signed
    determinant of its differential.
    """
    t = _check_chart(g, t)
    a = g.alpha + t @ g.gamma
    _check_cond(a, "alpha + T gamma")
    return np.linalg.det(a) ** (-(g.p + g.q)) * np.linalg.det(g.matrix) ** g.p


def numerical_jacobian_det(fun, t, initial_step=1e-2):
    """Finite-difference Jacobian determinant of ``fun`` at the real matrix ``t``.

    Uses :func:`scipy.differentiate.jacobian` (adaptive central differences
    with Richardson refinement).  Keep ``initial_step`` below the distance
    from ``t`` to any pole of ``fun``.
    """
    t = np.asarray(t, dtype=float)
    shape = t.shape

    def flat_fun(x):
        cols = x.reshape(x.shape[0], -1)
        out = np.stack([np.asarray(fun(cols[:, i].reshape(shape))).ravel() for i in range(cols.shape[1])], axis=-1)
        return out.reshape((-1,) + x.shape[1:])

    res = differentiate.jacobian(flat_fun, t.ravel(), initial_step=initial_step)
    return float(np.linalg.det(res.df))


@dataclass(frozen=True)
class LieBasis:
    """Basis of a matrix Lie algebra (tangent space at the identity)."""

    basis: tuple
    tol: float = 1e-9
    _flat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mats = tuple(np.asarray(b, dtype=float) for b in self.basis)
        if not mats:
            raise ValueError("empty Lie basis")
        n = mats[0].shape[0]
        if any(b.shape != (n, n) for b in mats):
            raise SizeMismatch("basis matrices must share one square shape")
        flat = np.stack([b.ravel() for b in mats], axis=1)
        if np.linalg.matrix_rank(flat) != len(mats):
            raise ValueError("basis elements are linearly dependent")
        object.__setattr__(self, "basis", mats)
        object.__setattr__(self, "_flat", flat)

    @property
    def n(self):
        return self.basis[0].shape[0]

    def coordinates(self, x):
        """Coefficients of ``x`` in the basis; raises if ``x`` is off the span."""
        coef, *_ = np.linalg.lstsq(self._flat, np.asarray(x).ravel(), rcond=None)
        resid = np.max(np.abs(self._flat @ coef - np.asarray(x).ravel()))
        scale = max(1.0, np.max(np.abs(x)))
        if resid > self.tol * scale:
            raise NotInvariant(f"element leaves the span (residual {resid:.3g})")
        return coef


def modular_character(basis, g):
    """``|det Ad(g)|`` on the Lie algebra spanned by ``basis``."""
    g = np.asarray(g, dtype=float)
    g_inv = inverse(g, "g")
    ad = np.stack([basis.coordinates(g @ x @ g_inv) for x in basis.basis], axis=1)
    return float(abs(np.linalg.det(ad)))


def rank_one_reflection(v, phase):
    """Unitary ``x -> x + (e^{i phase} - 1) <x, v> v`` for a unit vector ``v``.

    The inner product is linear in the first slot, so the matrix is
    ``I + (e^{i phase} - 1) v v^*`` acting on column vectors.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.eye(v.size, dtype=complex) + (np.exp(1j * phase) - 1) * np.outer(v, v.conj())


@dataclass(frozen=True)
class Colligation:
    """Unitary ``(n + m) x (n + m)`` matrix ``[[a, b], [c, d]]`` with inner size ``n``."""

    matrix: np.ndarray
    n: int
    tol: float = 1e-10

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or not 0 <= self.n <= m.shape[0]:
            raise SizeMismatch("colligation needs a square matrix and 0 <= n <= size")
        if m.size and not is_unitary(m, self.tol):
            raise ValueError(f"colligation matrix is not unitary (residual {unitarity_residual(m):.3g})")
        object.__setattr__(self, "matrix", m)

    @property
    def m(self):
        return self.matrix.shape[0] - self.n

    @property
    def split(self):
        return BlockSplit(self.matrix, self.n)

    def conjugate(self, u):
        """Representative ``diag(1, u) g diag(1, u)^{-1}`` of the same class."""
        w = np.eye(self.n + self.m, dtype=complex)
        w[self.n :, self.n :] = u
        return Colligation(w @ self.matrix @ w.conj().T, self.n, self.tol)


def identity_colligation(n):
    return Colligation(np.eye(n, dtype=complex), n)


def colligation_char(c, lam):
    """Characteristic function ``a + lam b (1 - lam d)^{-1} c``."""
    s = c.split
    if c.m == 0:
        return s.alpha.copy()
    core = np.eye(c.m) - lam * s.delta
    return s.alpha + lam * s.beta @ solve(core, s.gamma, "1 - lam d")


def colligation_product(c1, c2):
    """Block product ``[[ap, b, aq], [cp, d, cq], [r, 0, t]]`` of two colligations.

    The coupling spaces add up (``m1 + m2``) and the characteristic
    functions multiply: ``chi_{c1 c2} = chi_{c1} chi_{c2}``.
    """
    if c1.n != c2.n:
        raise SizeMismatch(f"inner sizes differ: {c1.n} vs {c2.n}")
    n, m1, m2 = c1.n, c1.m, c2.m
    s1, s2 = c1.split, c2.split
    a, b, c, d = s1.alpha, s1.beta, s1.gamma, s1.delta
    p, q, r, t = s2.alpha, s2.beta, s2.gamma, s2.delta
    out = np.zeros((n + m1 + m2,) * 2, dtype=complex)
    i0, i1 = slice(0, n), slice(n, n + m1)
    i2 = slice(n + m1, n + m1 + m2)
    out[i0, i0] = a @ p
    out[i0, i1] = b
    out[i0, i2] = a @ q
    out[i1, i0] = c @ p
    out[i1, i1] = d
    out[i1, i2] = c @ q
    out[i2, i0] = r
    out[i2, i2] = t
    return Colligation(out, n, max(c1.tol, c2.tol))
