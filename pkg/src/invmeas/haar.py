"""Haar measure on the classical compact groups, the Grassmannian, the
truncation map between unitary groups and Hua weights.

Two independent samplers are provided for every group:

* :func:`sample_haar` multiplies reflections ``S_1 S_2 ... S_n`` where
  ``S_j`` sends the basis vector ``e_j`` to a uniform point of the unit
  sphere of the first ``j`` coordinates (real, complex or quaternionic).
  Uniform spheres in every factor give exactly the Haar measure.
* :func:`sample_haar_qr_oracle` orthonormalises a Gaussian matrix
  (Householder QR with phase fix for O/U, quaternionic Gram-Schmidt for
  Sp) and exists to cross-check the first.

Compact symplectic matrices are stored as ``2n x 2n`` complex matrices of
the shape ``[[P, Q], [-conj(Q), conj(P)]]``; a quaternionic column vector
``a + b j`` (``a, b`` in ``C^n``) is the ``2n x 2`` frame
``[[a, b], [-conj(b), conj(a)]]``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import BranchViolation, DegeneratePair, DomainError, SingularMatrix, SizeMismatch
from .linalg import COND_LIMIT
from .rng import as_generator

__all__ = [
    "FAMILIES",
    "GroupKind",
    "GrassCoord",
    "matrix_size",
    "in_group_residual",
    "reflection_to",
    "frame_reflection",
    "sample_haar",
    "sample_haar_qr_oracle",
    "sample_grassmann",
    "grassmann_weight",
    "truncate_unitary",
    "hua_weight",
    "hua_integral",
    "quaternion_frame",
]

FAMILIES = ("O", "SO", "U", "Sp")
_DEGENERATE = 1e-12


@dataclass(frozen=True)
class GroupKind:
    """Classical compact group: ``O(n)``, ``SO(n)``, ``U(n)`` or compact ``Sp(n)``."""

    family: str
    n: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.n < 1:
            raise ValueError("rank parameter n must be >= 1")

    @property
    def size(self):
        return 2 * self.n if self.family == "Sp" else self.n

    @property
    def is_real(self):
        return self.family in ("O", "SO")

    def __str__(self):
        return f"{self.family}({self.n})"


def matrix_size(kind):
    return kind.size


def _sp_structure_residual(g):
    n = g.shape[-1] // 2
    p, q = g[..., :n, :n], g[..., :n, n:]
    r, s = g[..., n:, :n], g[..., n:, n:]
    return max(np.max(np.abs(r + q.conj())), np.max(np.abs(s - p.conj())))


def in_group_residual(kind, g):
    """Largest violation of the defining equations of ``kind`` by ``g``."""
    g = np.asarray(g)
    eye = np.eye(g.shape[-1])
    res = np.max(np.abs(np.swapaxes(g.conj(), -1, -2) @ g - eye))
    if kind.is_real:
        res = max(res, np.max(np.abs(g.imag))) if np.iscomplexobj(g) else res
    if kind.family == "SO":
        res = max(res, np.max(np.abs(np.linalg.det(g) - 1)))
    if kind.family == "Sp":
        res = max(res, _sp_structure_residual(g))
    return float(res)


def frame_reflection(x, y):
    """Unitary ``I + W (Y^* X - I)^{-1} W^*`` with ``W = Y - X``.

    ``x`` and ``y`` are orthonormal ``N x k`` frames (``k = 1`` for real or
    complex vectors, ``k = 2`` for embedded quaternionic vectors); the
    result maps ``x`` to ``y`` and differs from the identity on the span
    of ``W`` only.  Leading batch axes of ``y`` are broadcast.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    w = y - x
    wh = np.swapaxes(w.conj(), -1, -2)
    xh = np.swapaxes(x.conj(), -1, -2)
    # Y^* X - I = W^* X, split into its Hermitian part -W^* W / 2 (exact for
    # orthonormal frames) and anti-Hermitian part; avoids cancellation near x
    a = -0.5 * (wh @ w) + 0.5 * (wh @ x - xh @ w)
    if np.any(np.linalg.norm(w, axis=(-2, -1)) < _DEGENERATE):
        raise DegeneratePair("source and target coincide")
    core = np.linalg.inv(a)
    return np.eye(x.shape[-2]) + w @ core @ wh


def reflection_to(x, y):
    """The unique reflection (unitary with ``rank(S - I) = 1``) with ``S x = y``.

    Explicitly ``S = I + (y - x)(y - x)^* / (<x, y> - 1)`` where
    ``<x, y> = y^* x``; for real vectors this is the Householder matrix
    ``I - 2 v v^t`` with ``v`` along ``y - x``.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise SizeMismatch("x and y must be vectors of one length")
    for name, v in (("x", x), ("y", y)):
        if abs(np.linalg.norm(v) - 1) > 1e-12:
            raise DomainError(f"{name} is not a unit vector")
    if np.linalg.norm(x - y) < _DEGENERATE:
        raise DegeneratePair("x == y: the identity is not a reflection")
    s = frame_reflection(x[:, None], y[:, None])
    if np.isrealobj(x) and np.isrealobj(y):
        s = s.real
    return s


def _sphere(gen, shape, dim, field):
    """Uniform points of the unit sphere of ``field^dim``, shape ``shape + (dim,)``."""
    if field == "R":
        v = gen.standard_normal(shape + (dim,))
    elif field == "C":
        v = gen.standard_normal(shape + (dim,)) + 1j * gen.standard_normal(shape + (dim,))
    elif field == "H":
        v = gen.standard_normal(shape + (2 * dim,)) + 1j * gen.standard_normal(shape + (2 * dim,))
    else:
        raise ValueError(field)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def quaternion_frame(a, b):
    """Embed quaternionic column vectors ``a + b j`` as ``2n x 2`` complex frames."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    top = np.stack([a, b], axis=-1)
    bottom = np.stack([-b.conj(), a.conj()], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _basis_frame(kind, j):
    size = kind.size
    if kind.family == "Sp":
        x = np.zeros((size, 2), dtype=complex)
        x[j, 0] = 1
        x[kind.n + j, 1] = 1
        return x
    x = np.zeros((size, 1), dtype=float if kind.is_real else complex)
    x[j, 0] = 1
    return x


def _target_frames(kind, gen, batch, j):
    """Uniform targets for ``e_j`` (0-based ``j``) in the first ``j + 1`` coordinates."""
    n, size = kind.n, kind.size
    if kind.family == "Sp":
        v = _sphere(gen, (batch,), j + 1, "H")
        a = np.zeros((batch, n), dtype=complex)
        b = np.zeros((batch, n), dtype=complex)
        a[:, : j + 1] = v[:, : j + 1]
        b[:, : j + 1] = v[:, j + 1 :]
        return quaternion_frame(a, b)
    field = "R" if kind.is_real else "C"
    y = np.zeros((batch, size), dtype=float if field == "R" else complex)
    y[:, : j + 1] = _sphere(gen, (batch,), j + 1, field)
    return y[..., None]


def _reflection_factor(kind, gen, batch, j):
    x = _basis_frame(kind, j)
    y = _target_frames(kind, gen, batch, j)
    # resample the measure-zero draws that hit e_j itself
    while True:
        bad = np.linalg.norm(y - x, axis=(-2, -1)) < 1e-9
        if not bad.any():
            break
        y[bad] = _target_frames(kind, gen, int(bad.sum()), j)
    return frame_reflection(x, y)


def sample_haar(kind, rng, size=None):
    """Haar-distributed element(s) of ``kind`` as a product of reflections.

    Returns an array of shape ``(N, N)`` or ``(size, N, N)`` with
    ``N = kind.size``.  For ``SO(n)`` the draw from ``O(n)`` is multiplied
    on the right by ``diag(1, ..., 1, -1)`` whenever its determinant is -1.
    """
    gen = as_generator(rng)
    batch = 1 if size is None else int(size)
    dim = kind.size
    dtype = float if kind.is_real else complex
    g = np.broadcast_to(np.eye(dim, dtype=dtype), (batch, dim, dim)).copy()
    sign = np.ones(batch)
    for j in range(kind.n):
        if kind.is_real and j == 0:
            # S^0 = {+1, -1}; the "reflection" of e_1 is diag(+-1, 1, ...)
            s1 = np.where(gen.random(batch) < 0.5, -1.0, 1.0)
            g[:, 0, :] *= s1[:, None]
            sign *= s1
            continue
        s = _reflection_factor(kind, gen, batch, j)
        if kind.is_real:
            s = s.real
            sign = -sign
        g = g @ s
    if kind.family == "SO":
        g[sign < 0, :, -1] *= -1
    return g[0] if size is None else g


def _quaternionic_gram_schmidt(z, n):
    """Orthonormalise the ``n`` quaternionic columns of embedded matrices ``z``."""
    cols = [z[..., [j, n + j]] for j in range(n)]
    out = []
    for v in cols:
        for q in out:
            v = v - q @ (np.swapaxes(q.conj(), -1, -2) @ v)
        norm2 = np.real(np.swapaxes(v.conj(), -1, -2) @ v)[..., 0, 0]
        out.append(v / np.sqrt(norm2)[..., None, None])
    g = np.empty_like(z)
    for j, q in enumerate(out):
        g[..., :, j] = q[..., 0]
        g[..., :, n + j] = q[..., 1]
    return g


def sample_haar_qr_oracle(kind, rng, size=None):
    """Independent Haar sampler: orthonormalised Gaussian matrix with phase fix."""
    gen = as_generator(rng)
    batch = 1 if size is None else int(size)
    n = kind.n
    if kind.family == "Sp":
        a = gen.standard_normal((batch, n, n)) + 1j * gen.standard_normal((batch, n, n))
        b = gen.standard_normal((batch, n, n)) + 1j * gen.standard_normal((batch, n, n))
        z = np.block([[a, b], [-b.conj(), a.conj()]])
        g = _quaternionic_gram_schmidt(z, n)
    else:
        if kind.is_real:
            z = gen.standard_normal((batch, n, n))
        else:
            z = gen.standard_normal((batch, n, n)) + 1j * gen.standard_normal((batch, n, n))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        g = q * (d / np.abs(d))[:, None, :]
        if kind.family == "SO":
            neg = np.linalg.det(g) < 0
            g[neg, :, -1] *= -1
    return g[0] if size is None else g


@dataclass(frozen=True)
class GrassCoord:
    """Graph coordinate ``T`` (``p x q``, possibly batched) of a ``p``-plane in ``R^{p+q}``."""

    p: int
    q: int
    T: np.ndarray


def sample_grassmann(p, q, rng, size=None):
    """Graph coordinate of the span of the first ``p`` rows of a Haar ``O(p+q)`` element.

    The rows ``[X Y]`` span ``{(x, x X^{-1} Y)}``, so ``T = X^{-1} Y``; its
    law has density proportional to ``det(1 + T T^t)^{-(p+q)/2}``.
    """
    gen = as_generator(rng)
    batch = 1 if size is None else int(size)
    g = sample_haar(GroupKind("O", p + q), gen, batch)
    x, y = g[:, :p, :p], g[:, :p, p:]
    bad = np.linalg.cond(x) >= COND_LIMIT
    while bad.any():
        g2 = sample_haar(GroupKind("O", p + q), gen, int(bad.sum()))
        x[bad], y[bad] = g2[:, :p, :p], g2[:, :p, p:]
        bad = np.linalg.cond(x) >= COND_LIMIT
    t = np.linalg.solve(x, y)
    return GrassCoord(p, q, t[0] if size is None else t)


def grassmann_weight(t):
    """Unnormalised invariant density ``det(1 + T T^t)^{-(p+q)/2}``."""
    t = np.asarray(t, dtype=float)
    p, q = t.shape[-2:]
    gram = np.eye(p) + t @ np.swapaxes(t, -1, -2)
    return np.linalg.det(gram) ** (-(p + q) / 2)


def truncate_unitary(g, n):
    """Truncation ``alpha - beta (1 + delta)^{-1} gamma`` of ``U(n+m)`` onto ``U(n)``.

    Accepts a single matrix or a stack.  Raises :class:`SingularMatrix`
    when ``-1`` is (numerically) an eigenvalue of ``delta``.
    """
    g = np.asarray(g)
    size = g.shape[-1]
    if not 0 < n <= size:
        raise SizeMismatch(f"cannot truncate size {size} to {n}")
    if n == size:
        return g.copy()
    a, b = g[..., :n, :n], g[..., :n, n:]
    c, d = g[..., n:, :n], g[..., n:, n:]
    core = np.eye(size - n) + d
    cond = np.linalg.cond(core)
    if np.any(~np.isfinite(cond) | (cond >= COND_LIMIT)):
        raise SingularMatrix("-1 is an eigenvalue of the lower-right block")
    return a - b @ np.linalg.solve(core, c)


def hua_weight(g, lam, mu, tol=1e-12):
    """Hua weight ``det(1 + g)^lam det(1 + g^{-1})^mu`` for real exponents.

    Evaluated through eigenphases as
    ``exp(lam sum Log(1 + e^{i phi}) + mu sum Log(1 + e^{-i phi}))`` with
    the principal logarithm; real and non-negative when ``lam == mu``.
    Works on a stack of unitaries.
    """
    lam, mu = float(lam), float(mu)
    if lam + mu <= -1:
        raise DomainError("Hua weight needs lam + mu > -1")
    z = np.linalg.eigvals(np.asarray(g))
    z = z / np.abs(z)
    if np.any(np.abs(1 + z) < tol):
        raise BranchViolation("eigenvalue -1 sits on the branch cut")
    logs = lam * np.log(1 + z) + mu * np.log(1 + z.conj())
    val = np.exp(np.sum(logs, axis=-1))
    return val.real if lam == mu else val


def hua_integral(n, lam, mu):
    """``prod_{k=1}^n Gamma(k) Gamma(lam+mu+k) / (Gamma(lam+k) Gamma(mu+k))``."""
    k = np.arange(1, n + 1)
    return float(np.exp(np.sum(gammaln(k) + gammaln(lam + mu + k) - gammaln(lam + k) - gammaln(mu + k))))
