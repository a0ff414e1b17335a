"""Polymorphisms of finite probability spaces and their Markov operators.

A polymorphism from ``(M, mu)`` to ``(N, nu)`` is a joint probability
matrix ``sigma`` (``m x n``) with row sums ``mu`` and column sums ``nu``.
Its Markov operator ``T: L^2(M) -> L^2(N)`` is

    ``(T f)(n) = sum_m sigma[m, n] f(m) / nu[n]``,

stored as an ``n x m`` matrix, so that ``<T f, g>_nu = sum sigma f g``.
Composition ``Pol(M, N) x Pol(N, K) -> Pol(M, K)`` is
``sigma diag(nu)^{-1} tau`` and turns into the operator product
``T(tau) T(sigma)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MarginalViolation, NotRational, SizeMismatch, SpaceMismatch

__all__ = [
    "FiniteSpace",
    "FinitePolymorphism",
    "MarkovOp",
    "uniform_space",
    "to_markov",
    "from_markov",
    "compose",
    "adjoint",
    "identity_polymorphism",
    "product_polymorphism",
    "map_graph",
    "approximate_by_permutation",
    "induced_polymorphism",
]

_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """Atoms ``0..m-1`` with strictly positive weights summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(w <= 0):
            raise MarginalViolation("weights must be strictly positive")
        if abs(w.sum() - 1) > _TOL:
            raise MarginalViolation(f"weights sum to {w.sum():.15g}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def size(self):
        return self.weights.size

    def same_as(self, other, tol=_TOL):
        return self.size == other.size and bool(np.max(np.abs(self.weights - other.weights)) <= tol)

    def inner(self, f, g):
        """``<f, g> = sum mu f conj(g)``."""
        return np.sum(self.weights * np.asarray(f) * np.conj(np.asarray(g)))


def uniform_space(m):
    return FiniteSpace(np.full(m, 1.0 / m))


@dataclass(frozen=True, eq=False)
class FinitePolymorphism:
    source: FiniteSpace
    target: FiniteSpace
    joint: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.joint, dtype=float)
        if j.shape != (self.source.size, self.target.size):
            raise SizeMismatch(f"joint must be {self.source.size}x{self.target.size}")
        if np.any(j < -_TOL):
            raise MarginalViolation("joint has negative entries")
        if np.max(np.abs(j.sum(axis=1) - self.source.weights)) > _TOL:
            raise MarginalViolation("row sums differ from the source weights")
        if np.max(np.abs(j.sum(axis=0) - self.target.weights)) > _TOL:
            raise MarginalViolation("column sums differ from the target weights")
        object.__setattr__(self, "joint", j)

    def to_json(self):
        return {"mu": self.source.weights.tolist(), "nu": self.target.weights.tolist(), "joint": self.joint.tolist()}

    @classmethod
    def from_json(cls, data):
        return cls(FiniteSpace(data["mu"]), FiniteSpace(data["nu"]), np.asarray(data["joint"], dtype=float))


@dataclass(frozen=True, eq=False)
class MarkovOp:
    """Matrix ``T`` (``n x m``) acting ``L^2(M, mu) -> L^2(N, nu)``."""

    matrix: np.ndarray
    source: FiniteSpace
    target: FiniteSpace

    def __post_init__(self):
        t = np.asarray(self.matrix, dtype=float)
        if t.shape != (self.target.size, self.source.size):
            raise SizeMismatch("Markov matrix shape does not match the spaces")
        object.__setattr__(self, "matrix", t)

    def __call__(self, f):
        return self.matrix @ np.asarray(f)

    def adjoint(self):
        """``T^*`` with respect to the weighted inner products."""
        mu, nu = self.source.weights, self.target.weights
        return MarkovOp(self.matrix.T * nu[None, :] / mu[:, None], self.target, self.source)

    def norm(self):
        """Operator norm ``L^2(mu) -> L^2(nu)``."""
        mu, nu = self.source.weights, self.target.weights
        return float(np.linalg.norm(np.sqrt(nu)[:, None] * self.matrix / np.sqrt(mu)[None, :], 2))

    def markov_residual(self):
        """Largest violation of ``T >= 0``, ``T 1 = 1`` and ``T^* 1 = 1``."""
        t = self.matrix
        neg = max(0.0, -float(t.min()))
        ones = float(np.max(np.abs(t.sum(axis=1) - 1)))
        adj = float(np.max(np.abs(self.target.weights @ t - self.source.weights)))
        return max(neg, ones, adj)

    def __matmul__(self, other):
        """``self after other``."""
        if not other.target.same_as(self.source):
            raise SpaceMismatch("operators do not chain")
        return MarkovOp(self.matrix @ other.matrix, other.source, self.target)


def to_markov(sigma):
    t = sigma.joint.T / sigma.target.weights[:, None]
    return MarkovOp(t, sigma.source, sigma.target)


def from_markov(op, mu=None, nu=None, tol=1e-12):
    """Polymorphism ``sigma[m, n] = T[n, m] nu[n]``.

    Raises :class:`MarginalViolation` unless ``T >= 0``, ``T 1 = 1`` and
    ``nu^t T = mu^t`` hold within ``tol``.
    """
    mu = op.source if mu is None else (mu if isinstance(mu, FiniteSpace) else FiniteSpace(mu))
    nu = op.target if nu is None else (nu if isinstance(nu, FiniteSpace) else FiniteSpace(nu))
    op = MarkovOp(op.matrix, mu, nu)
    if op.markov_residual() > tol:
        raise MarginalViolation(f"not a Markov operator (residual {op.markov_residual():.3g})")
    joint = np.clip(op.matrix.T * nu.weights[None, :], 0.0, None)
    return FinitePolymorphism(mu, nu, joint)


def compose(sigma, tau):
    """``sigma`` then ``tau``: joint ``sigma diag(nu)^{-1} tau`` on ``M x K``."""
    if not sigma.target.same_as(tau.source):
        raise SpaceMismatch("target of the first polymorphism differs from the source of the second")
    joint = sigma.joint @ (tau.joint / sigma.target.weights[:, None])
    return FinitePolymorphism(sigma.source, tau.target, joint)


def adjoint(sigma):
    return FinitePolymorphism(sigma.target, sigma.source, sigma.joint.T.copy())


def identity_polymorphism(space):
    return FinitePolymorphism(space, space, np.diag(space.weights))


def product_polymorphism(mu, nu):
    return FinitePolymorphism(mu, nu, np.outer(mu.weights, nu.weights))


def map_graph(images, mu, nu=None):
    """Polymorphism concentrated on the graph of ``m -> images[m]``.

    ``nu`` defaults to the push-forward of ``mu``.
    """
    images = np.asarray(images, dtype=int)
    if images.size != mu.size:
        raise SizeMismatch("one image per source atom is required")
    size = nu.size if nu is not None else int(images.max()) + 1
    joint = np.zeros((mu.size, size))
    joint[np.arange(mu.size), images] = mu.weights
    target = nu if nu is not None else FiniteSpace(joint.sum(axis=0))
    return FinitePolymorphism(mu, target, joint)


def approximate_by_permutation(sigma, refinement, tol=1e-9):
    """Permutation of ``m L`` sub-atoms inducing ``sigma`` exactly.

    Both marginals must be uniform on ``m`` atoms and ``sigma[i, j] m L``
    must be an integer ``c_ij``.  Sub-atom ``(i, s)`` is the index ``i L + s``;
    the first ``c_i0`` sub-atoms of ``i`` go to column 0, the next ``c_i1``
    to column 1 and so on, filling the target sub-atoms of each column
    in order.
    """
    m = sigma.source.size
    big = int(refinement)
    if sigma.target.size != m or not (sigma.source.same_as(uniform_space(m)) and sigma.target.same_as(uniform_space(m))):
        raise MarginalViolation("refinement needs uniform marginals on equal spaces")
    scaled = sigma.joint * m * big
    counts = np.rint(scaled).astype(np.int64)
    if np.max(np.abs(scaled - counts)) > tol:
        raise NotRational(f"joint entries are not multiples of 1/({m}*{big})")
    images = np.empty(m * big, dtype=np.int64)
    filled = np.zeros(m, dtype=np.int64)
    for i in range(m):
        s = 0
        for j in range(m):
            c = int(counts[i, j])
            images[i * big + s : i * big + s + c] = j * big + filled[j] + np.arange(c)
            filled[j] += c
            s += c
    return images


def induced_polymorphism(images, m, refinement):
    """Coarse polymorphism of a permutation of ``m L`` equal sub-atoms."""
    images = np.asarray(images)
    big = int(refinement)
    counts = np.zeros((m, m), dtype=np.int64)
    np.add.at(counts, (np.arange(m * big) // big, images // big), 1)
    joint = counts / (m * big)
    space = uniform_space(m)
    return FinitePolymorphism(space, space, joint)
