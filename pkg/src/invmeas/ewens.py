"""Ewens measures on symmetric groups and the projection ``S_n -> S_{n-1}``.

Permutations are stored 0-based in one-line notation; the constructors
:meth:`Permutation.from_one_line` and :meth:`Permutation.from_cycles`
and the cycle printer use the usual 1-based labels.  Composition is
``(tau sigma)(i) = tau(sigma(i))``.

Exact checks take ``t`` as an ``int`` or :class:`fractions.Fraction` and
never round; floats give floating-point weights.
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial, prod

import numpy as np

from .errors import DomainError, SizeMismatch
from .rng import as_generator

__all__ = [
    "Permutation",
    "PushforwardReport",
    "identity",
    "all_permutations",
    "project",
    "project_by_cycles",
    "rising",
    "ewens_weight",
    "crp_extend",
    "crp_sample",
    "cycle_counts",
    "expected_cycles",
    "pushforward_exact_check",
    "left_action_rn",
    "weight_ratio",
    "virtual_prefix",
    "is_virtual_prefix",
]


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``{0, ..., n-1}``; ``images[i]`` is the image of ``i``."""

    images: tuple

    def __post_init__(self):
        imgs = tuple(int(v) for v in self.images)
        if sorted(imgs) != list(range(len(imgs))):
            raise DomainError(f"{imgs} is not a permutation")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def from_one_line(cls, values):
        """From 1-based one-line notation, e.g. ``[2, 1, 3]``."""
        return cls(tuple(int(v) - 1 for v in values))

    @classmethod
    def from_cycles(cls, cycles, n):
        """From 1-based cycles, e.g. ``[(1, 7, 5, 8, 4), (2, 3, 6)]``."""
        imgs = list(range(n))
        for cyc in cycles:
            cyc = [int(v) - 1 for v in cyc]
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                imgs[a] = b
        return cls(tuple(imgs))

    @property
    def n(self):
        return len(self.images)

    def __call__(self, i):
        return self.images[i]

    def __mul__(self, other):
        if other.n != self.n:
            raise SizeMismatch("permutations of different degrees")
        return Permutation(tuple(self.images[j] for j in other.images))

    def inverse(self):
        inv = [0] * self.n
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def embed(self, n):
        """The same permutation inside ``S_n`` (fixing the new points)."""
        if n < self.n:
            raise SizeMismatch("cannot embed into a smaller symmetric group")
        return Permutation(self.images + tuple(range(self.n, n)))

    def cycles(self):
        """Canonical 1-based cycles: each led by its minimum, sorted by leader."""
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = []
            i = start
            while not seen[i]:
                seen[i] = True
                cyc.append(i + 1)
                i = self.images[i]
            out.append(tuple(cyc))
        return out

    def num_cycles(self):
        return len(self.cycles())

    def one_line(self):
        return [i + 1 for i in self.images]

    def __str__(self):
        return "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles())


def identity(n):
    return Permutation(tuple(range(n)))


def all_permutations(n):
    return [Permutation(p) for p in permutations(range(n))]


def project(sigma):
    """Projection ``S_n -> S_{n-1}`` by the one-line rule.

    For ``i < n``: the image is ``sigma(i)`` unless ``sigma(i) = n``, in
    which case it is ``sigma(n)`` (labels 1-based).
    """
    n = sigma.n
    if n < 2:
        raise DomainError("projection needs n >= 2")
    last = n - 1
    s = sigma.images
    return Permutation(tuple(s[last] if s[i] == last else s[i] for i in range(last)))


def project_by_cycles(sigma):
    """Projection by deleting the largest label from the cycle notation."""
    n = sigma.n
    if n < 2:
        raise DomainError("projection needs n >= 2")
    cycles = [tuple(v for v in c if v != n) for c in sigma.cycles()]
    return Permutation.from_cycles([c for c in cycles if c], n - 1)


def rising(t, n):
    """Rising factorial ``t (t+1) ... (t+n-1)``."""
    return prod((t + k for k in range(n)), start=Fraction(1) if _exact(t) else 1.0)


def _exact(t):
    return isinstance(t, (int, Fraction)) and not isinstance(t, bool)


def _check_t(t):
    if not t > 0:
        raise DomainError("Ewens parameter t must be positive")
    return Fraction(t) if _exact(t) else float(t)


def ewens_weight(sigma, t):
    """``t^{#cycles} / (t (t+1) ... (t+n-1))``; exact for rational ``t``."""
    t = _check_t(t)
    return t ** sigma.num_cycles() / rising(t, sigma.n)


def weight_ratio(tau, sigma, t):
    """Direct ratio ``mu_t(tau sigma) / mu_t(sigma)`` with ``tau`` embedded."""
    tau = tau.embed(sigma.n)
    return ewens_weight(tau * sigma, t) / ewens_weight(sigma, t)


def left_action_rn(tau, sigma, t):
    """``t^{c(tau sigma) - c(sigma)}``, the density of the left shift by ``tau``."""
    t = _check_t(t)
    tau = tau.embed(sigma.n)
    return t ** ((tau * sigma).num_cycles() - sigma.num_cycles())


def crp_extend(sigma, t, rng):
    """One restaurant step ``S_m -> S_{m+1}`` whose projection returns ``sigma``.

    With probability ``t / (t + m)`` the new element opens its own cycle;
    otherwise it is inserted after a uniformly chosen element ``j``.
    """
    t = float(_check_t(t))
    gen = as_generator(rng)
    m = sigma.n
    imgs = list(sigma.images) + [m]
    if gen.random() >= t / (t + m):
        j = int(gen.integers(0, m))
        imgs[m] = imgs[j]
        imgs[j] = m
    return Permutation(tuple(imgs))


def crp_sample(n, t, rng, size):
    """``size`` independent Ewens(``t``) permutations of ``S_n`` as a ``(size, n)`` array.

    Rows are 0-based one-line images built by the restaurant process.
    """
    t = float(_check_t(t))
    gen = as_generator(rng)
    imgs = np.zeros((size, n), dtype=np.int64)
    rows = np.arange(size)
    for m in range(1, n):
        imgs[:, m] = m
        join = gen.random(size) >= t / (t + m)
        j = gen.integers(0, m, size=size)
        r, jj = rows[join], j[join]
        imgs[r, m] = imgs[r, jj]
        imgs[r, jj] = m
    return imgs


def cycle_counts(images):
    """Number of cycles of each row of a ``(size, n)`` one-line array."""
    images = np.atleast_2d(np.asarray(images))
    size, n = images.shape
    if n == 0:
        return np.zeros(size, dtype=np.int64)
    start = np.broadcast_to(np.arange(n), (size, n))
    x = start.copy()
    length = np.zeros((size, n), dtype=np.int64)
    for k in range(1, n + 1):
        x = np.take_along_axis(images, x, axis=1)
        hit = (x == start) & (length == 0)
        length[hit] = k
    return np.rint(np.sum(1.0 / length, axis=1)).astype(np.int64)


def expected_cycles(n, t):
    """``E #cycles = sum_{m=0}^{n-1} t / (t + m)``."""
    return sum(t / (t + m) for m in range(n))


@dataclass(frozen=True)
class PushforwardReport:
    n: int
    t: object
    targets: int
    exact: bool
    max_error: float

    @property
    def passed(self):
        return self.exact if _exact(self.t) else self.max_error < 1e-12


def pushforward_exact_check(n, t, limit=8):
    """Check that projecting Ewens(``t``) on ``S_{n+1}`` gives Ewens(``t``) on ``S_n``.

    Every ``sigma`` in ``S_{n+1}`` is enumerated; the preimage masses of each
    ``tau`` in ``S_n`` are compared with ``ewens_weight(tau, t)``.  Exact
    rational arithmetic is used when ``t`` is an ``int`` or ``Fraction``.
    """
    if not 1 <= n <= limit:
        raise DomainError(f"enumeration is limited to 1 <= n <= {limit}")
    t = _check_t(t)
    # preimage cycle-count profile of every target
    profile = {}
    for sigma in all_permutations(n + 1):
        tau = project(sigma).images
        profile.setdefault(tau, Counter())[sigma.num_cycles()] += 1
    denom = rising(t, n + 1)
    worst = 0.0
    exact = True
    for tau, counts in profile.items():
        lhs = sum(c * t**k for k, c in counts.items()) / denom
        rhs = ewens_weight(Permutation(tau), t)
        if lhs != rhs:
            exact = False
        worst = max(worst, abs(float(lhs - rhs)))
    exact = exact and len(profile) == factorial(n)
    return PushforwardReport(n, t, len(profile), exact, worst)


def virtual_prefix(sigma):
    """The chain ``sigma_1, ..., sigma_n`` of successive projections ending at ``sigma``."""
    chain = [sigma]
    while chain[-1].n > 1:
        chain.append(project(chain[-1]))
    return chain[::-1]


def is_virtual_prefix(chain):
    return all(c.n == k + 1 for k, c in enumerate(chain)) and all(
        project(b) == a for a, b in zip(chain, chain[1:])
    )
