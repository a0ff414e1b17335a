"""Poisson point processes on a finite window of the line.

A :class:`MeasureSpace1D` is an interval ``[a, b]`` with a non-negative
intensity density.  Configurations are drawn by first drawing the
Poisson(``mu(M)``) count and then placing that many independent points by
inverse-CDF sampling of the normalised density.

For an increasing smooth map ``g`` the Radon-Nikodym derivative of the
Poisson measure is ``exp(-sigma(g)) prod_j g'_mu(x_j)`` with
``g'_mu(x) = rho(g(x)) g'(x) / rho(x)`` and
``sigma(g) = int (g'_mu - 1) dmu``.  Weighting by it turns the
intensity ``rho`` into ``rho(g(x)) g'(x)``, the intensity of the
preimage configuration ``g^{-1}(omega)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, VarianceExplosion
from .rng import as_generator
from .stats import estimate

__all__ = [
    "MeasureSpace1D",
    "Configuration",
    "ConfigBatch",
    "TransformG",
    "integrate_density",
    "sample_poisson",
    "sample_batch",
    "campbell_mc",
    "campbell_mean_mc",
    "campbell_reference",
    "pairing_mc",
    "pairing_reference",
    "poisson_rn",
    "poisson_rn_batch",
    "restrict",
    "superpose",
    "CDF_NODES",
]

CDF_NODES = 2**14
_QUAD = dict(epsabs=1e-10, epsrel=1e-10, limit=200)


def integrate_density(fun, a, b):
    """``int_a^b fun`` by adaptive Gauss-Kronrod quadrature."""
    if b <= a:
        return 0.0
    val, _ = integrate.quad(lambda x: float(fun(np.array([x]))[0]), a, b, **_QUAD)
    return float(val)


@dataclass(frozen=True, eq=False)
class MeasureSpace1D:
    """Interval ``[a, b]`` with intensity ``density`` (vectorised callable)."""

    a: float
    b: float
    density: object
    label: str = "custom"
    params: dict = field(default_factory=dict)
    mass: float = field(init=False)
    _nodes: np.ndarray = field(init=False, repr=False)
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError("window must have b > a")
        nodes = np.linspace(self.a, self.b, CDF_NODES)
        rho = np.asarray(self.density(nodes), dtype=float)
        if np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise DomainError("density must be finite and non-negative")
        mass = integrate_density(self.density, self.a, self.b)
        cum = integrate.cumulative_trapezoid(rho, nodes, initial=0.0)
        cdf = cum / cum[-1] if cum[-1] > 0 else cum
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def uniform(cls, a=0.0, b=1.0, intensity=1.0):
        c = float(intensity)
        return cls(a, b, lambda x: np.full(np.shape(x), c), "uniform", {"a": a, "b": b, "intensity": c})

    @classmethod
    def exponential(cls, a=0.0, b=1.0, scale=1.0, rate=1.0):
        """Density ``scale * exp(-rate * x)``."""
        s, r = float(scale), float(rate)
        return cls(a, b, lambda x: s * np.exp(-r * np.asarray(x)), "exp", {"a": a, "b": b, "scale": s, "rate": r})

    @classmethod
    def polynomial(cls, a, b, coeffs):
        """Density ``sum_k coeffs[k] x^k`` (must be non-negative on the window)."""
        c = [float(v) for v in coeffs]
        poly = np.polynomial.Polynomial(c)
        return cls(a, b, lambda x: poly(np.asarray(x, dtype=float)), "polynomial", {"a": a, "b": b, "coeffs": c})

    @classmethod
    def from_config(cls, spec):
        """Build from ``{"family": "uniform"|"exp"|"polynomial", ...}``."""
        spec = dict(spec)
        family = spec.pop("family")
        if family == "uniform":
            return cls.uniform(**spec)
        if family == "exp":
            return cls.exponential(**spec)
        if family == "polynomial":
            return cls.polynomial(spec["a"], spec["b"], spec["coeffs"])
        raise DomainError(f"unknown density family {family!r}")

    def measure(self, lo, hi):
        """``mu([lo, hi])`` (clipped to the window)."""
        lo, hi = max(lo, self.a), min(hi, self.b)
        return integrate_density(self.density, lo, hi)

    def integral(self, h, lo=None, hi=None):
        """``int h dmu`` over ``[lo, hi]`` (default: the window)."""
        lo = self.a if lo is None else max(lo, self.a)
        hi = self.b if hi is None else min(hi, self.b)
        return integrate_density(lambda x: np.asarray(h(x)) * self.density(x), lo, hi)

    def restricted(self, lo, hi):
        return MeasureSpace1D(max(lo, self.a), min(hi, self.b), self.density, self.label, self.params)

    def place(self, gen, k):
        """``k`` independent points with density proportional to ``rho``."""
        u = gen.random(k)
        return np.interp(u, self._cdf, self._nodes)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Finite sorted point set inside the window ``[a, b]``."""

    points: np.ndarray
    a: float
    b: float

    def count(self, lo, hi):
        return int(np.sum((self.points >= lo) & (self.points < hi)))

    def __len__(self):
        return self.points.size


@dataclass(frozen=True, eq=False)
class ConfigBatch:
    """Many configurations stored flat: ``points[k]`` belongs to configuration ``owner[k]``."""

    points: np.ndarray
    owner: np.ndarray
    counts: np.ndarray
    a: float
    b: float

    @property
    def size(self):
        return self.counts.size

    def counts_in(self, lo, hi):
        hit = (self.points >= lo) & (self.points < hi)
        return np.bincount(self.owner[hit], minlength=self.size)

    def product(self, values):
        """``prod`` over each configuration of per-point ``values`` (1 when empty)."""
        out = np.ones(self.size, dtype=np.result_type(values, float))
        np.multiply.at(out, self.owner, values)
        return out

    def total(self, values):
        """Sum over each configuration of real per-point ``values``."""
        return np.bincount(self.owner, weights=values, minlength=self.size).astype(float)

    def configurations(self):
        cuts = np.cumsum(self.counts)[:-1]
        return [Configuration(np.sort(p), self.a, self.b) for p in np.split(self.points, cuts)]


def sample_batch(space, rng, size):
    """``size`` independent Poisson configurations on ``space``."""
    gen = as_generator(rng)
    counts = gen.poisson(space.mass, size=size) if space.mass > 0 else np.zeros(size, dtype=np.int64)
    total = int(counts.sum())
    points = space.place(gen, total)
    owner = np.repeat(np.arange(size), counts)
    return ConfigBatch(points, owner, counts, space.a, space.b)


def sample_poisson(space, rng):
    """One Poisson configuration with intensity ``space.density``."""
    return sample_batch(space, rng, 1).configurations()[0]


def campbell_reference(space, h):
    """``exp(int h dmu)``."""
    return float(np.exp(space.integral(h)))


def campbell_mc(space, h, samples, rng, guard=1e6):
    """Monte Carlo ``E prod_j (1 + h(x_j))``; compare with :func:`campbell_reference`.

    Raises :class:`VarianceExplosion` when the sample variance exceeds ``guard``.
    """
    batch = sample_batch(space, rng, samples)
    vals = batch.product(1 + np.asarray(h(batch.points), dtype=float))
    est = estimate(vals)
    var = est.stderr**2 * est.count
    if var > guard:
        raise VarianceExplosion(f"sample variance {var:.3g} exceeds guard {guard:.3g}")
    return est


def campbell_mean_mc(space, h, samples, rng):
    """Monte Carlo ``E sum_j h(x_j)``; the exact value is ``int h dmu``."""
    batch = sample_batch(space, rng, samples)
    return estimate(batch.total(np.asarray(h(batch.points), dtype=float)))


def pairing_reference(space, h, f):
    """``exp(int h conj(f) dmu)``."""
    re = space.integral(lambda x: np.real(np.asarray(h(x)) * np.conj(f(x))))
    im = space.integral(lambda x: np.imag(np.asarray(h(x)) * np.conj(f(x))))
    return complex(np.exp(re + 1j * im))


def pairing_mc(space, h, f, samples, rng, guard=1e4):
    """Monte Carlo ``E[Phi_h conj(Phi_f)]`` for the centred products.

    ``Phi_h(omega) = exp(-int h dmu) prod_j (1 + h(x_j))``; the exact value
    is :func:`pairing_reference`.  The estimator is heavy tailed when
    ``|h|`` or ``|f|`` approach 1, so the sample variance is guarded.
    """
    batch = sample_batch(space, rng, samples)
    hx = np.asarray(h(batch.points), dtype=complex)
    fx = np.asarray(f(batch.points), dtype=complex)
    shift = space.integral(lambda x: np.real(h(x))) + space.integral(lambda x: np.real(f(x)))
    shift_im = space.integral(lambda x: np.imag(h(x))) - space.integral(lambda x: np.imag(f(x)))
    vals = np.exp(-shift - 1j * shift_im) * batch.product((1 + hx) * np.conj(1 + fx))
    est = estimate(vals)
    var = est.stderr**2 * est.count
    if var > guard:
        raise VarianceExplosion(f"pairing variance {var:.3g} exceeds guard {guard:.3g}")
    return est


@dataclass(frozen=True, eq=False)
class TransformG:
    """Increasing smooth map ``func`` of the window with derivative ``deriv``."""

    space: MeasureSpace1D
    func: object
    deriv: object
    sigma: float = field(init=False)

    def __post_init__(self):
        grid = np.linspace(self.space.a, self.space.b, 4097)
        if np.any(np.asarray(self.deriv(grid)) <= 0):
            raise DomainError("transform must be strictly increasing")
        # int (g'_mu - 1) dmu = int (rho(g(x)) g'(x) - rho(x)) dx
        sigma = integrate_density(
            lambda x: self.space.density(self.func(x)) * self.deriv(x) - self.space.density(x), self.space.a, self.space.b
        )
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def identity(cls, space):
        return cls(space, lambda x: np.asarray(x, dtype=float), lambda x: np.ones(np.shape(x)))

    def mu_derivative(self, x):
        """``g'_mu(x) = rho(g(x)) g'(x) / rho(x)``."""
        x = np.asarray(x, dtype=float)
        return self.space.density(self.func(x)) * self.deriv(x) / self.space.density(x)


def poisson_rn(g, omega):
    """``exp(-sigma(g)) prod_{x in omega} g'_mu(x)``."""
    return float(np.exp(-g.sigma) * np.prod(g.mu_derivative(omega.points)))


def poisson_rn_batch(g, batch):
    return np.exp(-g.sigma) * batch.product(g.mu_derivative(batch.points))


def restrict(omega, lo, hi):
    """``omega`` intersected with ``[lo, hi)``."""
    p = omega.points
    return Configuration(p[(p >= lo) & (p < hi)], max(lo, omega.a), min(hi, omega.b))


def superpose(w1, w2):
    return Configuration(np.sort(np.concatenate([w1.points, w2.points])), min(w1.a, w2.a), max(w1.b, w2.b))
