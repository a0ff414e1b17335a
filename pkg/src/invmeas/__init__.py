"""Samplers, densities and exact checks for invariant and quasi-invariant measures.

Subpackages by topic:

* :mod:`invmeas.haar` - Haar measure on classical groups by reflection products
* :mod:`invmeas.spectra` - Weyl densities, Schur functions, Hermitian ensembles
* :mod:`invmeas.finfourier` - character tables and Fourier analysis on finite groups
* :mod:`invmeas.ewens` - Ewens measures and the projection of symmetric groups
* :mod:`invmeas.poisson` - Poisson processes and their quasi-invariance
* :mod:`invmeas.gaussian` - Gaussian measure, Hermite functions, Brownian paths
* :mod:`invmeas.polymorph` - finite polymorphisms and Markov operators
"""

from . import errors, ewens, finfourier, gaussian, haar, linalg, poisson, polymorph, spectra, stats
from .haar import GroupKind, sample_haar
from .rng import RngHandle, as_generator

__version__ = "0.1.0"

__all__ = [
    "GroupKind",
    "RngHandle",
    "as_generator",
    "sample_haar",
    "errors",
    "ewens",
    "finfourier",
    "gaussian",
    "haar",
    "linalg",
    "poisson",
    "polymorph",
    "spectra",
    "stats",
]
