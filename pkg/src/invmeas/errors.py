"""Exception hierarchy shared by all modules."""

import numpy as np


class InvMeasError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(InvMeasError, np.linalg.LinAlgError):
    """A matrix that must be inverted is numerically singular."""


class BothBlocksSingular(SingularMatrix):
    pass


class SizeMismatch(InvMeasError, ValueError):
    pass


class NotInvariant(InvMeasError, ValueError):
    """Conjugation by a group element leaves the span of a Lie basis."""


class DegeneratePair(InvMeasError, ValueError):
    pass


class DomainError(InvMeasError, ValueError):
    pass


class BranchViolation(DomainError):
    pass


class DegeneratePoints(InvMeasError, ValueError):
    pass


class InvalidTable(InvMeasError, ValueError):
    pass


class NumericalDegeneracy(InvMeasError, ArithmeticError):
    pass


class SplitFailure(InvMeasError, ArithmeticError):
    pass


class VarianceExplosion(InvMeasError, ArithmeticError):
    """A Monte Carlo estimator's spread exceeds its configured guard."""


class NotContraction(InvMeasError, ValueError):
    pass


class MarginalViolation(InvMeasError, ValueError):
    pass


class SpaceMismatch(InvMeasError, ValueError):
    pass


class NotRational(InvMeasError, ValueError):
    pass


class TooFewSamples(InvMeasError, ValueError):
    pass
