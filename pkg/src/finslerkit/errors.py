"""Exception hierarchy shared by all finslerkit modules."""


class FinslerError(Exception):
    """Base class for toolkit failures."""


class NonAdmissibleDirection(FinslerError, ValueError):
    """Direction is zero, non-finite, or outside the norm's domain."""


class SingularMetric(FinslerError):
    """The metric tensor failed the relative singular-value check."""


class IsotropicPivot(FinslerError):
    """A pivot or normalization target has (numerically) zero squared norm."""


class SingularInput(FinslerError, ValueError):
    """Input vectors do not form a basis."""


class NotOrthogonalSet(FinslerError):
    """Vectors violate g(e_i)(e_i, e_j) = 0 for some i < j."""


class NotOrthonormalBasis(FinslerError):
    """Basis profile does not have the orthonormal triangular pattern."""


class DimensionMismatch(FinslerError, ValueError):
    """Objects of different dimension were combined."""


class InvalidNorm(FinslerError, ValueError):
    """Norm parameters are inconsistent (e.g. Randers drift too strong)."""
