"""Numerical toolkit for Minkowski spaces in the Finsler sense.

Metric tensors of direction-dependent norms, homogeneity identities,
noncommutative orthogonalization, and the algebra of infinitesimal motions.
"""

from .derivatives import (
    CartanTensor,
    IdentityReport,
    MetricTensor,
    cartan_at,
    check_euler_identities,
    metric_at,
)
from .errors import (
    DimensionMismatch,
    FinslerError,
    InvalidNorm,
    IsotropicPivot,
    NonAdmissibleDirection,
    NotOrthogonalSet,
    NotOrthonormalBasis,
    SingularInput,
    SingularMetric,
)
from .motion import (
    ConstraintSystem,
    LieAlgebraBasis,
    assemble_motion_constraints,
    assemble_quasimotion_constraints,
    bracket,
    compare_algebras,
    solve_lie_algebra,
    verify_additive_closure,
    verify_first_order_preservation,
)
from .norms import (
    Custom,
    Euclidean,
    MthRoot,
    NormModel,
    PseudoEuclidean,
    Randers,
    custom_from_expression,
    evaluate_F2,
    homogeneity_residual,
    sample_directions,
)
from .ortho import (
    Basis,
    MetricProfile,
    check_linear_independence,
    is_orthogonal,
    metric_profile,
    normalize,
    orthogonalize,
    orthonormalize,
)

__version__ = "0.1.0"
