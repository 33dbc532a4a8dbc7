"""Riemannian geometry of invertible matrices.

Left-invariant, affine-invariant and polar metrics on GL(n, C) and on the
closed subgroups generated by a *-closed Lie algebra, with closed-form
distances, geodesics and seeded numerical verification suites.
"""

from .curves import (
    Curve,
    curve_length,
    geodesic_residual,
    perturb_curve,
    tangency_residual,
)
from .errors import (
    BranchCut,
    ConfigInvalid,
    DegenerateBasis,
    InvalidP,
    MathError,
    NotHermitian,
    NotInSubgroup,
    NotPositiveDefinite,
    NotUnitary,
    OddDimension,
    OpGeoError,
    Singular,
    UnknownSuite,
)
from .experiments import SuiteReport, TrialConfig, bound_constant, run_suite
from .manifolds import (
    LEFT,
    POLAR,
    POSITIVE,
    GroupPoint,
    MetricKind,
    left_exp,
    left_metric,
    polar_dist,
    polar_geodesic,
    polar_metric,
    spd_dist,
    spd_exp,
    spd_geodesic,
    spd_log,
    spd_metric,
    unitary_dist,
)
from .matfun import (
    herm_funcalc,
    matrix_exp,
    polar_decompose,
    schatten_norm,
    unitary_log,
)
from .subgroups import (
    CartanSplit,
    LieAlgebraSpec,
    SubgroupContext,
    builtin_algebra,
    cartan_split,
    random_group_element,
    triple_system_check,
    validate_algebra,
)

__version__ = "0.1.0"

__all__ = [
    "LEFT",
    "POLAR",
    "POSITIVE",
    "BranchCut",
    "CartanSplit",
    "ConfigInvalid",
    "Curve",
    "DegenerateBasis",
    "GroupPoint",
    "InvalidP",
    "LieAlgebraSpec",
    "MathError",
    "MetricKind",
    "NotHermitian",
    "NotInSubgroup",
    "NotPositiveDefinite",
    "NotUnitary",
    "OddDimension",
    "OpGeoError",
    "Singular",
    "SubgroupContext",
    "SuiteReport",
    "TrialConfig",
    "UnknownSuite",
    "__version__",
    "bound_constant",
    "builtin_algebra",
    "cartan_split",
    "curve_length",
    "geodesic_residual",
    "herm_funcalc",
    "left_exp",
    "left_metric",
    "matrix_exp",
    "perturb_curve",
    "polar_decompose",
    "polar_dist",
    "polar_geodesic",
    "polar_metric",
    "random_group_element",
    "run_suite",
    "schatten_norm",
    "spd_dist",
    "spd_exp",
    "spd_geodesic",
    "spd_log",
    "spd_metric",
    "tangency_residual",
    "triple_system_check",
    "unitary_dist",
    "unitary_log",
    "validate_algebra",
]
