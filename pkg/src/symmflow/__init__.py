"""Structure-preserving Runge-Kutta integration on symmetric spaces.

Three concrete geometries are shipped: the unit n-sphere, hyperbolic n-space
in the hyperboloid model, and SPD matrices. Each supplies closed-form
geodesic exponentials, parallel transport and triple brackets to a common
stepping core, plus a hand-tuned stepper of its own. The `harness` module
adds benchmark problems, convergence-order studies and CSV emission behind
the `symmflow` command-line tool.
"""

from .core import (
    DexpinvSeries,
    SpaceContract,
    StepRecord,
    cssi_step,
    dexpinv_series_apply,
    integrate,
    lts_axiom_residuals,
    triple_bracket_oracle,
)
from .errors import (
    DimensionMismatch,
    FixedPointDivergence,
    IoFailure,
    MidpointUndefined,
    NonPositiveDefinite,
    NonSpacelikeTangent,
    NumericalFailure,
    ReferenceUnavailable,
    StepTooLarge,
    SymmetryViolation,
    SymmflowError,
    UnknownTableau,
)
from .hyperbolic import HYPERBOLOID, HyperbolicSpace, chi_integrate, chi_step
from .linalg import mat_exp, minkowski, spd_inv, spd_sqrt, sym_eig
from .spd import SPD, SpdSpace, csgi_integrate, csgi_step, spd_sqrt_update
from .sphere import SPHERE, SphereSpace, csi_integrate, csi_step
from .tableau import ButcherTableau, builtin_tableau, check_order_conditions

__version__ = "0.1.0"

__all__ = [
    "ButcherTableau",
    "DexpinvSeries",
    "DimensionMismatch",
    "FixedPointDivergence",
    "HYPERBOLOID",
    "HyperbolicSpace",
    "IoFailure",
    "MidpointUndefined",
    "NonPositiveDefinite",
    "NonSpacelikeTangent",
    "NumericalFailure",
    "ReferenceUnavailable",
    "SPD",
    "SPHERE",
    "SpaceContract",
    "SpdSpace",
    "SphereSpace",
    "StepRecord",
    "StepTooLarge",
    "SymmetryViolation",
    "SymmflowError",
    "UnknownTableau",
    "builtin_tableau",
    "check_order_conditions",
    "chi_integrate",
    "chi_step",
    "csgi_integrate",
    "csgi_step",
    "csi_integrate",
    "csi_step",
    "cssi_step",
    "dexpinv_series_apply",
    "integrate",
    "lts_axiom_residuals",
    "mat_exp",
    "minkowski",
    "spd_inv",
    "spd_sqrt",
    "spd_sqrt_update",
    "sym_eig",
    "triple_bracket_oracle",
]
