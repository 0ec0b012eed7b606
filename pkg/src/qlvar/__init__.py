"""qlvar: quasi-local energy variation for 2-surface families in static spaces.

Spectral surface geometry on Gauss-Legendre x Fourier grids, axisymmetric
isometric embedding into Schwarzschild references, and the evolution-identity
machinery relating the t-derivative of the static-reference energy to its
bulk/boundary decomposition, with Brown-York / localized-Penrose functionals
on top.
"""

from .errors import (  # noqa: F401
    QlvarError, PointInsideHorizon, PoleEvaluation, DegenerateMetric,
    NormalOrientationAmbiguous, SolvabilityLost, HorizonCrossing,
    PoleRegularityFailure, NonTangentialResidual, StepTooLarge,
    PreconditionHNotMatched, PreconditionShiftNotZero, EtaVanishes,
    IsometryViolation, SchemaError,
)
from .ambient import (  # noqa: F401
    AmbientPoint, AmbientGeometryAt, StaticPotential, StaticSpace,
    ConformalStatic, GaussianBump, QuadraticGaussianBump,
    point_to_xyz, xyz_to_point, fd_metric_derivative, fd_curvature,
)

__version__ = "0.1.0"
