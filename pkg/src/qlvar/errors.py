"""Exception taxonomy for qlvar.

Every failure mode that carries geometric meaning gets its own type so that
callers (and the CLI exit-code logic) can react to *what went wrong* rather
than parsing messages.  All types derive from :class:`QlvarError`.
"""

from __future__ import annotations


class QlvarError(Exception):
    """Base class for all qlvar-specific errors."""


class PointInsideHorizon(QlvarError):
    """Evaluation of ambient data at a point with r <= 2m."""


class PoleEvaluation(QlvarError):
    """Chart-singular evaluation at sin(psi) = 0 where the quantity is undefined."""


class DegenerateMetric(QlvarError):
    """Induced metric with non-positive determinant at some node."""


class NormalOrientationAmbiguous(QlvarError):
    """Outward normal could not be fixed by the areal-radius rule and no hint given."""


class SolvabilityLost(QlvarError):
    """Isometric-embedding ODE radicand went non-positive: no convex solution.

    Carries ``theta`` (where) and ``radicand`` (how badly) when known.
    """

    def __init__(self, message: str, theta: float | None = None,
                 radicand: float | None = None):
        super().__init__(message)
        self.theta = theta
        self.radicand = radicand


class HorizonCrossing(QlvarError):
    """Embedding profile dipped to rho <= 2m + eps_h during the solve."""


class PoleRegularityFailure(QlvarError):
    """Axisymmetric metric violates G ~ E(pole)·theta² regularity at a pole."""


class NonTangentialResidual(QlvarError):
    """Shift decomposition left a non-tangential remainder above tolerance."""


class StepTooLarge(QlvarError):
    """Richardson order estimate of a t-derivative fell below 1.5."""


class PreconditionHNotMatched(QlvarError):
    """Specialized identity requires H = H̄ on the data and it does not hold."""


class PreconditionShiftNotZero(QlvarError):
    """Specialized identity requires vanishing shift Y and it does not hold."""


class EtaVanishes(QlvarError):
    """Physical normal speed eta crosses zero where 1/eta is needed."""


class IsometryViolation(QlvarError):
    """Pulled-back metrics of the two sides disagree above tolerance."""


class SchemaError(QlvarError):
    """Scenario/surface file failed validation (unknown key, bad type, bad value)."""
