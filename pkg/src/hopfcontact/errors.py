"""Exception types raised by the geometric routines."""


class GeometryError(ValueError):
    """Base class for all domain errors of the package."""


class AntipodalPoints(GeometryError):
    pass


class PoleOnLoop(GeometryError):
    pass


class OrthogonalFibers(GeometryError):
    pass


class TrackingLoss(GeometryError):
    pass


class DifferentFibers(GeometryError):
    pass


class NonHorizontal(GeometryError):
    pass


class NotClosed(GeometryError):
    pass


class NotAreaPreserving(GeometryError):
    pass


class BaseMoveTooFar(GeometryError):
    pass


class AntipodalEvaluation(GeometryError):
    pass


class NotInChart(GeometryError):
    pass


class NotConstantAngle(GeometryError):
    pass


class StepTooCoarse(GeometryError):
    pass


class ChartExit(GeometryError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ContactHamiltonianError(GeometryError):
    """The function is not constant along the Hopf fibers."""


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""
