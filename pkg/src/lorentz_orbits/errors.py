"""Exception hierarchy shared by all modules."""


class LorentzOrbitsError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(LorentzOrbitsError):
    pass


class SingularPoint(LorentzOrbitsError):
    """Evaluation requested inside or on a singular ball."""

    def __init__(self, message, ball=None):
        super().__init__(message)
        self.ball = ball


class NonFinite(LorentzOrbitsError):
    pass


class UnboundedAbove(LorentzOrbitsError):
    pass


class SingularTrajectory(LorentzOrbitsError):
    pass


class BoundaryOfK(LorentzOrbitsError):
    pass


class PreconditionViolated(LorentzOrbitsError):
    pass


class NoNonautonomousPoint(LorentzOrbitsError):
    pass


class DegenerateOscillation(LorentzOrbitsError):
    pass


class SpeedCapExceeded(LorentzOrbitsError):
    pass


class CertificateFailed(LorentzOrbitsError):
    pass


class HypothesisNotMet(LorentzOrbitsError):
    pass


class EquilibriumStart(LorentzOrbitsError):
    pass


class FlowStalled(LorentzOrbitsError):
    pass


class ProjectionStalled(LorentzOrbitsError):
    pass


class LineSearchFailed(LorentzOrbitsError):
    pass


class AllStartsFailed(LorentzOrbitsError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial or []


class SingularEncounter(LorentzOrbitsError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NotAdmissible(LorentzOrbitsError):
    pass
