"""Exception and warning types shared across the package."""


class SimulationError(ValueError):
    """Base class for every input/contract violation raised by esdsim."""


class NonUnitary(SimulationError):
    pass


class BadTarget(SimulationError):
    pass


class ZeroShots(SimulationError):
    pass


class UnroutableGate(SimulationError):
    pass


class DimensionMismatch(SimulationError):
    pass


class NegativeTime(SimulationError):
    pass


class BadProbability(SimulationError):
    pass


class BadDistribution(SimulationError):
    pass


class LabelMismatch(SimulationError):
    pass


class SingularCalibration(SimulationError):
    pass


class NotXForm(SimulationError):
    pass


class OverlappingLayouts(SimulationError):
    pass


class QualityWarning(UserWarning):
    """An estimate landed outside its physical range by more than sampling noise allows."""
