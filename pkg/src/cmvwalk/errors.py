"""Exception types raised across the package."""


class CMVError(Exception):
    """Base class for all package errors."""


class DegenerateCoin(CMVError):
    pass


class OutOfWindow(CMVError):
    pass


class NotInDisk(CMVError):
    pass


class NumericalSingularity(CMVError):
    pass


class WindowTooSmall(CMVError):
    pass


class InsufficientHorizon(CMVError):
    pass


class GridTooShort(CMVError):
    pass


class ZeroSpectralParameter(CMVError):
    pass


class SuspectedMissedBand(CMVError):
    pass


class UntypeableBand(CMVError):
    pass


class ComplexBranch(CMVError):
    pass


class NoRootFound(CMVError):
    pass


class PeriodMismatch(CMVError):
    pass


class DimensionMismatch(CMVError):
    pass


class BranchCrossing(CMVError):
    pass


class NotUnimodularTwist(CMVError):
    pass


class EmptySet(CMVError):
    pass


class RegimeNotReached(CMVError):
    pass


class ConfigError(CMVError):
    pass
