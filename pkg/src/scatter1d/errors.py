"""Exception hierarchy shared by all solvers."""


class Scatter1DError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class InvalidEnergy(Scatter1DError, ValueError):
    pass


class InvalidSize(Scatter1DError, ValueError):
    pass


class GridTooCoarse(Scatter1DError):
    pass


class GridMismatch(Scatter1DError):
    pass


class DegenerateExtraction(Scatter1DError):
    pass


class RangeNotFound(Scatter1DError):
    pass


class SupportExceedsBox(Scatter1DError):
    pass


class MissingWavefunction(Scatter1DError):
    pass


class OrderUnsupported(Scatter1DError, ValueError):
    pass


class TNearZero(Scatter1DError):
    """|T| collapsed below 1e-14, which a correct solve cannot produce."""


class EigensolveFailure(Scatter1DError):
    pass


class ZeroEigenvalue(Scatter1DError):
    pass


class DefectivePencil(Scatter1DError):
    pass


class OutOfBox(Scatter1DError, ValueError):
    pass


class WindowUncovered(Scatter1DError):
    pass


class SupportTouchesZero(Scatter1DError, ValueError):
    pass


class NodeMismatch(Scatter1DError):
    pass


class BranchDomainError(Scatter1DError, ValueError):
    pass


class PoleProximityWarning(RuntimeWarning):
    pass
