"""Exception hierarchy shared by every opgeo module."""


class OpGeoError(Exception):
    """Base class for all opgeo errors."""


class MathError(OpGeoError, ValueError):
    """A mathematical precondition of an operation does not hold."""


class NotHermitian(MathError):
    pass


class NotPositiveDefinite(MathError):
    pass


class Singular(MathError):
    pass


class BranchCut(MathError):
    """A unitary has an eigenvalue at -1, so its principal log is ambiguous."""


class InvalidP(MathError):
    pass


class DegenerateBasis(MathError):
    pass


class OddDimension(MathError):
    pass


class NotInSubgroup(MathError):
    pass


class ConfigInvalid(OpGeoError, ValueError):
    pass


class UnknownSuite(OpGeoError, KeyError):
    pass


class NotUnitary(MathError):
    pass
