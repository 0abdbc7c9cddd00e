"""Exception types shared across the package."""


class SmcfError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SmcfError, ValueError):
    pass


class InvalidFrameError(SmcfError, ValueError):
    """A frame that should be orthonormal is not."""


class DegenerateFrameError(SmcfError, ValueError):
    """Supplied basis vectors are (numerically) linearly dependent."""


class WrongBranchError(SmcfError, ValueError):
    """An |H| != 0 formula was applied at |H| = 0 or vice versa."""


class InvalidSpecError(SmcfError, ValueError):
    pass


class DegenerateImmersionError(SmcfError):
    """Induced metric lost rank somewhere on the grid."""


class BlowUpError(SmcfError):
    """Curvature became non-finite during a flow."""


class MismatchError(SmcfError, ValueError):
    """Two surface states do not belong to the same run."""


class ConfigError(SmcfError, ValueError):
    pass
