"""Exception hierarchy shared by every module."""


class QiccaError(Exception):
    """Base class for all library errors."""


class InvalidInput(QiccaError, ValueError):
    pass


class DegenerateInput(QiccaError, ValueError):
    """Input is well-formed but carries no usable signal (e.g. all zeros)."""


class DegenerateDistribution(QiccaError, ValueError):
    """Sampling was requested from a distribution with zero total mass."""


class CapacityExceeded(QiccaError):
    pass


class ParseError(QiccaError, ValueError):
    pass


class FormatError(QiccaError, ValueError):
    pass
