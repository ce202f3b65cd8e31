"""Exception hierarchy shared by the estimation, simulation and CLI layers."""


class DoubleSelectError(Exception):
    """Base class for all package errors."""


class ArgumentError(DoubleSelectError, ValueError):
    """Invalid argument: wrong shape, out-of-domain value, unknown option."""


class DataError(DoubleSelectError):
    """Input data could not be read or is unusable."""


class EstimationError(DoubleSelectError, RuntimeError):
    """A statistical procedure cannot produce an estimate on this sample."""


class CapacityError(DoubleSelectError):
    """A combinatorial computation would exceed its enumeration budget."""
