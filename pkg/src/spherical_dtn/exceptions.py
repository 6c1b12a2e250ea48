"""Exception hierarchy shared by all modules."""


class DtnError(Exception):
    """Base class for errors raised by :mod:`spherical_dtn`."""


class DomainError(DtnError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class RegimeError(DtnError, ValueError):
    """An expansion was requested outside its validity regime."""


class AccuracyError(DtnError, ArithmeticError):
    """An evaluation could not certify the requested accuracy."""


class ConvergenceError(AccuracyError):
    """An iterative or quadrature procedure failed to converge."""


class BandLimitError(DtnError, ValueError):
    """Coefficients exceed the band limit a grid can resolve."""


class KindError(DtnError, ValueError):
    """A DtN variant is not admissible for the given dimension and radius."""


class DegenerateFamilyError(DtnError, ArithmeticError):
    """No member of a test-function family satisfies the boundary coupling."""
