"""Exception hierarchy shared by all qeomsim modules."""


class QeomSimError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(QeomSimError, ValueError):
    """Operands live on registers of different size, or an index is out of range."""


class DenseCapError(QeomSimError, ValueError):
    """A dense representation was requested above the configured qubit cap."""


class NonHermitianError(QeomSimError, ValueError):
    """An operation that needs a Hermitian operator received a non-Hermitian one."""


class UnboundParameterError(QeomSimError, KeyError):
    """A circuit was executed while some of its parameter slots were unbound."""


class ModeMismatchError(QeomSimError, ValueError):
    """Statevector/density-matrix modes are incompatible with the request."""


class SingularCalibrationError(QeomSimError, ValueError):
    """The readout calibration matrix cannot be inverted."""


class SingularityError(QeomSimError, ZeroDivisionError):
    """A perturbative denominator vanished."""


class IllConditionedError(QeomSimError, ArithmeticError):
    """The metric of a generalized eigenproblem is singular beyond regularization."""


class EstimatorError(QeomSimError, RuntimeError):
    """Expectation estimation of a matrix element failed."""


class FitError(QeomSimError, ValueError):
    """A least-squares fit is degenerate or has the wrong curvature."""


class DegenerateFitError(FitError):
    """Extrapolation abscissae are repeated, so the fit is underdetermined."""


class ParseError(QeomSimError, ValueError):
    """A Hamiltonian or operator file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
