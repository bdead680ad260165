"""Exception hierarchy shared across the package."""


class JMatrixError(Exception):
    """Base class for every error raised by jmatrix1d."""


class DomainError(JMatrixError, ValueError):
    """An argument lies outside the domain of the function."""


class RangeError(JMatrixError, OverflowError):
    """A result would overflow double precision."""


class DegenerateError(JMatrixError, ZeroDivisionError):
    """A denominator vanished where a finite answer is required."""


class RatioDivisionError(DegenerateError):
    """A coefficient ratio hit a node (zero partial denominator).

    ``stage`` is the recursion index at which the zero appeared.
    """

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class ConvergenceError(JMatrixError, ArithmeticError):
    """An iterative procedure or truncated series did not converge."""


class PoleError(JMatrixError, ArithmeticError):
    """The energy sits on (or too close to) an eigenvalue of the finite Hamiltonian."""

    def __init__(self, message, energy=None, eigenvalue=None):
        super().__init__(message)
        self.energy = energy
        self.eigenvalue = eigenvalue


class NotUnimodularError(JMatrixError, ArithmeticError):
    """W+ or W- is not on the unit circle, so phase angles are undefined."""


class NoPlateauError(JMatrixError):
    """No lambda interval met the plateau tolerance.

    ``report`` carries the best (widest) interval found anyway.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PotentialEvalError(JMatrixError, ArithmeticError):
    """A potential could not be evaluated at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class EvalError(JMatrixError, ArithmeticError):
    """Runtime fault while evaluating a parsed expression."""


class ParseError(JMatrixError, ValueError):
    """Syntax error in a potential expression.

    Attributes
    ----------
    offset : int
        Byte offset into the source where parsing failed.
    expected : frozenset of str
        Token kinds that would have been accepted at ``offset``.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{message} at offset {offset}" + (f" (expected {exp})" if exp else ""))


class ResolutionError(JMatrixError, ArithmeticError):
    """The transfer-matrix grid failed to resolve the problem after refinement."""
