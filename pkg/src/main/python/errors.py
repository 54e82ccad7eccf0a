"""Exception hierarchy and the exit codes the command line maps them to.

Exit codes:
    0: Success
    1: Usage error, bad input or violated precondition
    2: Numeric non-convergence
    3: A proved inequality or structure failed to hold (an implementation bug)
"""

from typing import Any, Optional, Tuple


class XiZeroError(Exception):
    """Base class for all errors raised by the library."""

    exit_code = 1


# USAGE ERRORS #


class UsageError(XiZeroError):
    """Input data or arguments do not satisfy a precondition."""

    exit_code = 1


class TailBoundMissing(UsageError):
    """An infinite integration range was requested without a tail bound."""


class StripViolation(UsageError):
    """Complex argument outside the strip the evaluator is guarded for."""

    def __init__(self, z: Any, limit: float):
        """Initialize the error.

        :param z: Offending argument.
        :param limit: Allowed bound on the absolute imaginary part.
        """
        super().__init__(f"|Im z| = {abs(complex(z).imag)} exceeds {limit}")
        self.z = z
        self.limit = limit


class InsufficientData(UsageError):
    """A sequence is too short for the requested index."""


class ZeroLeadingCoefficient(UsageError):
    """Leading (constant) coefficient c_0 vanishes."""


class NonRealMultiplier(UsageError):
    """A multiplier polynomial has nonreal zeros."""


class ZeroInExclusionInterval(UsageError):
    """A Laguerre multiplier vanishes in [0, d] or has nonreal zeros."""


class CommonZero(UsageError):
    """Two polynomials share a zero."""


class ZeroAtOrigin(UsageError):
    """A canonical product was given the zero z = 0."""


# NUMERIC ERRORS #


class NumericError(XiZeroError):
    """A numeric procedure did not reach its tolerance."""

    exit_code = 2


class TailNotDecaying(NumericError):
    """No truncation index below the hard cap met the tolerance."""


class NoConvergence(NumericError):
    """Quadrature did not converge within the maximal panel depth."""


class SuspectedTangency(NumericError):
    """A local minimum of |f| fell below abs_tol without a sign change."""

    def __init__(self, location: Any, value: Any):
        """Initialize the error.

        :param location: Where the minimum was seen.
        :param value: The function value there.
        """
        super().__init__(
            f"|f| = {value} below tolerance at {location} without a sign change"
        )
        self.location = location
        self.value = value


class IllConditioned(NumericError):
    """A determinant cannot be decided at the working precision."""


class RootFindingNoConvergence(NumericError):
    """Simultaneous polynomial root iteration failed after all restarts."""


class BoundaryZeroSuspected(NumericError):
    """The argument-principle contour passes (numerically) through a zero."""

    def __init__(self, point: Any, value: Any):
        """Initialize the error.

        :param point: Boundary point where |f| is below tolerance.
        :param value: Function value there.
        """
        super().__init__(f"|f({point})| = {value} on the contour")
        self.point = point
        self.value = value


# VIOLATIONS #


class ViolationError(XiZeroError):
    """A proved inequality or structural statement failed numerically."""

    exit_code = 3


class InequalityViolated(ViolationError):
    """An inequality of the kernel ledger failed at some t."""

    def __init__(self, name: str, t: Any, margin: Any):
        """Initialize the error.

        :param name: Name of the failed check.
        :param t: Grid point.
        :param margin: Left-hand side minus right-hand side.
        """
        super().__init__(f"{name} violated at t = {t}, margin {margin}")
        self.name = name
        self.t = t
        self.margin = margin


class MethodDisagreement(ViolationError):
    """Two evaluation methods disagree beyond their combined error bounds."""


class NegativeGap(ViolationError):
    """A sum-rule gap turned negative beyond its error bound."""

    def __init__(self, n: int, gap: Any, error: Any):
        """Initialize the error.

        :param n: Number of zeros in the partial sum.
        :param gap: Target minus partial sum.
        :param error: Combined error bound of the gap.
        """
        super().__init__(f"gap {gap} < -{error} at N = {n}")
        self.n = n
        self.gap = gap
        self.error = error


class CheckFailed(ViolationError):
    """An acceptance check of the self test did not hold."""


class StructureViolation(ViolationError):
    """An ambient interval does not hold exactly one simple zero."""

    def __init__(self, message: str, interval: Optional[Tuple[Any, Any]] = None):
        """Initialize the error.

        :param message: Description of the violation.
        :param interval: Offending interval, if any.
        """
        super().__init__(message)
        self.interval = interval


def exit_code_for(err: BaseException) -> int:
    """Return the command line exit code for an exception.

    :param err: Raised exception.

    :return: Exit code, see module docstring.
    """
    if isinstance(err, XiZeroError):
        return err.exit_code
    if isinstance(err, (ValueError, OSError)):
        return 1
    if isinstance(err, ArithmeticError):
        return 2
    # anything else is a defect of the program
    return 3
