"""Exception hierarchy.

Divergence of an integral is a *value* (``ExtendedValue`` with ``inf``), not an
error; the classes below are reserved for misuse and numerical failure.
"""


class HardyLabError(Exception):
    """Base class for all package errors."""


class ConfigError(HardyLabError, ValueError):
    """Malformed weight, exponent or CLI configuration."""


class NonPositiveArgument(HardyLabError, ValueError):
    """A weight was evaluated at t <= 0."""


class ToleranceNotReached(HardyLabError, ArithmeticError):
    """Quadrature budget exhausted without a convergence or divergence verdict."""


class NotMonotone(HardyLabError, ValueError):
    """A Stieltjes integrator was not non-decreasing."""


class MonotonicityViolated(HardyLabError, ArithmeticError):
    """Sampled V or W broke its monotone direction beyond round-off."""


class WindowTooSmall(HardyLabError, ArithmeticError):
    """The search window does not capture the supremum or the mass."""


class RegimeMismatch(HardyLabError, ValueError):
    """A regime-specific quantity was requested outside its regime."""


class DegenerateWeight(HardyLabError, ValueError):
    """v^(1-p') is not locally integrable where a finite V(t) is needed."""


class ThetaOutOfRange(HardyLabError, ValueError):
    """theta must exceed r/p'."""


class EmptyDecomposition(HardyLabError, ValueError):
    """No sigma-level is nonempty on the window."""


class ZeroFunction(HardyLabError, ValueError):
    """A test function vanished identically."""


class IndeterminateRatio(HardyLabError, ArithmeticError):
    """The right-hand side of the inequality is 0 or infinite."""


class PreconditionViolated(HardyLabError, ValueError):
    """Hardy's lemma was asked about measures whose cumulatives are not ordered."""


class DegenerateInstance(HardyLabError, ArithmeticError):
    """The ratio is unbounded for every admissible test function on the window."""


class RatioOverflow(HardyLabError, OverflowError):
    """A finite ratio is too large to represent as a double."""
