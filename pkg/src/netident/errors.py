"""Exception types shared across the package.

All domain errors derive from :class:`NetidentError` so callers (and the
CLI) can distinguish usage problems from numerical/validation failures.
"""

from __future__ import annotations


class NetidentError(Exception):
    """Base class for all domain errors raised by this package."""


# ---------------------------------------------------------------------------
# network model
# ---------------------------------------------------------------------------

class ValidationError(NetidentError):
    """A network description violated a structural invariant."""


class ZeroWeight(ValidationError):
    """A stored weight is zero, contradicting edge/weight consistency."""

    def __init__(self, layer: int, row: int, col: int):
        self.layer, self.row, self.col = layer, row, col
        super().__init__(f"zero weight w^{layer}_{{{row},{col}}}: stored edges must be nonzero")


class ShapeMismatch(ValidationError):
    """Weight block shape disagrees with the layer sizes."""


class NonzeroConstantTerm(ValidationError):
    """Activation encodes f(0) != 0, which is outside the supported class."""


class EmptyLayer(ValidationError):
    """A layer has no nodes."""


class RangeContainsZero(ValidationError):
    """Weight sampling range straddles zero."""


class InfeasibleOrdering(ValidationError):
    """Ordered sampling cannot fit the requested gaps into the range."""


class BadLayer(ValidationError):
    """Layer index outside the permissible range for the operation."""


# ---------------------------------------------------------------------------
# series engine
# ---------------------------------------------------------------------------

class OrderMismatch(NetidentError):
    """Two series (or a coefficient list and a series) have different orders."""


class DegreeOverflow(NetidentError):
    """Brute-force expansion exceeded the configured degree cap."""


# ---------------------------------------------------------------------------
# identifiability
# ---------------------------------------------------------------------------

class NonFiniteEntry(NetidentError):
    """A matrix handed to the rank test contains NaN or infinity."""


class SingularNormalEquations(NetidentError):
    """The recovery Jacobian is rank deficient at the current iterate."""

    def __init__(self, message: str, rank: int | None = None, singular_values=None):
        self.rank = rank
        self.singular_values = singular_values
        super().__init__(message)


class MaxIterationsExceeded(NetidentError):
    """Iterative solve hit its iteration cap before converging."""


# ---------------------------------------------------------------------------
# simulator
# ---------------------------------------------------------------------------

class SeriesDomainExceeded(NetidentError):
    """A truncated-series activation was evaluated outside its trusted radius."""


class IllConditionedFit(UserWarning):
    """Coefficient fit is ill conditioned; reported as a warning, not fatal."""


# ---------------------------------------------------------------------------
# exponential recovery
# ---------------------------------------------------------------------------

class PrecisionExhausted(NetidentError):
    """A value cannot be represented or resolved at the working precision."""


class NonPositiveLogArgument(NetidentError):
    """An iterated-log step received a non-positive argument."""

    def __init__(self, message: str, level: int | None = None):
        self.level = level
        super().__init__(message)


class NotConverged(NetidentError):
    """A weight estimate failed to stabilise over the x schedule."""

    def __init__(self, layer: int, row: int, col: int, trace=None, message: str = ""):
        self.layer, self.row, self.col = layer, row, col
        self.trace = trace
        detail = message or "estimate did not converge"
        super().__init__(f"w^{layer}_{{{row},{col}}}: {detail}")


class OrderingViolationSuspected(NetidentError):
    """Recovered weights (or their traces) contradict the ordered-weight regime."""
