"""Exception taxonomy for ruin2d.

Every refusal raised by the library is a subclass of :class:`Ruin2dError`,
so callers (notably the CLI) can map failures to exit codes without string
matching.  Configuration problems and numerical refusals are kept on
separate branches.
"""

from __future__ import annotations


class Ruin2dError(Exception):
    """Base class for all ruin2d errors."""


class ConfigError(Ruin2dError):
    """Invalid model or run configuration (bad premiums, proportions, ...)."""


class InvalidProportions(ConfigError):
    """Scaling proportions are not positive or do not sum to one."""


class NumericalRefusal(Ruin2dError):
    """A well-formed request the library refuses to answer numerically."""


class NoSignChange(NumericalRefusal):
    """Root bracketing failed: f has the same sign at both bracket ends."""


class MaxIterations(NumericalRefusal):
    """An iterative routine hit its iteration budget before converging."""


class OutOfDomain(NumericalRefusal):
    """Argument outside the domain of a cumulant or transform."""


class OutOfRange(NumericalRefusal):
    """Argument outside the admissible range of an operation."""


class NoAdjustment(NumericalRefusal):
    """No positive adjustment coefficient exists (net profit violated
    or the Lundberg equation has no root in the transform domain)."""


class NoConjugate(NumericalRefusal):
    """The conjugate saddle point does not exist inside the domain."""


class BoundaryVelocity(NumericalRefusal):
    """The requested ray velocity sits on (or too close to) a boundary
    between asymptotic regimes, where the expansion constants blow up."""


class BoundaryRay(NumericalRefusal):
    """The reserve ray x1/x2 coincides with a cone boundary slope."""


class UnsupportedDriver(NumericalRefusal):
    """The operation is not available for this claim driver."""


class InvalidHorizon(ConfigError):
    """Simulation horizon incompatible with the requested estimate."""


class InsufficientConditionedSamples(NumericalRefusal):
    """Too few conditioned Monte Carlo samples to run a distribution check."""


class InternalInconsistency(Ruin2dError):
    """Two supposedly equivalent computation routes disagree beyond
    tolerance.  This always indicates a bug and is never caught internally."""
