"""Exception hierarchy shared by all toolkit modules."""


class BankmacroError(Exception):
    """Base class for all toolkit errors."""


class AssumptionViolation(BankmacroError):
    """Discount-factor ordering or admissibility restrictions fail."""


class IncompatiblePolicy(BankmacroError):
    """A variant requires policy-rule fields that were not supplied."""


class DimensionMismatch(BankmacroError):
    """Vector or matrix arguments do not conform to the registry."""


class NegativeConsumption(BankmacroError):
    """A steady-state construction produced a nonpositive consumption level."""


class SolverDiverged(BankmacroError):
    """Newton iteration failed to reach the residual tolerance."""


class NoBranchAdmissible(BankmacroError):
    """Neither the slack nor the binding steady-state branch verifies."""


class GuessViolated(BankmacroError):
    """A maintained ordering assumed by a steady-state construction fails post hoc."""


class SingularityDetected(BankmacroError):
    """A declared variable has an identically zero Jacobian column."""


class IndeterminateEquilibrium(BankmacroError):
    """Too few unstable roots: multiple stable rational-expectations solutions."""


class NoStableSolution(BankmacroError):
    """Too many unstable roots: no stable rational-expectations solution."""


class ExplosivePath(BankmacroError):
    """A simulated deviation exceeded the configured explosion bound."""


class NoStableReference(BankmacroError):
    """The reference-regime system fails the root-count check."""


class RegimeCycleDetected(BankmacroError):
    """The regime guess sequence entered a cycle without converging."""

    def __init__(self, message, period=None, visited=None):
        super().__init__(message)
        self.period = period
        self.visited = visited


class HorizonExceeded(BankmacroError):
    """A guessed regime persists beyond the anticipated horizon."""

    def __init__(self, message, period=None):
        super().__init__(message)
        self.period = period


class SeriesTooShort(BankmacroError):
    """Filtering requested on a series with fewer than 4 observations."""


class MissingVariable(BankmacroError):
    """A moment specification references a column absent from the panel."""


class ParseError(BankmacroError):
    """A data file could not be parsed."""


class NonNumeric(BankmacroError):
    """A data column contains non-numeric entries."""


class DegenerateWeight(BankmacroError):
    """A target moment is zero where the weighting rule divides by it."""


class OptimizerStalled(BankmacroError):
    """The derivative-free search made no progress across restarts."""


class MissingWelfareSeries(BankmacroError):
    """Welfare reporting requires the welfare-recursion columns."""


class VariantMismatch(BankmacroError):
    """Sticky-price analytics requested on a flexible-price path (or vice versa)."""


class WindowOutOfRange(BankmacroError):
    """An event window extends beyond the simulated sample."""


class ConfigError(BankmacroError):
    """Run configuration failed schema validation."""
