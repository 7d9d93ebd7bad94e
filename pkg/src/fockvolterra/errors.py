"""Exception hierarchy shared by every module of the package."""


class FockError(Exception):
    """Base class for all package errors."""


class SymbolOverflow(FockError, OverflowError):
    """Real part of an exponent is beyond the double-precision range."""


class PreconditionError(FockError, ValueError):
    """An operation was called outside its documented domain."""


class TailNotConverged(FockError):
    """A truncated integral over the plane has not settled."""


class TruncationInsufficient(FockError):
    """A truncated series has a last term that is too large."""


class ConvergenceFailure(FockError):
    """A matrix decomposition did not converge."""


class NotCompact(FockError):
    """Schatten diagnostics requested for an operator that is not compact."""


class WitnessDisagreement(FockError):
    """Numerical evidence contradicts the rule-based classification."""


class ModeMismatch(FockError):
    """Carleson scan mode is not valid for the given exponents."""


class ConfigError(FockError):
    """A run configuration does not satisfy its schema."""


class ScenarioError(FockError):
    """A scenario failed while executing."""
