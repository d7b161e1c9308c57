"""Exception types raised across the package."""


class PureUCBError(Exception):
    """Base class for all package errors."""


class NoFiniteMoment(PureUCBError):
    """A requested closed-form moment does not exist for the distribution."""


class MomentDiverges(PureUCBError):
    """Monte Carlo moment of order q requested with q at or above the supremum."""


class NoThreshold(PureUCBError):
    """No index up to the scan limit makes the bonus stay below the level."""


class BudgetTooSmall(PureUCBError):
    """Total sampling budget below the number of arms."""


class NonUniqueBest(PureUCBError):
    """Problem configuration without a unique maximal mean."""


class DegenerateConfig(PureUCBError):
    """Mean-shifting parameters that produce no gap at all."""


class MeanMismatch(PureUCBError):
    """Mixed-configuration bases whose centered means disagree."""


class GammaOutOfRange(PureUCBError):
    """gamma0 outside (0, gamma) for a lower-bound estimate."""


class QTooSmall(PureUCBError):
    """Moment order too small for the requested constant or bound."""


class Infeasible(PureUCBError):
    """Budget constant too small for any feasible gamma0."""


class BetaTooLarge(PureUCBError):
    """Gap-shrinkage rate at or beyond the admissible range."""


class TraceMissing(PureUCBError):
    """Trace-based verification requested on a run without a captured trace."""


class CoupledAlgorithm(PureUCBError):
    """Trace-based verification requested for a non-decoupled algorithm."""


class TraceTooLarge(PureUCBError):
    """Full-trace capture refused because the budget exceeds the memory guard."""


class SchemaMismatch(PureUCBError):
    """Input rows or documents that do not match the expected schema."""


class ValidationError(PureUCBError):
    """Experiment-config document rejected; message carries the pointer path."""
