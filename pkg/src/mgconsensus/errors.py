"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or input file is malformed."""


class NotSymmetricError(ConfigError):
    """Adjacency matrix is not symmetric."""


class SelfLoopError(ConfigError):
    """Adjacency matrix has a nonzero diagonal entry."""


class DisconnectedError(ConfigError):
    """Communication graph is not connected."""


class BudgetInfeasibleError(ValueError):
    """Attack budget admits no data-flow guarantee (duty-cycle ratio >= 1)."""


class AttemptSpacingError(ValueError):
    """Transmission attempts are closer together than the channel minimum."""


class ClockNotExpiredError(RuntimeError):
    """Edge controller update requested before its clock reached zero."""


class MissingTimestampError(ValueError):
    """Timestamp ledger entry lacks a value required by the adaptation law."""


class CriterionViolatedError(ValueError):
    """Design inequalities do not hold; no certificate can be issued."""


class EmptyMgError(ValueError):
    """A microgrid must contain at least one generator."""


class InconsistentDroopsError(ValueError):
    """Droop coefficients are not inversely proportional to ratings."""
