class LangevinError(Exception):
    """Raise when any anticipated failure occurs in the package."""


class BoundViolationError(LangevinError):
    """Raise when a verified inequality fails."""

    def __init__(self, message, inputs=None):
        super().__init__(message)
        self.inputs = inputs or {}


class ConfigError(LangevinError):
    """Raise when a configuration file is malformed or incomplete."""


class DatasetError(LangevinError):
    """Raise when a dataset cannot be ingested."""


class DimensionError(LangevinError):
    """Raise when vector or matrix dimensions do not match."""


class DivergenceError(LangevinError):
    """Raise when a chain state stops being finite."""

    def __init__(self, message, k=None, state=None):
        super().__init__(message)
        self.k = k
        self.state = state


class EmptySampleError(LangevinError):
    """Raise when an empirical sample has no points."""


class InsufficientConstantsError(LangevinError):
    """Raise when a bound or tuning rule lacks a constant it needs."""

    def __init__(self, symbol, rule):
        msg = "Rule {} needs the constant {}".format(rule, symbol)
        super().__init__(msg)
        self.symbol = symbol
        self.rule = rule


class ModelError(LangevinError):
    """Raise when model parameters are invalid."""


class OracleError(LangevinError):
    """Raise when a stochastic oracle is misconfigured or misused."""


class StepSizeError(LangevinError):
    """Raise when a step size is outside its admissible range."""


class TuningError(LangevinError):
    """Raise when a step size cannot be tuned."""


class LangevinWarning(UserWarning):
    """Warn when a computation can continue but its result needs care."""


class AdmissibilityWarning(LangevinWarning):
    """Warn when a step plan breaks a theorem's hypotheses."""


class HeuristicBoundWarning(LangevinWarning):
    """Warn when a bound relies on a constant that may not exist."""


class AcceptanceWarning(LangevinWarning):
    """Warn when a Metropolis chain's acceptance rate leaves its band."""
