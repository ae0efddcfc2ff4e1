"""Exception hierarchy shared across the toolkit."""


class ForgeMineError(Exception):
    """Base class for all toolkit errors."""


class InputError(ForgeMineError):
    """An input file is missing, unreadable, or structurally unusable."""


class ConfigError(ForgeMineError):
    """A configuration value is missing or invalid at startup."""


class TransportError(ForgeMineError):
    """A network-level failure: DNS, connect, TLS, timeout."""


class AuthError(ForgeMineError):
    """The remote service rejected our credentials."""


class QuotaError(ForgeMineError):
    """The remote service throttled or exhausted our quota."""


class StoreError(ForgeMineError):
    """The corpus store could not be read or written."""


class StageOrderError(ForgeMineError):
    """A pipeline stage was invoked before its upstream stages completed."""

    def __init__(self, stage: str, missing: str):
        super().__init__(f"stage {stage!r} requires {missing!r} to complete first")
        self.stage = stage
        self.missing = missing


class ConfigDriftError(ForgeMineError):
    """A stage's recorded config hash differs from the current config."""


class EmptyRepositoryError(ForgeMineError):
    """The repository has no branches or no commits."""


class ExtractionError(ForgeMineError):
    """Git metadata could not be read from a repository."""


class SeparationError(ForgeMineError):
    """Logistic fit diverged: the outcome is perfectly separable."""


class RankDeficientError(ForgeMineError):
    """The design matrix has linearly dependent columns."""

    def __init__(self, columns):
        super().__init__(f"design matrix is rank deficient; offending columns: {columns}")
        self.columns = list(columns)
