"""Exception types raised across the pipeline."""


class PeakDemandError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(PeakDemandError, ValueError):
    """An argument or record value is outside its allowed domain."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class SchemaError(PeakDemandError):
    """A delimited file does not follow its column schema."""

    def __init__(self, message, row=None, column=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row
        self.column = column


class DuplicateKeyError(PeakDemandError):
    def __init__(self, key, row):
        super().__init__(f"row {row}: duplicate key {key!r}")
        self.key = key
        self.row = row


class JoinError(PeakDemandError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        shown = ", ".join(d.isoformat() for d in self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
        super().__init__(f"demand dates missing from climate data: {shown}{more}")


class InsufficientDataError(PeakDemandError):
    pass


class DegenerateBlockError(PeakDemandError):
    """Block demand has zero spread, so it cannot be standardized."""


class SupportError(PeakDemandError):
    """Observations fall outside the support of a fitted GEV."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"observations outside GEV support at indices {self.indices}")


class SingularDesignError(PeakDemandError):
    pass


class ConfigError(PeakDemandError):
    pass
