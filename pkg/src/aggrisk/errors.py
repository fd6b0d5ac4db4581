"""Exception hierarchy shared across the package."""


class AggriskError(Exception):
    """Base class for all package errors."""


class EventOutOfRangeError(AggriskError, IndexError):
    """An event id falls outside [1, catalog_size]."""


class PortfolioInvalidError(AggriskError, ValueError):
    """Input data failed validation; carries the violation report."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        extra = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"portfolio validation failed: {lines}{extra}")


class DataFormatError(AggriskError, ValueError):
    """Base class for file format problems."""


class FormatMismatchError(DataFormatError):
    """File does not carry the expected magic / kind marker."""


class VersionMismatchError(DataFormatError):
    """File carries a format version this build does not read."""


class TruncatedPayloadError(DataFormatError):
    """File ended before the payload announced in its header."""
