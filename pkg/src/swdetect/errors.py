"""Exception hierarchy.

Everything raised on bad input derives from :class:`SwdError` (a
``ValueError``), so library callers can catch one type.  The CLI maps
:class:`DegenerateDataError` to its own exit code.
"""


class SwdError(ValueError):
    pass


class SignalTooShortError(SwdError):
    pass


class DegenerateDataError(SwdError):
    """Data is well-formed but cannot support the requested statistic/fit."""


class FormatError(SwdError):
    """A persisted artifact could not be parsed."""

    def __init__(self, message, path=None, line=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line


class MissingHeaderError(FormatError):
    pass


class MalformedHeaderError(FormatError):
    pass


class InconsistentFsError(FormatError):
    pass


class UnknownLabelError(FormatError):
    pass


class TruncatedRecordError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass
