"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`PolarProxyError`.
The three intermediate classes map onto the command-line exit codes
(data error 1, configuration error 2, numerical failure 3).
"""


class PolarProxyError(Exception):
    exit_code = 1


class DataError(PolarProxyError):
    """Input data violates a schema or invariant."""

    exit_code = 1

    def __init__(self, message, line=None, source=None):
        self.detail = message
        self.line = line
        self.source = source
        if source is not None:
            prefix = f"{source}:{line}" if line is not None else str(source)
        else:
            prefix = f"line {line}" if line is not None else ""
        super().__init__(f"{prefix}: {message}" if prefix else message)

    def located(self, line=None, source=None):
        """Copy of this error with missing location fields filled in."""
        return type(self)(self.detail,
                          line=self.line if self.line is not None else line,
                          source=self.source if self.source is not None else source)


class ConfigError(PolarProxyError):
    exit_code = 2


class NumericalError(PolarProxyError):
    exit_code = 3


# ingest
class MalformedHeader(DataError):
    pass


class ValueOutOfRange(DataError):
    pass


class DuplicateKey(DataError):
    pass


class UnmatchedProvince(DataError):
    pass


# entropy
class InvalidDistribution(DataError):
    pass


class LengthMismatch(DataError):
    pass


class WeightOutOfRange(DataError):
    pass


class MissingProfile(DataError):
    pass


# controls
class ZeroTotalGdp(DataError):
    pass


# geometry
class EmptyDepthMap(DataError):
    pass


# regress
class MissingColumn(DataError):
    pass


class EmptyAfterFiltering(DataError):
    pass


class BaselineLevelAbsent(ConfigError):
    pass


class RankDeficient(NumericalError):
    """Design matrix is not of full column rank.

    ``columns`` lists every column involved in a detected linear dependency.
    """

    def __init__(self, message, columns=()):
        self.columns = tuple(columns)
        super().__init__(message)


class InvalidConfig(ConfigError):
    pass
