"""Exception types shared across the package."""


class SieveqaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SieveqaError):
    """A data file could not be parsed in its declared format."""


class SchemaError(SieveqaError):
    """A parsed record violates the dataset schema (missing field,
    out-of-range index, dangling document reference)."""


class DimensionMismatchError(SieveqaError):
    """Two embedding vectors of different dimensions were compared."""


class ZeroVectorError(SieveqaError):
    """An all-zero embedding was passed where a direction is required;
    signals an embedding-provider fault."""


class ProviderUnavailableError(SieveqaError):
    """A similarity member references an embedding provider that is not
    registered or not reachable."""


class ReaderUnavailableError(SieveqaError):
    """A configured reader backend is not registered or not reachable."""


class UnknownQidError(SieveqaError):
    """The requested question id does not exist in the dataset."""
