"""Error taxonomy shared across the package.

Exit-code mapping (used by the CLI): ConfigError -> 2, DataError -> 3,
NumericalError -> 4.
"""


class ProgpipeError(Exception):
    """Base class for all package errors."""


class ConfigError(ProgpipeError):
    """Bad configuration: unknown key, type mismatch, missing path."""


class DataError(ProgpipeError):
    """Bad input data: schema violation, unparsable cell, bad split."""


class NumericalError(ProgpipeError):
    """A solver failed to converge or produced a degenerate result."""
