"""Exception hierarchy shared across the package."""


class IHGNNError(Exception):
    """Base class for every error raised by this package."""


class InputError(IHGNNError, ValueError):
    """An argument is outside the domain of the operation."""


class ConfigurationError(IHGNNError, ValueError):
    """Model or run configuration is inconsistent with the data."""


class DatasetLoadError(IHGNNError, OSError):
    """A dataset file is missing or unreadable."""


class DatasetFormatError(IHGNNError, ValueError):
    """A dataset file is readable but structurally invalid.

    Carries the offending file and 1-based line number when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class NumericCheckError(IHGNNError, ArithmeticError):
    """A numerical verification (gradient check, finiteness) failed."""
