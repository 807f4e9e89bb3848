"""Exception Class."""  # numpydoc ignore=ES01,EX01

from __future__ import annotations


class BaseError(Exception):  # numpydoc ignore=ES01,EX01
    """Base class for exceptions in this module.

    This is the base class for all custom exceptions in the module. It inherits
    from Python's built-in Exception class and can be used to catch errors specific
    to this module. Subclasses provide a default message used when none is given.
    """

    default_message = "An error occurred"

    def __init__(self, error_message: str = "") -> None:  # numpydoc ignore=ES01,EX01
        """Init method.

        Parameters
        ----------
        error_message : str, optional
            The error message (default is the class default message).
        """
        super().__init__(error_message)
        self.error_message = error_message

    def __str__(self) -> str:
        """Return a string representation of the error."""
        return self.error_message or self.default_message


class FileError(BaseError):  # numpydoc ignore=ES01,EX01
    """Exception raised when a data file cannot be opened or decoded."""

    default_message = "The data file could not be read"


class SchemaError(BaseError):  # numpydoc ignore=ES01,EX01
    """Exception raised when a table does not fit the expected schema.

    Covers a missing or duplicated target column and targets that do not hold
    exactly two classes.
    """

    default_message = "The data does not match the expected schema"


class ParseError(BaseError):  # numpydoc ignore=ES01,EX01
    """Exception raised for cells that cannot be parsed.

    Raised for a non-numeric token or a missing value in a numeric column, and for
    malformed rows.
    """

    default_message = "Error occurred during parsing of the data file"


class InfeasibleRatio(BaseError):  # noqa: N818  numpydoc ignore=ES01,EX01
    """Exception raised when resampling would leave a class empty."""

    default_message = "The requested resampling leaves a class without samples"


class ConfigError(BaseError):  # numpydoc ignore=ES01,EX01
    """Exception raised for invalid configuration values."""

    default_message = "Invalid configuration"


class DimensionError(BaseError):  # numpydoc ignore=ES01,EX01
    """Exception raised when a feature vector has the wrong width."""

    default_message = "Feature vector does not match the number of predictors"


class DegenerateLabels(BaseError):  # noqa: N818  numpydoc ignore=ES01,EX01
    """Exception raised when one of the two classes has no samples."""

    default_message = "Both classes must be present"


class MismatchedData(BaseError):  # noqa: N818  numpydoc ignore=ES01,EX01
    """Exception raised when evaluation data differs from the training data."""

    default_message = "Data does not match the data the forest was trained on"


class RangeError(BaseError):  # numpydoc ignore=ES01,EX01
    """Exception raised for a numeric argument outside its domain."""

    default_message = "Value out of range"


class AdjustmentOutOfRange(RangeError):  # noqa: N818  numpydoc ignore=ES01,EX01
    """Exception raised when the adjustment factor is not applicable.

    The adjusted threshold requires n > p and p* > 1, i.e. the method's
    n >> p applicability bound.
    """

    default_message = "Adjustment factor requires n > p and p* > 1"


class VariableIndexError(BaseError, IndexError):  # numpydoc ignore=ES01,EX01
    """Exception raised for a variable index outside 0..p-1."""

    default_message = "Variable index out of range"


class DivisionByZero(BaseError, ZeroDivisionError):  # noqa: N818  numpydoc ignore=ES01,EX01
    """Exception raised when the imbalance ratio has an empty minority class."""

    default_message = "Imbalance ratio is undefined without minority samples"
