"""
Exceptions for the bearing_spectra package.
"""


class BearingSpectraError(Exception):
    """
    Base exception for the package.
    """


class UserInputValidationError(BearingSpectraError):
    """
    Exception raised when a user input is invalid.
    """


class DataError(BearingSpectraError):
    """
    Exception raised when data is malformed or insufficient.
    """


class ModelFormatError(DataError):
    """
    Exception raised when a persisted model cannot be read.
    """
