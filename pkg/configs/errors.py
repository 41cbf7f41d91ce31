"""
Module Name: errors.py
Description: Exception types carrying the numeric error codes defined in configs.config.
Date: 2026-10-19
"""

from configs.config import (
    ERROR_MSGS, CONFIG_ERROR, DIMENSION_MISMATCH, INDEX_OUT_OF_RANGE, UPLINK_COUNT,
    EIGEN_BREAKDOWN, PROBLEM_MISMATCH, UNKNOWN_KEY, BYTE_MISMATCH
)


class PowerEFError(Exception):
    """Base error; `errno` doubles as the CLI exit code."""

    errno = CONFIG_ERROR

    def __init__(self, detail="", errno=None):
        if errno is not None:
            self.errno = errno
        self.detail = detail
        message = ERROR_MSGS.get(self.errno, "Error.")
        super().__init__(f"{message} {detail}".strip())


class ConfigurationError(PowerEFError):
    errno = CONFIG_ERROR


class UnknownKeyError(ConfigurationError):
    errno = UNKNOWN_KEY


class DimensionError(PowerEFError):
    errno = DIMENSION_MISMATCH


class ClientIndexError(PowerEFError):
    errno = INDEX_OUT_OF_RANGE


class UplinkCountError(PowerEFError):
    errno = UPLINK_COUNT


class EigenBreakdownError(PowerEFError):
    errno = EIGEN_BREAKDOWN


class ProblemMismatchError(PowerEFError):
    errno = PROBLEM_MISMATCH


class ByteMismatchError(PowerEFError):
    errno = BYTE_MISMATCH
