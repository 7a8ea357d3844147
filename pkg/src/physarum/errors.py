"""Shared exception types."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration: bad file syntax, bad value, or failed validation.

    ``violations`` holds structured findings when the error came from
    validation; it is empty for plain syntax errors.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)
