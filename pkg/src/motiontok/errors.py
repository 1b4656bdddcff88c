"""Shared exception types."""


class MotionTokError(Exception):
    """Base for package errors."""


class ConfigError(MotionTokError, ValueError):
    """Invalid or inconsistent configuration."""


class FormatError(MotionTokError, ValueError):
    """Malformed on-disk data. ``code`` names the failure class."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class InvariantError(MotionTokError):
    """A runtime contract was violated (CLI exit code 3)."""
