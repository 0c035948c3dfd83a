"""Shared exception types, mapped onto CLI exit codes."""


class DataError(ValueError):
    """Invalid input data or configuration (CLI exit code 2)."""


class ResourceLimitError(RuntimeError):
    """Instance exceeds a hard resource guard (CLI exit code 3)."""
