"""Exception types shared across the package."""


class DataError(ValueError):
    """Raised when an input file or record violates the documented schema.

    The message always names the offending file (or record id) and field.
    """


class ConfigError(ValueError):
    """Raised when a configuration asks for something unsupported or inconsistent."""
