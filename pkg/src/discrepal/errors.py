"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad user input: config keys, CLI flags, file contents, index lists."""


class NumericalError(RuntimeError):
    """A numerical routine produced an unusable result (bad residual,
    non-real spectrum, degenerate eigenvector norm)."""
