"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the physical/mathematical domain of an operation."""


class ConfigError(ValueError):
    """A run configuration document is malformed or incomplete."""


class ConvergenceError(RuntimeError):
    """A numerical refinement failed to converge within its budget."""
