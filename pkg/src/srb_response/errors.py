"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: ConfigError -> 2,
HypothesisError -> 3, ConvergenceError -> 4.
"""


class SrbResponseError(Exception):
    """Base class for all package errors."""


class ConfigError(SrbResponseError):
    """Invalid or unreadable experiment configuration."""


class HypothesisError(SrbResponseError):
    """A mathematical hypothesis of the method is violated (e.g. circle radius too large)."""


class ConvergenceError(SrbResponseError):
    """A numerical procedure failed to converge within its budget."""


class PanelBudgetExceeded(ConvergenceError):
    """An oscillatory quadrature would need more panels than the configured budget."""
