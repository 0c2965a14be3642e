"""Exception types shared across the package."""


class ConfigurationError(Exception):
    """Inconsistent domain/density configuration (e.g. rejection sampling stalls)."""


class BudgetError(Exception):
    """A computation would exceed its declared size or enumeration budget."""


class DisconnectedGraphError(Exception):
    """The graph is disconnected where a connected one is required."""
