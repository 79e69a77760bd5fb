class ConfigError(ValueError):
    """Invalid tree, market or run configuration."""


class DomainError(ValueError):
    """Operation called outside its domain (e.g. level 0 where k >= 1 is needed)."""


class UnsupportedDimension(ValueError):
    """Polyhedral dimension exceeds the configured bound."""


class InvariantError(ValueError):
    """A value violates a structural invariant (e.g. a normal outside the orthant)."""
