"""Exception types shared across the package."""


class UnicompError(Exception):
    """Base class for every error this package raises deliberately."""


class DegenerateFeatureError(UnicompError):
    """A feature vector has zero norm and therefore no direction."""


class SelectionError(UnicompError):
    """A selection set is empty, contains duplicates, or is out of range."""


class BudgetError(UnicompError):
    """A token budget cannot satisfy the allocation constraints."""


class ConfigError(UnicompError):
    """Conflicting or incomplete compression configuration."""


class ContainerError(UnicompError):
    """Malformed binary tensor container."""
