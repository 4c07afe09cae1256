"""Exception hierarchy shared across the package.

The split that matters operationally: InputError is never retried and maps
to 4xx at the service boundary; TransportError is retryable and maps to 503.
"""


class ArchSeekError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ArchSeekError):
    """Caller handed us something invalid (bad query, bad weights, bad file)."""


class TransportError(ArchSeekError):
    """A remote provider was unreachable or returned a retryable failure."""


class ConfigurationError(ArchSeekError):
    """Provider or database configuration is inconsistent (e.g. wrong dim)."""


class AugmentationError(ArchSeekError):
    """A single asset's critique could not be produced or parsed."""


class StateError(ArchSeekError):
    """An operation was called in a session state that cannot support it."""
