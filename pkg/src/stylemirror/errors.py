"""Exception types shared across the package."""


class StyleMirrorError(Exception):
    """Base class for all library errors."""


class EmptyCorpusError(StyleMirrorError):
    pass


class InvalidSupportError(StyleMirrorError):
    pass


class EmbeddingError(StyleMirrorError):
    """Raised for inputs a provider cannot embed (e.g. empty token lists)."""


class ZeroVectorError(StyleMirrorError):
    """Raised when cosine similarity is requested against a zero vector."""


class RemoteProviderError(StyleMirrorError):
    """Transport or protocol failure talking to a remote embedding server."""


class NoPatternsError(StyleMirrorError):
    pass


class DegeneratePatternError(StyleMirrorError):
    pass


class EmptyInputError(StyleMirrorError):
    pass


class ConfigError(StyleMirrorError):
    pass


class StateFormatError(StyleMirrorError):
    """Raised for unreadable, corrupt, or version-mismatched state files."""
