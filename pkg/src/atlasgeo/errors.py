"""Exception hierarchy shared by every module."""


class AtlasGeoError(Exception):
    """Base class for all errors raised by atlasgeo."""


class UsageError(AtlasGeoError, ValueError):
    """Bad arguments: wrong dimensions, unknown names, invalid parameters."""


class DomainError(AtlasGeoError, ValueError):
    """A point lies outside the domain of a chart or a manifold."""


class FormatError(AtlasGeoError, ValueError):
    """A file or document does not follow its declared format."""


class FingerprintError(AtlasGeoError):
    """A graph was built with a different atlas than the one supplied."""


class NoPathError(AtlasGeoError):
    """Start and goal lie in different connected components."""


class NoConnectionError(AtlasGeoError):
    """A query node cannot be attached because its chart has no nodes."""
