"""Exception hierarchy shared by all modules."""


class OdqError(Exception):
    """Base class for every error raised by odq."""


class ParseError(OdqError):
    """Malformed standard, alias map, manifest or dataset content."""


class ValidationError(OdqError):
    """Well-formed input that violates a domain invariant."""


class UnsupportedFormat(OdqError):
    """Format is recognised (and scoreable) but cannot be parsed."""


class AliasCollision(OdqError):
    """Two co-occurring dataset paths were mapped onto one standard path."""


class EmptyFeatureSet(OdqError):
    pass


class EmptyColumn(OdqError):
    pass


class EmptyDataset(OdqError):
    """Value-level dimensions are undefined for a dataset without records."""
