"""Interoperability-oriented quality assessment of open datasets."""

from odq.errors import (
    AliasCollision,
    EmptyColumn,
    EmptyDataset,
    EmptyFeatureSet,
    OdqError,
    ParseError,
    UnsupportedFormat,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "AliasCollision",
    "EmptyColumn",
    "EmptyDataset",
    "EmptyFeatureSet",
    "OdqError",
    "ParseError",
    "UnsupportedFormat",
    "ValidationError",
    "__version__",
]
