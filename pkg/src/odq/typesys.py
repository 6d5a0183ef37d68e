"""Value type inference and per-column type profiles.

Ten types are recognised: the five primitive ones (integer, float, bool,
string, null) and five semantic types that are only ever inferred from text
(URL, e-mail, Czech address, ``POINT (x y)`` coordinates, phone number).
Text is always promoted lexically, whatever the source format, so ``"42"``
infers as an integer both in CSV and in JSON.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from odq.errors import EmptyColumn
from odq.ingest import FeatureColumn, Kind, Value
from odq.standard import FeaturePath


class DataType(enum.Enum):
    INTEGER = "Integer"
    FLOAT = "Float"
    BOOL = "Bool"
    STRING = "String"
    NULL = "Null"
    URL = "Url"
    EMAIL = "Email"
    ADDRESS = "Address"
    POINT = "Point"
    PHONE_NUMBER = "PhoneNumber"


# All patterns are matched against the whole stripped value.
URL_RE = re.compile(
    r"(?:https?|ftp)://"
    r"(?:[^\s/?#@]+@)?"
    r"(?:localhost|\d{1,3}(?:\.\d{1,3}){3}|(?:[\w-]+\.)+[\w-]{2,})"
    r"(?::\d{1,5})?"
    r"(?:[/?#]\S*)?",
    re.IGNORECASE,
)
EMAIL_RE = re.compile(r"[^\s@]+@(?:[^\s@.]+\.)+[^\s@.]+")
POINT_RE = re.compile(r"POINT\s*\(\s*-?\d+(\.\d+)?\s+-?\d+(\.\d+)?\s*\)")
PHONE_CZ_RE = re.compile(r"(\+420\s?)?\d{3}\s?\d{3}\s?\d{3}")
PHONE_INTL_RE = re.compile(r"\+\d{1,3}\s?\d{6,12}")
ADDRESS_RE = re.compile(r"[A-Za-zÀ-ž][A-Za-zÀ-ž .'-]*\s\d+([/]\d+)?[a-z]?")
INTEGER_RE = re.compile(r"[+-]?\d+")
# decimal point or (Czech) decimal comma, optional exponent
FLOAT_RE = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+,\d+|\d+)(?:[eE][+-]?\d+)?")
BOOL_RE = re.compile(r"true|false", re.IGNORECASE)

_TEXT_RULES: tuple[tuple[DataType, tuple[re.Pattern[str], ...]], ...] = (
    (DataType.URL, (URL_RE,)),
    (DataType.EMAIL, (EMAIL_RE,)),
    (DataType.POINT, (POINT_RE,)),
    (DataType.PHONE_NUMBER, (PHONE_CZ_RE, PHONE_INTL_RE)),
    (DataType.ADDRESS, (ADDRESS_RE,)),
    (DataType.INTEGER, (INTEGER_RE,)),
    (DataType.FLOAT, (FLOAT_RE,)),
    (DataType.BOOL, (BOOL_RE,)),
)

_NATIVE = {
    Kind.NULL: DataType.NULL,
    Kind.BOOL: DataType.BOOL,
    Kind.INTEGER: DataType.INTEGER,
    Kind.FLOAT: DataType.FLOAT,
}


def infer_text_type(text: str) -> DataType:
    stripped = text.strip()
    if not stripped:
        return DataType.NULL
    for dtype, patterns in _TEXT_RULES:
        if any(p.fullmatch(stripped) for p in patterns):
            return dtype
    return DataType.STRING


def infer_type(value: Value) -> DataType:
    if value.kind is Kind.TEXT:
        return infer_text_type(value.payload)
    return _NATIVE[value.kind]


@dataclass(frozen=True)
class TypeProfile:
    path: FeaturePath
    distinct_types: frozenset[DataType]
    null_count: int
    value_count: int

    @property
    def type_count(self) -> int:
        return len(self.distinct_types)

    @property
    def non_null_count(self) -> int:
        return self.value_count - self.null_count


def profile_column(column: FeatureColumn) -> TypeProfile:
    if not column.values:
        raise EmptyColumn(f"column {column.path} has no values")
    types = [infer_type(v) for v in column.values]
    return TypeProfile(
        column.path,
        frozenset(types),
        sum(t is DataType.NULL for t in types),
        len(types),
    )
