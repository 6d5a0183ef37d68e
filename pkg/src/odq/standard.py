"""Feature standard model, alias maps and feature weights.

Weights are kept as exact fractions so that the 100-point budget is met
exactly and a mandatory weight equals the sum of the optional weights with
no rounding drift. Convert with ``float()`` at the reporting edge.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Any

from odq.errors import AliasCollision, EmptyFeatureSet, ParseError, ValidationError

TOTAL_POINTS = Fraction(100)


@total_ordering
@dataclass(frozen=True)
class FeaturePath:
    """Dot-separated feature name, e.g. ``umístění.adresa``.

    Equality is exact: case and diacritics are significant.
    """

    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValidationError("feature path needs at least one segment")
        for seg in self.segments:
            if not isinstance(seg, str) or not seg:
                raise ValidationError(f"empty path segment in {self.segments!r}")
            if "." in seg:
                raise ValidationError(f"path segment {seg!r} contains '.'")

    @classmethod
    def parse(cls, text: str) -> FeaturePath:
        return cls(tuple(text.split(".")))

    def child(self, segment: str) -> FeaturePath:
        return FeaturePath(self.segments + (segment,))

    def __str__(self) -> str:
        return ".".join(self.segments)

    def __lt__(self, other: FeaturePath) -> bool:
        if not isinstance(other, FeaturePath):
            return NotImplemented
        return self.segments < other.segments


def as_path(value: FeaturePath | str) -> FeaturePath:
    return value if isinstance(value, FeaturePath) else FeaturePath.parse(value)


class Obligation(enum.Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"


@dataclass(frozen=True)
class FeatureSpec:
    path: FeaturePath
    obligation: Obligation


@dataclass(frozen=True)
class StandardSpec:
    standard_iri: str
    features: tuple[FeatureSpec, ...]

    def __post_init__(self) -> None:
        seen: set[FeaturePath] = set()
        for feat in self.features:
            if feat.path in seen:
                raise ValidationError(f"duplicate feature path {feat.path}")
            seen.add(feat.path)
        if not any(f.obligation is Obligation.MANDATORY for f in self.features):
            raise ValidationError("standard defines no mandatory feature")

    @property
    def mandatory(self) -> frozenset[FeaturePath]:
        return frozenset(f.path for f in self.features if f.obligation is Obligation.MANDATORY)

    @property
    def optional(self) -> frozenset[FeaturePath]:
        return frozenset(f.path for f in self.features if f.obligation is Obligation.OPTIONAL)

    @property
    def paths(self) -> tuple[FeaturePath, ...]:
        return tuple(f.path for f in self.features)


@dataclass(frozen=True)
class WeightTable(Mapping[FeaturePath, Fraction]):
    """Per-feature weights summing to exactly 100 points."""

    entries: Mapping[FeaturePath, Fraction]
    mandatory: frozenset[FeaturePath] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if sum(self.entries.values(), Fraction(0)) != TOTAL_POINTS:
            raise ValidationError("weights do not sum to 100")
        mand = [w for p, w in self.entries.items() if p in self.mandatory]
        opt = [w for p, w in self.entries.items() if p not in self.mandatory]
        if mand and opt and min(mand) < max(opt):
            raise ValidationError("an optional weight exceeds a mandatory weight")

    def __getitem__(self, key: FeaturePath) -> Fraction:
        return self.entries[key]

    def __iter__(self) -> Iterator[FeaturePath]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def is_mandatory(self, path: FeaturePath) -> bool:
        return path in self.mandatory


def _split_weights(
    mandatory: Iterable[FeaturePath], optional: Iterable[FeaturePath]
) -> WeightTable:
    mandatory = sorted(set(mandatory))
    optional = sorted(set(optional))
    n_mf, n_of = len(mandatory), len(optional)
    entries: dict[FeaturePath, Fraction] = {}
    if n_mf and n_of:
        w_mf = TOTAL_POINTS / (n_mf + 1)
        w_of = w_mf / n_of
    elif n_mf:
        # no optional features: the "+1" share has nowhere to go
        w_mf, w_of = TOTAL_POINTS / n_mf, Fraction(0)
    elif n_of:
        w_mf, w_of = Fraction(0), TOTAL_POINTS / n_of
    else:
        raise EmptyFeatureSet("cannot weight an empty feature set")
    for p in mandatory:
        entries[p] = w_mf
    for p in optional:
        entries[p] = w_of
    return WeightTable(entries, frozenset(mandatory))


def spec_weights(spec: StandardSpec) -> WeightTable:
    """Weights of the standard's own features."""
    return _split_weights(spec.mandatory, spec.optional)


def local_weights(present_paths: Iterable[FeaturePath], spec: StandardSpec) -> WeightTable:
    """Weights over the features a dataset actually provides.

    Spec-mandatory features that are present stay mandatory; every other
    present feature counts as optional. Missing spec features get no entry.
    """
    present = frozenset(present_paths)
    if not present:
        raise EmptyFeatureSet("dataset provides no features")
    mandatory = present & spec.mandatory
    return _split_weights(mandatory, present - mandatory)


@dataclass(frozen=True)
class AliasMap:
    """Dataset-side path -> standard-side path."""

    entries: Mapping[FeaturePath, FeaturePath] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)


def apply_alias(alias: AliasMap, paths: Iterable[FeaturePath]) -> frozenset[FeaturePath]:
    out: dict[FeaturePath, FeaturePath] = {}
    for path in sorted(set(paths)):
        target = alias.entries.get(path, path)
        if target in out:
            raise AliasCollision(f"{out[target]} and {path} both map to {target}")
        out[target] = path
    return frozenset(out)


def _load_json(document: str | bytes, what: str) -> Any:
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{what} is not valid UTF-8: {exc}") from exc
    try:
        return json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} is not valid JSON: {exc}") from exc


def _parse_path(raw: Any, what: str) -> FeaturePath:
    if not isinstance(raw, str):
        raise ParseError(f"{what}: path must be a string, got {raw!r}")
    try:
        return FeaturePath.parse(raw)
    except ValidationError as exc:
        raise ParseError(f"{what}: {exc}") from exc


def load_standard(document: str | bytes) -> StandardSpec:
    doc = _load_json(document, "standard")
    if not isinstance(doc, dict) or not isinstance(doc.get("standard_iri"), str):
        raise ParseError("standard must be an object with a string 'standard_iri'")
    raw_features = doc.get("features")
    if not isinstance(raw_features, list):
        raise ParseError("standard 'features' must be a list")
    features = []
    for i, item in enumerate(raw_features):
        if not isinstance(item, dict):
            raise ParseError(f"features[{i}] must be an object")
        path = _parse_path(item.get("path"), f"features[{i}]")
        try:
            obligation = Obligation(item.get("obligation"))
        except ValueError:
            raise ParseError(
                f"features[{i}].obligation must be 'mandatory' or 'optional'"
            ) from None
        features.append(FeatureSpec(path, obligation))
    return StandardSpec(doc["standard_iri"], tuple(features))


def load_alias(document: str | bytes) -> AliasMap:
    doc = _load_json(document, "alias map")
    if not isinstance(doc, dict) or not isinstance(doc.get("aliases"), dict):
        raise ParseError("alias map must be an object with an 'aliases' object")
    entries = {
        _parse_path(src, "aliases key"): _parse_path(dst, f"aliases[{src!r}]")
        for src, dst in doc["aliases"].items()
    }
    return AliasMap(entries)


def dump_standard(spec: StandardSpec) -> str:
    return json.dumps(
        {
            "standard_iri": spec.standard_iri,
            "features": [
                {"path": str(f.path), "obligation": f.obligation.value} for f in spec.features
            ],
        },
        ensure_ascii=False,
        indent=2,
    )
