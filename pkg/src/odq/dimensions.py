"""The five quality dimensions and the per-dataset quality report.

Each dimension yields its own 0-100 score; scores are never folded into one
overall number. The four weighted dimensions keep a per-feature breakdown
whose contributions add up to the dimension score.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from odq.errors import EmptyDataset, ValidationError
from odq.ingest import Dataset, FileFormat, present_paths
from odq.standard import (
    AliasMap,
    FeaturePath,
    StandardSpec,
    WeightTable,
    apply_alias,
    local_weights,
    spec_weights,
)
from odq.typesys import profile_column

NOT_COMPUTED_EMPTY = "not computed: empty dataset"


class Dimension(enum.Enum):
    FILE_FORMAT = "file_format"
    SCHEMA_ACCURACY = "schema_accuracy"
    SCHEMA_COMPLETENESS = "schema_completeness"
    TYPE_CONSISTENCY = "type_consistency"
    DATA_COMPLETENESS = "data_completeness"


DIMENSIONS = tuple(Dimension)


def round_half_up(points: float, places: int = 2) -> Decimal:
    return Decimal(repr(points)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class Score:
    points: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.points <= 100.0:
            raise ValidationError(f"score {self.points} outside [0, 100]")

    def rounded(self) -> Decimal:
        return round_half_up(self.points)

    def __str__(self) -> str:
        return str(self.rounded())


@dataclass(frozen=True)
class Contribution:
    """One feature's share of a dimension score.

    ``matched`` is a 0/1 flag for the schema dimensions and a ratio
    (1/t or non-null share) for the value dimensions.
    """

    weight: float
    matched: bool | float
    points: float
    detail: str = ""


@dataclass(frozen=True)
class DimensionResult:
    dimension: Dimension
    score: Score | None
    per_feature: Mapping[FeaturePath, Contribution] = field(default_factory=dict)
    note: str = ""

    @property
    def computed(self) -> bool:
        return self.score is not None


@dataclass(frozen=True)
class QualityReport:
    dataset_id: str
    results: tuple[DimensionResult, ...]
    source_format: FileFormat = FileFormat.UNKNOWN
    record_count: int = 0
    feature_count: int = 0

    def __post_init__(self) -> None:
        dims = [r.dimension for r in self.results]
        if sorted(dims, key=DIMENSIONS.index) != list(DIMENSIONS):
            raise ValidationError("a report needs exactly one result per dimension")

    def __getitem__(self, dimension: Dimension) -> DimensionResult:
        for result in self.results:
            if result.dimension is dimension:
                return result
        raise KeyError(dimension)

    def points(self) -> dict[Dimension, float | None]:
        return {
            r.dimension: (r.score.points if r.score is not None else None) for r in self.results
        }


def _score(total: Fraction) -> Score:
    # exact arithmetic keeps the sum inside [0, 100]; clamp guards float conversion only
    return Score(min(100.0, max(0.0, float(total))))


FILE_FORMAT_POINTS: dict[FileFormat, int] = {
    FileFormat.JSON: 100,
    FileFormat.JSON_LD: 100,
    FileFormat.GEOJSON: 100,
    FileFormat.XML: 75,
    FileFormat.GML: 75,
    FileFormat.KML: 75,
    FileFormat.RDF: 75,
    FileFormat.CSV: 50,
    FileFormat.XLS: 25,
    FileFormat.XLSX: 25,
    FileFormat.PDF: 0,
    FileFormat.TXT: 0,
    FileFormat.UNKNOWN: 0,
}


def score_file_format(fmt: FileFormat) -> Score:
    return Score(float(FILE_FORMAT_POINTS[fmt]))


def file_format_result(fmt: FileFormat) -> DimensionResult:
    return DimensionResult(Dimension.FILE_FORMAT, score_file_format(fmt), note=fmt.value)


def _schema_result(
    dimension: Dimension,
    weights: WeightTable,
    found: frozenset[FeaturePath],
    spec: StandardSpec,
    via: Mapping[FeaturePath, FeaturePath] | None = None,
) -> DimensionResult:
    total = Fraction(0)
    per_feature = {}
    for path in spec.paths:
        w = weights[path]
        hit = path in found
        gained = w if hit else Fraction(0)
        total += gained
        kind = "mandatory" if weights.is_mandatory(path) else "optional"
        if not hit:
            detail = f"{kind}; missing"
        elif via and via.get(path, path) != path:
            detail = f"{kind}; provided as {via[path]}"
        else:
            detail = f"{kind}; present"
        per_feature[path] = Contribution(float(w), hit, float(gained), detail)
    return DimensionResult(dimension, _score(total), per_feature)


def score_schema_accuracy(dataset: Dataset, spec: StandardSpec) -> DimensionResult:
    """Points for every standard feature present under its exact name."""
    return _schema_result(
        Dimension.SCHEMA_ACCURACY, spec_weights(spec), present_paths(dataset), spec
    )


def score_schema_completeness(
    dataset: Dataset, alias: AliasMap, spec: StandardSpec
) -> DimensionResult:
    """Like schema accuracy, but after renaming dataset features via ``alias``."""
    present = present_paths(dataset)
    mapped = apply_alias(alias, present)
    via = {alias.entries[p]: p for p in present if p in alias.entries}
    return _schema_result(
        Dimension.SCHEMA_COMPLETENESS, spec_weights(spec), mapped, spec, via
    )


def _value_weights(dataset: Dataset, spec: StandardSpec) -> WeightTable:
    if dataset.record_count == 0:
        raise EmptyDataset("dataset has no records")
    return local_weights(present_paths(dataset), spec)


def _kind(weights: WeightTable, path: FeaturePath) -> str:
    return "mandatory" if weights.is_mandatory(path) else "optional"


def score_type_consistency(dataset: Dataset, spec: StandardSpec) -> DimensionResult:
    weights = _value_weights(dataset, spec)
    total = Fraction(0)
    per_feature = {}
    for path in sorted(weights):
        profile = profile_column(dataset.columns[path])
        ratio = Fraction(1, profile.type_count)
        gained = weights[path] * ratio
        total += gained
        types = ", ".join(sorted(t.value for t in profile.distinct_types))
        per_feature[path] = Contribution(
            float(weights[path]), float(ratio), float(gained),
            f"{_kind(weights, path)}; types: {types}",
        )
    return DimensionResult(Dimension.TYPE_CONSISTENCY, _score(total), per_feature)


def score_data_completeness(dataset: Dataset, spec: StandardSpec) -> DimensionResult:
    weights = _value_weights(dataset, spec)
    total = Fraction(0)
    per_feature = {}
    for path in sorted(weights):
        profile = profile_column(dataset.columns[path])
        ratio = Fraction(profile.non_null_count, profile.value_count)
        gained = weights[path] * ratio
        total += gained
        per_feature[path] = Contribution(
            float(weights[path]), float(ratio), float(gained),
            f"{_kind(weights, path)}; {profile.non_null_count}/{profile.value_count} non-null",
        )
    return DimensionResult(Dimension.DATA_COMPLETENESS, _score(total), per_feature)


def not_computed(dimension: Dimension, reason: str) -> DimensionResult:
    return DimensionResult(dimension, None, {}, f"not computed: {reason}")


def assess(
    dataset: Dataset,
    spec: StandardSpec,
    alias: AliasMap | None = None,
    dataset_id: str = "dataset",
) -> QualityReport:
    alias = alias or AliasMap()
    results = [
        file_format_result(dataset.source_format),
        score_schema_accuracy(dataset, spec),
        score_schema_completeness(dataset, alias, spec),
    ]
    for dim, scorer in (
        (Dimension.TYPE_CONSISTENCY, score_type_consistency),
        (Dimension.DATA_COMPLETENESS, score_data_completeness),
    ):
        try:
            results.append(scorer(dataset, spec))
        except EmptyDataset:
            results.append(DimensionResult(dim, None, {}, NOT_COMPUTED_EMPTY))
    return QualityReport(
        dataset_id,
        tuple(results),
        dataset.source_format,
        dataset.record_count,
        len(present_paths(dataset)),
    )


def format_only_report(dataset_id: str, fmt: FileFormat, reason: str) -> QualityReport:
    """Report for a distribution that can be scored by format but not parsed."""
    return QualityReport(
        dataset_id,
        (file_format_result(fmt),) + tuple(not_computed(d, reason) for d in DIMENSIONS[1:]),
        fmt,
    )
