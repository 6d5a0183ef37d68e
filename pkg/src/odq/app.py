"""Batch assessment: manifests, fetching, and report serialisation."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from odq import __version__
from odq.dimensions import (
    DIMENSIONS,
    Contribution,
    Dimension,
    DimensionResult,
    QualityReport,
    Score,
    assess,
    format_only_report,
)
from odq.errors import OdqError, ParseError, UnsupportedFormat, ValidationError
from odq.ingest import HEAD_SIZE, FileFormat, detect_format, parse_dataset
from odq.standard import AliasMap, FeaturePath, StandardSpec, load_alias

log = logging.getLogger(__name__)

FETCH_TIMEOUT = 30.0
FETCH_RETRIES = 2
REPORT_SCHEMA_VERSION = 1
REPORT_FORMATS = ("json", "csv", "radar")


class FetchError(OdqError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    source: str
    format_hint: FileFormat | None = None
    record_root: str | None = None
    alias_file: str | None = None

    @property
    def is_url(self) -> bool:
        return self.source.lower().startswith(("http://", "https://"))


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self) -> None:
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValidationError("manifest ids must be unique")
        for entry in self.entries:
            if not entry.id or not entry.source:
                raise ValidationError("manifest entries need a non-empty id and source")


def load_manifest(document: str | bytes, base_dir: Path | None = None) -> Manifest:
    """Parse a manifest; relative local paths resolve against ``base_dir``."""
    try:
        doc = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise ParseError("manifest must be an object with an 'entries' list")

    def resolve(value: str | None) -> str | None:
        if value is None or base_dir is None or "://" in value:
            return value
        path = Path(value)
        return str(path if path.is_absolute() else base_dir / path)

    entries = []
    for i, raw in enumerate(doc["entries"]):
        if not isinstance(raw, dict):
            raise ParseError(f"entries[{i}] must be an object")
        try:
            hint = raw.get("format_hint")
            entries.append(
                ManifestEntry(
                    id=str(raw["id"]),
                    source=resolve(str(raw["source"])),
                    format_hint=FileFormat.from_tag(hint) if hint else None,
                    record_root=raw.get("record_root"),
                    alias_file=resolve(raw.get("alias_file")),
                )
            )
        except KeyError as exc:
            raise ParseError(f"entries[{i}] lacks {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ParseError(f"entries[{i}]: {exc}") from None
    return Manifest(tuple(entries))


# -- fetching -----------------------------------------------------------------


@dataclass(frozen=True)
class Fetched:
    content: bytes
    media_type: str | None = None


def _cache_key(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


def fetch_url(url: str, cache_dir: Path | None = None, session: Any = None) -> Fetched:
    """HTTP GET with retries; responses are cached per URL when ``cache_dir`` is set."""
    if cache_dir is not None:
        body = cache_dir / f"{_cache_key(url)}.body"
        meta = cache_dir / f"{_cache_key(url)}.json"
        if body.exists() and meta.exists():
            media = json.loads(meta.read_text("utf-8")).get("media_type")
            return Fetched(body.read_bytes(), media)

    import requests

    session = session or requests.Session()
    last: Exception | None = None
    for attempt in range(FETCH_RETRIES + 1):
        try:
            resp = session.get(url, timeout=FETCH_TIMEOUT)
            resp.raise_for_status()
            fetched = Fetched(resp.content, resp.headers.get("Content-Type"))
            break
        except requests.RequestException as exc:
            last = exc
            log.warning("fetch %s failed (attempt %d): %s", url, attempt + 1, exc)
            if attempt < FETCH_RETRIES:
                time.sleep(0.5 * (attempt + 1))
    else:
        raise FetchError(f"cannot fetch {url}: {last}")

    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = body.with_suffix(f".tmp{os.getpid()}")
        tmp.write_bytes(fetched.content)
        tmp.replace(body)
        meta.write_text(json.dumps({"url": url, "media_type": fetched.media_type}), "utf-8")
    return fetched


# -- batch --------------------------------------------------------------------


@dataclass(frozen=True)
class EntryResult:
    id: str
    source: str
    report: QualityReport | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class BatchReport:
    entries: tuple[EntryResult, ...]
    standard_iri: str
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    tool_version: str = __version__

    @property
    def failed(self) -> list[EntryResult]:
        return [e for e in self.entries if not e.ok]


def assess_entry(
    entry: ManifestEntry,
    spec: StandardSpec,
    alias: AliasMap | None = None,
    cache_dir: Path | None = None,
    csv_delimiter: str = ",",
    fetcher: Callable[[str, Path | None], Fetched] | None = None,
) -> EntryResult:
    """Fetch, detect, parse and assess one entry; failures become error records."""
    try:
        if entry.is_url:
            fetched = (fetcher or fetch_url)(entry.source, cache_dir)
        else:
            fetched = Fetched(Path(entry.source).read_bytes())
        if entry.alias_file:
            alias = load_alias(Path(entry.alias_file).read_bytes())
        fmt = entry.format_hint or detect_format(
            entry.source, fetched.media_type, fetched.content[:HEAD_SIZE]
        )
        try:
            dataset = parse_dataset(fmt, fetched.content, entry.record_root, csv_delimiter)
        except UnsupportedFormat as exc:
            report = format_only_report(entry.id, fmt, "format not parseable")
            return EntryResult(entry.id, entry.source, report, f"UnsupportedFormat: {exc}")
        report = assess(dataset, spec, alias, entry.id)
        return EntryResult(entry.id, entry.source, report)
    except (OdqError, OSError) as exc:
        log.info("entry %s failed: %s", entry.id, exc)
        return EntryResult(entry.id, entry.source, None, f"{type(exc).__name__}: {exc}")


def run_batch(
    manifest: Manifest,
    spec: StandardSpec,
    alias: AliasMap | None = None,
    cache_dir: Path | None = None,
    csv_delimiter: str = ",",
    jobs: int = 1,
    fetcher: Callable[[str, Path | None], Fetched] | None = None,
) -> BatchReport:
    def work(entry: ManifestEntry) -> EntryResult:
        return assess_entry(entry, spec, alias, cache_dir, csv_delimiter, fetcher)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, manifest.entries))
    else:
        results = [work(e) for e in manifest.entries]
    return BatchReport(tuple(results), spec.standard_iri)


# -- reports ------------------------------------------------------------------


def _fmt(score: Score | None) -> str:
    return "" if score is None else str(score.rounded())


def _result_to_json(result: DimensionResult) -> dict[str, Any]:
    return {
        "dimension": result.dimension.value,
        "score": None if result.score is None else float(result.score.rounded()),
        "exact": None if result.score is None else result.score.points,
        "note": result.note,
        "features": [
            {
                "path": str(path),
                "weight": c.weight,
                "matched": c.matched,
                "points": c.points,
                "detail": c.detail,
            }
            for path, c in result.per_feature.items()
        ],
    }


def _report_to_json(report: QualityReport) -> dict[str, Any]:
    return {
        "dataset_id": report.dataset_id,
        "source_format": report.source_format.value,
        "record_count": report.record_count,
        "feature_count": report.feature_count,
        "dimensions": [_result_to_json(r) for r in report.results],
    }


def batch_to_json(batch: BatchReport) -> dict[str, Any]:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": batch.tool_version,
        "timestamp": batch.timestamp,
        "standard_iri": batch.standard_iri,
        "entries": [
            {
                "id": e.id,
                "source": e.source,
                "status": "ok" if e.ok else "error",
                "error": e.error,
                "report": None if e.report is None else _report_to_json(e.report),
            }
            for e in batch.entries
        ],
    }


def _result_from_json(raw: dict[str, Any]) -> DimensionResult:
    return DimensionResult(
        Dimension(raw["dimension"]),
        None if raw["exact"] is None else Score(raw["exact"]),
        {
            FeaturePath.parse(f["path"]): Contribution(
                f["weight"], f["matched"], f["points"], f["detail"]
            )
            for f in raw["features"]
        },
        raw["note"],
    )


def batch_from_json(document: str | bytes) -> BatchReport:
    """Inverse of the JSON report emitter."""
    doc = json.loads(document)
    entries = []
    for e in doc["entries"]:
        report = None
        if e["report"] is not None:
            r = e["report"]
            report = QualityReport(
                r["dataset_id"],
                tuple(_result_from_json(d) for d in r["dimensions"]),
                FileFormat(r["source_format"]),
                r["record_count"],
                r["feature_count"],
            )
        entries.append(EntryResult(e["id"], e["source"], report, e["error"]))
    return BatchReport(tuple(entries), doc["standard_iri"], doc["timestamp"], doc["tool_version"])


CSV_HEADER = ("id",) + tuple(d.value for d in DIMENSIONS)


def _grid(rows: Sequence[Sequence[str]]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _score_row(entry: EntryResult) -> list[str]:
    if entry.report is None:
        return [entry.id] + [""] * len(DIMENSIONS)
    return [entry.id] + [_fmt(entry.report[d].score) for d in DIMENSIONS]


def emit_report(batch: BatchReport, fmt: str) -> bytes:
    """Serialise a batch as ``json`` (full diagnostics), ``csv`` or ``radar``.

    ``csv`` has one row per manifest entry, blank cells where a dimension was
    not computed. ``radar`` keeps only successfully assessed datasets and is
    meant as direct input for radar/spider plots.
    """
    if not batch.entries:
        raise ValueError("cannot emit an empty batch")
    if fmt == "json":
        text = json.dumps(batch_to_json(batch), ensure_ascii=False, indent=2)
        return (text + "\n").encode("utf-8")
    if fmt == "csv":
        return _grid([_score_row(e) for e in batch.entries])
    if fmt == "radar":
        return _grid([_score_row(e) for e in batch.entries if e.ok])
    raise ValueError(f"unknown report format {fmt!r}")


REPORT_FILENAMES = {"json": "report.json", "csv": "report.csv", "radar": "radar.csv"}


def write_reports(batch: BatchReport, formats: Sequence[str], out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in dict.fromkeys(formats):
        path = out_dir / REPORT_FILENAMES[fmt]
        path.write_bytes(emit_report(batch, fmt))
        written.append(path)
    return written


__all__ = [
    "BatchReport",
    "EntryResult",
    "FetchError",
    "Fetched",
    "Manifest",
    "ManifestEntry",
    "REPORT_FORMATS",
    "assess_entry",
    "batch_from_json",
    "batch_to_json",
    "emit_report",
    "fetch_url",
    "load_manifest",
    "run_batch",
    "write_reports",
]
