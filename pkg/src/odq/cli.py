"""``odq`` command line front end.

Exit status: 0 when every entry was assessed, 2 when at least one entry
failed to fetch or parse, 1 on usage, standard or manifest errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from odq import __version__
from odq.app import (
    REPORT_FORMATS,
    Manifest,
    ManifestEntry,
    load_manifest,
    run_batch,
    write_reports,
)
from odq.errors import OdqError
from odq.ingest import FileFormat
from odq.standard import AliasMap, load_alias, load_standard

EXIT_OK, EXIT_USAGE, EXIT_ENTRY_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _format_tag(value: str) -> FileFormat:
    try:
        return FileFormat.from_tag(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _delimiter(value: str) -> str:
    if value == "\\t":
        return "\t"
    if len(value) != 1:
        raise argparse.ArgumentTypeError("delimiter must be a single character")
    return value


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="odq", description="Standard-driven open data quality assessment.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("assess", help="score datasets against a feature standard")
    p.add_argument("--standard", required=True, type=Path, help="standard-spec JSON file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", help="dataset file or http(s) URL")
    src.add_argument("--manifest", type=Path, help="batch manifest JSON file")
    p.add_argument("--alias", type=Path, help="alias-map JSON file")
    p.add_argument("--format-hint", type=_format_tag, help="override format detection")
    p.add_argument("--record-root", help="'/'-separated path to the records")
    p.add_argument("--report", action="append", choices=REPORT_FORMATS,
                   help="report format; repeatable (default: json)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--cache-dir", type=Path, default=None,
                   help="HTTP response cache (default: $ODQ_CACHE_DIR)")
    p.add_argument("--csv-delimiter", type=_delimiter, default=",")
    p.add_argument("--jobs", type=_positive, default=1)
    return parser


def _assess(args: argparse.Namespace) -> int:
    try:
        spec = load_standard(args.standard.read_bytes())
        alias = load_alias(args.alias.read_bytes()) if args.alias else AliasMap()
        if args.manifest:
            manifest = load_manifest(args.manifest.read_bytes(), args.manifest.parent)
        else:
            dataset_id = Path(args.dataset.rstrip("/")).name or args.dataset
            manifest = Manifest((ManifestEntry(dataset_id, args.dataset),))
    except (OdqError, OSError) as exc:
        print(f"odq: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.format_hint or args.record_root:
        manifest = Manifest(tuple(
            ManifestEntry(
                e.id, e.source,
                args.format_hint or e.format_hint,
                args.record_root or e.record_root,
                e.alias_file,
            )
            for e in manifest.entries
        ))
    cache_dir = args.cache_dir
    if cache_dir is None and os.environ.get("ODQ_CACHE_DIR"):
        cache_dir = Path(os.environ["ODQ_CACHE_DIR"])

    batch = run_batch(manifest, spec, alias, cache_dir, args.csv_delimiter, args.jobs)
    for path in write_reports(batch, args.report or ["json"], args.out):
        print(path)
    for entry in batch.failed:
        print(f"odq: {entry.id}: {entry.error}", file=sys.stderr)
    return EXIT_ENTRY_FAILED if batch.failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return _assess(args)


if __name__ == "__main__":
    sys.exit(main())
