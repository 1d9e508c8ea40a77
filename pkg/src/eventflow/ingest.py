"""Long-format CSV ingestion, panel export, and the flat config format.

Input data is one record per (day, entity, clock time): times are snapped
down to their bucket, duplicate records for one cell are aggregated (mean
for real attributes, sum for counts, per config), and the records are
pivoted into the days-by-events panel the builder consumes.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import ConfigError, ParseError, SchemaMismatch
from .events import BuildConfig, EventKey, LinkFamily, PanelDataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LongRecord:
    """One parsed input row. ``value`` is None when the field was empty."""

    day: str
    entity: str
    time_minutes: int
    value: float | None


@dataclass(frozen=True)
class CsvSchema:
    """Column names and pivoting rules for long-format files."""

    day_column: str = "day"
    entity_column: str = "entity"
    time_column: str = "time"
    value_column: str = "value"
    bucket_width: int = 60
    aggregation: str = "mean"

    def __post_init__(self):
        if self.aggregation not in ("mean", "sum"):
            raise ConfigError(f"aggregation must be mean or sum, got {self.aggregation!r}")
        if not (isinstance(self.bucket_width, int) and 1 <= self.bucket_width <= 1440):
            raise ConfigError("bucket_width must be an integer in [1, 1440]")


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    cells: int
    duplicates_aggregated: int
    missing_values: int

    def __str__(self):
        return (
            f"{self.rows_read} rows -> {self.cells} cells "
            f"({self.duplicates_aggregated} rows merged by aggregation, "
            f"{self.missing_values} missing values)"
        )


def parse_time_of_day(text: str, line: int, column: str) -> int:
    """'HH:MM' -> minutes from midnight; rejects out-of-range clock times."""
    parts = text.strip().split(":")
    if len(parts) != 2:
        raise ParseError(line, column, f"expected HH:MM, got {text!r}")
    try:
        h, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(line, column, f"expected HH:MM, got {text!r}") from None
    if not (0 <= h <= 23 and 0 <= m <= 59):
        raise ParseError(line, column, f"clock time {text!r} out of range")
    return 60 * h + m


def iter_long_records(path: str | Path | IO[str], schema: CsvSchema) -> Iterable[LongRecord]:
    """Parse a long-format CSV into records, validating field by field.

    Raises:
        SchemaMismatch: required columns absent from the header.
        ParseError: a field failed to parse, identified by line and column.
    """
    if hasattr(path, "read"):
        yield from _iter_records(path, schema)
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            yield from _iter_records(fh, schema)


def _iter_records(fh: IO[str], schema: CsvSchema) -> Iterable[LongRecord]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatch("empty file: no header row") from None
    needed = (
        schema.day_column,
        schema.entity_column,
        schema.time_column,
        schema.value_column,
    )
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaMismatch(f"header {header} lacks columns {missing}")
    idx = {c: header.index(c) for c in needed}
    width = len(header)

    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != width:
            raise ParseError(line, "-", f"{len(row)} fields, header has {width}")
        day = row[idx[schema.day_column]].strip()
        try:
            date.fromisoformat(day)
        except ValueError:
            raise ParseError(line, schema.day_column, f"not an ISO date: {day!r}") from None
        entity = row[idx[schema.entity_column]].strip()
        if not entity:
            raise ParseError(line, schema.entity_column, "empty entity")
        minutes = parse_time_of_day(row[idx[schema.time_column]], line, schema.time_column)
        raw = row[idx[schema.value_column]].strip()
        if raw == "":
            value: float | None = None
        else:
            try:
                value = float(raw)
            except ValueError:
                raise ParseError(
                    line, schema.value_column, f"not a number: {raw!r}"
                ) from None
            if not math.isfinite(value):
                raise ParseError(line, schema.value_column, f"not finite: {raw!r}")
        yield LongRecord(day, entity, minutes, value)


def pivot_records(
    records: Iterable[LongRecord], schema: CsvSchema
) -> tuple[PanelDataset, IngestReport]:
    """Bucket, aggregate, and pivot records into a panel."""
    cells: dict[tuple[str, EventKey], list[float]] = {}
    seen_keys: set[EventKey] = set()
    seen_days: set[str] = set()
    rows_read = 0
    for rec in records:
        rows_read += 1
        bucket = (rec.time_minutes // schema.bucket_width) * schema.bucket_width
        key = EventKey(rec.entity, bucket, schema.bucket_width)
        seen_keys.add(key)
        seen_days.add(rec.day)
        if rec.value is not None:
            cells.setdefault((rec.day, key), []).append(rec.value)

    catalog = tuple(sorted(seen_keys, key=EventKey.sort_key))
    days = tuple(sorted(seen_days))
    col = {k: i for i, k in enumerate(catalog)}
    row = {d: i for i, d in enumerate(days)}
    matrix = np.full((len(days), len(catalog)), np.nan)
    merged = 0
    for (d, k), vals in cells.items():
        merged += len(vals) - 1
        total = math.fsum(vals)
        matrix[row[d], col[k]] = total if schema.aggregation == "sum" else total / len(vals)

    missing = int(np.isnan(matrix).sum())
    panel = PanelDataset(catalog=catalog, days=days, values=matrix)
    return panel, IngestReport(rows_read, matrix.size, merged, missing)


def ingest_csv(
    path: str | Path | IO[str], schema: CsvSchema | None = None
) -> tuple[PanelDataset, IngestReport]:
    """Read a long-format CSV into a panel; see the module docstring."""
    schema = schema or CsvSchema()
    panel, report = pivot_records(iter_long_records(path, schema), schema)
    log.info("ingest: %s", report)
    return panel, report


def write_panel_csv(
    panel: PanelDataset, path: str | Path | IO[str], schema: CsvSchema | None = None
) -> None:
    """Export a panel back to long format, one row per cell.

    Missing cells are written with an empty value field so the catalog
    survives a round trip; values use repr so floats round-trip exactly.
    """
    schema = schema or CsvSchema()

    def _write(fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            [schema.day_column, schema.entity_column, schema.time_column, schema.value_column]
        )
        matrix = panel.matrix
        for d in panel.day_order:
            day = panel.days[d]
            for i, key in enumerate(panel.catalog):
                v = matrix[d, i]
                w.writerow([day, key.entity, key.hhmm, "" if math.isnan(v) else repr(float(v))])

    if hasattr(path, "write"):
        _write(path)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            _write(fh)


# --- config file -------------------------------------------------------------

_CONFIG_KEYS = frozenset(
    {
        "family",
        "lambda",
        "lambda_path",
        "max_parents",
        "min_history_days",
        "standardize",
        "candidate_window_minutes",
        "bucket_width",
        "aggregation",
        "day_column",
        "entity_column",
        "time_column",
        "value_column",
    }
)

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def read_config_file(path: str | Path | IO[str]) -> tuple[BuildConfig, CsvSchema]:
    """Parse the flat `key = value` config format.

    Lines are `key = value`; blank lines and `#` comments are skipped.
    Unknown keys are hard errors so typos cannot silently fall back to
    defaults.

    Raises:
        ConfigError: unknown key, bad value, or an invalid combination.
    """
    if hasattr(path, "read"):
        text = path.read()
    else:
        text = Path(path).read_text(encoding="utf-8")

    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    def _int(key: str) -> int:
        try:
            return int(raw[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from None

    def _bool(key: str) -> bool:
        v = raw[key].lower()
        if v in _TRUE:
            return True
        if v in _FALSE:
            return False
        raise ConfigError(f"{key} must be true/false, got {raw[key]!r}")

    if "family" not in raw:
        raise ConfigError("config must set family (gaussian or poisson)")
    try:
        family = LinkFamily(raw["family"].lower())
    except ValueError:
        raise ConfigError(f"unknown family {raw['family']!r}") from None

    kwargs: dict = {"family": family}
    if "lambda" in raw:
        try:
            kwargs["lam"] = float(raw["lambda"])
        except ValueError:
            raise ConfigError(f"lambda must be a number, got {raw['lambda']!r}") from None
    if "lambda_path" in raw:
        try:
            kwargs["lambda_path"] = tuple(
                float(v) for v in raw["lambda_path"].split(",") if v.strip()
            )
        except ValueError:
            raise ConfigError("lambda_path must be comma-separated numbers") from None
    if "max_parents" in raw:
        kwargs["max_parents"] = _int("max_parents")
    if "min_history_days" in raw:
        kwargs["min_history_days"] = _int("min_history_days")
    if "standardize" in raw:
        kwargs["standardize"] = _bool("standardize")
    if "candidate_window_minutes" in raw:
        if raw["candidate_window_minutes"].lower() != "none":
            kwargs["candidate_window_minutes"] = _int("candidate_window_minutes")
    try:
        config = BuildConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    schema = CsvSchema(
        aggregation="sum" if family is LinkFamily.POISSON_EXP else "mean"
    )
    for key in ("day_column", "entity_column", "time_column", "value_column", "aggregation"):
        if key in raw:
            schema = replace(schema, **{key: raw[key]})
    if "bucket_width" in raw:
        schema = replace(schema, bucket_width=_int("bucket_width"))
    return config, schema
