"""CSV parsing, column-kind inference, and canonical CSV emission.

A column is *numeric* when every non-empty value parses as a decimal
number, *categorical* when its distinct-value count stays within
max(20, 5% of rows), and *other* otherwise. Emission is RFC-4180: header
row, CRLF line endings, minimal quoting, empty string for missing values.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import BadCsv

KIND_NUMERIC = "numeric"
KIND_CATEGORICAL = "categorical"
KIND_OTHER = "other"


@dataclass(frozen=True)
class DatasetHandle:
    dataset_id: str
    name: str
    schema: tuple[tuple[str, str], ...]  # (column name, kind)
    row_count: int

    @property
    def columns(self) -> list[str]:
        return [name for name, _ in self.schema]


def parse_csv(raw: bytes | str) -> tuple[list[str], list[list[str]]]:
    """Header and body rows of a CSV file; rows padded to header width."""
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise BadCsv("CSV is not UTF-8 text") from exc
    reader = csv.reader(io.StringIO(raw))
    try:
        header = next(reader)
    except StopIteration:
        raise BadCsv("CSV has no header row") from None
    if not any(cell.strip() for cell in header):
        raise BadCsv("CSV header row is empty")
    width = len(header)
    rows = []
    for row in reader:
        if not row:
            continue  # blank line, not a record
        if len(row) < width:
            row = row + [""] * (width - len(row))
        rows.append(row[:width])
    return header, rows


def _is_number(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True


def infer_kinds(header: list[str], rows: list[list[str]]) -> list[tuple[str, str]]:
    schema = []
    threshold = max(20, 0.05 * len(rows))
    for i, name in enumerate(header):
        values = [row[i] for row in rows if row[i] != ""]
        if all(_is_number(v) for v in values):
            kind = KIND_NUMERIC
        elif len(set(values)) <= threshold:
            kind = KIND_CATEGORICAL
        else:
            kind = KIND_OTHER
        schema.append((name, kind))
    return schema


def inspect_csv(raw: bytes | str, dataset_id: str, name: str) -> DatasetHandle:
    """Client-side dataset scan: schema with inferred kinds plus row count."""
    header, rows = parse_csv(raw)
    if len(set(header)) != len(header):
        raise BadCsv("CSV column names are not unique")
    return DatasetHandle(
        dataset_id=dataset_id,
        name=name,
        schema=tuple(infer_kinds(header, rows)),
        row_count=len(rows),
    )


def rows_to_csv_bytes(header: list[str], rows: list[list]) -> bytes:
    """Canonical CSV emission; None becomes the empty string."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if value is None else value for value in row])
    return out.getvalue().encode("utf-8")
