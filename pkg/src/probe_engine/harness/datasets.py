"""Tabular datasets with metadata, written as commented CSV or a JSON envelope.

Floats are written with 17 significant digits so that a write/read cycle
returns bit-identical values. Missing values (``None``) are empty CSV
fields or JSON ``null``; they appear only in gap-marker rows and in sweep
rows that carry an error.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, NamedTuple

KINDS = ("float", "int", "str")


class Column(NamedTuple):
    name: str
    unit: str
    kind: str = "float"
    description: str = ""


@dataclass
class Dataset:
    figure: str
    columns: list[Column]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for col in self.columns:
            if col.kind not in KINDS:
                raise ValueError(f"column {col.name}: unknown kind {col.kind!r}")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> list:
        i = self.names.index(name)
        return [row[i] for row in self.rows]

    def records(self) -> list[dict]:
        names = self.names
        return [dict(zip(names, row)) for row in self.rows]

    def add(self, **values) -> None:
        unknown = set(values) - set(self.names)
        if unknown:
            raise KeyError(f"unknown columns: {sorted(unknown)}")
        defaults = {c.name: "" if c.kind == "str" else None for c in self.columns}
        self.rows.append(tuple(values.get(c.name, defaults[c.name]) for c in self.columns))

    def validate(self, markers=("gap", "error", "flags")) -> None:
        """Each numeric cell is finite, or None inside a flagged row."""
        names = self.names
        marker = [i for i, n in enumerate(names) if n in markers]
        for k, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {k}: expected {len(self.columns)} cells, got {len(row)}")
            flagged = any(row[i] for i in marker)
            for col, value in zip(self.columns, row):
                if value is None:
                    if not flagged and col.kind != "str":
                        raise ValueError(f"row {k}: {col.name} missing outside a flagged row")
                    continue
                if col.kind == "float" and not math.isfinite(value):
                    raise ValueError(f"row {k}: {col.name} is not finite ({value!r})")


# --------------------------------------------------------------------------
# Cell formatting
# --------------------------------------------------------------------------


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _cell(value, kind: str) -> str:
    if value is None:
        return ""
    if kind == "float":
        return format_float(value)
    if kind == "int":
        return str(int(value))
    return str(value)


def _parse(text: str, kind: str):
    if kind == "str":
        return text
    if text == "":
        return None
    if kind == "float":
        return float(text)
    if kind == "int":
        return int(text)
    return text


def _json_cell(value, kind: str) -> str:
    if value is None:
        return "null"
    if kind == "float":
        if not math.isfinite(value):
            raise ValueError("non-finite value cannot be written to JSON")
        return format_float(value)
    if kind == "int":
        return str(int(value))
    return json.dumps(str(value))


# --------------------------------------------------------------------------
# Metadata helpers
# --------------------------------------------------------------------------


def build_timestamp(mode: str | None = None) -> str | None:
    """Timestamp for metadata.

    ``None`` (the default) honours SOURCE_DATE_EPOCH and otherwise omits the
    timestamp so identical configs give identical bytes. ``"now"`` stamps
    the wall clock.
    """
    if mode == "now":
        moment = datetime.now(timezone.utc)
    elif mode is None:
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        if epoch is None:
            return None
        moment = datetime.fromtimestamp(int(epoch), timezone.utc)
    else:
        raise ValueError(f"unknown timestamp mode {mode!r}")
    return moment.replace(microsecond=0).isoformat().replace("+00:00", "Z")


def schema(columns: list[Column]) -> list[dict]:
    return [c._asdict() for c in columns]


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def to_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    meta = {"figure": ds.figure, **ds.metadata, "columns": schema(ds.columns)}
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{c.name} [{c.unit}]" for c in ds.columns])
    kinds = [c.kind for c in ds.columns]
    for row in ds.rows:
        writer.writerow([_cell(v, k) for v, k in zip(row, kinds)])
    return buf.getvalue()


def from_csv(text: str) -> Dataset:
    lines = text.splitlines()
    meta: dict[str, Any] = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, raw = lines[i][1:].strip().partition(": ")
        meta[key] = json.loads(raw)
        i += 1
    columns = [Column(**c) for c in meta.pop("columns")]
    figure = meta.pop("figure")
    reader = csv.reader(lines[i:])
    header = next(reader)
    expected = [f"{c.name} [{c.unit}]" for c in columns]
    if header != expected:
        raise ValueError(f"header {header} does not match column schema {expected}")
    kinds = [c.kind for c in columns]
    rows = [tuple(_parse(v, k) for v, k in zip(rec, kinds)) for rec in reader]
    return Dataset(figure=figure, columns=columns, rows=rows, metadata=meta)


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------


def to_json(ds: Dataset) -> str:
    meta = {"figure": ds.figure, **ds.metadata}
    kinds = [c.kind for c in ds.columns]
    rows = ",\n    ".join(
        "[" + ", ".join(_json_cell(v, k) for v, k in zip(row, kinds)) + "]" for row in ds.rows
    )
    return (
        "{\n"
        f'  "metadata": {json.dumps(meta, sort_keys=True)},\n'
        f'  "columns": {json.dumps(schema(ds.columns))},\n'
        f'  "rows": [\n    {rows}\n  ]\n'
        "}\n"
    )


def from_json(text: str) -> Dataset:
    doc = json.loads(text)
    meta = dict(doc["metadata"])
    columns = [Column(**c) for c in doc["columns"]]
    kinds = [c.kind for c in columns]

    def conv(v, k):
        if v is None:
            return "" if k == "str" else None
        return float(v) if k == "float" else int(v) if k == "int" else str(v)

    rows = [tuple(conv(v, k) for v, k in zip(r, kinds)) for r in doc["rows"]]
    return Dataset(figure=meta.pop("figure"), columns=columns, rows=rows, metadata=meta)


WRITERS = {"csv": to_csv, "json": to_json}
READERS = {"csv": from_csv, "json": from_json}


def dumps(ds: Dataset, fmt: str = "csv") -> str:
    return WRITERS[fmt](ds)


def loads(text: str, fmt: str = "csv") -> Dataset:
    return READERS[fmt](text)


def write(ds: Dataset, path, fmt: str | None = None) -> None:
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps(ds, fmt))


def read(path, fmt: str | None = None) -> Dataset:
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), fmt)
