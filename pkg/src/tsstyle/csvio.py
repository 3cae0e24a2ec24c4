"""CSV formats.

* Series CSV: one value per row, optional single header line.
* Window CSV: one window per row, optional header line. Provenance lives in
  a sidecar ``<stem>.meta.csv`` with a header row.

Floats are written with ``repr`` so a read-back is bit-exact.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ParseError, SeriesTooShort
from .series import Series


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_rows(path) -> list[tuple[int, list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [(i, [f.strip() for f in row]) for i, row in enumerate(csv.reader(fh), start=1)]
    return [(i, r) for i, r in rows if r and any(r)]


def _split_header(rows):
    if rows and not all(_is_number(f) for f in rows[0][1]):
        return rows[0][1], rows[1:]
    return None, rows


def _parse_float(text: str, row: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", row=row) from None
    if not np.isfinite(v):
        raise ParseError(f"non-finite value: {text!r}", row=row)
    return v


def ingest_csv(path, column=0) -> Series:
    """Read one column of a CSV file as a series labelled with the file stem.

    ``column`` is a header name or a 0-based index. A first line that does
    not parse as numbers is taken as the header.
    """
    rows = _read_rows(path)
    header, body = _split_header(rows)
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        if header is None or column not in header:
            raise ParseError(f"no column named {column!r}", row=1)
        idx = header.index(column)
    else:
        idx = int(column)
        if idx < 0:
            raise ParseError(f"column index must be nonnegative, got {idx}", row=1)
    values = []
    for line, fields in body:
        if idx >= len(fields):
            raise ParseError(f"missing column {column!r}", row=line)
        values.append(_parse_float(fields[idx], line))
    if len(values) < 3:
        raise SeriesTooShort(f"{path} has {len(values)} values, need at least 3")
    return Series(np.array(values), label=Path(path).stem)


def write_series_csv(path, series, header: str | None = "value") -> None:
    y = np.asarray(series, dtype=np.float64)
    with Path(path).open("w", newline="") as fh:
        if header:
            fh.write(header + "\n")
        for v in y:
            fh.write(repr(float(v)) + "\n")


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.csv")


def _meta_value(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def write_windows_csv(path, ds) -> None:
    """Write windows plus the provenance sidecar."""
    with Path(path).open("w", newline="") as fh:
        for w in ds.windows:
            fh.write(",".join(repr(float(v)) for v in w) + "\n")
    keys = []
    for m in ds.meta:
        keys.extend(k for k in m if k not in keys)
    with meta_path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(keys)
        for m in ds.meta:
            writer.writerow([m.get(k, "") for k in keys])


def read_windows_csv(path):
    """Read a window CSV; missing sidecars give provenance from the file itself."""
    from .datagen import WindowDataset

    rows = _read_rows(path)
    _, body = _split_header(rows)
    if not body:
        raise ParseError(f"{path} holds no windows", row=1)
    width = len(body[0][1])
    data = np.empty((len(body), width))
    for j, (line, fields) in enumerate(body):
        if len(fields) != width:
            raise ParseError(f"expected {width} values, got {len(fields)}", row=line)
        data[j] = [_parse_float(f, line) for f in fields]

    side = meta_path(path)
    if side.is_file():
        with side.open(newline="") as fh:
            records = list(csv.DictReader(fh))
        if len(records) != len(body):
            raise ParseError(f"{side} has {len(records)} records for {len(body)} windows", row=len(records) + 1)
        meta = tuple({k: _meta_value(v) for k, v in r.items()} for r in records)
    else:
        stem = Path(path).stem
        meta = tuple({"n": j, "source": stem, "start": j + 1} for j in range(len(body)))
    return WindowDataset(data, meta)
