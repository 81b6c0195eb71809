"""Plain-text numeric tables shared by all file outputs.

Layout::

    # starscatter <kind> v1
    # <key>: <json value>
    ...
    <whitespace separated rows, 17 significant digits>

Header keys are written sorted and values are JSON, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import io
import json
import os
from pathlib import Path

import numpy as np

from .errors import InputNotFound, ParseError

MAGIC = "# starscatter"
VERSION = "v1"


def format_table(kind: str, meta: dict, columns, rows) -> str:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(-1, len(columns))
    out = io.StringIO()
    out.write(f"{MAGIC} {kind} {VERSION}\n")
    header = dict(meta)
    header["columns"] = list(columns)
    for key in sorted(header):
        out.write(f"# {key}: {json.dumps(header[key], sort_keys=True)}\n")
    for row in rows:
        out.write(" ".join("%.17g" % v for v in row) + "\n")
    return out.getvalue()


def write_table(path, kind: str, meta: dict, columns, rows) -> None:
    Path(path).write_text(format_table(kind, meta, columns, rows))


def parse_table(text: str, kind: str | None = None):
    """Return ``(kind, meta, rows)``; rows is a float array of shape (R, C)."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MAGIC):
        raise ParseError("missing table header line")
    parts = lines[0].split()
    if len(parts) != 4 or parts[3] != VERSION:
        raise ParseError(f"unsupported table header {lines[0]!r}")
    found = parts[2]
    if kind is not None and found != kind:
        raise ParseError(f"expected a {kind!r} table, found {found!r}")
    meta = {}
    body = []
    for n, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if not sep:
                raise ParseError(f"line {n}: malformed header entry")
            try:
                meta[key.strip()] = json.loads(value)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {n}: header value is not JSON: {exc}") from exc
        elif line.strip():
            body.append(line)
    columns = meta.get("columns")
    if not isinstance(columns, list):
        raise ParseError('table header lacks a "columns" list')
    if any(len(line.split()) != len(columns) for line in body):
        raise ParseError("row length does not match the column count")
    try:
        rows = np.array([[float(v) for v in line.split()] for line in body], dtype=float)
    except ValueError as exc:
        raise ParseError(f"non-numeric table entry: {exc}") from exc
    rows = rows.reshape(-1, len(columns))
    return found, meta, rows


def read_table(path, kind: str | None = None):
    path = os.fspath(path)
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise InputNotFound(f"no such file: {path}") from None
    except (IsADirectoryError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_table(text, kind)


def require(meta: dict, key: str):
    if key not in meta:
        raise ParseError(f'table header lacks "{key}"')
    return meta[key]
