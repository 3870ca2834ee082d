"""Deterministic table and report emission.

All writers are atomic (write-then-rename) and produce canonical text:
shortest round-trip float repr, fixed column order, "\n" line endings.
Re-running the same computation therefore reproduces files byte-for-byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np


def norm_order_token(p: float) -> str:
    """Canonical token for a norm order ("inf" for the supremum norm)."""
    return "inf" if math.isinf(p) else format_value(p)


def parse_norm_order(text: str) -> float:
    value = math.inf if text.strip().lower() == "inf" else float(text)
    if not value > 0.0:
        raise ValueError(f"norm order must be positive, got {text!r}")
    return value


def format_value(value) -> str:
    """Canonical CSV cell text."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value != value:
            return "nan"
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_value(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def rows_to_csv_text(rows, columns) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buffer.getvalue()


def to_json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv_rows(path: str) -> list[dict]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))
