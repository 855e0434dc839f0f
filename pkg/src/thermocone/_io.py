"""CSV / JSON serialisation and atomic file output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, is_dataclass
from enum import Enum

import numpy as np

SCHEMA_LINE = "# thermocone-schema v1"


def plain(obj):
    """Convert numpy / dataclass / enum values into JSON-ready Python objects."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return plain(asdict(obj))
    if isinstance(obj, Enum):
        return obj.name.lower() if isinstance(obj.value, int) else obj.value
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.generic):
        return plain(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def dumps_json(obj) -> str:
    return json.dumps(plain(obj), indent=2, sort_keys=False) + "\n"


def dumps_csv(rows: list[dict], meta: dict | None = None) -> str:
    """CSV text with the schema line, optional ``# key=value`` lines, then a header."""
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={plain(v)}\n")
    if rows:
        fields = list(rows[0].keys())
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue()


def _cell(v):
    v = plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(repr(float(x)) for x in v)
    return v


def read_csv(text: str) -> tuple[dict, list[dict]]:
    """Inverse of :func:`dumps_csv` (values stay strings)."""
    lines = text.splitlines()
    if not lines or lines[0] != SCHEMA_LINE:
        raise ValueError("missing thermocone schema line")
    meta, body = {}, []
    for line in lines[1:]:
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            meta[k] = v
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".thermocone-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
