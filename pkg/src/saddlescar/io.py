"""Deterministic CSV/JSON writers and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["fmt", "Table", "Document", "csv_text", "json_text", "emit_outputs", "MANIFEST"]

MANIFEST = "manifest.json"
SIG_DIGITS = 12


def fmt(v):
    """Render a number with 12 significant digits (integers verbatim)."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0:
            return "0"
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def _round(obj):
    """Copy of a JSON-able structure with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(f"{v:.{SIG_DIGITS}g}") + 0.0
    return obj


@dataclass(frozen=True)
class Table:
    """A CSV file: header plus rows (sequences of numbers or strings)."""

    name: str
    header: tuple
    rows: object

    def text(self):
        return csv_text(self.header, self.rows)

    @property
    def n_rows(self):
        return len(self.rows)


@dataclass(frozen=True)
class Document:
    """A JSON file."""

    name: str
    data: object

    def text(self):
        return json_text(self.data)

    n_rows = None


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(data):
    return json.dumps(_round(data), indent=1, sort_keys=True, allow_nan=False) + "\n"


def _versions():
    import scipy

    from .kernels import BACKEND

    return {
        "saddlescar": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "kernels": BACKEND,
    }


def emit_outputs(results, directory, config_hash=None, command=None):
    """Write ``results`` (Tables/Documents) and ``manifest.json`` into ``directory``.

    Returns the manifest dictionary. The manifest lists every data file with
    its SHA-256 digest and (for CSV) row count, plus the config hash and the
    package versions; it contains no timestamps, so identical inputs give
    identical bytes.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for item in results:
        data = item.text().encode()
        (out / item.name).write_bytes(data)
        entry = {"name": item.name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        if item.n_rows is not None:
            entry["rows"] = item.n_rows
        entries.append(entry)
    manifest = {"command": command, "config_hash": config_hash, "files": entries, "versions": _versions()}
    (out / MANIFEST).write_text(json_text(manifest))
    return manifest
