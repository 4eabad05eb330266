"""Writers and readers for the CSV/JSON artifacts.

Every CSV starts with a ``#`` comment naming the schema version and config
hash, followed by a header row.  JSON documents carry the same two fields.
Floats are written with ``repr`` so files are byte-reproducible.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import EmptyInput, TextFractalError
from .series import TimeSeries

SCHEMA_VERSION = 1


def _plain(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _cell(x):
    x = _plain(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows, config_hash):
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_json(path, payload, config_hash):
    doc = {"schema_version": SCHEMA_VERSION, "config_hash": config_hash}
    doc.update(_plain(payload))
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n",
                          encoding="utf-8")


def write_series(path, values, config_hash, name="value"):
    """Series file: comment line, header row, then one value per line."""
    write_csv(path, [name], ([v] for v in np.asarray(values).tolist()), config_hash)


def read_series(path, label=None) -> TimeSeries:
    """Read a series file; ``#`` lines and a non-numeric header are skipped."""
    path = Path(path)
    values = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cell = line.split(",")[0].strip()
        try:
            v = float(cell)
        except ValueError:
            if values:
                raise TextFractalError(f"{path}:{lineno}: not a number: {raw!r}") from None
            continue  # header row
        values.append(v)
    if not values:
        raise EmptyInput(f"{path}: no values")
    arr = np.asarray(values)
    if np.all(arr == np.round(arr)):
        arr = arr.astype(np.int64)
    return TimeSeries(arr, label=label or path.stem)


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
