"""
JSON-safe encoding of report payloads and atomic file output.
"""

import csv
import io
import json
import os
import tempfile
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import FormatError


def encode(val: Any) -> Any:
    """Recursively turn numpy scalars/arrays and tuples into JSON types."""
    if val is None or isinstance(val, (bool, str)):
        return val
    if isinstance(val, (np.bool_,)):
        return bool(val)
    if isinstance(val, (int, np.integer)):
        return int(val)
    if isinstance(val, (float, np.floating)):
        return float(val)
    if isinstance(val, np.ndarray):
        return [encode(v) for v in val.tolist()]
    if isinstance(val, (list, tuple)):
        return [encode(v) for v in val]
    if isinstance(val, dict):
        return {str(key): encode(inner) for key, inner in val.items()}
    raise FormatError(f"Unhandled data type: {val!r} ({type(val)})")


def dumps(val: Any) -> str:
    return json.dumps(encode(val), indent=2, sort_keys=True) + "\n"


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write to a temporary file next to `path`, then rename over it."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(
        prefix=".tmp-", suffix=os.path.basename(path), dir=directory
    )
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: str, val: Any) -> None:
    atomic_write_text(path, dumps(val))


def write_csv(
    path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([encode(v) for v in row])
    atomic_write_text(path, buf.getvalue())
