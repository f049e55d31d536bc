"""Field container files and reproducible JSON / CSV emission.

TFLD layout (little-endian): magic ``b"TFLD"``, version u16, dim u8, n u32,
components u8, then float64 samples in row-major order, one component after
another.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .grid import TorusField, TorusGrid

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "FieldFileError",
    "write_tfld",
    "read_tfld",
    "tfld_bytes",
    "config_hash",
    "provenance",
    "dump_json",
    "write_json",
    "write_csv",
]

MAGIC = b"TFLD"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBIB")


class FieldFileError(OSError):
    """A field file is missing, truncated or not a TFLD container."""


def tfld_bytes(f: TorusField) -> bytes:
    g = f.grid
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, g.dim, g.n, f.components)
    return header + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def write_tfld(path, f: TorusField) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(tfld_bytes(f))
    return path


def read_tfld(path) -> TorusField:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError as exc:
        raise FieldFileError(f"field file not found: {path}") from exc
    if len(raw) < _HEADER.size:
        raise FieldFileError(f"{path}: truncated header")
    magic, version, dim, n, comps = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFileError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FieldFileError(f"{path}: unsupported version {version}")
    try:
        grid = TorusGrid(dim, n)
    except ValueError as exc:
        raise FieldFileError(f"{path}: {exc}") from exc
    count = comps * n**dim
    expected = _HEADER.size + 8 * count
    if len(raw) != expected:
        raise FieldFileError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=count)
    return TorusField(grid, data.reshape((comps,) + grid.shape))


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_jsonable)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON form of a configuration."""
    return hashlib.sha256(_canonical(config).encode()).hexdigest()


def provenance(config: dict, seed: int | None) -> dict:
    return {"tool_version": __version__, "config_hash": config_hash(config), "seed": seed}


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"


def write_json(path, payload: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if meta is not None:
        body["provenance"] = meta
    path.write_text(dump_json(body))
    return path


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> Path:
    """Comma-separated with a mandatory header; provenance goes in leading '#' lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    if meta is not None:
        for key in sorted(meta):
            buf.write(f"# {key}={meta[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    path.write_text(buf.getvalue())
    return path
