"""Field persistence: a directory with ``manifest.json`` and raw component files.

Each component of each snapshot is stored as ``<name>_<index>.bin``: n^3
little-endian float64 values with ``x1`` varying fastest, no header.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import FieldFormatError
from .field import KINDS, SpaceTimeField
from .grid import Grid3

MANIFEST = "manifest.json"
FORMAT_VERSION = 1
_REQUIRED = ("n", "box_length", "dt", "times", "kind", "components")


def _component_file(name: str, index: int) -> str:
    return f"{name}_{index:05d}.bin"


def persist_field(F: SpaceTimeField, path) -> Path:
    """Write ``F`` to directory ``path`` (created if needed) and return it."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": FORMAT_VERSION,
        "n": F.grid.n,
        "box_length": F.grid.box_length,
        "dt": F.dt,
        "times": [float(t) for t in F.times],
        "kind": F.kind,
        "components": list(F.names),
        "endianness": "little",
        "dtype": "float64",
        "order": "x1-fastest",
        "field_id": F.field_id,
        "meta": _jsonable(F.meta),
    }
    for i in range(len(F)):
        values = F.values(i)
        for c, name in enumerate(F.names):
            raw = np.asarray(values[c], dtype="<f8").ravel(order="F")
            raw.tofile(path / _component_file(name, i))
    (path / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def _jsonable(meta: dict) -> dict:
    out = {}
    for key, value in meta.items():
        try:
            json.dumps(value)
        except (TypeError, ValueError):
            continue
        out[str(key)] = value
    return out


def load_field(path) -> SpaceTimeField:
    """Read a field written by :func:`persist_field`.

    Raises :class:`FieldFormatError` for a corrupt manifest, an unsupported
    endianness or dtype, or a component file of the wrong size (the message
    names the component).
    """
    path = Path(path)
    try:
        manifest = json.loads((path / MANIFEST).read_text())
    except FileNotFoundError as exc:
        raise FieldFormatError(f"no {MANIFEST} in {path}") from exc
    except json.JSONDecodeError as exc:
        raise FieldFormatError(f"corrupt manifest in {path}: {exc}") from exc
    if not isinstance(manifest, dict):
        raise FieldFormatError("manifest must be a JSON object")
    missing = [k for k in _REQUIRED if k not in manifest]
    if missing:
        raise FieldFormatError(f"manifest is missing keys {missing}")
    if manifest.get("endianness", "little") != "little":
        raise FieldFormatError(f"unsupported endianness {manifest['endianness']!r}")
    if manifest.get("dtype", "float64") != "float64":
        raise FieldFormatError(f"unsupported dtype {manifest['dtype']!r}")
    if manifest["kind"] not in KINDS:
        raise FieldFormatError(f"unknown field kind {manifest['kind']!r}")
    try:
        grid = Grid3(int(manifest["n"]), float(manifest["box_length"]))
    except (ValueError, TypeError) as exc:
        raise FieldFormatError(f"bad grid in manifest: {exc}") from exc
    names = list(manifest["components"])
    times = np.asarray(manifest["times"], dtype=np.float64)
    n = grid.n
    count = n**3
    data = np.empty((times.size, len(names)) + grid.shape)
    for i in range(times.size):
        for c, name in enumerate(names):
            fname = path / _component_file(name, i)
            if not fname.exists():
                raise FieldFormatError(f"component {name!r} of snapshot {i} is missing ({fname.name})")
            size = os.path.getsize(fname)
            if size != 8 * count:
                raise FieldFormatError(
                    f"component {name!r} of snapshot {i} holds {size} bytes, expected {8 * count}"
                )
            raw = np.fromfile(fname, dtype="<f8")
            data[i, c] = raw.reshape(grid.shape, order="F")
    try:
        return SpaceTimeField(
            grid,
            times,
            data,
            kind=manifest["kind"],
            names=names,
            dt=float(manifest["dt"]) if times.size > 1 else float(manifest["dt"] or 0.0),
            field_id=manifest.get("field_id", path.name),
            meta=manifest.get("meta", {}),
        )
    except ValueError as exc:
        raise FieldFormatError(f"inconsistent manifest: {exc}") from exc
