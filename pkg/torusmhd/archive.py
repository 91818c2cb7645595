"""
Field archives: a directory holding manifest.json and one raw
little-endian float64 file per field, components concatenated in
component order, each array row-major in (zeta, theta, phi).

manifest.json:
    {"format_version": 1,
     "grid": {"n": [...], "period": [...]},
     "entries": [{"name", "kind", "degree" (forms), "dtype": "f64le",
                  "file"}, ...]}

A bundle archive additionally holds bundle.json with the example name,
parameters, profiles and the role of every field.
"""

import json
import logging
import math
import os
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .encode import atomic_write_bytes, write_json
from .errors import FormatError, ShapeError
from .examples import ExampleBundle
from .exterior import VolumeForm, flat, volume_form
from .fields import Field, KForm, MetricField, ScalarField, VectorField
from .grid import PeriodicGrid
from .profiles import profile_from_json, surface_profile_from_json

LOGGER = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
BUNDLE = "bundle.json"
DTYPE = "f64le"

KINDS = ("scalar", "vector", "form", "metric")


def _kind_of(field: Field) -> str:
    if isinstance(field, MetricField):
        return "metric"
    if isinstance(field, KForm):
        return "form"
    if isinstance(field, VectorField):
        return "vector"
    if isinstance(field, ScalarField):
        return "scalar"
    raise FormatError(f"cannot archive {type(field).__name__}")


def _count(kind: str, degree: int, ndim: int) -> int:
    if kind == "scalar":
        return 1
    if kind == "vector":
        return ndim
    if kind == "form":
        return math.comb(ndim, degree)
    return ndim * (ndim + 1) // 2


def field_io_write(
    path: str, grid: PeriodicGrid, fields: Dict[str, Field]
) -> None:
    """Write the fields and then the manifest, each file atomically."""
    entries = []
    for name, field in fields.items():
        if field.grid != grid:
            raise ShapeError(f"field {name} lives on {field.grid}")
        kind = _kind_of(field)
        entry: Dict[str, Any] = {
            "name": name,
            "kind": kind,
            "dtype": DTYPE,
            "file": f"{name}.f64",
        }
        if isinstance(field, KForm):
            entry["degree"] = field.degree
        payload = np.ascontiguousarray(field.data, dtype="<f8").tobytes()
        atomic_write_bytes(os.path.join(path, entry["file"]), payload)
        entries.append(entry)
    write_json(
        os.path.join(path, MANIFEST),
        {
            "format_version": FORMAT_VERSION,
            "grid": {"n": list(grid.n), "period": list(grid.period)},
            "entries": entries,
        },
    )
    LOGGER.info("Wrote %d fields to %s", len(entries), path)


def _load_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except FileNotFoundError as exc:
        raise FormatError(f"missing {path}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FormatError(f"{path} must hold a JSON object")
    return payload


def _build(
    grid: PeriodicGrid, kind: str, degree: int, comps: np.ndarray
) -> Field:
    if kind == "scalar":
        return ScalarField(grid, comps[0])
    if kind == "vector":
        return VectorField(grid, list(comps))
    if kind == "metric":
        return MetricField(grid, list(comps))
    return KForm(grid, degree, list(comps))


def field_io_read(path: str) -> Tuple[PeriodicGrid, Dict[str, Field]]:
    manifest = _load_json(os.path.join(path, MANIFEST))
    try:
        version = manifest["format_version"]
        layout = manifest["grid"]
        entries = manifest["entries"]
        n, period = layout["n"], layout["period"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"manifest lacks {exc}") from exc
    if version != FORMAT_VERSION:
        raise FormatError(f"unknown format_version {version!r}")
    grid = PeriodicGrid(n, period)

    fields: Dict[str, Field] = {}
    for entry in entries:
        try:
            name, kind, dtype = entry["name"], entry["kind"], entry["dtype"]
            filename = entry["file"]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"manifest entry lacks {exc}") from exc
        if kind not in KINDS:
            raise FormatError(f"unknown kind {kind!r} for {name}")
        if dtype != DTYPE:
            raise FormatError(f"unsupported dtype {dtype!r} for {name}")
        degree = int(entry.get("degree", 0))
        if kind == "form" and not 0 <= degree <= grid.ndim:
            raise FormatError(f"bad degree {degree} for {name}")
        count = _count(kind, degree, grid.ndim)
        try:
            raw = np.fromfile(os.path.join(path, filename), dtype="<f8")
        except FileNotFoundError as exc:
            raise FormatError(f"missing array file {filename}") from exc
        expected = count * int(np.prod(grid.shape))
        if raw.size != expected:
            raise ShapeError(
                f"{name}: {raw.size} values, {kind} needs {expected}"
            )
        comps = raw.astype(np.float64).reshape((count,) + grid.shape)
        fields[name] = _build(grid, kind, degree, comps)
    LOGGER.debug("Read %d fields from %s", len(fields), path)
    return grid, fields


def write_bundle(path: str, bundle: ExampleBundle) -> None:
    field_io_write(path, bundle.grid, bundle.fields())
    write_json(
        os.path.join(path, BUNDLE),
        dict(bundle.describe(), roles=sorted(bundle.fields().keys())),
    )


def read_description(path: str) -> Optional[Dict[str, Any]]:
    """bundle.json of an archive, or None for a plain field archive."""
    if not os.path.exists(os.path.join(path, BUNDLE)):
        return None
    return _load_json(os.path.join(path, BUNDLE))


def _require(fields: Dict[str, Field], name: str, kind: type) -> Any:
    if name not in fields:
        raise FormatError(f"archive lacks field {name}")
    if not isinstance(fields[name], kind):
        raise FormatError(f"field {name} is not a {kind.__name__}")
    return fields[name]


def read_bundle(path: str) -> ExampleBundle:
    """
    A bundle from an archive holding at least g, X and p; alpha and mu
    default to X^flat and the volume form of g.
    """
    grid, fields = field_io_read(path)
    g = _require(fields, "g", MetricField)
    x = _require(fields, "X", VectorField)
    p = _require(fields, "p", ScalarField)
    alpha = fields["alpha"] if "alpha" in fields else flat(g, x)
    mu = fields["mu"] if "mu" in fields else volume_form(g)
    if not isinstance(alpha, KForm) or alpha.degree != 1:
        raise FormatError("alpha must be a 1-form")
    if not isinstance(mu, KForm) or mu.degree != grid.ndim:
        raise FormatError("mu must be a 3-form")
    if not isinstance(mu, VolumeForm):
        mu = VolumeForm.from_form(mu)
    description = read_description(path) or {}
    profiles: Dict[str, Any] = {}
    for role, payload in description.get("profiles", {}).items():
        if role == "f":
            profiles[role] = surface_profile_from_json(payload)
        else:
            profiles[role] = profile_from_json(payload)
    y = fields.get("Y_closed_form")
    return ExampleBundle(
        grid,
        g,
        x,
        alpha,
        mu,
        p,
        name=description.get("name", "archive"),
        parameters=dict(description.get("parameters", {})),
        profiles=profiles,
        y_closed_form=y if isinstance(y, VectorField) else None,
    )
