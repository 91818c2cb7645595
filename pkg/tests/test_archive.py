"""
Test field archives
"""

import json
import os

import numpy as np
import pytest

from torusmhd.archive import (
    MANIFEST,
    field_io_read,
    field_io_write,
    read_bundle,
    read_description,
    write_bundle,
)
from torusmhd.errors import FormatError, PositivityError, ShapeError
from torusmhd.examples import KILLING, build
from torusmhd.exterior import VolumeForm
from torusmhd.fields import KForm, ScalarField, VectorField
from torusmhd.grid import PeriodicGrid

GRID = PeriodicGrid([8, 8, 8])


def write_sample(path: str) -> None:
    zeta, theta, phi = GRID.mesh()
    field_io_write(
        path,
        GRID,
        {
            "p": ScalarField(GRID, np.sin(zeta) * np.cos(phi)),
            "X": VectorField(GRID, [zeta, theta, phi]),
            "beta": KForm(GRID, 2, [zeta, 2 * theta, 3 * phi]),
        },
    )


def edit_manifest(path: str, change) -> None:
    name = os.path.join(path, MANIFEST)
    with open(name, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    change(manifest)
    with open(name, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle)


def test_archive_layout(tmp_path) -> None:
    write_sample(str(tmp_path))
    with open(tmp_path / MANIFEST, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    assert manifest["format_version"] == 1
    assert manifest["grid"]["n"] == [8, 8, 8]
    kinds = {e["name"]: e["kind"] for e in manifest["entries"]}
    assert kinds == {"p": "scalar", "X": "vector", "beta": "form"}
    # three components, row-major, little-endian float64
    raw = np.fromfile(tmp_path / "X.f64", dtype="<f8")
    assert raw.size == 3 * 512
    zeta = GRID.mesh()[0]
    assert np.array_equal(raw[:512], zeta.ravel())
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")]


def test_archive_read(tmp_path) -> None:
    write_sample(str(tmp_path))
    grid, fields = field_io_read(str(tmp_path))
    assert grid == GRID
    assert isinstance(fields["beta"], KForm)
    assert fields["beta"].degree == 2
    assert np.array_equal(fields["beta"].data[1], 2 * GRID.mesh()[1])


def test_bundle_archive(tmp_path) -> None:
    bundle = build(KILLING, PeriodicGrid([16, 16, 16]))
    write_bundle(str(tmp_path), bundle)
    again = read_bundle(str(tmp_path))
    assert again.name == KILLING
    assert isinstance(again.mu, VolumeForm)
    assert np.array_equal(again.g.data, bundle.g.data)
    assert again.parameters == bundle.parameters
    assert again.profiles["f"].to_json() == bundle.profiles["f"].to_json()
    description = read_description(str(tmp_path))
    assert description is not None
    assert "Y_closed_form" in description["roles"]


def test_bundle_defaults(tmp_path) -> None:
    bundle = build(KILLING, PeriodicGrid([16, 16, 16]))
    fields = {"g": bundle.g, "X": bundle.x, "p": bundle.p}
    field_io_write(str(tmp_path), bundle.grid, fields)
    assert read_description(str(tmp_path)) is None
    again = read_bundle(str(tmp_path))
    assert (again.alpha - bundle.alpha).max_abs() < 1e-14
    assert np.allclose(again.mu.density, 1.0)
    assert again.name == "archive"


def test_bundle_needs_metric(tmp_path) -> None:
    write_sample(str(tmp_path))
    with pytest.raises(FormatError):
        read_bundle(str(tmp_path))


@pytest.mark.parametrize(
    "change",
    [
        lambda m: m.update(format_version=2),
        lambda m: m.pop("grid"),
        lambda m: m["entries"][0].update(kind="spinor"),
        lambda m: m["entries"][0].update(dtype="f32le"),
        lambda m: m["entries"][2].update(degree=5),
        lambda m: m["entries"][0].update(file="missing.f64"),
    ],
)
def test_corrupted_manifest(tmp_path, change) -> None:
    write_sample(str(tmp_path))
    edit_manifest(str(tmp_path), change)
    with pytest.raises(FormatError):
        field_io_read(str(tmp_path))


def test_manifest_not_json(tmp_path) -> None:
    write_sample(str(tmp_path))
    (tmp_path / MANIFEST).write_text("{", encoding="utf-8")
    with pytest.raises(FormatError):
        field_io_read(str(tmp_path))
    with pytest.raises(FormatError):
        field_io_read(str(tmp_path / "nowhere"))


def test_truncated_array(tmp_path) -> None:
    write_sample(str(tmp_path))
    raw = (tmp_path / "X.f64").read_bytes()
    (tmp_path / "X.f64").write_bytes(raw[:-8])
    with pytest.raises(ShapeError):
        field_io_read(str(tmp_path))


def test_grid_mismatch_rejected(tmp_path) -> None:
    other = ScalarField.constant(PeriodicGrid([4, 4, 4]), 1.0)
    with pytest.raises(ShapeError):
        field_io_write(str(tmp_path), GRID, {"p": other})


def test_signed_three_form_roundtrip(tmp_path) -> None:
    theta = GRID.mesh()[1]
    field_io_write(
        str(tmp_path), GRID, {"residual": KForm(GRID, 3, [np.sin(theta)])}
    )
    _, fields = field_io_read(str(tmp_path))
    residual = fields["residual"]
    assert isinstance(residual, KForm)
    assert not isinstance(residual, VolumeForm)
    assert residual.degree == 3
    assert np.array_equal(residual.data[0], np.sin(theta))


def test_bundle_mu_promoted(tmp_path) -> None:
    bundle = build(KILLING, PeriodicGrid([16, 16, 16]))
    fields = {"g": bundle.g, "X": bundle.x, "p": bundle.p}
    fields["mu"] = KForm(bundle.grid, 3, [bundle.mu.density])
    field_io_write(str(tmp_path), bundle.grid, fields)
    assert isinstance(read_bundle(str(tmp_path)).mu, VolumeForm)

    fields["mu"] = KForm(bundle.grid, 3, [-bundle.mu.density])
    field_io_write(str(tmp_path), bundle.grid, fields)
    with pytest.raises(PositivityError):
        read_bundle(str(tmp_path))
