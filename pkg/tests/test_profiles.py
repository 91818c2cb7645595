"""
Test periodic profiles
"""

import numpy as np
import pytest

from torusmhd.errors import FormatError, SubclassError
from torusmhd.profiles import (
    LIBRARY,
    PolarProfile,
    Profile,
    SampledProfile,
    SurfaceProfile,
    TrigProfile,
    lookup,
    profile_from_json,
    surface_profile_from_json,
)

Z = np.linspace(0.0, 6.0, 13)


def test_trig_profile() -> None:
    prof = TrigProfile(1.0, cos={2: 0.5}, sin={1: -1.0})
    assert prof(Z) == pytest.approx(1.0 + 0.5 * np.cos(2 * Z) - np.sin(Z))
    assert prof.derivative(Z) == pytest.approx(
        -np.sin(2 * Z) - np.cos(Z)
    )


@pytest.mark.parametrize("name", sorted(LIBRARY))
def test_library_derivatives(name: str) -> None:
    prof = lookup(name)
    step = 1e-6
    numeric = (prof(Z + step) - prof(Z - step)) / (2 * step)
    assert prof.derivative(Z) == pytest.approx(numeric, abs=1e-8)


def test_sampled_profile() -> None:
    nodes = np.arange(32) * (2 * np.pi / 32)
    prof = SampledProfile(np.cos(nodes) + 0.25 * np.sin(3 * nodes))
    assert prof(Z) == pytest.approx(np.cos(Z) + 0.25 * np.sin(3 * Z))
    assert prof.derivative(Z) == pytest.approx(
        -np.sin(Z) + 0.75 * np.cos(3 * Z)
    )


def test_polar_profile() -> None:
    r = TrigProfile(2.0)
    angle = TrigProfile(sin={1: 1.0})
    cos_part = PolarProfile(r, angle, "cos")
    sin_part = PolarProfile(r, angle, "sin")
    assert cos_part(Z) ** 2 + sin_part(Z) ** 2 == pytest.approx(4.0)
    assert cos_part.derivative(Z) == pytest.approx(
        -2.0 * np.sin(np.sin(Z)) * np.cos(Z)
    )
    with pytest.raises(FormatError):
        PolarProfile(r, angle, "tan")


def test_surface_profile() -> None:
    f = SurfaceProfile([(0.5, "cos", 1, "cos", 0), (2.0, "sin", 0, "sin", 1)])
    assert f(np.array(0.3), np.array(0.7)) == pytest.approx(
        0.5 * np.cos(0.3) + 2.0 * np.sin(0.7) * 0.0
    )
    with pytest.raises(FormatError):
        SurfaceProfile([(1.0, "exp", 1, "cos", 1)])


def test_profiles_from_json() -> None:
    polar = PolarProfile(TrigProfile(2.0), lookup("sin"), "sin")
    again = profile_from_json(polar.to_json())
    assert again(Z) == pytest.approx(polar(Z))
    assert profile_from_json("cos")(Z) == pytest.approx(np.cos(Z))
    sampled = profile_from_json({"kind": "sampled", "values": [1.0] * 8})
    assert sampled(Z) == pytest.approx(1.0)
    surface = surface_profile_from_json("cos-theta")
    assert surface.to_json()["terms"] == [[1.0, "cos", 1, "cos", 0]]


@pytest.mark.parametrize(
    "payload",
    ["no-such", {"kind": "spline"}, {"kind": "trig", "cos": {"x": 1}}, 3],
)
def test_bad_profile_payloads(payload) -> None:
    with pytest.raises(FormatError):
        profile_from_json(payload)


def test_bad_surface_payloads() -> None:
    with pytest.raises(FormatError):
        surface_profile_from_json({"terms": [[1.0, "cos"]]})
    with pytest.raises(FormatError):
        surface_profile_from_json("no-such")


def test_base_profile_is_abstract() -> None:
    with pytest.raises(SubclassError):
        Profile()(Z)
