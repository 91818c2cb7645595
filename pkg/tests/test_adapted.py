"""
Test adaptedness and the frame-rescaled metric
"""

import math

import numpy as np
import pytest

from torusmhd.adapted import (
    PerturbationProfile,
    bump_profile,
    chart_quadratic_profile,
    cutoff_width,
    is_adapted,
    localized_cutoff,
    periodic_distance,
    perturb_metric,
    quadratic_wave,
    smooth_bump,
)
from torusmhd.errors import (
    FrameDegeneracyError,
    ParameterError,
    PositivityError,
)
from torusmhd.examples import ExampleBundle
from torusmhd.exterior import flat
from torusmhd.fields import ScalarField
from torusmhd.grid import PeriodicGrid, partial_derivative
from torusmhd.mhd import companion_field, mhd_residual


def test_examples_are_adapted(
    family: ExampleBundle, killing: ExampleBundle
) -> None:
    for bundle in (family, killing):
        report = is_adapted(bundle.g, bundle.x, bundle.alpha, bundle.mu)
        assert report.verdict
        assert report.alpha_residual < 1e-12
        assert report.volume_residual < 1e-12


def test_scaled_alpha_is_not_adapted(killing: ExampleBundle) -> None:
    report = is_adapted(
        killing.g, killing.x, killing.alpha.scaled(1.1), killing.mu
    )
    assert not report.verdict
    assert report.alpha_residual == pytest.approx(
        0.1 * flat(killing.g, killing.x).max_norm()
    )


def test_identity_profile_keeps_metric(family: ExampleBundle) -> None:
    profile = PerturbationProfile.identity(family.grid)
    assert not profile.support.any()
    g_rho = perturb_metric(family.g, family.x, family.p, profile)
    assert np.max(np.abs(g_rho.data - family.g.data)) <= 1e-14


def test_profile_must_be_positive() -> None:
    grid = PeriodicGrid([8, 8, 8])
    with pytest.raises(PositivityError):
        PerturbationProfile(ScalarField.constant(grid, 0.0))


@pytest.mark.parametrize(
    "center,amplitude",
    [
        ((math.pi, 1.0, 2.0), 0.3),
        ((2.5, 4.0, 0.5), -0.5),
        ((4.0, 6.0, 6.0), 2.0),
    ],
)
def test_bump_keeps_adaptedness_and_equilibrium(
    family: ExampleBundle, center, amplitude
) -> None:
    profile = bump_profile(center, 0.5, amplitude, family.grid)
    assert profile.support.any()
    g_rho = perturb_metric(family.g, family.x, family.p, profile, family.mu)
    assert np.max(np.abs(g_rho.data - family.g.data)) > 1e-3

    report = is_adapted(g_rho, family.x, family.alpha, family.mu)
    assert report.verdict
    assert mhd_residual(g_rho, family.x, family.p, mu=family.mu).verdict

    # the metric is untouched away from the bump
    outside = ~profile.support
    assert np.max(np.abs((g_rho.data - family.g.data)[:, outside])) < 1e-15


def test_bump_rescales_companion_only(family: ExampleBundle) -> None:
    profile = bump_profile((math.pi, 1.0, 2.0), 0.5, 0.3, family.grid)
    g_rho = perturb_metric(family.g, family.x, family.p, profile, family.mu)
    y = companion_field(family.guided_flow())
    ratio = g_rho.norm_squared(y)[profile.support] / family.g.norm_squared(
        y
    )[profile.support]
    assert np.allclose(ratio, profile.rho.values[profile.support])


def test_perturbation_of_killing_example(killing: ExampleBundle) -> None:
    profile = bump_profile((0.3, 2.0, 2.0), 0.6, 0.4, killing.grid)
    g_rho = perturb_metric(
        killing.g, killing.x, killing.p, profile, killing.mu
    )
    assert is_adapted(g_rho, killing.x, killing.alpha, killing.mu).verdict


def test_bump_on_critical_slab_is_degenerate(
    family: ExampleBundle,
) -> None:
    # p' = 2 cos(zeta) vanishes on zeta = pi / 2
    profile = bump_profile((math.pi / 2, 1.0, 1.0), 0.5, 0.3, family.grid)
    with pytest.raises(FrameDegeneracyError):
        perturb_metric(family.g, family.x, family.p, profile, family.mu)


@pytest.mark.parametrize(
    "center,amplitude",
    [
        ((0.2, 1.0, 5.0), 0.3),
        ((2.6, 3.0, 1.0), -0.4),
        ((5.8, 4.0, 2.5), 1.5),
    ],
)
def test_killing_equilibrium_survives_perturbation(
    killing: ExampleBundle, center, amplitude
) -> None:
    # dp vanishes on zeta = pi / 2 and 3 pi / 2 only
    profile = bump_profile(center, 0.5, amplitude, killing.grid)
    g_rho = perturb_metric(
        killing.g, killing.x, killing.p, profile, killing.mu
    )
    before = mhd_residual(killing.g, killing.x, killing.p, mu=killing.mu)
    after = mhd_residual(g_rho, killing.x, killing.p, mu=killing.mu)
    assert before.verdict and after.verdict


@pytest.mark.parametrize(
    "radius,amplitude", [(0.5, -1.5), (0.5, -1.0), (0.0, 0.3), (4.0, 0.3)]
)
def test_bump_parameters_checked(radius: float, amplitude: float) -> None:
    grid = PeriodicGrid([8, 8, 8])
    with pytest.raises(ParameterError):
        bump_profile((1.0, 1.0, 1.0), radius, amplitude, grid)


def test_bump_profile_shape() -> None:
    grid = PeriodicGrid([16, 16, 16])
    profile = bump_profile((0.0, 0.0, 0.0), 1.0, 0.3, grid)
    assert profile.rho.values[0, 0, 0] == pytest.approx(1.3)
    assert profile.rho.values[8, 8, 8] == 1.0
    assert profile.to_json()["kind"] == "bump"
    assert profile.to_json()["support_nodes"] > 0


def test_smooth_cutoffs() -> None:
    s = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.5])
    assert smooth_bump(s)[0] == 1.0
    assert smooth_bump(s)[-2:].tolist() == [0.0, 0.0]
    assert 0.0 < smooth_bump(s)[3] < smooth_bump(s)[2] < 1.0


def test_localized_cutoff() -> None:
    grid = PeriodicGrid([64, 64])
    chi = localized_cutoff(grid, (0.0, 0.0), 2.5)
    assert chi[0, 0] == 1.0
    dist = periodic_distance(grid, (0.0, 0.0))
    assert np.all(chi[dist > 2.5] == 0.0)
    assert np.max(chi[dist > 2.0]) < 1e-6
    # resolved: the top Fourier band carries nothing
    coeffs = np.abs(np.fft.fft2(chi))
    assert np.max(coeffs[30:35, :]) < 1e-9 * coeffs[0, 0]
    assert np.max(coeffs[:, 30:35]) < 1e-9 * coeffs[0, 0]

    # only the listed axes count
    line = localized_cutoff(grid, (0.0, 3.0), 2.5, axes=(0,))
    assert np.all(line[0, :] == 1.0)


@pytest.mark.parametrize(
    "n,radius", [(32, 1.0), (32, 3.0), (64, 1.0), (64, 0.0), (64, 3.2)]
)
def test_cutoff_width_rejects(n: int, radius: float) -> None:
    with pytest.raises(ParameterError):
        cutoff_width(PeriodicGrid([n, n]), radius, (0, 1))


def test_cutoff_width() -> None:
    width = cutoff_width(PeriodicGrid([64, 64]), 2.5, (0, 1))
    chord = 2.0 * math.sin(1.25)
    assert width == pytest.approx(chord / math.sqrt(-2.0 * math.log(1e-12)))
    assert cutoff_width(PeriodicGrid([128, 128]), 1.0, (0, 1)) < width


def test_chart_quadratic_profile_jet() -> None:
    grid = PeriodicGrid([64, 64])
    profile = chart_quadratic_profile(grid, (1.0, 2.0), 0.2)
    rho = profile.rho.values
    node = (10, 20)
    assert rho.shape == grid.shape
    origin = chart_quadratic_profile(
        grid, (grid.axis(0)[10], grid.axis(1)[20]), 0.2
    ).rho.values
    assert origin[node] == pytest.approx(1.0)
    d_u = partial_derivative(grid, origin, 0)
    d_uu = partial_derivative(grid, d_u, 0)
    d_v = partial_derivative(grid, origin, 1)
    assert d_u[node] == pytest.approx(0.0, abs=1e-12)
    assert d_v[node] == pytest.approx(0.0, abs=1e-12)
    assert d_uu[node] == pytest.approx(0.4)
    assert np.min(rho) > 0.0


def test_chart_quadratic_profile_checks() -> None:
    grid = PeriodicGrid([16, 16])
    with pytest.raises(ParameterError):
        chart_quadratic_profile(grid, (0.0, 0.0), -1.0)
    with pytest.raises(ParameterError):
        chart_quadratic_profile(grid, (0.0,), 0.1)
    with pytest.raises(ParameterError):
        chart_quadratic_profile(grid, (0.0, 0.0), 0.1, 1.0)


def test_localized_chart_quadratic_profile() -> None:
    grid = PeriodicGrid([64, 64])
    profile = chart_quadratic_profile(grid, (0.0, 0.0), -0.2, 2.5)
    rho = profile.rho.values
    assert profile.to_json()["support_radius"] == 2.5
    assert rho[32, 32] == 1.0
    d_u = partial_derivative(grid, rho, 0)
    d_uu = partial_derivative(grid, d_u, 0)
    d_vv = partial_derivative(grid, partial_derivative(grid, rho, 1), 1)
    assert d_u[0, 0] == pytest.approx(0.0, abs=1e-10)
    assert d_uu[0, 0] == pytest.approx(-0.4, rel=1e-7)
    assert d_vv[0, 0] == pytest.approx(0.0, abs=1e-8)


def test_quadratic_wave() -> None:
    grid = PeriodicGrid([16])
    wave = quadratic_wave(grid, 0, 0.0)
    assert wave[0] == 0.0
    assert wave[8] == pytest.approx(4.0)
