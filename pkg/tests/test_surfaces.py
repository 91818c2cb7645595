"""
Test level tori, surface frames and surface curvature
"""

import math

import numpy as np
import pytest
import sympy

from torusmhd.adapted import (
    chart_quadratic_profile,
    periodic_distance,
    perturb_metric,
)
from torusmhd.errors import CriticalError, NotLevelError, ParameterError
from torusmhd.examples import KILLING, ExampleBundle, build, reference_values
from torusmhd.fields import KForm, MetricField, ScalarField, VectorField
from torusmhd.grid import PeriodicGrid
from torusmhd.surfaces import (
    SurfaceFrame,
    curvature_shift,
    extract_slice,
    flow_chart,
    gauss_bonnet_integral,
    induced_frame_metric,
    induced_metric,
    p_harmonic_check,
    scalar_curvature_2d,
    scalar_curvature_orthogonal,
    slice_quadratic_profile,
)

CHART = PeriodicGrid([64, 64])


def test_extract_slice(killing: ExampleBundle) -> None:
    surface = extract_slice(killing.g, killing.p, math.pi / 4)
    assert surface.index == 4
    assert surface.zeta0 == pytest.approx(math.pi / 4)
    assert surface.grid == PeriodicGrid([32, 32])
    b = 2.0 + math.sin(math.pi / 4)
    assert surface.level == pytest.approx(b**2)
    assert surface.min_dp > 0.0


def test_extract_slice_errors(family: ExampleBundle) -> None:
    with pytest.raises(ParameterError):
        extract_slice(family.g, family.p, 0.1)
    # p' = 2 cos(zeta)
    with pytest.raises(CriticalError):
        extract_slice(family.g, family.p, math.pi / 2)
    theta = family.grid.mesh()[1]
    with pytest.raises(NotLevelError):
        extract_slice(family.g, ScalarField(family.grid, np.sin(theta)), 0.0)


def test_frame_of_killing_slice(killing: ExampleBundle) -> None:
    surface = extract_slice(killing.g, killing.p, 0.0)
    frame = induced_frame_metric(surface, killing.guided_flow(), killing.g)
    assert np.allclose(frame.x_s.data[0], 0.25)
    assert np.allclose(frame.x_s.data[1], 0.25)
    assert np.allclose(frame.y_s.data[0], 1.0)
    assert np.allclose(frame.y_s.data[1], -1.0)
    assert np.allclose(frame.omega.data[0], 2.0)
    assert np.allclose(frame.omega.data[1], 2.0)
    assert np.allclose(frame.eta.data[0], 0.5)
    assert np.allclose(frame.eta.data[1], -0.5)
    assert np.allclose(frame.e_coef.values, 0.125)

    ref = reference_values(killing)
    assert np.allclose(
        frame.g_coef.values,
        surface.restrict(ref["companion_norm_squared"].values),
    )
    report = frame.check()
    assert report.verdict, report.residuals


def test_induced_metric_components(killing: ExampleBundle) -> None:
    h = induced_metric(killing.g, 0)
    assert np.allclose(h.component(0, 1), killing.g.component(1, 2)[0])
    # det h = 1 / g_zz
    assert np.allclose(h.determinant(), 1.0 / killing.g.component(0, 0)[0])


def test_orthogonal_curvature_matches_closed_form() -> None:
    u = CHART.mesh()[0]
    e_coef = ScalarField.constant(CHART, 1.0)
    g_coef = ScalarField(CHART, np.exp(2.0 * np.sin(u)))
    s = scalar_curvature_orthogonal(e_coef, g_coef).values
    expected = 2.0 * (np.sin(u) - np.cos(u) ** 2)
    assert np.max(np.abs(s - expected)) < 1e-9
    assert s[0, 0] == pytest.approx(-2.0)


def test_brioschi_agrees_with_orthogonal_formula() -> None:
    u, v = CHART.mesh()
    e = 1.0 + 0.3 * np.cos(v)
    gg = 2.0 + 0.5 * np.sin(u + v)
    h = MetricField(CHART, [e, np.zeros(CHART.shape), gg])
    s_general = scalar_curvature_2d(h).values
    s_orthogonal = scalar_curvature_orthogonal(
        ScalarField(CHART, e), ScalarField(CHART, gg)
    ).values
    assert np.max(np.abs(s_general - s_orthogonal)) < 1e-10


def test_brioschi_on_conformal_metric() -> None:
    u_sym, v_sym = sympy.symbols("u v")
    sigma = sympy.sin(u_sym) * sympy.cos(v_sym) * sympy.Rational(3, 10)
    laplacian = sympy.diff(sigma, u_sym, 2) + sympy.diff(sigma, v_sym, 2)
    scalar = sympy.lambdify(
        (u_sym, v_sym), -2 * sympy.exp(-2 * sigma) * laplacian, "numpy"
    )
    factor = sympy.lambdify((u_sym, v_sym), sympy.exp(2 * sigma), "numpy")
    u, v = CHART.mesh()
    h = MetricField(CHART, [factor(u, v), np.zeros(CHART.shape), factor(u, v)])
    s = scalar_curvature_2d(h).values
    assert np.max(np.abs(s - scalar(u, v))) < 1e-9


def test_pulled_back_flat_metric_is_flat() -> None:
    v = CHART.mesh()[1]
    shear = 0.3 * np.cos(v)
    h = MetricField(
        CHART, [np.ones(CHART.shape), shear, 1.0 + shear**2]
    )
    assert scalar_curvature_2d(h).max_abs() < 1e-10
    assert gauss_bonnet_integral(h) == pytest.approx(0.0, abs=1e-10)


def test_gauss_bonnet_on_killing_slice(killing: ExampleBundle) -> None:
    surface = extract_slice(killing.g, killing.p, 0.0)
    assert gauss_bonnet_integral(surface.h) == pytest.approx(0.0, abs=1e-10)
    assert scalar_curvature_2d(surface.h).max_abs() > 1e-3


@pytest.mark.parametrize("c", [-0.01, 0.005])
def test_curvature_shift_is_exact(killing: ExampleBundle, c: float) -> None:
    surface = extract_slice(killing.g, killing.p, 0.0)
    frame = induced_frame_metric(surface, killing.guided_flow(), killing.g)
    profile = slice_quadratic_profile(frame, (0, 0), c, 1.0)
    assert profile.descriptor["kind"] == "slice-quadratic"
    g_rho = perturb_metric(
        killing.g, killing.x, killing.p, profile, killing.mu
    )
    before = scalar_curvature_2d(surface.h).values[0, 0]
    after = scalar_curvature_2d(induced_metric(g_rho, 0)).values[0, 0]
    predicted = curvature_shift(frame.e_coef.values[0, 0], c)
    # E(0) = 1 / 8
    assert predicted == pytest.approx(-16.0 * c)
    assert after - before == pytest.approx(predicted, rel=1e-6)


def test_slice_quadratic_profile_checks(killing: ExampleBundle) -> None:
    surface = extract_slice(killing.g, killing.p, 0.0)
    frame = induced_frame_metric(surface, killing.guided_flow(), killing.g)
    with pytest.raises(ParameterError):
        slice_quadratic_profile(frame, (0, 0), 0.1, 4.0)
    with pytest.raises(ParameterError):
        slice_quadratic_profile(frame, (0, 0), -100.0, 1.0)


def test_p_harmonic(killing: ExampleBundle, family: ExampleBundle) -> None:
    for bundle in (killing, family):
        surface = extract_slice(bundle.g, bundle.p, math.pi / 4)
        report = p_harmonic_check(surface, bundle.g, bundle.x, bundle.p)
        assert report.verdict, report.residuals

    surface = extract_slice(killing.g, killing.p, 0.0)
    unweighted = p_harmonic_check(
        surface,
        killing.g,
        killing.x,
        killing.p,
        weight=np.ones(surface.grid.shape),
    )
    assert not unweighted.verdict


def test_flow_chart_of_constant_frame(killing: ExampleBundle) -> None:
    surface = extract_slice(killing.g, killing.p, 0.0)
    frame = induced_frame_metric(surface, killing.guided_flow(), killing.g)
    u = np.array([0.0, 0.5, -1.0, 2.0])
    v = np.array([0.0, 0.25, 0.5, -0.75])
    chart = flow_chart(frame, (1.0, 2.0), u, v)
    assert chart.shape == (4, 2)
    expected = np.stack(
        [1.0 + 0.25 * u + v, 2.0 + 0.25 * u - v], axis=-1
    )
    assert np.allclose(chart, expected, atol=1e-10)


@pytest.fixture(scope="module")
def fine_killing() -> ExampleBundle:
    return build(KILLING, PeriodicGrid([32, 128, 128]))


@pytest.mark.parametrize("c", [-0.01, -0.001])
def test_localized_curvature_shift(
    fine_killing: ExampleBundle, c: float
) -> None:
    bundle = fine_killing
    surface = extract_slice(bundle.g, bundle.p, 0.0)
    frame = induced_frame_metric(surface, bundle.guided_flow(), bundle.g)
    profile = slice_quadratic_profile(frame, (0, 0), c, 1.0, 1.0)
    assert profile.descriptor["support_radius"] == 1.0
    # confined in-slice to distance 1 of the origin
    far = periodic_distance(bundle.grid, (0.0, 0.0, 0.0), (1, 2)) > 1.0
    assert np.all(profile.rho.values[far] == 1.0)

    g_rho = perturb_metric(bundle.g, bundle.x, bundle.p, profile, bundle.mu)
    before = scalar_curvature_2d(surface.h).values[0, 0]
    after = scalar_curvature_2d(induced_metric(g_rho, 0)).values[0, 0]
    predicted = curvature_shift(frame.e_coef.values[0, 0], c)
    assert after - before == pytest.approx(predicted, rel=1e-5)


def test_localized_profile_needs_resolution(killing: ExampleBundle) -> None:
    surface = extract_slice(killing.g, killing.p, 0.0)
    frame = induced_frame_metric(surface, killing.guided_flow(), killing.g)
    with pytest.raises(ParameterError):
        slice_quadratic_profile(frame, (0, 0), -0.01, 1.0, 1.0)


@pytest.mark.parametrize("c", [-0.05, 0.02])
def test_chart_profile_shifts_orthogonal_curvature(c: float) -> None:
    u, v = CHART.mesh()
    e_coef = ScalarField(CHART, 1.7 + 0.3 * np.sin(u) + 0.2 * np.sin(v))
    g_coef = ScalarField(CHART, 1.0 + 0.3 * np.sin(u + v))
    profile = chart_quadratic_profile(CHART, (0.0, 0.0), c, 2.5)
    rho = profile.rho.values
    before = scalar_curvature_orthogonal(e_coef, g_coef).values[0, 0]
    after = scalar_curvature_orthogonal(
        e_coef, ScalarField(CHART, rho * g_coef.values)
    ).values[0, 0]
    e0, g0 = e_coef.values[0, 0], g_coef.values[0, 0]
    assert g0 == 1.0
    assert after - before == pytest.approx(curvature_shift(e0, c), rel=1e-4)
    assert after - before == pytest.approx(-2.0 * c / (e0 * g0), rel=1e-4)


def test_flow_chart_of_varying_frame(killing: ExampleBundle) -> None:
    surface = extract_slice(killing.g, killing.p, 0.0)
    grid = surface.grid
    theta = grid.mesh()[0]
    speed = 1.0 + 0.5 * np.sin(theta)
    ones, zeros = np.ones(grid.shape), np.zeros(grid.shape)
    # theta' = sin(theta) along X, then phi' = 1 + sin(theta) / 2 along Y
    frame = SurfaceFrame(
        surface,
        VectorField(grid, [np.sin(theta), zeros]),
        VectorField(grid, [zeros, speed]),
        KForm(grid, 1, [ones, zeros]),
        KForm(grid, 1, [zeros, 1.0 / speed]),
        ScalarField.constant(grid, 1.0),
        ScalarField(grid, speed**-2),
        KForm(grid, 1, [ones, zeros]),
    )
    u = np.array([0.0, 0.4, -0.8, 1.5])
    v = np.array([0.3, -1.1, 0.6, 2.0])
    chart = flow_chart(frame, (1.0, 2.0), u, v)
    theta_u = 2.0 * np.arctan(math.tan(0.5) * np.exp(u))
    expected = np.stack(
        [theta_u, 2.0 + v * (1.0 + 0.5 * np.sin(theta_u))], axis=-1
    )
    assert np.allclose(chart, expected, atol=1e-7)
