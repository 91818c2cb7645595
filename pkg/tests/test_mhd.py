"""
Test equilibrium residuals, guided flows and companion fields
"""

import numpy as np
import pytest

from torusmhd.errors import AllMaskedError, ParameterError, PositivityError
from torusmhd.examples import ExampleBundle, reference_values
from torusmhd.exterior import VolumeForm
from torusmhd.fields import MetricField, ScalarField, VectorField
from torusmhd.grid import PeriodicGrid
from torusmhd.mhd import (
    adapted_equilibrium_residual,
    beltrami_factor,
    bernoulli_convert,
    commutator,
    companion_field,
    mhd_residual,
    quasisymmetry_residual,
    validate_guided_flow,
)


def test_family_is_an_equilibrium(family: ExampleBundle) -> None:
    report = mhd_residual(family.g, family.x, family.p, mu=family.mu)
    assert report.verdict
    assert report.momentum_norm < 1e-12
    assert report.div_norm < 1e-12
    assert report.momentum_residual is not None


def test_wrong_pressure_fails(family: ExampleBundle) -> None:
    flipped = ScalarField(family.grid, -family.p.values)
    report = mhd_residual(family.g, family.x, flipped, mu=family.mu)
    assert not report.verdict
    assert report.momentum_norm > 0.1


def test_killing_example_is_an_equilibrium(killing: ExampleBundle) -> None:
    report = mhd_residual(killing.g, killing.x, killing.p, mu=killing.mu)
    assert report.verdict


def test_bernoulli_convert(family: ExampleBundle) -> None:
    bernoulli = ScalarField(family.grid, -2.0 * family.p.values)
    p = bernoulli_convert(family.g, family.x, bernoulli)
    assert np.allclose(p.values, family.p.values)


def test_beltrami_rotating_field() -> None:
    grid = PeriodicGrid([16, 16, 16])
    zeta = grid.mesh()[0]
    x = VectorField(
        grid, [np.zeros(grid.shape), np.sin(zeta), np.cos(zeta)]
    )
    result = beltrami_factor(MetricField.identity(grid), x)
    assert result.mask.all()
    assert np.allclose(result.factor.values, 1.0)
    assert result.colinearity_residual < 1e-12
    assert result.first_integral_residual < 1e-12


def test_beltrami_of_zero_field() -> None:
    grid = PeriodicGrid([8, 8, 8])
    with pytest.raises(AllMaskedError):
        beltrami_factor(MetricField.identity(grid), VectorField.zero(grid))


def test_guided_flow_checks(family: ExampleBundle) -> None:
    flow = validate_guided_flow(family.x, family.alpha, family.mu, family.p)
    assert flow.valid
    assert flow.min_alpha_x == pytest.approx(1.0)
    assert set(flow.report.residuals) == {
        "L_X mu",
        "dp(X)",
        "dalpha ^ dp",
    }


def test_guided_flow_rejects_negative_alpha(family: ExampleBundle) -> None:
    with pytest.raises(PositivityError):
        validate_guided_flow(
            family.x,
            family.alpha.scaled(-1.0),
            family.mu,
            family.p,
        )


def test_guided_flow_detects_compressible_field(
    family: ExampleBundle,
) -> None:
    theta = family.grid.mesh()[1]
    mu = VolumeForm(family.grid, 1.0 + 0.5 * np.sin(theta))
    flow = validate_guided_flow(family.x, family.alpha, mu, family.p)
    assert not flow.valid
    assert flow.report.residuals["L_X mu"] > 1e-3
    with pytest.raises(ParameterError):
        companion_field(flow)


def test_family_companion_closed_form(family: ExampleBundle) -> None:
    flow = family.guided_flow()
    y = companion_field(flow)
    assert family.y_closed_form is not None
    assert (y - family.y_closed_form).max_abs() < 1e-12
    assert companion_field(flow) is y
    assert commutator(flow.normalized, y).max_abs() < 1e-11


def test_killing_companion_closed_form(killing: ExampleBundle) -> None:
    y = companion_field(killing.guided_flow())
    ref = reference_values(killing)
    assert (y - ref["companion"]).max_abs() < 1e-12
    # b' = cos(zeta), iota0 = 1
    zeta = killing.grid.mesh()[0]
    assert np.allclose(y.data[1], np.cos(zeta))
    assert np.allclose(y.data[2], -np.cos(zeta))


def test_commutator_of_coordinate_fields(grid: PeriodicGrid) -> None:
    zeta, theta, phi = grid.mesh()
    d_zeta = VectorField.coordinate(grid, 0)
    x = VectorField(
        grid, [np.zeros(grid.shape), np.sin(zeta), np.cos(zeta)]
    )
    bracket = commutator(d_zeta, x)
    assert np.allclose(bracket.data[1], np.cos(zeta))
    assert np.allclose(bracket.data[2], -np.sin(zeta))
    assert (commutator(x, d_zeta) + bracket).max_abs() < 1e-12


def test_quasisymmetry_of_killing_example(killing: ExampleBundle) -> None:
    d_zeta = VectorField.coordinate(killing.grid, 0)
    report = quasisymmetry_residual(killing.g, killing.x, killing.mu, d_zeta)
    ref = reference_values(killing)
    # L_u alpha(X) = 2 (1 + iota0^2) b b' is not zero
    assert report.residuals["L_u alpha(X)"] == pytest.approx(
        ref["zeta_derivative_alpha_x"].max_abs(), rel=1e-10
    )
    assert report.residuals["L_u i_X mu"] > 0.1
    assert not report.verdict

    d_theta = VectorField.coordinate(killing.grid, 1)
    flat = MetricField.identity(killing.grid)
    assert quasisymmetry_residual(
        flat, killing.x, killing.mu, d_theta
    ).verdict


def test_adapted_equilibrium_certificate(killing: ExampleBundle) -> None:
    report = adapted_equilibrium_residual(
        killing.x, killing.alpha, killing.mu, killing.p
    )
    assert report.verdict
    scaled = adapted_equilibrium_residual(
        killing.x, killing.alpha.scaled(1.1), killing.mu, killing.p
    )
    assert not scaled.verdict
