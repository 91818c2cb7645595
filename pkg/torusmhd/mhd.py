"""
Equilibrium residuals, Beltrami analysis, guided flows and companion
fields.

Sign convention: with curl and cross defined through the volume form,
i_{curl X x X} g = i_X d(X^flat), so a field with i_X dalpha = -dp solves

    curl X x X + grad p = 0,        div X = 0,

and the momentum residual is curl X x X + grad p.
"""

import logging
import threading
from typing import NamedTuple, Optional

import numpy as np

from .errors import AllMaskedError, ParameterError, PositivityError
from .exterior import (
    VolumeForm,
    cross,
    curl,
    divergence,
    evaluate,
    exterior_derivative,
    flat,
    gradient,
    interior_product,
    inverse_volume_contraction,
    lie_derivative_form,
    volume_form,
    wedge,
)
from .fields import KForm, MetricField, ScalarField, VectorField
from .grid import partial_derivative
from .reports import Report

LOGGER = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-8

# nodes with |X| below this fraction of max |X| are masked in quotients
MASK_FRACTION = 1e-8


def _relative(value: float, scale: float) -> float:
    return value / scale if scale > 0.0 else value


class EquilibriumReport(Report):
    """
    Momentum and divergence residuals of (X, p).

    The residual fields are kept on the report; the JSON form carries
    only their max-norms.
    """

    name = "mhd equilibrium"
    momentum_residual: Optional[VectorField] = None
    div_residual: Optional[ScalarField] = None

    @property
    def momentum_norm(self) -> float:
        return self.residuals["momentum"]

    @property
    def div_norm(self) -> float:
        return self.residuals["divergence"]


def mhd_residual(
    g: MetricField,
    x: VectorField,
    p: ScalarField,
    tol: float = DEFAULT_TOLERANCE,
    mu: Optional[VolumeForm] = None,
) -> EquilibriumReport:
    """
    Residuals of curl X x X + grad p = 0 and div X = 0.

    Both are reported relative to max g(X, X) (momentum) and max |X|_g
    (divergence); mu defaults to the Riemannian volume form of g.
    """
    if mu is None:
        mu = volume_form(g)
    momentum = cross(g, curl(g, x, mu), x, mu) + gradient(g, p)
    div = divergence(mu, x)
    scale = float(np.max(g.norm_squared(x)))
    report = EquilibriumReport.from_residuals(
        EquilibriumReport.name,
        {
            "momentum": _relative(g.max_norm_of(momentum), scale),
            "divergence": _relative(div.max_abs(), np.sqrt(scale)),
        },
        tol,
    )
    report.momentum_residual = momentum
    report.div_residual = div
    LOGGER.debug(
        "Momentum %.3e, divergence %.3e",
        report.momentum_norm,
        report.div_norm,
    )
    return report


def bernoulli_convert(
    g: MetricField, x: VectorField, bernoulli: ScalarField
) -> ScalarField:
    """The pressure p = -(|X|^2 / 2 + P) of a Bernoulli function P."""
    return ScalarField(
        g.grid, -(0.5 * g.norm_squared(x) + bernoulli.values)
    )


class BeltramiFactor(NamedTuple):
    factor: ScalarField
    colinearity_residual: float
    first_integral_residual: float
    mask: np.ndarray


def beltrami_factor(
    g: MetricField,
    x: VectorField,
    mu: Optional[VolumeForm] = None,
    mask_fraction: float = MASK_FRACTION,
) -> BeltramiFactor:
    """
    Proportionality factor lambda = g(curl X, X) / g(X, X).

    Nodes where |X| < mask_fraction * max |X| carry lambda = 0 and are
    left out of both residuals.
    """
    if mu is None:
        mu = volume_form(g)
    norm = g.norm(x)
    mask = norm > mask_fraction * float(np.max(norm))
    if not np.any(mask):
        raise AllMaskedError()
    w = curl(g, x, mu)
    squared = np.where(mask, g.norm_squared(x), 1.0)
    lam = np.where(mask, g.apply(w, x) / squared, 0.0)
    factor = ScalarField(g.grid, lam)

    off = g.norm(w - x.scaled(lam))
    colinearity = _relative(
        float(np.max(off[mask])), g.max_norm_of(w)
    )
    drift = np.abs(evaluate(exterior_derivative(factor), x))
    first_integral = float(np.max(drift[mask]))
    LOGGER.debug(
        "Beltrami colinearity %.3e, first integral %.3e",
        colinearity,
        first_integral,
    )
    return BeltramiFactor(factor, colinearity, first_integral, mask)


def companion_from(
    x: VectorField, alpha: KForm, mu: VolumeForm, p: ScalarField
) -> VectorField:
    """The field Y with i_Y mu = alpha ^ dp / alpha(X)."""
    alpha_x = evaluate(alpha, x)
    beta = wedge(alpha, exterior_derivative(p)).scaled(1.0 / alpha_x)
    return inverse_volume_contraction(mu, beta)


class GuidedFlow:
    """
    A quadruple (X, alpha, mu, p) with its validation report.

    The companion field is computed at most once and then shared.
    """

    report: Report
    min_alpha_x = 0.0

    def __init__(
        self,
        x: VectorField,
        alpha: KForm,
        mu: VolumeForm,
        p: ScalarField,
        **kwargs,
    ):
        self.x = x
        self.alpha = alpha
        self.mu = mu
        self.p = p
        for key, val in kwargs.items():
            setattr(self, key, val)
        self._companion: Optional[VectorField] = None
        self._lock = threading.Lock()

    @property
    def grid(self):
        return self.x.grid

    @property
    def valid(self) -> bool:
        return bool(self.report.verdict)

    @property
    def alpha_x(self) -> np.ndarray:
        return evaluate(self.alpha, self.x)

    @property
    def normalized(self) -> VectorField:
        """X / alpha(X)."""
        return self.x.scaled(1.0 / self.alpha_x)

    def companion(self) -> VectorField:
        with self._lock:
            if self._companion is None:
                self._companion = companion_from(
                    self.x, self.alpha, self.mu, self.p
                )
            return self._companion


def validate_guided_flow(
    x: VectorField,
    alpha: KForm,
    mu: VolumeForm,
    p: ScalarField,
    tol: float = DEFAULT_TOLERANCE,
) -> GuidedFlow:
    """
    Check alpha(X) > 0, L_X mu = 0, dp(X) = 0 and dalpha ^ dp = 0.

    Non-positive alpha(X) anywhere raises PositivityError; the other
    three are reported relative to the max-norms of their factors.
    """
    alpha_x = evaluate(alpha, x)
    low = float(np.min(alpha_x))
    if not low > 0.0:
        raise PositivityError("alpha(X)", low)

    flux = interior_product(x, mu)
    dp = exterior_derivative(p)
    dalpha = exterior_derivative(alpha)
    residuals = {
        "L_X mu": _relative(
            exterior_derivative(flux).max_abs(), flux.max_abs()
        ),
        "dp(X)": _relative(
            float(np.max(np.abs(evaluate(dp, x)))),
            dp.max_abs() * x.max_abs(),
        ),
        "dalpha ^ dp": _relative(
            wedge(dalpha, dp).max_abs(), dalpha.max_abs() * dp.max_abs()
        ),
    }
    report = Report.from_residuals("guided flow", residuals, tol)
    if not report.verdict:
        LOGGER.warning("Guided flow check failed: %s", report.residuals)
    return GuidedFlow(x, alpha, mu, p, report=report, min_alpha_x=low)


def companion_field(flow: GuidedFlow) -> VectorField:
    """
    The companion field Y of a valid guided flow, cached on the flow.
    """
    if not flow.valid:
        raise ParameterError("companion field of an invalid guided flow")
    return flow.companion()


def commutator(x: VectorField, y: VectorField) -> VectorField:
    """Coordinate Lie bracket [X, Y]."""
    grid = x.grid
    comps = []
    for i in range(grid.ndim):
        val = np.zeros(grid.shape)
        for j in range(grid.ndim):
            val += x.data[j] * partial_derivative(grid, y.data[i], j)
            val -= y.data[j] * partial_derivative(grid, x.data[i], j)
        comps.append(val)
    return VectorField(grid, comps)


def quasisymmetry_residual(
    g: MetricField,
    x: VectorField,
    mu: VolumeForm,
    u: VectorField,
    tol: float = 1e-10,
) -> Report:
    """
    Max-norms of L_u alpha(X), L_u i_X mu and L_u alpha, alpha = X^flat.
    """
    alpha = flat(g, x)
    alpha_x = ScalarField(g.grid, evaluate(alpha, x))
    return Report.from_residuals(
        "quasi-symmetry",
        {
            "L_u alpha(X)": lie_derivative_form(u, alpha_x).max_abs(),
            "L_u i_X mu": lie_derivative_form(
                u, interior_product(x, mu)
            ).max_abs(),
            "L_u alpha": lie_derivative_form(u, alpha).max_abs(),
        },
        tol,
    )


def adapted_equilibrium_residual(
    x: VectorField,
    alpha: KForm,
    mu: VolumeForm,
    p: ScalarField,
    tol: float = DEFAULT_TOLERANCE,
) -> Report:
    """
    Metric-free equilibrium certificate: L_X mu = 0 and
    i_X dalpha + dp = 0. When both hold, X is an equilibrium with
    pressure p for every metric adapted to (X, alpha, mu).
    """
    flux = interior_product(x, mu)
    dp = exterior_derivative(p)
    force = interior_product(x, exterior_derivative(alpha)) + dp
    return Report.from_residuals(
        "adapted equilibrium",
        {
            "L_X mu": _relative(
                exterior_derivative(flux).max_abs(), flux.max_abs()
            ),
            "i_X dalpha + dp": _relative(
                force.max_abs(), max(dp.max_abs(), alpha.max_abs() ** 2)
            ),
        },
        tol,
    )
