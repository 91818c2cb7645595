"""
Metrics adapted to (X, alpha, mu), and the frame-rescaled metric g^rho.
"""

import logging
import math
from typing import Any, Dict, Optional, Sequence

import numpy as np

from .errors import FrameDegeneracyError, ParameterError, PositivityError
from .exterior import VolumeForm, evaluate, flat, gradient, volume_form
from .fields import KForm, MetricField, ScalarField, VectorField
from .grid import PeriodicGrid
from .mhd import companion_from
from .reports import Report

LOGGER = logging.getLogger(__name__)

# |rho - 1| at or below this counts as outside the support
SUPPORT_FLOOR = 1e-14

FRAME_TOLERANCE = 1e-8

# value of a localized cutoff on the edge of its support
CUTOFF_TAIL = 1e-12

# bound on k^2 times the cutoff spectrum at the Nyquist wavenumber
RESOLUTION_TOLERANCE = 1e-7


class AdaptednessReport(Report):
    name = "adaptedness"

    @property
    def alpha_residual(self) -> float:
        return self.residuals["alpha"]

    @property
    def volume_residual(self) -> float:
        return self.residuals["volume"]


def is_adapted(
    g: MetricField,
    x: VectorField,
    alpha: KForm,
    mu: VolumeForm,
    tol: float = 1e-10,
) -> AdaptednessReport:
    """
    Max-norms of i_X g - alpha and sqrt(det g) - mu.
    """
    alpha_residual = (flat(g, x) - alpha).max_norm()
    volume_residual = float(
        np.max(np.abs(np.sqrt(g.determinant()) - mu.density))
    )
    report = AdaptednessReport.from_residuals(
        AdaptednessReport.name,
        {"alpha": alpha_residual, "volume": volume_residual},
        tol,
    )
    LOGGER.debug("Adaptedness %s", report.residuals)
    return report


class PerturbationProfile:
    """
    A positive scalar rho whose deviation from 1 is confined to a
    declared support.
    """

    def __init__(
        self,
        rho: ScalarField,
        descriptor: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.rho = rho
        self.descriptor: Dict[str, Any] = dict(descriptor or {})
        self.min_rho = float(np.min(rho.values))
        if not self.min_rho > 0.0:
            raise PositivityError("perturbation profile", self.min_rho)

    @property
    def grid(self) -> PeriodicGrid:
        return self.rho.grid

    @property
    def support(self) -> np.ndarray:
        """Boolean node mask of the region where rho != 1."""
        return np.abs(self.rho.values - 1.0) > SUPPORT_FLOOR

    @classmethod
    def identity(cls, grid: PeriodicGrid) -> "PerturbationProfile":
        return cls(ScalarField.constant(grid, 1.0), {"kind": "identity"})

    def to_json(self) -> Dict[str, Any]:
        return dict(
            self.descriptor,
            min_rho=self.min_rho,
            support_nodes=int(np.count_nonzero(self.support)),
        )


def _frame_matrix(*columns: VectorField) -> np.ndarray:
    """Node-major matrices whose columns are the given vector fields."""
    return np.stack([np.moveaxis(c.data, 0, -1) for c in columns], axis=-1)


def perturb_metric(
    g: MetricField,
    x: VectorField,
    p: ScalarField,
    profile: PerturbationProfile,
    mu: Optional[VolumeForm] = None,
) -> MetricField:
    """
    The metric g^rho of the frame F = (X, Y, grad p).

    On the support of rho - 1 its Gram matrix in F is
    diag(alpha(X), rho g(Y, Y), g(grad p, grad p) / rho), that is
    g^rho = F^-T D F^-1; elsewhere g^rho = g. grad p is taken with
    respect to g, Y is the companion field of (X, X^flat, mu, p).
    """
    if profile.grid != g.grid:
        raise ParameterError("profile and metric live on different grids")
    support = profile.support
    if not np.any(support):
        return MetricField(g.grid, list(g.data))
    if mu is None:
        mu = volume_form(g)

    alpha = flat(g, x)
    grad_p = gradient(g, p)
    y = companion_from(x, alpha, mu, p)
    frame = _frame_matrix(x, y, grad_p)

    det = np.linalg.det(frame)
    scale = x.max_abs() * y.max_abs() * grad_p.max_abs()
    ratio = np.where(support, np.abs(det), np.inf)
    if scale > 0.0:
        ratio = ratio / scale
    worst = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    if not ratio[worst] > FRAME_TOLERANCE:
        raise FrameDegeneracyError(
            tuple(int(k) for k in worst), float(det[worst])
        )

    rho = profile.rho.values[support]
    diagonal = np.stack(
        [
            evaluate(alpha, x)[support],
            rho * g.norm_squared(y)[support],
            g.norm_squared(grad_p)[support] / rho,
        ],
        axis=-1,
    )
    inverse = np.linalg.inv(frame[support])
    matrix = g.matrix()
    matrix[support] = np.einsum(
        "mki,mk,mkj->mij", inverse, diagonal, inverse
    )
    LOGGER.info(
        "Perturbed metric on %d nodes, min rho %.4f",
        int(np.count_nonzero(support)),
        profile.min_rho,
    )
    return MetricField.from_matrix(g.grid, matrix)


def periodic_distance(
    grid: PeriodicGrid,
    center: Sequence[float],
    axes: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Periodic coordinate distance to `center` over `axes`, default all."""
    mesh = grid.mesh()
    squared = np.zeros(grid.shape)
    for i in range(grid.ndim) if axes is None else axes:
        squared += grid.periodic_offset(i, mesh[i], center[i]) ** 2
    return np.sqrt(squared)


def smooth_bump(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1 / (1 - s^2)) for |s| < 1 and 0 elsewhere."""
    out = np.zeros_like(s, dtype=np.float64)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def bump_profile(
    center: Sequence[float],
    radius: float,
    amplitude: float,
    grid: PeriodicGrid,
) -> PerturbationProfile:
    """
    rho = 1 + amplitude * exp(1 - 1 / (1 - (d / radius)^2)) inside the
    coordinate ball of periodic distance d < radius, 1 outside.
    """
    if len(center) != grid.ndim:
        raise ParameterError(f"center needs {grid.ndim} coordinates")
    if not amplitude > -1.0:
        raise ParameterError(f"bump amplitude must exceed -1: {amplitude}")
    if not 0.0 < radius < 0.5 * min(grid.period):
        raise ParameterError(
            f"bump radius must lie in (0, {0.5 * min(grid.period)})"
        )
    dist = periodic_distance(grid, center)
    rho = 1.0 + amplitude * smooth_bump(dist / radius)
    return PerturbationProfile(
        ScalarField(grid, rho),
        {
            "kind": "bump",
            "center": [float(c) for c in center],
            "radius": float(radius),
            "amplitude": float(amplitude),
        },
    )


def quadratic_wave(
    grid: PeriodicGrid, axis: int, origin: float
) -> np.ndarray:
    """
    (L / pi)^2 sin^2(pi (x - x0) / L): periodic, with 2-jet (x - x0)^2.
    """
    period = grid.period[axis]
    coords = grid.mesh()[axis]
    return (period / math.pi) ** 2 * np.sin(
        math.pi * (coords - origin) / period
    ) ** 2


def cutoff_width(
    grid: PeriodicGrid, support_radius: float, axes: Sequence[int]
) -> float:
    """
    Width w of the localized cutoff with support radius r, checked
    against the grid. The cutoff is a product of one factor per axis;
    k^2 |c_k| / |c_0| of each sampled factor at its Nyquist wavenumber k
    must stay below RESOLUTION_TOLERANCE.
    """
    half = 0.5 * min(grid.period[a] for a in axes)
    if not 0.0 < support_radius < half:
        raise ParameterError(f"support radius must lie in (0, {half})")
    chord = min(
        (grid.period[a] / math.pi)
        * math.sin(math.pi * support_radius / grid.period[a])
        for a in axes
    )
    width = chord / math.sqrt(-2.0 * math.log(CUTOFF_TAIL))
    for a in axes:
        period = grid.period[a]
        wave = (period / math.pi) ** 2 * np.sin(
            math.pi * grid.axis(a) / period
        ) ** 2
        coeffs = np.abs(np.fft.rfft(np.exp(-0.5 * wave / width**2)))
        nyquist = math.pi * grid.n[a] / period
        tail = nyquist**2 * float(coeffs[-1] / coeffs[0])
        if tail > RESOLUTION_TOLERANCE:
            raise ParameterError(
                f"support radius {support_radius} is not resolved by "
                f"{grid.n[a]} nodes along axis {a} (tail {tail:.1e})"
            )
    return width


def localized_cutoff(
    grid: PeriodicGrid,
    origin: Sequence[float],
    support_radius: float,
    axes: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    exp(-q / (2 w^2)), q the sum of quadratic_wave over `axes`, set to 0
    beyond periodic distance support_radius of the origin.

    The value is 1 at the origin and at most CUTOFF_TAIL on the edge of
    the support. q is a periodic trigonometric polynomial, so the cutoff
    is resolved once cutoff_width accepts the grid.
    """
    axes = tuple(range(grid.ndim)) if axes is None else tuple(axes)
    width = cutoff_width(grid, support_radius, axes)
    squared = np.zeros(grid.shape)
    for a in axes:
        squared += quadratic_wave(grid, a, origin[a])
    inside = periodic_distance(grid, origin, axes) <= support_radius
    return np.where(inside, np.exp(-0.5 * squared / width**2), 0.0)


def chart_quadratic_profile(
    grid: PeriodicGrid,
    origin: Sequence[float],
    c: float,
    support_radius: Optional[float] = None,
) -> PerturbationProfile:
    """
    rho = 1 + c * chi * q(u) on a chart with coordinates (u, v).

    q is quadratic_wave along u, so rho(0) = 1, rho_u(0) = rho_v(0) = 0
    and rho_uu(0) = 2c whatever chi is, as long as chi(0) = 1. chi is 1
    everywhere when support_radius is None, otherwise the localized
    cutoff of that support radius.
    """
    if len(origin) != grid.ndim:
        raise ParameterError(f"origin needs {grid.ndim} coordinates")
    if support_radius is None:
        cutoff = np.ones(grid.shape)
    else:
        cutoff = localized_cutoff(grid, origin, support_radius)
    rho = 1.0 + c * cutoff * quadratic_wave(grid, 0, origin[0])
    low = float(np.min(rho))
    if not low > 0.0:
        raise ParameterError(f"c = {c} makes rho non-positive ({low:.3e})")
    return PerturbationProfile(
        ScalarField(grid, rho),
        {
            "kind": "chart-quadratic",
            "origin": [float(o) for o in origin],
            "c": float(c),
            "support_radius": support_radius,
        },
    )
