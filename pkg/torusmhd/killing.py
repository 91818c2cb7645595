"""
Killing residuals, symmetry reports, and the N-functional certificate of
symmetry breaking.
"""

import logging
import math
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .adapted import PerturbationProfile, bump_profile, perturb_metric
from .errors import ParameterError, TangencyError
from .exterior import (
    VolumeForm,
    directional_derivative,
    exterior_derivative,
    flat,
    interior_product,
    lie_derivative_form,
    volume_form,
)
from .fields import MetricField, ScalarField, SymmetricTensorField, VectorField
from .grid import PeriodicGrid, gradient_arrays
from .mhd import GuidedFlow, commutator, companion_field
from .reports import Report
from .surfaces import (
    SurfaceTorus,
    curvature_shift,
    extract_slice,
    induced_frame_metric,
    induced_metric,
    scalar_curvature_2d,
    slice_quadratic_profile,
)

LOGGER = logging.getLogger(__name__)

GAP_FRACTION = 1e-6
GAP_FLOOR = 1e-12

# least curvature gap, as a fraction of the predicted shift
SHIFT_FRACTION = 1e-3


def lie_derivative_metric(
    g: SymmetricTensorField, k: VectorField
) -> SymmetricTensorField:
    """
    (L_K g)_ij = K^m d_m g_ij + g_mj d_i K^m + g_im d_j K^m.
    """
    grid = g.grid
    ndim = grid.ndim
    # dk[m][i] = d_i K^m
    dk = [gradient_arrays(grid, k.data[m]) for m in range(ndim)]
    comps = []
    for i, j in g.pairs:
        dg = gradient_arrays(grid, g.component(i, j))
        val = sum(k.data[m] * dg[m] for m in range(ndim))
        for m in range(ndim):
            val = val + g.component(m, j) * dk[m][i]
            val = val + g.component(i, m) * dk[m][j]
        comps.append(val)
    return SymmetricTensorField(grid, comps)


def lie_derivative_vector(k: VectorField, x: VectorField) -> VectorField:
    """L_K X = [K, X]."""
    return commutator(k, x)


class SymmetryReport(Report):
    """
    Max-norms of L_K g, L_K X, K(p), L_K alpha, L_K mu and L_K dp, plus
    L_K Y when a guided flow is given.
    """

    name = "symmetry"

    @property
    def killing_residual(self) -> float:
        return self.residuals["L_K g"]

    @property
    def field_residual(self) -> float:
        return self.residuals["L_K X"]

    @property
    def pressure_residual(self) -> float:
        return self.residuals["K(p)"]

    @property
    def alpha_residual(self) -> float:
        return self.residuals["L_K alpha"]

    @property
    def volume_residual(self) -> float:
        return self.residuals["L_K mu"]


def symmetry_report(
    g: MetricField,
    x: VectorField,
    p: ScalarField,
    k: VectorField,
    mu: Optional[VolumeForm] = None,
    flow: Optional[GuidedFlow] = None,
    tol: float = 1e-10,
) -> SymmetryReport:
    if mu is None:
        mu = volume_form(g)
    alpha = flat(g, x)
    residuals = {
        "L_K g": lie_derivative_metric(g, k).max_abs(),
        "L_K X": lie_derivative_vector(k, x).max_norm(),
        "K(p)": directional_derivative(k, p).max_abs(),
        "L_K alpha": lie_derivative_form(k, alpha).max_abs(),
        "L_K mu": exterior_derivative(interior_product(k, mu)).max_abs(),
        "L_K dp": lie_derivative_form(k, exterior_derivative(p)).max_abs(),
    }
    if flow is not None:
        residuals["L_K Y"] = lie_derivative_vector(
            k, companion_field(flow)
        ).max_norm()
    report = SymmetryReport.from_residuals(SymmetryReport.name, residuals, tol)
    LOGGER.debug("Symmetry residuals %s", report.residuals)
    return report


def n_functional(
    g: MetricField, surface: SurfaceTorus, y: VectorField, tol: float = 1e-10
) -> ScalarField:
    """N(g) = g(Y, Y) restricted to the slice."""
    normal = surface.normal_component(y)
    if normal > tol * max(1.0, y.max_abs()):
        raise TangencyError("Y", normal)
    return ScalarField(surface.grid, surface.restrict(g.norm_squared(y)))


class GenericityVerdict:
    """
    Outcome of the isolated-peak test: f(x*) exceeds every value outside
    the disk of the given radius around x* by at least min_gap.
    """

    is_generic = False
    peak_index: Tuple[int, ...] = ()
    peak: Tuple[float, ...] = ()
    peak_value = 0.0
    runner_up = 0.0
    gap = 0.0
    radius = 0.0
    min_gap = 0.0

    def __init__(self, **kwargs):
        for key, val in kwargs.items():
            setattr(self, key, val)

    @property
    def status(self) -> str:
        return "certified" if self.is_generic else "not certified"

    def to_json(self) -> Dict[str, Any]:
        return {
            "is_generic": bool(self.is_generic),
            "status": self.status,
            "peak_index": [int(k) for k in self.peak_index],
            "peak": [float(c) for c in self.peak],
            "peak_value": float(self.peak_value),
            "runner_up": float(self.runner_up),
            "gap": float(self.gap),
            "radius": float(self.radius),
            "min_gap": float(self.min_gap),
        }

    @staticmethod
    def header() -> str:
        return (
            f"{'Peak':>18s} {'Value':>11s} {'Runner-up':>11s} "
            f"{'Gap':>11s} {'Radius':>7s} {'Result':>13s}"
        )

    def info(self) -> str:
        peak = ",".join(f"{c:.4f}" for c in self.peak)
        return (
            f"{peak:>18s} {self.peak_value:11.4e} {self.runner_up:11.4e} "
            f"{self.gap:11.4e} {self.radius:7.4f} {self.status:>13s}"
        )


def default_gap(values: np.ndarray) -> float:
    spread = float(np.max(values) - np.min(values))
    return max(
        GAP_FRACTION * spread,
        GAP_FLOOR * float(np.max(np.abs(values))),
        np.finfo(np.float64).tiny,
    )


def _check_radius(grid: PeriodicGrid, radius: float) -> None:
    if not 0.0 < radius < 0.5 * min(grid.period):
        raise ParameterError(
            f"disk radius must lie in (0, {0.5 * min(grid.period)})"
        )


def genericity_test(
    f: ScalarField, disk_radius: float, min_gap: Optional[float] = None
) -> GenericityVerdict:
    """
    Locate the global maximum (ties go to the lexicographically smallest
    node) and compare it with the largest value at periodic distance
    greater than disk_radius.
    """
    grid = f.grid
    _check_radius(grid, disk_radius)
    values = f.values
    if min_gap is None:
        min_gap = default_gap(values)
    flat_index = int(np.argmax(values))
    index = tuple(int(k) for k in np.unravel_index(flat_index, grid.shape))
    peak = tuple(float(grid.axis(i)[index[i]]) for i in range(grid.ndim))

    squared = np.zeros(grid.shape)
    for i, coords in enumerate(grid.mesh()):
        squared += grid.periodic_offset(i, coords, peak[i]) ** 2
    outside = np.sqrt(squared) > disk_radius
    peak_value = float(values[index])
    runner_up = float(np.max(values[outside]))
    gap = peak_value - runner_up
    verdict = GenericityVerdict(
        is_generic=gap > 0.0 and gap >= min_gap,
        peak_index=index,
        peak=peak,
        peak_value=peak_value,
        runner_up=runner_up,
        gap=gap,
        radius=disk_radius,
        min_gap=min_gap,
    )
    LOGGER.debug("Genericity: %s", verdict.info())
    return verdict


class Certificate:
    """
    Symmetry-breaking certificate on one slice, from the N-functional or
    from the slice scalar curvature s.
    """

    def __init__(
        self,
        surface: SurfaceTorus,
        field: ScalarField,
        verdict: GenericityVerdict,
        functional: str = "N",
    ) -> None:
        self.surface = surface
        self.field = field
        self.verdict = verdict
        self.functional = functional

    @property
    def certified(self) -> bool:
        return bool(self.verdict.is_generic)

    def to_json(self) -> Dict[str, Any]:
        return dict(
            self.verdict.to_json(),
            name="symmetry breaking",
            functional=self.functional,
            zeta0=self.surface.zeta0,
        )


def certify_symmetry_breaking(
    g: MetricField,
    flow: GuidedFlow,
    zeta0: float,
    radius: float,
    gap: Optional[float] = None,
    tol: float = 1e-8,
) -> Certificate:
    """
    N(g) on the slice through zeta0 with an isolated strict peak means g
    has no non-trivial Killing field K with L_K X = 0 or K(p) = 0.
    """
    surface = extract_slice(g, flow.p, zeta0, tol)
    n_field = n_functional(g, surface, companion_field(flow))
    verdict = genericity_test(n_field, radius, gap)
    LOGGER.info(
        "Slice zeta0=%.4f: %s (gap %.3e)", zeta0, verdict.status, verdict.gap
    )
    return Certificate(surface, n_field, verdict)


class Sharpening:
    """
    A frame-rescaled metric g^rho built to give a slice functional a
    strict isolated peak, with the certificates of g and g^rho.
    """

    def __init__(
        self,
        g_rho: MetricField,
        profile: PerturbationProfile,
        before: Certificate,
        after: Certificate,
    ) -> None:
        self.g_rho = g_rho
        self.profile = profile
        self.before = before
        self.after = after

    @property
    def certified(self) -> bool:
        return self.after.certified

    def to_json(self) -> Dict[str, Any]:
        return {
            "profile": self.profile.to_json(),
            "before": self.before.to_json(),
            "after": self.after.to_json(),
        }


def sharpen_n_peak(
    g: MetricField,
    flow: GuidedFlow,
    zeta0: float,
    amplitude: float = 0.2,
    bump_radius: float = 0.5,
    disk_radius: float = math.pi / 4,
    gap: Optional[float] = None,
    tol: float = 1e-8,
) -> Sharpening:
    """
    rho = 1 + amplitude * bump centred on the slice node where N(g)
    peaks. Y does not depend on the metric, so N(g^rho) = rho N(g) there
    and the peak becomes strict and isolated.
    """
    if not amplitude > 0.0:
        raise ParameterError(f"peak amplitude must be positive: {amplitude}")
    before = certify_symmetry_breaking(g, flow, zeta0, disk_radius, gap, tol)
    center = (before.surface.zeta0,) + before.verdict.peak
    profile = bump_profile(center, bump_radius, amplitude, g.grid)
    g_rho = perturb_metric(g, flow.x, flow.p, profile, flow.mu)
    after = certify_symmetry_breaking(
        g_rho, flow, zeta0, disk_radius, gap, tol
    )
    LOGGER.info(
        "N peak at %s: %s before, %s after",
        before.verdict.peak,
        before.verdict.status,
        after.verdict.status,
    )
    return Sharpening(g_rho, profile, before, after)


def sharpen_curvature_peak(
    g: MetricField,
    flow: GuidedFlow,
    zeta0: float,
    c: float = -0.01,
    support_radius: float = 1.0,
    halfwidth: float = 1.0,
    disk_radius: float = math.pi / 4,
    tol: float = 1e-8,
) -> Sharpening:
    """
    Raise the slice scalar curvature at its maximum by -2c / E with the
    localized slice-quadratic perturbation, c < 0, and test s for an
    isolated peak before and after.

    Both tests use a gap of at least SHIFT_FRACTION of the predicted
    shift, so a round-off-flat s is never certified.
    """
    if not c < 0.0:
        raise ParameterError(f"the curvature peak needs c < 0, got {c}")
    surface = extract_slice(g, flow.p, zeta0, tol)
    s_before = scalar_curvature_2d(surface.h)
    origin = np.unravel_index(
        int(np.argmax(s_before.values)), surface.grid.shape
    )
    node = (int(origin[0]), int(origin[1]))
    frame = induced_frame_metric(surface, flow, g)
    profile = slice_quadratic_profile(
        frame, node, c, halfwidth, support_radius
    )
    g_rho = perturb_metric(g, flow.x, flow.p, profile, flow.mu)
    s_after = scalar_curvature_2d(induced_metric(g_rho, surface.index))
    shift = curvature_shift(float(frame.e_coef.values[node]), c)
    min_gap = max(SHIFT_FRACTION * abs(shift), default_gap(s_after.values))
    before = Certificate(
        surface, s_before, genericity_test(s_before, disk_radius, min_gap), "s"
    )
    after = Certificate(
        surface, s_after, genericity_test(s_after, disk_radius, min_gap), "s"
    )
    LOGGER.info(
        "Curvature peak at node %s, predicted shift %.4e: %s before, %s after",
        node,
        shift,
        before.verdict.status,
        after.verdict.status,
    )
    return Sharpening(g_rho, profile, before, after)
