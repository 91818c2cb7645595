"""
Level tori {zeta = zeta0}: induced metrics, the (X~, Y) frame and its
co-frame, surface curvature and P-harmonic residuals.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from .adapted import PerturbationProfile, localized_cutoff, smooth_bump
from .errors import (
    CriticalError,
    FrameDegeneracyError,
    NotLevelError,
    ParameterError,
    PositivityError,
    TangencyError,
)
from .exterior import exterior_derivative, flat, gradient
from .fields import KForm, MetricField, ScalarField, VectorField
from .grid import PeriodicGrid, integrate, interpolate, partial_derivative
from .mhd import GuidedFlow, commutator, companion_field
from .reports import Report

LOGGER = logging.getLogger(__name__)

SLICE_AXIS = 0
SURFACE_AXES = (1, 2)

# RK4 steps per period of the flow chart
CHART_STEPS = 512


class SurfaceTorus:
    """
    The coordinate 2-torus {zeta = zeta0} with its induced metric.
    """

    def __init__(
        self,
        parent: PeriodicGrid,
        index: int,
        h: MetricField,
        level: float,
        **kwargs,
    ) -> None:
        self.parent = parent
        self.index = index
        self.h = h
        self.level = level
        self.min_dp = 0.0
        for key, val in kwargs.items():
            setattr(self, key, val)

    @property
    def grid(self) -> PeriodicGrid:
        return self.h.grid

    @property
    def zeta0(self) -> float:
        return float(self.parent.axis(SLICE_AXIS)[self.index])

    def restrict(self, values: np.ndarray) -> np.ndarray:
        """Node values of a parent-grid array on this slice."""
        return values[self.index]

    def restrict_vector(self, v: VectorField) -> VectorField:
        return VectorField(
            self.grid, [self.restrict(v.data[i]) for i in SURFACE_AXES]
        )

    def pullback(self, omega: KForm) -> KForm:
        """Restriction of a 1-form to the slice."""
        return KForm(
            self.grid, 1, [self.restrict(omega.data[i]) for i in SURFACE_AXES]
        )

    def normal_component(self, v: VectorField) -> float:
        return float(np.max(np.abs(self.restrict(v.data[SLICE_AXIS]))))


def induced_metric(g: MetricField, index: int) -> MetricField:
    grid = g.grid.sub(SURFACE_AXES)
    return MetricField(
        grid,
        [
            g.component(i, j)[index]
            for i in SURFACE_AXES
            for j in SURFACE_AXES
            if i <= j
        ],
    )


def extract_slice(
    g: MetricField, p: ScalarField, zeta0: float, tol: float = 1e-8
) -> SurfaceTorus:
    """
    The slice at node zeta0, provided p is constant and regular on it.

    Spread and |dp| are measured against max(1, max |p|).
    """
    index = g.grid.node_of(SLICE_AXIS, zeta0)
    values = p.values[index]
    scale = max(1.0, p.max_abs())
    spread = float(np.max(values) - np.min(values))
    if spread > tol * scale:
        raise NotLevelError(spread)
    dp = exterior_derivative(p)
    min_dp = float(np.min(dp.pointwise_norm()[index]))
    if min_dp < tol * scale:
        raise CriticalError(min_dp)
    LOGGER.debug(
        "Slice zeta0=%.4f, level %.6g, min |dp| %.3e",
        zeta0,
        float(values.mean()),
        min_dp,
    )
    return SurfaceTorus(
        g.grid,
        index,
        induced_metric(g, index),
        float(values.mean()),
        min_dp=min_dp,
    )


class SurfaceFrame:
    """
    The frame (X~_S, Y_S), its dual co-frame (omega, eta), and the
    coefficients E = 1 / alpha(X), G = g(Y, Y) on a slice.
    """

    def __init__(
        self,
        surface: SurfaceTorus,
        x_s: VectorField,
        y_s: VectorField,
        omega: KForm,
        eta: KForm,
        e_coef: ScalarField,
        g_coef: ScalarField,
        alpha_s: KForm,
    ) -> None:
        self.surface = surface
        self.x_s = x_s
        self.y_s = y_s
        self.omega = omega
        self.eta = eta
        self.e_coef = e_coef
        self.g_coef = g_coef
        self.alpha_s = alpha_s

    @property
    def grid(self) -> PeriodicGrid:
        return self.surface.grid

    def reconstructed(self) -> np.ndarray:
        """E omega (x) omega + G eta (x) eta as node-major matrices."""
        w = self.omega.data
        n = self.eta.data
        return np.einsum(
            "...,a...,b...->...ab", self.e_coef.values, w, w
        ) + np.einsum("...,a...,b...->...ab", self.g_coef.values, n, n)

    def check(self, tol: float = 1e-10) -> Report:
        """Duality, closedness, commutation and reconstruction residuals."""
        pairing = [
            np.sum(form.data * vec.data, axis=0) - target
            for form, vec, target in (
                (self.omega, self.x_s, 1.0),
                (self.omega, self.y_s, 0.0),
                (self.eta, self.x_s, 0.0),
                (self.eta, self.y_s, 1.0),
            )
        ]
        h = self.surface.h.matrix()
        return Report.from_residuals(
            "surface frame",
            {
                "duality": max(float(np.max(np.abs(v))) for v in pairing),
                "d omega": exterior_derivative(self.omega).max_abs(),
                "d eta": exterior_derivative(self.eta).max_abs(),
                "[X_S, Y_S]": commutator(self.x_s, self.y_s).max_abs(),
                "h = E w^2 + G n^2": float(
                    np.max(np.abs(self.reconstructed() - h))
                ),
                "omega = i*alpha": (self.omega - self.alpha_s).max_abs(),
            },
            tol,
        )


def induced_frame_metric(
    surface: SurfaceTorus,
    flow: GuidedFlow,
    g: MetricField,
    tol: float = 1e-10,
) -> SurfaceFrame:
    """
    Frame (X~_S, Y_S) with X~ = X / alpha(X) and Y the companion field,
    together with its co-frame and i*g = E omega^2 + G eta^2.
    """
    y = companion_field(flow)
    x_tilde = flow.normalized
    for label, field in (("X~", x_tilde), ("Y", y)):
        normal = surface.normal_component(field)
        if normal > tol * max(1.0, field.max_abs()):
            raise TangencyError(label, normal)

    x_s = surface.restrict_vector(x_tilde)
    y_s = surface.restrict_vector(y)
    det = x_s.data[0] * y_s.data[1] - x_s.data[1] * y_s.data[0]
    scale = x_s.max_abs() * y_s.max_abs()
    ratio = np.abs(det) / scale if scale > 0.0 else np.abs(det)
    worst = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    if not ratio[worst] > tol:
        raise FrameDegeneracyError(
            tuple(int(k) for k in worst), float(det[worst])
        )

    grid = surface.grid
    omega = KForm(grid, 1, [y_s.data[1] / det, -y_s.data[0] / det])
    eta = KForm(grid, 1, [-x_s.data[1] / det, x_s.data[0] / det])
    e_coef = ScalarField(grid, 1.0 / surface.restrict(flow.alpha_x))
    g_coef = ScalarField(grid, surface.restrict(g.norm_squared(y)))
    return SurfaceFrame(
        surface,
        x_s,
        y_s,
        omega,
        eta,
        e_coef,
        g_coef,
        surface.pullback(flow.alpha),
    )


def _require_positive(label: str, values: np.ndarray) -> None:
    low = float(np.min(values))
    if not low > 0.0:
        raise PositivityError(label, low)


def scalar_curvature_orthogonal(
    e_coef: ScalarField, g_coef: ScalarField
) -> ScalarField:
    """
    Scalar curvature of E du^2 + G dv^2 on a periodic chart:

        s = -(E_vv + G_uu - ((E_u G_u + E_v^2) / E
                             + (E_v G_v + G_u^2) / G) / 2) / (E G)
    """
    _require_positive("E", e_coef.values)
    _require_positive("G", g_coef.values)
    grid = e_coef.grid
    e, gg = e_coef.values, g_coef.values

    def d(f: np.ndarray, axis: int) -> np.ndarray:
        return partial_derivative(grid, f, axis)

    e_u, e_v = d(e, 0), d(e, 1)
    g_u, g_v = d(gg, 0), d(gg, 1)
    bracket = (
        d(e_v, 1)
        + d(g_u, 0)
        - 0.5 * ((e_u * g_u + e_v**2) / e + (e_v * g_v + g_u**2) / gg)
    )
    return ScalarField(grid, -bracket / (e * gg))


def scalar_curvature_2d(h: MetricField) -> ScalarField:
    """
    Twice the Gauss curvature of a general surface metric, by Brioschi's
    formula in the slice coordinates (u, v) = (theta, phi).
    """
    grid = h.grid
    e = h.component(0, 0)
    f = h.component(0, 1)
    gg = h.component(1, 1)
    area = e * gg - f**2
    _require_positive("det h", area)

    def d(v: np.ndarray, axis: int) -> np.ndarray:
        return partial_derivative(grid, v, axis)

    e_u, e_v = d(e, 0), d(e, 1)
    f_u, f_v = d(f, 0), d(f, 1)
    g_u, g_v = d(gg, 0), d(gg, 1)
    e_vv = d(e_v, 1)
    f_uv = d(f_u, 1)
    g_uu = d(g_u, 0)
    zero = np.zeros(grid.shape)

    first = np.stack(
        [
            np.stack(
                [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
                axis=-1,
            ),
            np.stack([f_v - 0.5 * g_u, e, f], axis=-1),
            np.stack([0.5 * g_v, f, gg], axis=-1),
        ],
        axis=-2,
    )
    second = np.stack(
        [
            np.stack([zero, 0.5 * e_v, 0.5 * g_u], axis=-1),
            np.stack([0.5 * e_v, e, f], axis=-1),
            np.stack([0.5 * g_u, f, gg], axis=-1),
        ],
        axis=-2,
    )
    gauss = (np.linalg.det(first) - np.linalg.det(second)) / area**2
    return ScalarField(grid, 2.0 * gauss)


def gauss_bonnet_integral(h: MetricField) -> float:
    """Total scalar curvature over the slice; 0 on a torus."""
    s = scalar_curvature_2d(h)
    return integrate(h.grid, s.values * np.sqrt(h.determinant()))


def curvature_shift(e0: float, c: float) -> float:
    """
    Predicted change of s at the chart origin when the eta^2 coefficient
    is multiplied by 1 + c u^2 + O(|u, v|^3).
    """
    return -2.0 * c / e0


def codifferential_residual(
    h: MetricField, omega: KForm, weight: np.ndarray
) -> np.ndarray:
    """
    delta(P omega) = -(1 / sqrt h) d_a(sqrt h h^ab P omega_b).
    """
    grid = h.grid
    root = np.sqrt(h.determinant())
    inverse = np.linalg.inv(h.matrix())
    flux = np.einsum("...ab,b...->a...", inverse, omega.data * weight)
    div = sum(
        partial_derivative(grid, root * flux[a], a) for a in range(2)
    )
    return -div / root


def p_harmonic_check(
    surface: SurfaceTorus,
    g: MetricField,
    x: VectorField,
    p: ScalarField,
    tol: float = 1e-8,
    weight: Optional[np.ndarray] = None,
) -> Report:
    """
    Closedness of omega = i* X^flat and coclosedness of P omega with
    P = 1 / |grad p|_g on the slice (or the given weight).
    """
    omega = surface.pullback(flat(g, x))
    if weight is None:
        dp = exterior_derivative(p)
        grad_p = gradient(g, p)
        norm = np.sqrt(np.sum(dp.data * grad_p.data, axis=0))
        weight = 1.0 / surface.restrict(norm)
    coclosed = codifferential_residual(surface.h, omega, weight)
    return Report.from_residuals(
        "p-harmonic",
        {
            "d omega": exterior_derivative(omega).max_abs(),
            "delta(P omega)": float(np.max(np.abs(coclosed))),
        },
        tol,
    )


def slice_quadratic_profile(
    frame: SurfaceFrame,
    origin: Tuple[int, int],
    c: float,
    halfwidth: float,
    support_radius: Optional[float] = None,
) -> PerturbationProfile:
    """
    Lift of rho~ = 1 + c u^2 + O(3) around a slice node to the 3-torus.

    rho = 1 + c psi(zeta) chi s^2 with s = sum_a omega0_a (L_a / 2 pi)
    sin(2 pi (x_a - x0_a) / L_a), omega0 the co-frame at the origin and
    psi a bump of half-width `halfwidth` in zeta equal to 1 on the slice.
    chi is 1, or the localized cutoff in (theta, phi) of the given support
    radius around the origin. Then s(0) = 0, ds(0) = omega0, chi(0) = 1,
    so rho_u(0) = rho_v(0) = 0 and rho_uu(0) = 2c.
    """
    surface = frame.surface
    parent = surface.parent
    if not 0.0 < halfwidth < 0.5 * parent.period[SLICE_AXIS]:
        raise ParameterError(f"slab half-width out of range: {halfwidth}")
    mesh = parent.mesh()
    center = [surface.zeta0, 0.0, 0.0]
    wave = np.zeros(parent.shape)
    for slot, axis in enumerate(SURFACE_AXES):
        period = parent.period[axis]
        center[axis] = float(surface.grid.axis(slot)[origin[slot]])
        coef = frame.omega.data[slot][origin]
        wave += (
            coef
            * (period / (2.0 * math.pi))
            * np.sin(2.0 * math.pi * (mesh[axis] - center[axis]) / period)
        )
    offset = parent.periodic_offset(
        SLICE_AXIS, mesh[SLICE_AXIS], surface.zeta0
    )
    slab = smooth_bump(offset / halfwidth)
    if support_radius is not None:
        slab = slab * localized_cutoff(
            parent, center, support_radius, SURFACE_AXES
        )
    rho = 1.0 + c * slab * wave**2
    low = float(np.min(rho))
    if not low > 0.0:
        raise ParameterError(f"c = {c} makes rho non-positive ({low:.3e})")
    return PerturbationProfile(
        ScalarField(parent, rho),
        {
            "kind": "slice-quadratic",
            "zeta0": surface.zeta0,
            "origin": [int(k) for k in origin],
            "c": float(c),
            "halfwidth": float(halfwidth),
            "support_radius": support_radius,
        },
    )


def flow_chart(
    frame: SurfaceFrame,
    base: Sequence[float],
    u: np.ndarray,
    v: np.ndarray,
) -> np.ndarray:
    """
    The chart H(u, v) = Phi^Y_v(Phi^X~_u(base)) of the commuting frame
    flows, by RK4 on the trigonometric interpolant of the frame.

    Returns unwrapped slice coordinates of shape u.shape + (2,).
    """
    grid = frame.grid
    step = min(grid.period) / CHART_STEPS
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    points = np.broadcast_to(
        np.asarray(base, dtype=np.float64), u.shape + (2,)
    ).reshape(-1, 2)

    def flow(
        start: np.ndarray, field: VectorField, times: np.ndarray
    ) -> np.ndarray:
        nsteps = int(math.ceil(float(np.max(np.abs(times))) / step))
        if nsteps == 0:
            return start
        dt = times / nsteps

        def rate(pts: np.ndarray) -> np.ndarray:
            wrapped = np.mod(pts, np.asarray(grid.period))
            return np.stack(
                [interpolate(grid, field.data[i], wrapped) for i in range(2)],
                axis=-1,
            )

        pts = start.copy()
        for _ in range(nsteps):
            k1 = rate(pts)
            k2 = rate(pts + 0.5 * dt[:, None] * k1)
            k3 = rate(pts + 0.5 * dt[:, None] * k2)
            k4 = rate(pts + dt[:, None] * k3)
            pts = pts + dt[:, None] * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        return pts

    mid = flow(points, frame.x_s, u.reshape(-1))
    end = flow(mid, frame.y_s, v.reshape(-1))
    return end.reshape(u.shape + (2,))
