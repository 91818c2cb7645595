"""
Closed-form equilibria on the flat 3-torus with coordinates
(zeta, theta, phi).

example-6.4:  X = a(zeta) d_theta + b(zeta) d_phi on the flat metric,
              p = (a^2 + b^2) / 2, alpha = a dtheta + b dphi.
example-6.5:  X = b d_theta + iota0 b d_phi, p = (1 + iota0^2) b^2 / 2,
              alpha = b dtheta + iota0 b dphi, mu = dzeta^dtheta^dphi,
              and the zeta-invariant metric g_eps below.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from .errors import KindError, ParameterError, PositivityError
from .exterior import VolumeForm
from .fields import Field, KForm, MetricField, ScalarField, VectorField
from .grid import PeriodicGrid
from .mhd import DEFAULT_TOLERANCE, GuidedFlow, validate_guided_flow
from .profiles import (
    PolarProfile,
    Profile,
    SurfaceProfile,
    lookup,
    lookup_surface,
)

LOGGER = logging.getLogger(__name__)

FAMILY = "example-6.4"
KILLING = "example-6.5"
NAMES = (FAMILY, KILLING)


class ExampleBundle:
    """
    Everything one example defines on a grid, plus the parameters it was
    built from.
    """

    name = ""
    y_closed_form: Optional[VectorField] = None

    def __init__(
        self,
        grid: PeriodicGrid,
        g: MetricField,
        x: VectorField,
        alpha: KForm,
        mu: VolumeForm,
        p: ScalarField,
        **kwargs,
    ) -> None:
        self.grid = grid
        self.g = g
        self.x = x
        self.alpha = alpha
        self.mu = mu
        self.p = p
        self.parameters: Dict[str, Any] = {}
        self.profiles: Dict[str, Any] = {}
        for key, val in kwargs.items():
            setattr(self, key, val)

    def guided_flow(self, tol: float = DEFAULT_TOLERANCE) -> GuidedFlow:
        return validate_guided_flow(self.x, self.alpha, self.mu, self.p, tol)

    def fields(self) -> Dict[str, Field]:
        """Named fields in archive order."""
        out: Dict[str, Field] = {
            "g": self.g,
            "X": self.x,
            "alpha": self.alpha,
            "mu": self.mu,
            "p": self.p,
        }
        if self.y_closed_form is not None:
            out["Y_closed_form"] = self.y_closed_form
        return out

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "parameters": dict(self.parameters),
            "profiles": {
                role: prof.to_json() for role, prof in self.profiles.items()
            },
        }


def _zeta(grid: PeriodicGrid) -> np.ndarray:
    return grid.mesh()[0]


def example_family_T3(
    grid: PeriodicGrid, a: Profile, b: Profile
) -> ExampleBundle:
    """
    The flat-torus family; Y = p' / (a^2 + b^2) (b d_theta - a d_phi).
    """
    zeta = _zeta(grid)
    av, bv = a(zeta), b(zeta)
    slope = av * a.derivative(zeta) + bv * b.derivative(zeta)
    zero = np.zeros(grid.shape)
    squared = av**2 + bv**2
    coef = np.divide(
        slope, squared, out=np.zeros(grid.shape), where=squared > 0.0
    )
    return ExampleBundle(
        grid,
        MetricField.identity(grid),
        VectorField(grid, [zero, av, bv]),
        KForm(grid, 1, [zero, av, bv]),
        VolumeForm.flat(grid),
        ScalarField(grid, 0.5 * squared),
        name=FAMILY,
        y_closed_form=VectorField(grid, [zero, coef * bv, -coef * av]),
        profiles={"a": a, "b": b},
    )


def rotated_family(
    grid: PeriodicGrid, r: Profile, angle: Profile
) -> ExampleBundle:
    """
    a = r cos(angle), b = r sin(angle): every choice of angle gives the
    same pressure r^2 / 2 and a different field.
    """
    bundle = example_family_T3(
        grid, PolarProfile(r, angle, "cos"), PolarProfile(r, angle, "sin")
    )
    bundle.profiles = {"r": r, "angle": angle}
    return bundle


def killing_metric(
    grid: PeriodicGrid, iota0: float, epsilon: float, f: np.ndarray
) -> MetricField:
    """
    g_zz = 1 / (1 - eps (1/iota0 + iota0) f), g_tt = 1 - iota0 eps f,
    g_tp = eps f, g_pp = 1 - eps f / iota0; det g = 1.
    """
    zero = np.zeros(grid.shape)
    factor = 1.0 - epsilon * (1.0 / iota0 + iota0) * f
    return MetricField(
        grid,
        [
            1.0 / factor,
            zero,
            zero,
            1.0 - iota0 * epsilon * f,
            epsilon * f,
            1.0 - epsilon * f / iota0,
        ],
    )


def example_killing_T3(
    grid: PeriodicGrid,
    b: Profile,
    iota0: float,
    epsilon: float,
    f: SurfaceProfile,
) -> ExampleBundle:
    """
    The zeta-invariant family; d_zeta is a Killing field of g_eps and
    Y = b' (iota0 d_theta - d_phi).
    """
    if iota0 == 0.0:
        raise ParameterError("iota0 must be non-zero")
    zeta, theta, phi = grid.mesh()
    bv, slope = b(zeta), b.derivative(zeta)
    low = float(np.min(bv))
    if not low > 0.0:
        raise ParameterError(f"b must be positive, min {low:.3e}")
    fv = f(theta, phi)
    factor = 1.0 - epsilon * (1.0 / iota0 + iota0) * fv
    margin = float(np.min(factor))
    if not margin > 0.0:
        raise ParameterError(
            f"epsilon = {epsilon} leaves the admissible interval "
            f"(min factor {margin:.3e})"
        )
    try:
        g = killing_metric(grid, iota0, epsilon, fv)
    except PositivityError as exc:
        raise ParameterError(str(exc)) from exc

    zero = np.zeros(grid.shape)
    LOGGER.debug(
        "Killing family: eps=%g, positivity margin %.3e", epsilon, margin
    )
    return ExampleBundle(
        grid,
        g,
        VectorField(grid, [zero, bv, iota0 * bv]),
        KForm(grid, 1, [zero, bv, iota0 * bv]),
        VolumeForm.flat(grid),
        ScalarField(grid, 0.5 * (1.0 + iota0**2) * bv**2),
        name=KILLING,
        y_closed_form=VectorField(grid, [zero, iota0 * slope, -slope]),
        parameters={"iota0": float(iota0), "epsilon": float(epsilon)},
        profiles={"b": b, "f": f},
        margin=margin,
    )


def reference_values(bundle: ExampleBundle) -> Dict[str, Field]:
    """Closed-form fields of the Killing family."""
    if bundle.name != KILLING:
        raise KindError(bundle.name)
    grid = bundle.grid
    iota0 = bundle.parameters["iota0"]
    epsilon = bundle.parameters["epsilon"]
    b = bundle.profiles["b"]
    f = bundle.profiles["f"]
    zeta, theta, phi = grid.mesh()
    bv, slope = b(zeta), b.derivative(zeta)
    fv = f(theta, phi)
    zero = np.zeros(grid.shape)
    weight = 1.0 + iota0**2
    return {
        "companion": VectorField(grid, [zero, iota0 * slope, -slope]),
        "companion_norm_squared": ScalarField(
            grid,
            slope**2 * weight * (1.0 - epsilon * (1.0 / iota0 + iota0) * fv),
        ),
        "bracket_zeta_x": VectorField(grid, [zero, slope, iota0 * slope]),
        "zeta_derivative_p": ScalarField(grid, weight * bv * slope),
        "alpha_x": ScalarField(grid, weight * bv**2),
        "zeta_derivative_alpha_x": ScalarField(
            grid, 2.0 * weight * bv * slope
        ),
    }


def build(
    name: str,
    grid: PeriodicGrid,
    settings: Optional[Dict[str, Any]] = None,
) -> ExampleBundle:
    """
    An example by name, with profiles taken from the library by name.
    """
    cfg = dict(settings or {})
    if name == FAMILY:
        return example_family_T3(
            grid,
            lookup(cfg.get("a", "two-plus-sin")),
            lookup(cfg.get("b", "cos")),
        )
    if name == KILLING:
        return example_killing_T3(
            grid,
            lookup(cfg.get("b", "two-plus-sin")),
            float(cfg.get("iota0", 1.0)),
            float(cfg.get("epsilon", 0.05)),
            lookup_surface(cfg.get("f", "half-cos-sum")),
        )
    raise KindError(name)
