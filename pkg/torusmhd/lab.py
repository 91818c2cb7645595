"""
TorusMHD: command runner for the residual, perturbation, certification
and reproduction suites.
"""

import copy
import json
import logging
import math
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
)

import numpy as np

from . import archive
from .adapted import (
    PerturbationProfile,
    bump_profile,
    is_adapted,
    periodic_distance,
    perturb_metric,
)
from .encode import write_csv, write_json
from .errors import (
    AllMaskedError,
    FrameDegeneracyError,
    SingularPointError,
    TorusMHDError,
)
from .examples import (
    FAMILY,
    KILLING,
    NAMES,
    ExampleBundle,
    build,
    reference_values,
    rotated_family,
)
from .exterior import (
    cross,
    curl,
    directional_derivative,
    divergence,
    evaluate,
    exterior_derivative,
    gradient,
)
from .fields import MetricField, VectorField
from .grid import PeriodicGrid, integrate
from .killing import (
    certify_symmetry_breaking,
    n_functional,
    sharpen_curvature_peak,
    sharpen_n_peak,
    symmetry_report,
)
from .mhd import (
    adapted_equilibrium_residual,
    beltrami_factor,
    commutator,
    companion_field,
    mhd_residual,
    quasisymmetry_residual,
    validate_guided_flow,
)
from .profiles import TrigProfile, lookup
from .reports import Comparison, Report, summarize
from .surfaces import (
    curvature_shift,
    extract_slice,
    gauss_bonnet_integral,
    induced_frame_metric,
    induced_metric,
    p_harmonic_check,
    scalar_curvature_2d,
    slice_quadratic_profile,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

DEGENERACY_ERRORS = (FrameDegeneracyError, SingularPointError, AllMaskedError)

WORKERS_ENV = "TORUSMHD_MAX_WORKERS"

# regularity floors, as fractions of the maximum over the grid: |dp| on a
# slice, |dp| |X| on a bump ball
SLICE_FRACTION = 1e-2
REGULAR_FRACTION = 0.05
CENTER_ATTEMPTS = 50
BUMP_RADIUS = 0.5

# in-slice resolution and support of the localized chart perturbation
CHART_NODES = 128
CHART_SUPPORT = 1.0
CHART_HALFWIDTH = 1.0

DEFAULT_CONFIG: Dict[str, Any] = {
    "loglevel": "INFO",
    "grid": 32,
    "tolerances": {"residual": 1e-8, "adapted": 1e-10, "structural": 1e-10},
    "certify": {"radius": math.pi / 4, "gap": None},
    "examples": {
        FAMILY: {"a": "two-plus-sin", "b": "cos"},
        KILLING: {
            "b": "two-plus-sin",
            "iota0": 1.0,
            "epsilon": 0.05,
            "f": "half-cos-sum",
        },
    },
    "slices": [0.0, math.pi / 4, 3 * math.pi / 4],
    "perturb": {"count": 10, "radius": 0.5, "amplitude": 0.3, "seed": 7},
}

T = TypeVar("T")
S = TypeVar("S")
Point = Tuple[float, ...]


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        elif val is not None:
            out[key] = val
    return out


def _relative_error(num: np.ndarray, ref: np.ndarray) -> float:
    scale = float(np.max(np.abs(ref)))
    err = float(np.max(np.abs(num - ref)))
    return err / scale if scale > 0.0 else err


def _outcome(name: str, label: str, ok: bool) -> Report:
    """A row that passes when an expected outcome was observed."""
    return Comparison.of(name, label, 0.0 if ok else 1.0, 0.0)


class Lab:
    configfile = ""

    def __init__(
        self,
        configfile: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ):
        logging.basicConfig(
            level=logging.INFO,
            format=(
                "%(asctime)s %(name)s:%(levelname)-5s "
                "[%(funcName)s:%(lineno)4d] %(message)s"
            ),
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        self.logger = logging.getLogger("TorusMHD")
        self.configfile = configfile or ""
        self.overrides = overrides or {}
        self.load_config()

    def load_config(self) -> None:
        cfg = DEFAULT_CONFIG
        if self.configfile:
            with open(self.configfile, "r", encoding="utf-8") as handle:
                cfg = _merge(cfg, json.load(handle))
        self.cfg = _merge(cfg, self.overrides)
        for key, val in self.cfg["tolerances"].items():
            if not isinstance(val, (int, float)) or not 0.0 < val < math.inf:
                raise ValueError(f"tolerance {key} must be positive: {val!r}")
        gap = self.cfg["certify"]["gap"]
        if gap is not None and not (isinstance(gap, (int, float)) and gap > 0):
            raise ValueError(f"certify gap must be positive: {gap!r}")
        lvl = self.cfg["loglevel"]
        self.logger.setLevel(lvl)
        logging.getLogger("torusmhd").setLevel(lvl)

    @property
    def tolerances(self) -> Dict[str, float]:
        return self.cfg["tolerances"]

    def grid(self) -> PeriodicGrid:
        n = self.cfg["grid"]
        if isinstance(n, int):
            n = [n, n, n]
        return PeriodicGrid(n)

    @staticmethod
    def max_workers() -> int:
        try:
            return max(1, int(os.environ.get(WORKERS_ENV, "1")))
        except ValueError:
            return 1

    def each(
        self, func: Callable[[S], T], items: Sequence[S]
    ) -> List[Optional[T]]:
        """
        func over items on the worker pool; an item whose evaluation
        raises is logged and yields None.
        """

        def guarded(item: S) -> Optional[T]:
            try:
                return func(item)
            except Exception:
                self.logger.warning(
                    "Caught exception for %s.%s%s",
                    item,
                    os.linesep,
                    traceback.format_exc(),
                )
                return None

        with ThreadPoolExecutor(max_workers=self.max_workers()) as pool:
            return list(pool.map(guarded, items))

    def slice_rows(
        self,
        label: str,
        func: Callable[[float], List[Report]],
        slices: Sequence[float],
    ) -> List[Report]:
        """Rows of func per slice; a slice that raised gives a failed row."""
        if not slices:
            return [_outcome(label, "some regular slice", False)]
        rows: List[Report] = []
        for zeta0, result in zip(slices, self.each(func, slices)):
            if result is None:
                rows.append(
                    _outcome(f"{label} zeta0={zeta0:.3f}", "evaluated", False)
                )
            else:
                rows.extend(result)
        return rows

    def run(self, command: Callable[..., int], *args, **kwargs) -> int:
        """Call a command and map library errors onto exit codes."""
        try:
            return command(*args, **kwargs)
        except DEGENERACY_ERRORS as exc:
            self.logger.error("Numerical degeneracy: %s", exc)
            return EXIT_DEGENERATE
        except TorusMHDError as exc:
            self.logger.error("%s", exc)
            return EXIT_INPUT
        except (OSError, ValueError) as exc:
            self.logger.error("Bad input: %s", exc)
            return EXIT_INPUT

    def print_reports(self, reports: List[Report]) -> None:
        self.logger.info("%s", Report.header())
        for rep in reports:
            for line in rep.info():
                self.logger.info("%s", line)

    def finish(
        self, reports: List[Report], out: Optional[str], filename: str
    ) -> int:
        self.print_reports(reports)
        summary = summarize(reports)
        if out:
            write_json(os.path.join(out, filename), summary)
        if summary["verdict"]:
            self.logger.info("All %d checks passed", len(reports))
            return EXIT_OK
        failed = [rep.name for rep in reports if not rep.verdict]
        self.logger.warning("Failed checks: %s", ", ".join(failed))
        return EXIT_FAILED

    def example(
        self, name: str, grid: Optional[PeriodicGrid] = None
    ) -> ExampleBundle:
        return build(
            name, grid or self.grid(), self.cfg["examples"].get(name, {})
        )

    def snap(self, grid: PeriodicGrid, zeta0: float) -> float:
        """The slice node nearest to zeta0."""
        h = grid.period[0] / grid.n[0]
        return float(grid.axis(0)[int(round(zeta0 / h)) % grid.n[0]])

    # commands

    def build(self, name: str, out: str) -> int:
        bundle = self.example(name)
        archive.write_bundle(out, bundle)
        self.logger.info("Wrote %s bundle to %s", name, out)
        return EXIT_OK

    def verify(self, path: str, out: Optional[str] = None) -> int:
        bundle = archive.read_bundle(path)
        tol = self.tolerances
        flow = bundle.guided_flow(tol["residual"])
        reports = [
            mhd_residual(
                bundle.g, bundle.x, bundle.p, tol["residual"], bundle.mu
            ),
            flow.report,
            is_adapted(
                bundle.g, bundle.x, bundle.alpha, bundle.mu, tol["adapted"]
            ),
            adapted_equilibrium_residual(
                bundle.x, bundle.alpha, bundle.mu, bundle.p, tol["residual"]
            ),
        ]
        return self.finish(reports, out, "verify.json")

    def curvature_report(self, g: MetricField, zeta0: float) -> Dict[str, Any]:
        index = g.grid.node_of(0, zeta0)
        h = induced_metric(g, index)
        s = scalar_curvature_2d(h).values
        return {
            "zeta0": zeta0,
            "min": float(np.min(s)),
            "max": float(np.max(s)),
            "mean": float(np.mean(s)),
            "gauss_bonnet": gauss_bonnet_integral(h),
        }

    def chart_profile(
        self,
        bundle: ExampleBundle,
        zeta0: float,
        c: float,
        halfwidth: float,
        support_radius: Optional[float] = None,
    ) -> PerturbationProfile:
        """rho = 1 + c u^2 + O(3) around node (0, 0) of the slice."""
        flow = bundle.guided_flow(self.tolerances["residual"])
        surface = extract_slice(bundle.g, bundle.p, zeta0)
        frame = induced_frame_metric(surface, flow, bundle.g)
        return slice_quadratic_profile(
            frame, (0, 0), c, halfwidth, support_radius
        )

    def perturb(
        self,
        path: str,
        out: str,
        center: Sequence[float],
        radius: float,
        amplitude: float,
        chart_c: Optional[float] = None,
        zeta0: float = 0.0,
        support_radius: Optional[float] = None,
    ) -> int:
        bundle = archive.read_bundle(path)
        tol = self.tolerances
        if chart_c is None:
            profile = bump_profile(center, radius, amplitude, bundle.grid)
        else:
            profile = self.chart_profile(
                bundle,
                self.snap(bundle.grid, zeta0),
                chart_c,
                radius,
                support_radius,
            )
        g_rho = perturb_metric(
            bundle.g, bundle.x, bundle.p, profile, bundle.mu
        )

        before = is_adapted(
            bundle.g, bundle.x, bundle.alpha, bundle.mu, tol["adapted"]
        )
        after = is_adapted(
            g_rho, bundle.x, bundle.alpha, bundle.mu, tol["adapted"]
        )
        before.name, after.name = "adaptedness before", "adaptedness after"
        slices = [self.snap(bundle.grid, z) for z in self.cfg["slices"]]
        curvature = {
            "before": self.each(
                lambda z: self.curvature_report(bundle.g, z), slices
            ),
            "after": self.each(
                lambda z: self.curvature_report(g_rho, z), slices
            ),
        }

        perturbed = ExampleBundle(
            bundle.grid,
            g_rho,
            bundle.x,
            bundle.alpha,
            bundle.mu,
            bundle.p,
            name=bundle.name,
            parameters=dict(bundle.parameters, profile=profile.to_json()),
            profiles=bundle.profiles,
            y_closed_form=bundle.y_closed_form,
        )
        archive.write_bundle(out, perturbed)
        write_json(
            os.path.join(out, "perturb.json"),
            {
                "profile": profile.to_json(),
                "adaptedness": [before.to_json(), after.to_json()],
                "curvature": curvature,
            },
        )
        self.print_reports([before, after])
        missing = [
            f"{stage} zeta0={z:.3f}"
            for stage, reports in curvature.items()
            for z, rep in zip(slices, reports)
            if rep is None
        ]
        if missing:
            self.logger.warning(
                "No curvature report for %s", ", ".join(missing)
            )
            return EXIT_FAILED
        return EXIT_OK if after.verdict else EXIT_FAILED

    def certify(
        self,
        zeta0: float,
        path: Optional[str] = None,
        name: Optional[str] = None,
        out: Optional[str] = None,
    ) -> int:
        if path:
            bundle = archive.read_bundle(path)
        else:
            bundle = self.example(name or KILLING)
        opts = self.cfg["certify"]
        flow = bundle.guided_flow(self.tolerances["residual"])
        cert = certify_symmetry_breaking(
            bundle.g, flow, zeta0, opts["radius"], opts["gap"]
        )
        self.logger.info("%s", cert.verdict.header())
        self.logger.info("%s", cert.verdict.info())
        if out:
            write_json(os.path.join(out, "certify.json"), cert.to_json())
            theta, phi = cert.field.grid.mesh()
            write_csv(
                os.path.join(out, "n_functional.csv"),
                ["theta", "phi", "N"],
                zip(
                    theta.ravel(), phi.ravel(), cert.field.values.ravel()
                ),
            )
        return EXIT_OK if cert.certified else EXIT_FAILED

    def reproduce(self, name: str, out: Optional[str] = None) -> int:
        if name == FAMILY:
            reports = self.reproduce_family()
        elif name == KILLING:
            reports = self.reproduce_killing()
        else:
            self.logger.error(
                "Unknown example %s, expected one of %s", name, NAMES
            )
            return EXIT_INPUT
        return self.finish(reports, out, f"reproduce-{name}.json")

    # suites

    def regular_slices(self, bundle: ExampleBundle) -> List[float]:
        """Configured slices, snapped to nodes, kept where dp is not 0."""
        grid = bundle.grid
        norm = exterior_derivative(bundle.p).pointwise_norm()
        floor = SLICE_FRACTION * float(np.max(norm))
        slices = []
        for zeta0 in self.cfg["slices"]:
            zeta0 = self.snap(grid, zeta0)
            low = float(np.min(norm[grid.node_of(0, zeta0)]))
            if low > 0.0 and low >= floor:
                slices.append(zeta0)
            else:
                self.logger.warning(
                    "Skipping slice zeta0=%.4f: min |dp| %.3e", zeta0, low
                )
        return slices

    def clearance(self, bundle: ExampleBundle, zeta0: float) -> float:
        """Distance in zeta from zeta0 to the nearest non-regular slice."""
        grid = bundle.grid
        norm = exterior_derivative(bundle.p).pointwise_norm()
        floor = SLICE_FRACTION * float(np.max(norm))
        low = norm.reshape(grid.n[0], -1).min(axis=1)
        offsets = np.abs(grid.periodic_offset(0, grid.axis(0), zeta0))
        critical = offsets[low < floor]
        half = 0.5 * grid.period[0]
        return float(np.min(critical)) if critical.size else half

    def regular_centers(
        self,
        bundle: ExampleBundle,
        rng: np.random.Generator,
        radius: float,
        count: int,
    ) -> List[Point]:
        """
        Up to `count` random centres whose balls of `radius` keep |dp| |X|
        above REGULAR_FRACTION of its maximum, so the frame
        (X, Y, grad p) stays regular on every bump.
        """
        grid = bundle.grid
        strength = exterior_derivative(bundle.p).pointwise_norm() * np.sqrt(
            bundle.g.norm_squared(bundle.x)
        )
        floor = REGULAR_FRACTION * float(np.max(strength))
        centers: List[Point] = []
        for _ in range(CENTER_ATTEMPTS * count):
            if len(centers) == count:
                break
            center = tuple(float(rng.uniform(0.0, t)) for t in grid.period)
            ball = periodic_distance(grid, center) < radius
            if (
                floor > 0.0
                and np.any(ball)
                and np.min(strength[ball]) >= floor
            ):
                centers.append(center)
        if len(centers) < count:
            self.logger.warning(
                "Found %d of %d regular bump centres", len(centers), count
            )
        return centers

    @staticmethod
    def chart_grid(grid: PeriodicGrid) -> PeriodicGrid:
        """grid with at least CHART_NODES nodes on the slice axes."""
        n = grid.n
        return PeriodicGrid(
            [n[0], max(n[1], CHART_NODES), max(n[2], CHART_NODES)]
        )

    def structural_rows(
        self, bundle: ExampleBundle, zeta0: float
    ) -> List[Report]:
        tol = self.tolerances["structural"]
        flow = bundle.guided_flow(self.tolerances["residual"])
        surface = extract_slice(bundle.g, bundle.p, zeta0)
        frame = induced_frame_metric(surface, flow, bundle.g)
        check = frame.check(tol)
        check.name = f"frame zeta0={zeta0:.3f}"
        harmonic = p_harmonic_check(surface, bundle.g, bundle.x, bundle.p)
        harmonic.name = f"p-harmonic zeta0={zeta0:.3f}"
        area = integrate(surface.grid, np.sqrt(surface.h.determinant()))
        bonnet = Comparison.of(
            f"gauss-bonnet zeta0={zeta0:.3f}",
            "|int s dA| / area",
            abs(gauss_bonnet_integral(surface.h)) / area,
            1e-6,
        )
        return [check, harmonic, bonnet]

    def identity_rows(self, bundle: ExampleBundle) -> List[Report]:
        tol = self.tolerances["structural"]
        g, x, mu = bundle.g, bundle.x, bundle.mu
        flow = validate_guided_flow(
            x, bundle.alpha, mu, bundle.p, self.tolerances["residual"]
        )
        y = companion_field(flow)
        dp = exterior_derivative(bundle.p)
        w = curl(g, x, mu)
        return [
            Report.from_residuals(
                "identities",
                {
                    "d d p": exterior_derivative(dp).max_abs(),
                    "div curl X": divergence(mu, w).max_abs()
                    / max(1.0, w.max_abs()),
                    "alpha(Y)": float(
                        np.max(np.abs(evaluate(bundle.alpha, y)))
                    ),
                    "dp(Y)": float(np.max(np.abs(evaluate(dp, y)))),
                    "[X~, Y]": commutator(flow.normalized, y).max_abs(),
                },
                tol,
            )
        ]

    def bump_rows(self, bundle: ExampleBundle) -> List[Report]:
        """Random bumps centred in the regular region of the frame."""
        tol = self.tolerances
        opts = self.cfg["perturb"]
        count = int(opts["count"])
        radius = opts["radius"]
        rng = np.random.default_rng(opts["seed"])
        centers = self.regular_centers(bundle, rng, radius, count)
        amplitudes = opts["amplitude"] * rng.uniform(-1.0, 1.0, len(centers))
        g, x, p, mu = bundle.g, bundle.x, bundle.p, bundle.mu

        def residuals(item: Tuple[Point, float]) -> Tuple[float, float]:
            center, amplitude = item
            profile = bump_profile(center, radius, amplitude, bundle.grid)
            g_rho = perturb_metric(g, x, p, profile, mu)
            rep = is_adapted(g_rho, x, bundle.alpha, mu, tol["adapted"])
            eq = mhd_residual(g_rho, x, p, tol["residual"], mu)
            return max(rep.residuals.values()), max(eq.residuals.values())

        done = [
            res
            for res in self.each(residuals, list(zip(centers, amplitudes)))
            if res is not None
        ]
        rows = [
            _outcome(
                "random bumps",
                f"{len(done)} of {count} evaluated",
                len(done) == count,
            )
        ]
        if done:
            rows.append(
                Comparison.of(
                    "random bumps",
                    "adaptedness",
                    max(res[0] for res in done),
                    tol["adapted"],
                )
            )
            rows.append(
                Comparison.of(
                    "random bumps",
                    "mhd residual",
                    max(res[1] for res in done),
                    tol["residual"],
                )
            )
        return rows

    def reproduce_family(self) -> List[Report]:
        grid = self.grid()
        tol = self.tolerances
        bundle = self.example(FAMILY, grid)
        g, x, p, mu = bundle.g, bundle.x, bundle.p, bundle.mu
        flow = bundle.guided_flow(tol["residual"])
        y = companion_field(flow)
        rows: List[Report] = [
            mhd_residual(g, x, p, tol["residual"], mu),
            flow.report,
            is_adapted(g, x, bundle.alpha, mu, tol["adapted"]),
        ]
        assert bundle.y_closed_form is not None
        rows.append(
            Comparison.of(
                "companion field",
                "vs p'/(a^2+b^2) (b, -a)",
                _relative_error(y.data, bundle.y_closed_form.data),
                tol["structural"],
            )
        )
        crossed = cross(g, x, gradient(g, p), mu).scaled(
            1.0 / g.norm_squared(x)
        )
        rows.append(
            Comparison.of(
                "companion field",
                "vs X x grad p / g(X, X)",
                _relative_error(y.data, crossed.data),
                tol["structural"],
            )
        )
        rows.extend(self.bump_rows(bundle))

        zeta = grid.mesh()[0]
        rotating = VectorField(
            grid, [np.zeros(grid.shape), np.sin(zeta), np.cos(zeta)]
        )
        lam = beltrami_factor(MetricField.identity(grid), rotating)
        rows.append(
            Report.from_residuals(
                "beltrami",
                {
                    "lambda - 1": float(np.max(np.abs(lam.factor.values - 1))),
                    "colinearity": lam.colinearity_residual,
                    "first integral": lam.first_integral_residual,
                },
                tol["structural"],
            )
        )

        same = rotated_family(
            grid, TrigProfile(2.0, sin={1: 0.5}), lookup("sin")
        )
        base = rotated_family(
            grid, TrigProfile(2.0, sin={1: 0.5}), TrigProfile(0.0)
        )
        rows.append(
            Comparison.of(
                "rotated family",
                "same pressure",
                _relative_error(same.p.values, base.p.values),
                tol["structural"],
            )
        )
        rows.append(
            mhd_residual(same.g, same.x, same.p, tol["residual"], same.mu)
        )
        rows.extend(self.identity_rows(bundle))
        rows.extend(
            self.slice_rows(
                "structure",
                lambda z: self.structural_rows(bundle, z),
                self.regular_slices(bundle),
            )
        )
        return rows

    def reproduce_killing(self) -> List[Report]:
        grid = self.grid()
        tol = self.tolerances
        settings = self.cfg["examples"][KILLING]
        bundle = self.example(KILLING, grid)
        g, x, p, mu = bundle.g, bundle.x, bundle.p, bundle.mu
        flow = bundle.guided_flow(tol["residual"])
        y = companion_field(flow)
        ref = reference_values(bundle)
        rows: List[Report] = [
            Comparison.of(
                "companion field",
                "vs b' (iota0, -1)",
                _relative_error(y.data, ref["companion"].data),
                tol["structural"],
            ),
            mhd_residual(g, x, p, tol["residual"], mu),
            flow.report,
        ]
        for eps in (-0.05, 0.0, 0.05):
            other = build(KILLING, grid, dict(settings, epsilon=eps))
            rep = is_adapted(other.g, other.x, other.alpha, other.mu, 1e-12)
            rep.name = f"adaptedness eps={eps:+.2f}"
            rows.append(rep)
            rows.append(
                Comparison.of(
                    f"det g eps={eps:+.2f}",
                    "max |det g - 1|",
                    float(np.max(np.abs(other.g.determinant() - 1.0))),
                    1e-12,
                )
            )

        zeta = VectorField.coordinate(grid, 0)
        sym = symmetry_report(g, x, p, zeta, mu)
        rows.append(
            Comparison.of(
                "symmetry d_zeta", "L_K g", sym.killing_residual, 1e-12
            )
        )
        rows.append(
            Comparison.of(
                "symmetry d_zeta",
                "L_K X vs closed form",
                abs(sym.field_residual - ref["bracket_zeta_x"].max_norm()),
                tol["structural"],
            )
        )
        rows.append(
            Comparison.of(
                "symmetry d_zeta",
                "K(p) vs closed form",
                abs(
                    sym.pressure_residual - ref["zeta_derivative_p"].max_abs()
                ),
                tol["structural"],
            )
        )
        rows.append(
            Comparison.of(
                "bracket [d_zeta, X]",
                "vs b' (1, iota0)",
                _relative_error(
                    commutator(zeta, x).data, ref["bracket_zeta_x"].data
                ),
                tol["structural"],
            )
        )
        rows.append(
            Comparison.of(
                "d_zeta p",
                "vs (1 + iota0^2) b b'",
                _relative_error(
                    directional_derivative(zeta, p).values,
                    ref["zeta_derivative_p"].values,
                ),
                tol["structural"],
            )
        )
        quasi = quasisymmetry_residual(g, x, mu, zeta)
        rows.append(
            Comparison.of(
                "quasi-symmetry d_zeta",
                "L_u alpha(X) vs closed form",
                abs(
                    quasi.residuals["L_u alpha(X)"]
                    - ref["zeta_derivative_alpha_x"].max_abs()
                ),
                tol["structural"],
            )
        )

        def slice_checks(zeta0: float) -> List[Report]:
            surface = extract_slice(g, p, zeta0)
            n_field = n_functional(g, surface, y)
            closed = Comparison.of(
                f"N functional zeta0={zeta0:.3f}",
                "vs closed form",
                _relative_error(
                    n_field.values,
                    surface.restrict(ref["companion_norm_squared"].values),
                ),
                tol["structural"],
            )
            return [closed] + self.structural_rows(bundle, zeta0)

        slices = self.regular_slices(bundle)
        rows.extend(self.slice_rows("slice", slice_checks, slices))
        rows.extend(self.identity_rows(bundle))
        first = slices[:1]
        rows.extend(
            self.slice_rows(
                "certify",
                lambda z: self.certification_rows(grid, settings, z),
                first,
            )
        )
        rows.extend(
            self.slice_rows(
                "sharpen",
                lambda z: self.sharpening_rows(grid, settings, z),
                first,
            )
        )
        rows.extend(
            self.slice_rows(
                "curvature shift",
                lambda z: self.curvature_rows(grid, settings, z),
                first,
            )
        )
        return rows

    def certification_rows(
        self, grid: PeriodicGrid, settings: Dict[str, Any], zeta0: float
    ) -> List[Report]:
        radius = self.cfg["certify"]["radius"]
        gap = self.cfg["certify"]["gap"]
        rows = []
        for label, change, expected in (
            ("default", {}, True),
            ("eps=0", {"epsilon": 0.0}, False),
            ("f=cos theta cos phi", {"f": "cos-product"}, False),
        ):
            other = build(KILLING, grid, dict(settings, **change))
            flow = other.guided_flow(self.tolerances["residual"])
            cert = certify_symmetry_breaking(other.g, flow, zeta0, radius, gap)
            rows.append(
                _outcome(
                    f"certify {label}",
                    "expected certified" if expected else "expected refused",
                    cert.certified == expected,
                )
            )
        return rows

    def sharpening_rows(
        self, grid: PeriodicGrid, settings: Dict[str, Any], zeta0: float
    ) -> List[Report]:
        """
        The symmetric eps = 0 metric is refused; a density bump at the
        peak of N, or a chart perturbation with c < 0 at the peak of s,
        makes it certified.
        """
        radius = self.cfg["certify"]["radius"]
        flat = build(KILLING, grid, dict(settings, epsilon=0.0))
        clear = self.clearance(flat, zeta0)
        sharp = sharpen_n_peak(
            flat.g,
            flat.guided_flow(self.tolerances["residual"]),
            zeta0,
            bump_radius=min(BUMP_RADIUS, 0.5 * clear),
            disk_radius=radius,
            gap=self.cfg["certify"]["gap"],
        )
        rows = [
            _outcome(
                "sharpen N eps=0",
                "refused before",
                not sharp.before.certified,
            ),
            _outcome("sharpen N eps=0", "certified after", sharp.certified),
        ]

        fine = build(
            KILLING, self.chart_grid(grid), dict(settings, epsilon=0.0)
        )
        sharp = sharpen_curvature_peak(
            fine.g,
            fine.guided_flow(self.tolerances["residual"]),
            zeta0,
            support_radius=CHART_SUPPORT,
            halfwidth=min(CHART_HALFWIDTH, 0.5 * clear),
            disk_radius=radius,
        )
        origin = tuple(sharp.profile.descriptor["origin"])
        rows.extend(
            [
                _outcome(
                    "sharpen s eps=0",
                    "refused before",
                    not sharp.before.certified,
                ),
                _outcome(
                    "sharpen s eps=0", "certified after", sharp.certified
                ),
                _outcome(
                    "sharpen s eps=0",
                    "peak at the chart origin",
                    sharp.after.verdict.peak_index == origin,
                ),
            ]
        )
        return rows

    def curvature_rows(
        self, grid: PeriodicGrid, settings: Dict[str, Any], zeta0: float
    ) -> List[Report]:
        """
        Scalar curvature change at a slice node under the localized
        slice-quadratic perturbation, against -2c / E(origin), on the
        grid refined in-slice by chart_grid.
        """
        fine = build(KILLING, self.chart_grid(grid), settings)
        flow = fine.guided_flow(self.tolerances["residual"])
        surface = extract_slice(fine.g, fine.p, zeta0)
        frame = induced_frame_metric(surface, flow, fine.g)
        halfwidth = min(CHART_HALFWIDTH, 0.5 * self.clearance(fine, zeta0))
        origin = (0, 0)
        before = scalar_curvature_2d(surface.h).values[origin]
        rows = []
        for c in (-0.01, -0.001):
            profile = slice_quadratic_profile(
                frame, origin, c, halfwidth, CHART_SUPPORT
            )
            g_rho = perturb_metric(fine.g, fine.x, fine.p, profile, fine.mu)
            after = scalar_curvature_2d(
                induced_metric(g_rho, surface.index)
            ).values[origin]
            predicted = curvature_shift(frame.e_coef.values[origin], c)
            rows.append(
                Comparison.of(
                    f"curvature shift c={c}",
                    "relative error vs -2c/E",
                    abs((after - before) - predicted) / abs(predicted),
                    1e-4,
                )
            )
        return rows
