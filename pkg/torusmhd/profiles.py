"""
Smooth periodic profiles: functions of zeta (b, a, r, ...) and of
(theta, phi) (the f of the Killing family).
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import FormatError, SubclassError
from .grid import PeriodicGrid, interpolate, partial_derivative


class Profile:
    """
    A smooth 2 pi-periodic function of one variable.
    """

    kind = ""

    def __call__(self, z: np.ndarray) -> np.ndarray:
        raise SubclassError()

    def derivative(self, z: np.ndarray) -> np.ndarray:
        raise SubclassError()

    def to_json(self) -> Dict[str, Any]:
        raise SubclassError()


class TrigProfile(Profile):
    """
    c + sum_m (a_m cos(m z) + b_m sin(m z)).
    """

    kind = "trig"

    def __init__(
        self,
        constant: float = 0.0,
        cos: Optional[Dict[int, float]] = None,
        sin: Optional[Dict[int, float]] = None,
    ) -> None:
        self.constant = float(constant)
        self.cos = {int(m): float(a) for m, a in (cos or {}).items()}
        self.sin = {int(m): float(b) for m, b in (sin or {}).items()}

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        out = np.full(z.shape, self.constant)
        for m, a in self.cos.items():
            out = out + a * np.cos(m * z)
        for m, b in self.sin.items():
            out = out + b * np.sin(m * z)
        return out

    def derivative(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        out = np.zeros(z.shape)
        for m, a in self.cos.items():
            out = out - m * a * np.sin(m * z)
        for m, b in self.sin.items():
            out = out + m * b * np.cos(m * z)
        return out

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "constant": self.constant,
            "cos": {str(m): a for m, a in self.cos.items()},
            "sin": {str(m): b for m, b in self.sin.items()},
        }


class SampledProfile(Profile):
    """
    Node samples on a uniform periodic axis, evaluated by trigonometric
    interpolation and differentiated spectrally.
    """

    kind = "sampled"

    def __init__(self, values: Sequence[float]) -> None:
        self.values = np.asarray(values, dtype=np.float64)
        self.grid = PeriodicGrid([self.values.size])

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        points = np.mod(z.reshape(-1, 1), 2.0 * math.pi)
        return interpolate(self.grid, self.values, points).reshape(z.shape)

    def derivative(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        slope = partial_derivative(self.grid, self.values, 0)
        points = np.mod(z.reshape(-1, 1), 2.0 * math.pi)
        return interpolate(self.grid, slope, points).reshape(z.shape)

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind, "values": self.values.tolist()}


class PolarProfile(Profile):
    """
    r cos(angle) or r sin(angle): the two components of a field whose
    magnitude r is prescribed and whose direction turns with zeta.
    """

    kind = "polar"

    def __init__(self, r: Profile, angle: Profile, part: str) -> None:
        if part not in ("cos", "sin"):
            raise FormatError(f"polar part must be cos or sin: {part}")
        self.r = r
        self.angle = angle
        self.part = part

    def __call__(self, z: np.ndarray) -> np.ndarray:
        trig = np.cos if self.part == "cos" else np.sin
        return self.r(z) * trig(self.angle(z))

    def derivative(self, z: np.ndarray) -> np.ndarray:
        r, dr = self.r(z), self.r.derivative(z)
        t, dt = self.angle(z), self.angle.derivative(z)
        if self.part == "cos":
            return dr * np.cos(t) - r * dt * np.sin(t)
        return dr * np.sin(t) + r * dt * np.cos(t)

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "r": self.r.to_json(),
            "angle": self.angle.to_json(),
            "part": self.part,
        }


# (amplitude, theta kind, theta mode, phi kind, phi mode)
Term = Tuple[float, str, int, str, int]


class SurfaceProfile:
    """
    f(theta, phi) = sum amplitude * trig(m theta) * trig(n phi).
    """

    kind = "surface-trig"

    def __init__(self, terms: Sequence[Sequence[Any]]) -> None:
        self.terms: List[Term] = []
        for term in terms:
            amp, kind_t, m, kind_p, n = term
            for kind in (kind_t, kind_p):
                if kind not in ("cos", "sin"):
                    raise FormatError(f"unknown term kind {kind}")
            self.terms.append((float(amp), kind_t, int(m), kind_p, int(n)))

    def __call__(self, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        trig = {"cos": np.cos, "sin": np.sin}
        out = np.zeros(np.broadcast(theta, phi).shape)
        for amp, kind_t, m, kind_p, n in self.terms:
            out = out + amp * trig[kind_t](m * theta) * trig[kind_p](n * phi)
        return out

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind, "terms": [list(t) for t in self.terms]}


LIBRARY: Dict[str, Profile] = {
    "one": TrigProfile(1.0),
    "two": TrigProfile(2.0),
    "cos": TrigProfile(cos={1: 1.0}),
    "sin": TrigProfile(sin={1: 1.0}),
    "two-plus-sin": TrigProfile(2.0, sin={1: 1.0}),
    "two-plus-cos": TrigProfile(2.0, cos={1: 1.0}),
    "three-plus-sin2": TrigProfile(3.0, sin={2: 1.0}),
    "half-sin": TrigProfile(sin={1: 0.5}),
}

SURFACE_LIBRARY: Dict[str, SurfaceProfile] = {
    "zero": SurfaceProfile([]),
    "half-cos-sum": SurfaceProfile(
        [(0.5, "cos", 1, "cos", 0), (0.5, "cos", 0, "cos", 1)]
    ),
    "cos-product": SurfaceProfile([(1.0, "cos", 1, "cos", 1)]),
    "cos-theta": SurfaceProfile([(1.0, "cos", 1, "cos", 0)]),
}


def lookup(name: str) -> Profile:
    if name not in LIBRARY:
        raise FormatError(f"unknown profile {name}")
    return LIBRARY[name]


def lookup_surface(name: str) -> SurfaceProfile:
    if name not in SURFACE_LIBRARY:
        raise FormatError(f"unknown surface profile {name}")
    return SURFACE_LIBRARY[name]


def profile_from_json(payload: Any) -> Profile:
    """A profile from its JSON form or a library name."""
    if isinstance(payload, str):
        return lookup(payload)
    try:
        kind = payload["kind"]
        if kind == TrigProfile.kind:
            return TrigProfile(
                payload.get("constant", 0.0),
                payload.get("cos", {}),
                payload.get("sin", {}),
            )
        if kind == SampledProfile.kind:
            return SampledProfile(payload["values"])
        if kind == PolarProfile.kind:
            return PolarProfile(
                profile_from_json(payload["r"]),
                profile_from_json(payload["angle"]),
                payload["part"],
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad profile {payload!r}: {exc}") from exc
    raise FormatError(f"unknown profile kind {kind}")


def surface_profile_from_json(payload: Any) -> SurfaceProfile:
    if isinstance(payload, str):
        return lookup_surface(payload)
    try:
        return SurfaceProfile(payload["terms"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad surface profile {payload!r}: {exc}") from exc
