"""
Uniform periodic grids and spectral differentiation.
"""

import math
from typing import Sequence, Tuple

import numpy as np

from .errors import ParameterError

AXIS_NAMES = ("zeta", "theta", "phi")


class PeriodicGrid:
    """
    A uniform tensor grid on a flat torus.

    Node k on axis i sits at k * period[i] / n[i], endpoint excluded. The
    same class serves the 3-torus (three axes) and its coordinate 2-tori
    and chart windows (two axes).
    """

    def __init__(
        self,
        n: Sequence[int],
        period: Sequence[float] = (),
        names: Sequence[str] = (),
    ) -> None:
        self.n: Tuple[int, ...] = tuple(int(k) for k in n)
        if not period:
            period = (2.0 * math.pi,) * len(self.n)
        self.period: Tuple[float, ...] = tuple(float(p) for p in period)
        if not names:
            names = AXIS_NAMES[-len(self.n) :]
        self.names: Tuple[str, ...] = tuple(names)

        if len(self.period) != len(self.n) or len(self.names) != len(self.n):
            raise ParameterError("n, period and names differ in length")
        for k in self.n:
            if k < 4 or k % 2 != 0:
                raise ParameterError(f"nodes per axis must be even >= 4: {k}")
        for p in self.period:
            if not p > 0.0:
                raise ParameterError(f"period must be positive: {p}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PeriodicGrid):
            return NotImplemented
        return self.n == other.n and self.period == other.period

    def __hash__(self) -> int:
        return hash((self.n, self.period))

    def __repr__(self) -> str:
        return f"PeriodicGrid(n={self.n}, period={self.period})"

    @property
    def ndim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.n

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(p / k for p, k in zip(self.period, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, i: int) -> np.ndarray:
        """Node coordinates along axis i."""
        return np.arange(self.n[i]) * (self.period[i] / self.n[i])

    def mesh(self) -> Tuple[np.ndarray, ...]:
        """Coordinate arrays of the full grid, indexing='ij'."""
        return tuple(
            np.meshgrid(
                *(self.axis(i) for i in range(self.ndim)), indexing="ij"
            )
        )

    def sub(self, axes: Sequence[int]) -> "PeriodicGrid":
        """The grid spanned by a subset of axes."""
        return PeriodicGrid(
            [self.n[i] for i in axes],
            [self.period[i] for i in axes],
            [self.names[i] for i in axes],
        )

    def node_of(self, i: int, coord: float) -> int:
        """
        Index of the node at coordinate `coord` on axis i, or
        ParameterError if the coordinate is not a node.
        """
        h = self.period[i] / self.n[i]
        k = coord / h
        idx = int(round(k))
        if abs(k - idx) > 1e-9:
            raise ParameterError(
                f"{coord} is not a node on axis {self.names[i]}"
            )
        return idx % self.n[i]

    def wavenumbers(self, i: int) -> np.ndarray:
        """
        Angular wavenumbers 2 pi m / period of the real transform along
        axis i, with the Nyquist mode zeroed.
        """
        k = np.fft.rfftfreq(self.n[i], d=1.0 / self.n[i])
        k = k * (2.0 * math.pi / self.period[i])
        k[-1] = 0.0
        return k

    def periodic_offset(
        self, i: int, coords: np.ndarray, origin: float
    ) -> np.ndarray:
        """Signed coordinate offset to `origin`, wrapped to [-L/2, L/2)."""
        period = self.period[i]
        return np.mod(coords - origin + 0.5 * period, period) - 0.5 * period


def partial_derivative(
    grid: PeriodicGrid, values: np.ndarray, axis: int
) -> np.ndarray:
    """
    Periodic spectral derivative of node values along one axis.
    """
    k = grid.wavenumbers(axis)
    shape = [1] * values.ndim
    shape[axis] = k.size
    coeffs = np.fft.rfft(values, axis=axis)
    coeffs = coeffs * (1j * k.reshape(shape))
    return np.fft.irfft(coeffs, n=grid.n[axis], axis=axis)


def gradient_arrays(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    """All first partials, stacked on a leading axis."""
    return np.stack(
        [partial_derivative(grid, values, i) for i in range(grid.ndim)]
    )


def integrate(grid: PeriodicGrid, values: np.ndarray) -> float:
    """Trapezoidal (spectrally accurate) integral over the torus."""
    return float(np.sum(values) * grid.cell_volume)


def interpolate(
    grid: PeriodicGrid, values: np.ndarray, points: np.ndarray
) -> np.ndarray:
    """
    Trigonometric interpolation of node values at arbitrary points.

    `points` has shape (m, ndim); the Nyquist mode is dropped so the
    interpolant is real.
    """
    coeffs = np.fft.fftn(values) / values.size
    freqs = [
        np.fft.fftfreq(grid.n[i], d=1.0 / grid.n[i]) for i in range(grid.ndim)
    ]
    for i in range(grid.ndim):
        nyquist = grid.n[i] // 2
        index = [slice(None)] * grid.ndim
        index[i] = nyquist
        coeffs[tuple(index)] = 0.0
    phases = [
        np.exp(
            1j
            * np.outer(points[:, i], freqs[i])
            * (2.0 * math.pi / grid.period[i])
        )
        for i in range(grid.ndim)
    ]
    if grid.ndim == 2:
        result = np.einsum("ab,pa,pb->p", coeffs, phases[0], phases[1])
    elif grid.ndim == 3:
        result = np.einsum(
            "abc,pa,pb,pc->p", coeffs, phases[0], phases[1], phases[2]
        )
    else:
        result = phases[0] @ coeffs
    return np.real(result)
