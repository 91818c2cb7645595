"""
Field containers on periodic grids and pointwise linear algebra.

Every container holds a single read-only array `data` whose leading axis
enumerates components and whose trailing axes are the grid nodes.
"""

import itertools
import math
from typing import Iterable, List, Sequence, Tuple, Type, TypeVar

import numpy as np

from .errors import PositivityError, ShapeError, SingularPointError
from .grid import PeriodicGrid

SINGULAR_TOLERANCE = 1e-12

T = TypeVar("T", bound="SymmetricTensorField")


def form_basis(ndim: int, degree: int) -> List[Tuple[int, ...]]:
    """
    Increasing index tuples of the coordinate basis of degree-k forms, in
    lexicographic order (dz^dt, dz^dp, dt^dp for 2-forms in 3D).
    """
    return list(itertools.combinations(range(ndim), degree))


def symmetric_pairs(ndim: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(ndim) for j in range(i, ndim)]


class Field:
    kind = "field"

    def __init__(
        self,
        grid: PeriodicGrid,
        components: Iterable[np.ndarray],
        count: int,
    ) -> None:
        self.grid = grid
        comps = [
            np.broadcast_to(np.asarray(c, dtype=np.float64), grid.shape)
            for c in components
        ]
        if len(comps) != count:
            raise ShapeError(
                f"{self.kind} expects {count} components, got {len(comps)}"
            )
        data = np.array(comps, dtype=np.float64).reshape(
            (count,) + grid.shape
        )
        if not np.all(np.isfinite(data)):
            raise ShapeError(f"{self.kind} has non-finite values")
        data.setflags(write=False)
        self.data = data

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.data[i]

    def max_abs(self) -> float:
        """Largest absolute component value over the grid."""
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def pointwise_norm(self) -> np.ndarray:
        """Euclidean norm of the component vector at each node."""
        return np.sqrt(np.sum(self.data**2, axis=0))

    def max_norm(self) -> float:
        return float(np.max(self.pointwise_norm()))


class ScalarField(Field):
    kind = "scalar"

    def __init__(self, grid: PeriodicGrid, values: np.ndarray) -> None:
        super().__init__(grid, [values], 1)

    @property
    def values(self) -> np.ndarray:
        return self.data[0]

    @classmethod
    def constant(cls, grid: PeriodicGrid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))


class VectorField(Field):
    """Contravariant components in the coordinate frame."""

    kind = "vector"

    def __init__(
        self, grid: PeriodicGrid, components: Sequence[np.ndarray]
    ) -> None:
        super().__init__(grid, components, grid.ndim)

    @classmethod
    def zero(cls, grid: PeriodicGrid) -> "VectorField":
        return cls(grid, [np.zeros(grid.shape)] * grid.ndim)

    @classmethod
    def coordinate(cls, grid: PeriodicGrid, axis: int) -> "VectorField":
        comps = [np.zeros(grid.shape) for _ in range(grid.ndim)]
        comps[axis] = np.ones(grid.shape)
        return cls(grid, comps)

    def scaled(self, factor: np.ndarray) -> "VectorField":
        return VectorField(self.grid, list(self.data * factor))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, list(self.data + other.data))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, list(self.data - other.data))


class KForm(Field):
    """
    Differential form of a given degree; components follow form_basis.
    """

    kind = "form"

    def __init__(
        self,
        grid: PeriodicGrid,
        degree: int,
        components: Sequence[np.ndarray],
    ) -> None:
        if not 0 <= degree <= grid.ndim:
            raise ShapeError(f"degree {degree} on a {grid.ndim}-torus")
        self.degree = degree
        super().__init__(
            grid, components, math.comb(grid.ndim, degree)
        )

    @property
    def basis(self) -> List[Tuple[int, ...]]:
        return form_basis(self.grid.ndim, self.degree)

    @classmethod
    def zero(cls, grid: PeriodicGrid, degree: int) -> "KForm":
        count = math.comb(grid.ndim, degree)
        return cls(grid, degree, [np.zeros(grid.shape)] * count)

    @classmethod
    def from_scalar(cls, field: ScalarField) -> "KForm":
        return cls(field.grid, 0, [field.values])

    def scaled(self, factor: np.ndarray) -> "KForm":
        return KForm(self.grid, self.degree, list(self.data * factor))

    def __add__(self, other: "KForm") -> "KForm":
        return KForm(self.grid, self.degree, list(self.data + other.data))

    def __sub__(self, other: "KForm") -> "KForm":
        return KForm(self.grid, self.degree, list(self.data - other.data))


class SymmetricTensorField(Field):
    """
    Symmetric 2-tensor stored by its upper triangle, row by row
    (zz, zt, zp, tt, tp, pp in 3D).
    """

    kind = "tensor"

    def __init__(
        self, grid: PeriodicGrid, components: Sequence[np.ndarray]
    ) -> None:
        ndim = grid.ndim
        super().__init__(grid, components, ndim * (ndim + 1) // 2)

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return symmetric_pairs(self.grid.ndim)

    def component(self, i: int, j: int) -> np.ndarray:
        if i > j:
            i, j = j, i
        return self.data[self.pairs.index((i, j))]

    def matrix(self) -> np.ndarray:
        """Node-major stack of full matrices, shape grid.shape + (n, n)."""
        ndim = self.grid.ndim
        out = np.empty(self.grid.shape + (ndim, ndim))
        for idx, (i, j) in enumerate(self.pairs):
            out[..., i, j] = self.data[idx]
            out[..., j, i] = self.data[idx]
        return out

    @classmethod
    def from_matrix(
        cls: Type[T], grid: PeriodicGrid, matrix: np.ndarray
    ) -> T:
        sym = 0.5 * (matrix + np.swapaxes(matrix, -1, -2))
        return cls(
            grid, [sym[..., i, j] for i, j in symmetric_pairs(grid.ndim)]
        )

    def apply(self, u: VectorField, v: VectorField) -> np.ndarray:
        """Pointwise value T(u, v)."""
        return np.einsum(
            "i...,ij...,j...->...", u.data, self._stacked(), v.data
        )

    def _stacked(self) -> np.ndarray:
        return np.moveaxis(self.matrix(), (-2, -1), (0, 1))


class MetricField(SymmetricTensorField):
    """
    Riemannian metric: positive definite at every node.
    """

    kind = "metric"

    def __init__(
        self, grid: PeriodicGrid, components: Sequence[np.ndarray]
    ) -> None:
        super().__init__(grid, components)
        minors = leading_minors(self.matrix())
        for order, minor in enumerate(minors, start=1):
            low = float(np.min(minor))
            if not low > 0.0:
                raise PositivityError(f"leading minor {order} of metric", low)

    @classmethod
    def identity(cls, grid: PeriodicGrid) -> "MetricField":
        return cls(
            grid,
            [
                np.full(grid.shape, 1.0 if i == j else 0.0)
                for i, j in symmetric_pairs(grid.ndim)
            ],
        )

    def determinant(self) -> np.ndarray:
        return np.linalg.det(self.matrix())

    def norm_squared(self, v: VectorField) -> np.ndarray:
        return self.apply(v, v)

    def norm(self, v: VectorField) -> np.ndarray:
        return np.sqrt(np.maximum(self.apply(v, v), 0.0))

    def max_norm_of(self, v: VectorField) -> float:
        return float(np.max(self.norm(v)))


def leading_minors(matrices: np.ndarray) -> List[np.ndarray]:
    """Sylvester leading principal minors of a node-major matrix stack."""
    ndim = matrices.shape[-1]
    return [
        np.linalg.det(matrices[..., :k, :k]) for k in range(1, ndim + 1)
    ]


def pointwise_solve(matrices: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Solve A x = b at every node.

    `matrices` has shape grid + (n, n) and `rhs` grid + (n,). LAPACK's
    partial-pivot LU is used; nodes whose determinant is below
    SINGULAR_TOLERANCE relative to the entry scale raise
    SingularPointError for the worst node.
    """
    ndim = matrices.shape[-1]
    det = np.linalg.det(matrices)
    scale = np.max(np.abs(matrices), axis=(-2, -1)) ** ndim
    scale = np.where(scale > 0.0, scale, 1.0)
    ratio = np.abs(det) / scale
    worst = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    if ratio[worst] <= SINGULAR_TOLERANCE:
        raise SingularPointError(
            tuple(int(k) for k in worst), float(det[worst])
        )
    return np.linalg.solve(matrices, rhs[..., np.newaxis])[..., 0]


def pointwise_solve3(matrices: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if matrices.shape[-2:] != (3, 3) or rhs.shape[-1] != 3:
        raise ShapeError(
            f"expected 3x3 systems, got {matrices.shape} / {rhs.shape}"
        )
    return pointwise_solve(matrices, rhs)


def node_major(field: Field) -> np.ndarray:
    """Move the component axis last, as pointwise_solve expects."""
    return np.moveaxis(field.data, 0, -1)
