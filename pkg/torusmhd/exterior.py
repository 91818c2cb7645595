"""
Metric-intrinsic vector calculus on the flat torus.

curl and cross are defined only through the volume form,

    i_{curl X} mu = d(i_X g),        i_{X x Y} g = i_Y i_X mu,

so a volume form supplied independently of the metric is honoured.
"""

import logging
from typing import Dict, Tuple, Union

import numpy as np

from .errors import DegreeError, PositivityError, ShapeError
from .fields import (
    KForm,
    MetricField,
    ScalarField,
    VectorField,
    form_basis,
    node_major,
    pointwise_solve,
)
from .grid import PeriodicGrid, partial_derivative

LOGGER = logging.getLogger(__name__)

FormLike = Union[ScalarField, KForm]


class VolumeForm(KForm):
    """
    Top-degree form with a single, strictly positive component.
    """

    def __init__(
        self, grid: PeriodicGrid, density: np.ndarray, external: bool = False
    ) -> None:
        super().__init__(grid, grid.ndim, [density])
        low = float(np.min(self.data[0]))
        if not low > 0.0:
            raise PositivityError("volume form density", low)
        self.external = external

    @property
    def density(self) -> np.ndarray:
        return self.data[0]

    @classmethod
    def flat(cls, grid: PeriodicGrid) -> "VolumeForm":
        return cls(grid, np.ones(grid.shape), external=True)

    @classmethod
    def from_form(cls, form: KForm) -> "VolumeForm":
        if form.degree != form.grid.ndim:
            raise ShapeError(f"volume form needs degree {form.grid.ndim}")
        return cls(form.grid, form.data[0], external=True)


def _as_form(omega: FormLike) -> KForm:
    if isinstance(omega, ScalarField):
        return KForm.from_scalar(omega)
    return omega


def _sort_sign(indices: Tuple[int, ...]) -> Tuple[int, Tuple[int, ...]]:
    """Parity of the permutation sorting `indices`, and the sorted tuple."""
    sign = 1
    seq = list(indices)
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign, tuple(seq)


def _position(grid: PeriodicGrid, degree: int) -> Dict[Tuple[int, ...], int]:
    return {idx: k for k, idx in enumerate(form_basis(grid.ndim, degree))}


def exterior_derivative(omega: FormLike) -> KForm:
    """
    d on coordinate components, with spectral partial derivatives.
    """
    form = _as_form(omega)
    grid = form.grid
    if form.degree >= grid.ndim:
        raise DegreeError("exterior derivative", form.degree)
    target = _position(grid, form.degree + 1)
    out = np.zeros((len(target),) + grid.shape)
    for comp, indices in zip(form.data, form.basis):
        for m in range(grid.ndim):
            if m in indices:
                continue
            sign, key = _sort_sign((m,) + indices)
            out[target[key]] += sign * partial_derivative(grid, comp, m)
    return KForm(grid, form.degree + 1, list(out))


def wedge(omega: FormLike, eta: FormLike) -> KForm:
    a = _as_form(omega)
    b = _as_form(eta)
    grid = a.grid
    degree = a.degree + b.degree
    if degree > grid.ndim:
        raise DegreeError("wedge product", degree)
    target = _position(grid, degree)
    out = np.zeros((len(target),) + grid.shape)
    for comp_a, idx_a in zip(a.data, a.basis):
        for comp_b, idx_b in zip(b.data, b.basis):
            if set(idx_a) & set(idx_b):
                continue
            sign, key = _sort_sign(idx_a + idx_b)
            out[target[key]] += sign * comp_a * comp_b
    return KForm(grid, degree, list(out))


def interior_product(x: VectorField, omega: KForm) -> KForm:
    """Contraction of x into the first slot of omega."""
    grid = omega.grid
    if omega.degree == 0:
        raise DegreeError("interior product", 0)
    target = _position(grid, omega.degree - 1)
    out = np.zeros((len(target),) + grid.shape)
    for comp, indices in zip(omega.data, omega.basis):
        for pos, m in enumerate(indices):
            rest = indices[:pos] + indices[pos + 1 :]
            sign = -1.0 if pos % 2 else 1.0
            out[target[rest]] += sign * x.data[m] * comp
    return KForm(grid, omega.degree - 1, list(out))


def evaluate(omega: KForm, x: VectorField) -> np.ndarray:
    """Pointwise value of a 1-form on a vector field."""
    if omega.degree != 1:
        raise DegreeError("evaluation on a vector", omega.degree)
    return np.sum(omega.data * x.data, axis=0)


def flat(g: MetricField, x: VectorField) -> KForm:
    lowered = np.einsum("...ij,j...->i...", g.matrix(), x.data)
    return KForm(g.grid, 1, list(lowered))


def sharp(g: MetricField, omega: KForm) -> VectorField:
    if omega.degree != 1:
        raise DegreeError("sharp", omega.degree)
    raised = pointwise_solve(g.matrix(), node_major(omega))
    return VectorField(g.grid, list(np.moveaxis(raised, -1, 0)))


def volume_form(g: MetricField) -> VolumeForm:
    return VolumeForm(g.grid, np.sqrt(g.determinant()))


def inverse_volume_contraction(mu: VolumeForm, beta: KForm) -> VectorField:
    """
    The unique v with i_v mu = beta, for beta of degree ndim - 1.

    v -> i_v mu is a signed permutation scaled by the density, so the
    inverse is read off componentwise.
    """
    grid = mu.grid
    if beta.degree != grid.ndim - 1:
        raise DegreeError("volume contraction inverse", beta.degree)
    target = _position(grid, grid.ndim - 1)
    top = tuple(range(grid.ndim))
    comps = [np.zeros(grid.shape) for _ in range(grid.ndim)]
    for pos, m in enumerate(top):
        rest = top[:pos] + top[pos + 1 :]
        sign = -1.0 if pos % 2 else 1.0
        comps[m] = sign * beta.data[target[rest]] / mu.density
    return VectorField(grid, comps)


def curl(g: MetricField, x: VectorField, mu: VolumeForm) -> VectorField:
    if g.grid.ndim != 3:
        raise ShapeError("curl is defined on the 3-torus only")
    return inverse_volume_contraction(mu, exterior_derivative(flat(g, x)))


def divergence(mu: VolumeForm, x: VectorField) -> ScalarField:
    top = exterior_derivative(interior_product(x, mu))
    return ScalarField(mu.grid, top.data[0] / mu.density)


def cross(
    g: MetricField, x: VectorField, y: VectorField, mu: VolumeForm
) -> VectorField:
    return sharp(g, interior_product(y, interior_product(x, mu)))


def gradient(g: MetricField, p: ScalarField) -> VectorField:
    return sharp(g, exterior_derivative(p))


def directional_derivative(x: VectorField, f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, evaluate(exterior_derivative(f), x))


def lie_derivative_form(x: VectorField, omega: FormLike) -> KForm:
    """Cartan's formula L_x = i_x d + d i_x."""
    form = _as_form(omega)
    grid = form.grid
    if form.degree == 0:
        return KForm(grid, 0, [evaluate(exterior_derivative(form), x)])
    inner = exterior_derivative(interior_product(x, form))
    if form.degree == grid.ndim:
        return inner
    return interior_product(x, exterior_derivative(form)) + inner
