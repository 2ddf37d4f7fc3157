"""Concrete flat contact manifolds and their operators.

Three models are supported:

* ``CIRCLE`` - the circle, ``n = 0``, Reeb field ``d/dx``; contact fields are
  ``u = f d/dx``.
* ``TORUS3`` - the 3-torus with contact form ``sin z dx + cos z dy`` and the
  flat metric.  Reeb field ``E = sin z d/dx + cos z d/dy``.
* ``QUANTO_TORUS2`` - the 2-torus obtained as the Reeb-orbit quotient of a
  regular contact 3-manifold.  Every function is Reeb-invariant, vector fields
  are symplectic gradients and the bracket is the canonical Poisson bracket.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    Grid,
    ScalarField,
    VectorFieldComponents,
    dealias_values,
    from_spectral,
    gradient_values,
    laplacian_values,
    screened_inverse_values,
    to_spectral,
)


class ModelKind(enum.Enum):
    CIRCLE = "circle"
    TORUS3 = "torus3"
    QUANTO_TORUS2 = "quanto_torus2"


_NDIM = {ModelKind.CIRCLE: 1, ModelKind.TORUS3: 3, ModelKind.QUANTO_TORUS2: 2}
_N = {ModelKind.CIRCLE: 0, ModelKind.TORUS3: 1, ModelKind.QUANTO_TORUS2: 1}


class UnsupportedModelError(ValueError):
    """Operation is not defined for the requested model kind."""


@dataclass(frozen=True)
class ContactModel:
    kind: ModelKind
    grid: Grid

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.grid.ndim != _NDIM[kind]:
            raise ValueError(f"{kind.value} needs a {_NDIM[kind]}-d grid, got {self.grid.ndim}-d")
        if kind is ModelKind.TORUS3 and any(abs(L - 2 * math.pi) > 1e-12 for L in self.grid.lengths):
            raise ValueError("torus3 requires all axis lengths equal to 2*pi")

    @property
    def n(self) -> int:
        """Contact dimension parameter; the manifold has dimension 2n+1."""
        return _N[self.kind]

    @classmethod
    def circle(cls, n: int = 256, length: float = 2 * math.pi) -> "ContactModel":
        return cls(ModelKind.CIRCLE, Grid((n,), (length,)))

    @classmethod
    def torus3(cls, n: int = 32) -> "ContactModel":
        return cls(ModelKind.TORUS3, Grid((n, n, n)))

    @classmethod
    def quanto_torus2(cls, n: int = 128, length: float = 2 * math.pi) -> "ContactModel":
        return cls(ModelKind.QUANTO_TORUS2, Grid((n, n), (length, length)))

    def _check(self, *fields: ScalarField):
        for f in fields:
            if f.grid != self.grid:
                raise ValueError("field grid does not match the model grid")

    # -- frame coefficients (Torus3 only) --------------------------------
    @property
    def _sin_z(self) -> np.ndarray:
        return np.sin(self.grid.mesh[2])

    @property
    def _cos_z(self) -> np.ndarray:
        return np.cos(self.grid.mesh[2])

    def reeb_components(self) -> tuple[np.ndarray, ...]:
        """Reeb field components broadcast to the grid."""
        shape = self.grid.dims
        if self.kind is ModelKind.CIRCLE:
            return (np.ones(shape),)
        if self.kind is ModelKind.TORUS3:
            return (np.broadcast_to(self._sin_z, shape).copy(),
                    np.broadcast_to(self._cos_z, shape).copy(),
                    np.zeros(shape))
        raise UnsupportedModelError("the Reeb direction is quotiented out on quanto_torus2")

    # -- raw-array kernels shared by the public operations and the steppers --
    def reeb_from_gradient(self, grad: list[np.ndarray]) -> np.ndarray:
        if self.kind is ModelKind.CIRCLE:
            return grad[0]
        if self.kind is ModelKind.TORUS3:
            return self._sin_z * grad[0] + self._cos_z * grad[1]
        return np.zeros(self.grid.dims)

    def velocity_from_jet(self, f: np.ndarray, grad: list[np.ndarray]) -> list[np.ndarray]:
        """Contact (or symplectic) vector field from ``f`` and its gradient."""
        if self.kind is ModelKind.CIRCLE:
            return [np.array(f, dtype=float)]
        if self.kind is ModelKind.TORUS3:
            fx, fy, fz = grad
            s, c = self._sin_z, self._cos_z
            return [f * s + fz * c, f * c - fz * s, fy * s - fx * c]
        fx, fy = grad
        return [-fy, fx]

    def bracket_values(self, f: np.ndarray, g: np.ndarray, dealias: bool = True) -> np.ndarray:
        grid = self.grid
        gf = gradient_values(grid, f)
        gg = gradient_values(grid, g)
        if self.kind is ModelKind.QUANTO_TORUS2:
            out = gf[0] * gg[1] - gf[1] * gg[0]
        else:
            u = self.velocity_from_jet(f, gf)
            out = sum(ui * gi for ui, gi in zip(u, gg)) - g * self.reeb_from_gradient(gf)
        return dealias_values(grid, out) if dealias else out


def _vector(model: ContactModel, comps) -> VectorFieldComponents:
    return VectorFieldComponents(model.grid, tuple(ScalarField(model.grid, c) for c in comps))


def reeb_derivative(model: ContactModel, f: ScalarField) -> ScalarField:
    model._check(f)
    if model.kind is ModelKind.QUANTO_TORUS2:
        return ScalarField.zeros(model.grid)
    grad = gradient_values(model.grid, f.values)
    return ScalarField(model.grid, model.reeb_from_gradient(grad))


def contact_vector_field(model: ContactModel, f: ScalarField) -> VectorFieldComponents:
    """The contact vector field generated by the stream function ``f``."""
    model._check(f)
    if model.kind is ModelKind.QUANTO_TORUS2:
        raise UnsupportedModelError("use hamiltonian_field on quanto_torus2")
    grad = gradient_values(model.grid, f.values)
    return _vector(model, model.velocity_from_jet(f.values, grad))


def hamiltonian_field(model: ContactModel, f: ScalarField) -> VectorFieldComponents:
    """Symplectic gradient ``(-f_y, f_x)`` on the quotient torus."""
    model._check(f)
    if model.kind is not ModelKind.QUANTO_TORUS2:
        raise UnsupportedModelError("hamiltonian_field is only defined on quanto_torus2")
    grad = gradient_values(model.grid, f.values)
    return _vector(model, model.velocity_from_jet(f.values, grad))


def advect(model: ContactModel, u: VectorFieldComponents, m: ScalarField) -> ScalarField:
    """Directional derivative ``u(m)``, dealiased."""
    model._check(m)
    if u.grid != model.grid:
        raise ValueError("vector field grid does not match the model grid")
    grad = gradient_values(model.grid, m.values)
    out = sum(c.values * g for c, g in zip(u.components, grad))
    return ScalarField(model.grid, dealias_values(model.grid, out))


def contact_poisson(model: ContactModel, f: ScalarField, g: ScalarField,
                    dealias: bool = True) -> ScalarField:
    """Contact bracket ``S f (g) - g E(f)``; canonical Poisson bracket on the quotient."""
    model._check(f, g)
    return ScalarField(model.grid, model.bracket_values(f.values, g.values, dealias))


def contact_laplacian(model: ContactModel, f: ScalarField) -> ScalarField:
    """Momentum ``m = f - lap f``."""
    model._check(f)
    return ScalarField(model.grid, f.values - laplacian_values(model.grid, f.values))


def inverse_contact_laplacian(model: ContactModel, m: ScalarField) -> ScalarField:
    model._check(m)
    return ScalarField(model.grid, screened_inverse_values(model.grid, m.values, 1.0))


def divergence_of_contact_field(model: ContactModel, f: ScalarField) -> ScalarField:
    """Divergence of ``S f`` computed component by component.

    Compare against ``(n + 1) * reeb_derivative(model, f)``; the identity is
    checked, never assumed.
    """
    u = contact_vector_field(model, f)
    grid = model.grid
    total = np.zeros(grid.dims)
    for axis, comp in enumerate(u.components):
        hat = to_spectral(grid, comp.values)
        total += from_spectral(grid, hat * grid.derivative_symbols[axis])
    return ScalarField(grid, total)
