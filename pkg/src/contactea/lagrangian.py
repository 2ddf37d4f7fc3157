"""Lagrangian particles carrying the flow map and its padding scale.

Each particle integrates ``eta' = u(t, eta)`` and ``Lambda' = E(f)(t, eta)``.
The Jacobian of the flow map is then ``exp((n+1) Lambda)`` and momentum is
transported as ``m(t, eta) * Jac**((n+2)/(n+1)) = m0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contact import ContactModel, ModelKind
from .evolution import (
    SimState,
    StepperConfig,
    Tendency,
    _finite_or_raise,
    check_step,
    finish_step,
)
from .spectral import Grid, ScalarField, gradient_values, interpolate_values


@dataclass(frozen=True, eq=False)
class FlowMap:
    positions: np.ndarray
    lambdas: np.ndarray
    m0_samples: np.ndarray
    seeds: np.ndarray
    lengths: tuple[float, ...] = field(default=())

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        seeds = np.atleast_2d(np.asarray(self.seeds, dtype=float))
        lam = np.asarray(self.lambdas, dtype=float).ravel()
        m0 = np.asarray(self.m0_samples, dtype=float).ravel()
        if not (len(pos) == len(seeds) == len(lam) == len(m0)):
            raise ValueError("flow map arrays must all have one entry per particle")
        if self.lengths:
            pos = np.mod(pos, np.asarray(self.lengths))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "m0_samples", m0)

    def __len__(self) -> int:
        return len(self.lambdas)


def lattice_points(grid: Grid, per_axis: int | None = None) -> np.ndarray:
    """Uniform sub-lattice of grid nodes (10 per axis in 3-d, 100 in 1-d by default)."""
    if per_axis is None:
        per_axis = {1: 100, 2: 32, 3: 10}[grid.ndim]
    axes = []
    for a, n in enumerate(grid.dims):
        k = min(per_axis, n)
        idx = (np.arange(k) * n) // k
        axes.append(idx * grid.spacing[a])
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([c.ravel() for c in mesh], axis=1)


def seed_flow(m0: ScalarField, points: np.ndarray | None = None,
              per_axis: int | None = None) -> FlowMap:
    """Particles at ``points`` (default: node sub-lattice) with Lambda = 0."""
    grid = m0.grid
    pts = lattice_points(grid, per_axis) if points is None else np.atleast_2d(points)
    if grid.ndim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
        pts = pts.T
    samples = interpolate_values(grid, m0.values[None], pts)[0]
    return FlowMap(pts.copy(), np.zeros(len(pts)), samples, pts.copy(), grid.lengths)


def _field_stack(model: ContactModel, f: np.ndarray) -> np.ndarray:
    grad = gradient_values(model.grid, f)
    u = model.velocity_from_jet(f, grad)
    return np.stack(u + [model.reeb_from_gradient(grad)])


def _particle_rates(grid: Grid, stack: np.ndarray, positions: np.ndarray):
    vals = interpolate_values(grid, stack, positions)
    return vals[:-1].T, vals[-1]


def advance_flow(flow: FlowMap, model: ContactModel, f: ScalarField, dt: float) -> FlowMap:
    """RK4 step of the particle ODE in a frozen stream function ``f``."""
    if f.grid != model.grid:
        raise ValueError("stream function grid does not match the model")
    if flow.positions.shape[1] != model.grid.ndim:
        raise ValueError("particle dimension does not match the grid")
    stack = _field_stack(model, f.values)
    x = flow.positions
    v1, l1 = _particle_rates(model.grid, stack, x)
    v2, l2 = _particle_rates(model.grid, stack, x + 0.5 * dt * v1)
    v3, l3 = _particle_rates(model.grid, stack, x + 0.5 * dt * v2)
    v4, l4 = _particle_rates(model.grid, stack, x + dt * v3)
    x_new = x + dt / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4)
    lam_new = flow.lambdas + dt / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4)
    return FlowMap(x_new, lam_new, flow.m0_samples, flow.seeds, model.grid.lengths)


def coupled_step(state: SimState, flow: FlowMap, cfg: StepperConfig, h: float,
                 first: Tendency | None = None) -> tuple[SimState, FlowMap]:
    """One RK4 step of field and particles together, sharing every stage."""
    eq = state.eq
    grid = eq.grid
    if getattr(eq, "model", None) is None:
        raise ValueError("particle tracking needs a contact model")
    if flow.positions.shape[1] != grid.ndim:
        raise ValueError("particle dimension does not match the grid")
    m = state.m.values
    k1 = first if first is not None else eq.evaluate(m, cfg.dealias)
    _finite_or_raise(k1.dm, state.t)
    check_step(state, cfg, h, k1)

    def particle(tend: Tendency, x):
        stack = np.stack(list(tend.velocity) + [tend.reeb])
        return _particle_rates(grid, stack, x)

    x = flow.positions
    v1, l1 = particle(k1, x)
    k2 = eq.evaluate(m + 0.5 * h * k1.dm, cfg.dealias)
    v2, l2 = particle(k2, x + 0.5 * h * v1)
    k3 = eq.evaluate(m + 0.5 * h * k2.dm, cfg.dealias)
    v3, l3 = particle(k3, x + 0.5 * h * v2)
    k4 = eq.evaluate(m + h * k3.dm, cfg.dealias)
    v4, l4 = particle(k4, x + h * v3)
    m_new = m + h / 6.0 * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm)
    new_state = finish_step(state, cfg, m_new, h)
    x_new = x + h / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4)
    lam_new = flow.lambdas + h / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4)
    return new_state, FlowMap(x_new, lam_new, flow.m0_samples, flow.seeds, grid.lengths)


def jacobian_from_lambda(flow: FlowMap, n: int) -> np.ndarray:
    return np.exp((n + 1) * flow.lambdas)


@dataclass(frozen=True)
class TransportResidual:
    max_abs: float
    rms: float
    per_particle: np.ndarray = field(repr=False)
    m_interp: np.ndarray = field(repr=False)


def transport_residual(flow: FlowMap, model: ContactModel, m: ScalarField, n: int) -> TransportResidual:
    """Residual ``m(t, eta) * Jac**((n+2)/(n+1)) - m0`` per particle."""
    if m.grid != model.grid:
        raise ValueError("momentum grid does not match the model")
    m_at = interpolate_values(model.grid, m.values[None], flow.positions)[0]
    jac = jacobian_from_lambda(flow, n)
    r = m_at * jac ** ((n + 2) / (n + 1)) - flow.m0_samples
    return TransportResidual(float(np.max(np.abs(r))), float(math.sqrt(np.mean(r * r))), r, m_at)


def finite_difference_jacobian(positions_plus: np.ndarray, positions_minus: np.ndarray,
                               delta: float, lengths) -> np.ndarray:
    """Determinant of D(eta) from a cluster displaced by +-delta along each axis.

    Arrays have shape ``(ndim, npts, ndim)``: entry ``[a]`` holds the images
    of seeds displaced along axis ``a``.
    """
    L = np.asarray(lengths)
    diff = positions_plus - positions_minus
    diff = (diff + 0.5 * L) % L - 0.5 * L
    D = np.transpose(diff, (1, 2, 0)) / (2 * delta)
    return np.linalg.det(D)


def write_particles_csv(path, rows) -> None:
    """Rows are ``(t, flow, m_interp, residual)`` tuples."""
    with open(path, "w") as fh:
        header = None
        for t, flow, m_interp, residual in rows:
            d = flow.positions.shape[1]
            if header is None:
                pos_cols = ["x", "y", "z"][:d] if d <= 3 else [f"x{i}" for i in range(d)]
                header = ["t", "particle_id", *pos_cols, "lambda", "m_interp", "residual"]
                fh.write(",".join(header) + "\n")
            for i in range(len(flow)):
                vals = [t, *flow.positions[i], flow.lambdas[i], m_interp[i], residual[i]]
                fh.write(",".join([f"{vals[0]:.17g}", str(i)] + [f"{v:.17g}" for v in vals[1:]]) + "\n")
