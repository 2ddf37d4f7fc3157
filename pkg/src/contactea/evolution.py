"""Time integration of the momentum equations.

Every equation is integrated in its momentum-like variable ``m`` with
classical RK4; the stream function is recovered by an elliptic inversion at
each stage.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .contact import ContactModel, ModelKind
from .spectral import (
    Grid,
    ScalarField,
    dealias_values,
    from_spectral,
    gradient_values,
    screened_inverse_values,
    to_spectral,
)

log = logging.getLogger(__name__)


class BlowupError(RuntimeError):
    """Raised when the momentum leaves the finite/bounded regime."""

    def __init__(self, t: float, m_linf: float, bkm_integral: float | None = None):
        self.t = t
        self.m_linf = m_linf
        self.bkm_integral = bkm_integral
        super().__init__(f"blowup at t={t:.6g}: |m|_inf={m_linf:.6g}")


class CFLWarning(UserWarning):
    pass


class Tendency(NamedTuple):
    """Everything one right-hand-side evaluation produces."""

    dm: np.ndarray
    f: np.ndarray
    velocity: list[np.ndarray]
    reeb: np.ndarray


def _finite_or_raise(arr: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(arr)):
        raise BlowupError(t, math.inf)


@dataclass(frozen=True)
class ContactEA:
    """Full contactomorphism equation ``m_t + u(m) + (n+2) m E(f) = 0``."""

    model: ContactModel

    @property
    def grid(self) -> Grid:
        return self.model.grid

    @property
    def n(self) -> int:
        return self.model.n

    def stream_function(self, m: np.ndarray) -> np.ndarray:
        return screened_inverse_values(self.grid, m, 1.0)

    def evaluate(self, m: np.ndarray, dealias: bool = True) -> Tendency:
        model = self.model
        f = self.stream_function(m)
        gf = gradient_values(self.grid, f)
        u = model.velocity_from_jet(f, gf)
        ef = model.reeb_from_gradient(gf)
        gm = gradient_values(self.grid, m)
        dm = -sum(ui * gi for ui, gi in zip(u, gm)) - (model.n + 2) * m * ef
        if dealias:
            dm = dealias_values(self.grid, dm)
        return Tendency(dm, f, u, ef)


@dataclass(frozen=True)
class CamassaHolm:
    """``m_t + f m_x + 2 m f_x = 0`` written directly on the circle."""

    model: ContactModel

    def __post_init__(self):
        if self.model.kind is not ModelKind.CIRCLE:
            raise ValueError("CamassaHolm needs a circle model")

    @property
    def grid(self) -> Grid:
        return self.model.grid

    @property
    def n(self) -> int:
        return 0

    def stream_function(self, m: np.ndarray) -> np.ndarray:
        return screened_inverse_values(self.grid, m, 1.0)

    def evaluate(self, m: np.ndarray, dealias: bool = True) -> Tendency:
        grid = self.grid
        mhat = to_spectral(grid, m)
        ik = grid.derivative_symbols[0]
        fhat = mhat / (1.0 + grid.k_squared)
        f = from_spectral(grid, fhat)
        fx = from_spectral(grid, ik * fhat)
        mx = from_spectral(grid, ik * mhat)
        dm = -f * mx - 2.0 * m * fx
        if dealias:
            dm = dealias_values(grid, dm)
        return Tendency(dm, f, [f], fx)


@dataclass(frozen=True)
class Quasigeostrophic:
    """f-plane quasigeostrophic flow on the quotient torus.

    The state stores potential vorticity ``w = lap f - alpha^2 f``.
    """

    model: ContactModel
    alpha: float = 1.0

    def __post_init__(self):
        if self.model.kind is not ModelKind.QUANTO_TORUS2:
            raise ValueError("Quasigeostrophic needs a quanto_torus2 model")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    @property
    def grid(self) -> Grid:
        return self.model.grid

    @property
    def n(self) -> int:
        return 1

    def _source(self, w: np.ndarray) -> np.ndarray:
        return w

    def stream_function(self, w: np.ndarray) -> np.ndarray:
        return -screened_inverse_values(self.grid, self._source(w), self.alpha**2)

    def evaluate(self, w: np.ndarray, dealias: bool = True) -> Tendency:
        f = self.stream_function(w)
        fx, fy = gradient_values(self.grid, f)
        wx, wy = gradient_values(self.grid, w)
        dm = -(fx * wy - fy * wx)
        if dealias:
            dm = dealias_values(self.grid, dm)
        return Tendency(dm, f, [-fy, fx], np.zeros(self.grid.dims))


@dataclass(frozen=True)
class BetaPlane(Quasigeostrophic):
    """Quasigeostrophic flow with ``lap f - alpha^2 f = w + beta * psi``."""

    beta: float = 0.0
    psi: ScalarField | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.psi is None:
            raise ValueError("BetaPlane needs a psi field")
        if self.psi.grid != self.model.grid:
            raise ValueError("psi must live on the model grid")

    def _source(self, w: np.ndarray) -> np.ndarray:
        return w + self.beta * self.psi.values


@dataclass(frozen=True)
class Reduced1D:
    """Profile equation for stream functions ``f = z g(t, y)``.

    State is ``phi = g - g_yy``.  The explicit ``y`` factors use the grid
    coordinate centred on zero, so data must be negligible near the box edge.
    """

    grid: Grid

    def __post_init__(self):
        if self.grid.ndim != 1:
            raise ValueError("Reduced1D needs a 1-d grid")

    @property
    def n(self) -> int:
        return 1

    @property
    def model(self) -> None:
        return None

    def stream_function(self, phi: np.ndarray) -> np.ndarray:
        return screened_inverse_values(self.grid, phi, 1.0)

    def evaluate(self, phi: np.ndarray, dealias: bool = True) -> Tendency:
        grid = self.grid
        y = grid.centered_coords(0)
        ghat = to_spectral(grid, phi) / (1.0 + grid.k_squared)
        ik = 1j * grid.wavenumbers[0]
        g = from_spectral(grid, ghat)
        gy = from_spectral(grid, grid.derivative_symbols[0] * ghat)
        gyy = from_spectral(grid, ik**2 * ghat)
        gyyy = from_spectral(grid, grid.derivative_symbols[0] * ik**2 * ghat)
        dm = -4.0 * g * g + 4.0 * g * gyy + y * (g * gyyy - gy * gyy)
        if dealias:
            dm = dealias_values(grid, dm)
        # In the Darboux frame E = d/dz, so E(z g) = g.
        return Tendency(dm, g, [y * gy], g)


EquationKind = ContactEA | CamassaHolm | Quasigeostrophic | BetaPlane | Reduced1D


@dataclass(frozen=True)
class SimState:
    eq: EquationKind
    t: float
    m: ScalarField
    step_count: int = 0

    def __post_init__(self):
        if self.m.grid != self.eq.grid:
            raise ValueError("state field does not live on the equation's grid")

    @property
    def f(self) -> ScalarField:
        return ScalarField(self.m.grid, self.eq.stream_function(self.m.values))


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    cfl_limit: float = 0.4
    blowup_linf_threshold: float = 1e6
    dealias: bool = True
    check_cfl: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 < self.cfl_limit <= 1:
            raise ValueError(f"cfl_limit must lie in (0, 1], got {self.cfl_limit}")
        if not self.blowup_linf_threshold > 0:
            raise ValueError("blowup_linf_threshold must be positive")


def rhs(state: SimState) -> ScalarField:
    """Time derivative of the state's momentum variable."""
    tend = state.eq.evaluate(state.m.values)
    _finite_or_raise(tend.dm, state.t)
    return ScalarField(state.m.grid, tend.dm)


def cfl_number(grid: Grid, velocity: Sequence[np.ndarray], dt: float) -> float:
    return abs(dt) * max(float(np.max(np.abs(u))) / h for u, h in zip(velocity, grid.spacing))


def _rk4(eq, m: np.ndarray, h: float, dealias: bool, first: Tendency | None = None):
    k1 = first if first is not None else eq.evaluate(m, dealias)
    k2 = eq.evaluate(m + 0.5 * h * k1.dm, dealias)
    k3 = eq.evaluate(m + 0.5 * h * k2.dm, dealias)
    k4 = eq.evaluate(m + h * k3.dm, dealias)
    return m + (h / 6.0) * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm), (k1, k2, k3, k4)


def check_step(state: SimState, cfg: StepperConfig, h: float, first: Tendency) -> None:
    if cfg.check_cfl:
        c = cfl_number(state.eq.grid, first.velocity, h)
        if c > cfg.cfl_limit:
            warnings.warn(f"CFL number {c:.3g} exceeds limit {cfg.cfl_limit} at t={state.t:.6g}",
                          CFLWarning, stacklevel=3)


def finish_step(state: SimState, cfg: StepperConfig, m_new: np.ndarray, h: float) -> SimState:
    t_new = state.t + h
    _finite_or_raise(m_new, t_new)
    if cfg.dealias:
        m_new = dealias_values(state.eq.grid, m_new)
    linf = float(np.max(np.abs(m_new)))
    if linf > cfg.blowup_linf_threshold:
        raise BlowupError(t_new, linf)
    return SimState(state.eq, t_new, ScalarField(state.eq.grid, m_new), state.step_count + 1)


def step_rk4(state: SimState, cfg: StepperConfig, dt: float | None = None,
             first: Tendency | None = None) -> SimState:
    """Advance one classical RK4 step.

    ``dt`` overrides ``cfg.dt`` and may be negative (backward integration).
    """
    h = cfg.dt if dt is None else float(dt)
    first = first if first is not None else state.eq.evaluate(state.m.values, cfg.dealias)
    _finite_or_raise(first.dm, state.t)
    check_step(state, cfg, h, first)
    m_new, _ = _rk4(state.eq, state.m.values, h, cfg.dealias, first)
    return finish_step(state, cfg, m_new, h)


@dataclass
class RunResult:
    state: SimState
    records: list = field(default_factory=list)
    status: str = "ok"
    blowup_time: float | None = None
    bkm_integral: float = 0.0
    flow: object | None = None
    message: str = ""

    @property
    def blew_up(self) -> bool:
        return self.status == "blowup"


def run(eq: EquationKind, m0: ScalarField, cfg: StepperConfig, t_end: float,
        observers: Sequence[Callable] = (), cadence: int = 1, flow=None) -> RunResult:
    """Integrate from ``t = 0`` to ``t_end``.

    Observers are called as ``observer(state, record, flow)`` every ``cadence``
    steps and at the final time.  If ``flow`` is a FlowMap, its particles are
    advanced on the same RK4 clock.  A blowup ends the run with status
    ``"blowup"`` instead of propagating.
    """
    from .diagnostics import make_record
    from . import lagrangian

    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    if cadence < 1:
        raise ValueError("cadence must be >= 1")
    state = SimState(eq, 0.0, m0, 0)
    bkm = 0.0
    first = eq.evaluate(m0.values, cfg.dealias)
    records = []

    def emit(st, tend, fl):
        rec = make_record(eq, st, bkm, tend)
        records.append(rec)
        for obs in observers:
            obs(st, rec, fl)

    emit(state, first, flow)
    result = RunResult(state, records, flow=flow)
    eps = 1e-12 * max(1.0, t_end)
    while state.t < t_end - eps:
        h = min(cfg.dt, t_end - state.t)
        try:
            _finite_or_raise(first.dm, state.t)
            if flow is not None:
                state, flow = lagrangian.coupled_step(state, flow, cfg, h, first)
            else:
                state = step_rk4(state, cfg, h, first)
            bkm += h * float(np.max(np.abs(first.reeb)))
            first = eq.evaluate(state.m.values, cfg.dealias)
            _finite_or_raise(first.dm, state.t)
        except BlowupError as exc:
            bkm += h * float(np.max(np.abs(first.reeb)))
            exc.bkm_integral = bkm
            log.info("run terminated: %s", exc)
            result.status = "blowup"
            result.blowup_time = exc.t
            result.message = str(exc)
            break
        if state.step_count % cadence == 0 or state.t >= t_end - eps:
            emit(state, first, flow)
    result.state = state
    result.flow = flow
    result.bkm_integral = bkm
    return result
