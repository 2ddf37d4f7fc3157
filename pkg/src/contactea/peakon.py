"""Singular-momentum solutions.

Periodic Camassa-Holm peakons, ``m = sum_k p_k delta(x - q_k)`` on a circle
of circumference ``L``, and the steady shear solution ``f = cosh z`` on the
3-torus whose momentum lives on the surface ``z = +-pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contact import ContactModel, ModelKind
from .spectral import Grid


def _check_length(L: float) -> None:
    if not L > 0:
        raise ValueError(f"circumference must be positive, got {L}")


def _fold(x, L: float):
    """Signed representative of ``x`` in [-L/2, L/2)."""
    return np.mod(np.asarray(x, dtype=float) + 0.5 * L, L) - 0.5 * L


def green_periodic(x, L: float = 2 * math.pi):
    """Periodic Green's function of ``1 - d^2/dx^2``.

    ``G(x) = cosh(L/2 - d) / (2 sinh(L/2))`` with ``d`` the distance on the
    circle.  Tends to ``exp(-|x|)/2`` as ``L`` grows.
    """
    _check_length(L)
    d = np.abs(_fold(x, L))
    # exp form avoids overflow of cosh/sinh for long boxes
    h = 0.5 * L
    out = (np.exp(-d) + np.exp(d - 2 * h)) / (2.0 * (1.0 - np.exp(-2 * h)))
    return float(out) if np.ndim(out) == 0 else out


def green_periodic_prime(x, L: float = 2 * math.pi):
    """Derivative of :func:`green_periodic`; set to 0 at coincident points."""
    _check_length(L)
    s = _fold(x, L)
    d = np.abs(s)
    h = 0.5 * L
    mag = (np.exp(-d) - np.exp(d - 2 * h)) / (2.0 * (1.0 - np.exp(-2 * h)))
    out = -np.sign(s) * mag
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class PeakonState:
    q: np.ndarray
    p: np.ndarray
    L: float = 2 * math.pi

    def __post_init__(self):
        _check_length(self.L)
        q = np.mod(np.atleast_1d(np.asarray(self.q, dtype=float)), self.L)
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape or q.ndim != 1 or q.size == 0:
            raise ValueError("q and p must be non-empty 1-d arrays of equal length")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    def velocity(self, x) -> np.ndarray:
        """``u(x) = sum_k p_k G(x - q_k)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.sum(self.p[None, :] * green_periodic(x[:, None] - self.q[None, :], self.L), axis=1)


def _rates(q: np.ndarray, p: np.ndarray, L: float) -> tuple[np.ndarray, np.ndarray]:
    dq = q[:, None] - q[None, :]
    G = green_periodic(dq, L)
    Gp = green_periodic_prime(dq, L)
    np.fill_diagonal(Gp, 0.0)
    qdot = G @ p
    pdot = -p * (Gp @ p)
    return qdot, pdot


def peakon_rhs(state: PeakonState) -> tuple[np.ndarray, np.ndarray]:
    """Hamilton's equations for ``H = 1/2 sum_jk p_j p_k G(q_j - q_k)``."""
    return _rates(state.q, state.p, state.L)


def hamiltonian(state: PeakonState) -> float:
    G = green_periodic(state.q[:, None] - state.q[None, :], state.L)
    return 0.5 * float(state.p @ G @ state.p)


def _rk4(q: np.ndarray, p: np.ndarray, L: float, h: float):
    a1, b1 = _rates(q, p, L)
    a2, b2 = _rates(q + 0.5 * h * a1, p + 0.5 * h * b1, L)
    a3, b3 = _rates(q + 0.5 * h * a2, p + 0.5 * h * b2, L)
    a4, b4 = _rates(q + h * a3, p + h * b3, L)
    return q + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4), p + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)


def peakon_step(state: PeakonState, dt: float) -> PeakonState:
    return PeakonState(*_rk4(state.q, state.p, state.L, dt), state.L)


@dataclass
class PeakonTrajectory:
    t: np.ndarray
    q: np.ndarray  # (steps+1, N), unwrapped
    p: np.ndarray
    L: float

    @property
    def final(self) -> PeakonState:
        return PeakonState(self.q[-1], self.p[-1], self.L)

    def write_csv(self, path) -> None:
        n = self.q.shape[1]
        header = ["t"] + [f"q_{k + 1}" for k in range(n)] + [f"p_{k + 1}" for k in range(n)]
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for t, q, p in zip(self.t, self.q, self.p):
                vals = [t, *np.mod(q, self.L), *p]
                fh.write(",".join(f"{v:.17g}" for v in vals) + "\n")


def integrate_peakons(state: PeakonState, t_end: float, dt: float) -> PeakonTrajectory:
    """RK4 orbit; positions are recorded unwrapped so drift is easy to measure."""
    if dt <= 0 or t_end < 0:
        raise ValueError("need dt > 0 and t_end >= 0")
    nsteps = int(math.ceil(t_end / dt - 1e-9))
    ts, qs, ps = [0.0], [state.q.copy()], [state.p.copy()]
    q, p, L, t = state.q.copy(), state.p.copy(), state.L, 0.0
    for _ in range(nsteps):
        h = min(dt, t_end - t)
        q, p = _rk4(q, p, L, h)
        t += h
        ts.append(t)
        qs.append(q.copy())
        ps.append(p.copy())
    return PeakonTrajectory(np.array(ts), np.array(qs), np.array(ps), L)


# -- steady singular shear on the 3-torus --------------------------------------

@dataclass
class ShearReport:
    helmholtz_residual: float
    velocity_mismatch: float
    limit_error_minus: float
    limit_error_plus: float
    max_uz: float
    x_jump: float
    band: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def shear_velocity(z):
    """Closed-form velocity of ``f = cosh z`` for ``z`` in (-pi, pi)."""
    z = np.asarray(z, dtype=float)
    ux = np.sin(z) * np.cosh(z) + np.sinh(z) * np.cos(z)
    uy = np.cosh(z) * np.cos(z) - np.sinh(z) * np.sin(z)
    return ux, uy, np.zeros_like(z)


def steady_shear_verify(grid: Grid, band: float = 0.1) -> ShearReport:
    """Check the steady solution ``f = cosh z`` with momentum on ``z = +-pi``.

    The contact frame formula is applied to the exact jet of ``f`` off the
    band ``|z| > pi - band``; spectral differentiation of the kinked profile
    would only converge algebraically.
    """
    model = ContactModel(ModelKind.TORUS3, grid)
    zc = grid.centered_coords(2)
    shape = grid.dims
    z = np.broadcast_to(zc, shape)
    off = np.abs(z) < math.pi - band
    f = np.cosh(z)
    fz = np.sinh(z)
    fzz = np.cosh(z)
    zero = np.zeros(shape)
    helm = float(np.max(np.abs((f - fzz)[off])))

    frame = model.velocity_from_jet(f, [zero, zero, fz])
    closed = shear_velocity(z)
    mismatch = max(float(np.max(np.abs((a - b)[off]))) for a, b in zip(frame, closed))
    max_uz = float(np.max(np.abs(frame[2])))

    sp, cp = math.sinh(math.pi), math.cosh(math.pi)
    lim_minus = np.array(shear_velocity(-math.pi)[:2])   # z -> -pi from above
    lim_plus = np.array(shear_velocity(math.pi)[:2])     # z -> +pi from below
    err_minus = float(np.max(np.abs(lim_minus - [sp, -cp])))
    err_plus = float(np.max(np.abs(lim_plus - [-sp, -cp])))
    jump = float(lim_minus[0] - lim_plus[0])

    checks = {
        "f - f_zz = 0 off the surface": helm <= 1e-10,
        "velocity equals contact frame formula": mismatch <= 1e-8,
        "one-sided limits at z = -+pi": max(err_minus, err_plus) <= 1e-12 * cp,
        "zero z-component": max_uz == 0.0,
        "x-jump equals 2 sinh(pi)": abs(jump - 2 * sp) <= 1e-12 * cp,
    }
    return ShearReport(helm, mismatch, err_minus, err_plus, max_uz, jump, band, checks)
