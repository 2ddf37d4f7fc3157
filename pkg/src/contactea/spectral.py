"""Fourier pseudo-spectral substrate on uniform periodic grids.

Fields are real arrays sampled at ``x_i = i * L / N``.  All transforms are
real-to-complex (``rfftn``), so inverse transforms are Hermitian by
construction and never drift into complex values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
SNAPSHOT_MAGIC = "CEA1"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid in 1, 2 or 3 dimensions."""

    dims: tuple[int, ...]
    lengths: tuple[float, ...] | None = None

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not 1 <= len(dims) <= 3:
            raise ValueError(f"grid must have 1-3 axes, got {len(dims)}")
        for n in dims:
            if n < 8 or n & (n - 1):
                raise ValueError(f"axis size must be a power of two >= 8, got {n}")
        lengths = self.lengths
        if lengths is None:
            lengths = (TWO_PI,) * len(dims)
        lengths = tuple(float(L) for L in lengths)
        if len(lengths) != len(dims):
            raise ValueError("lengths and dims must have the same number of axes")
        if any(not (L > 0 and math.isfinite(L)) for L in lengths):
            raise ValueError(f"axis lengths must be positive, got {lengths}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.dims))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    @property
    def npoints(self) -> int:
        return math.prod(self.dims)

    def axis_coords(self, axis: int) -> np.ndarray:
        return np.arange(self.dims[axis]) * self.spacing[axis]

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        """Sparse broadcastable coordinate arrays, one per axis."""
        return tuple(np.meshgrid(*(self.axis_coords(a) for a in range(self.ndim)),
                                 indexing="ij", sparse=True))

    def centered_coords(self, axis: int) -> np.ndarray:
        """Axis coordinate shifted into [-L/2, L/2), broadcastable."""
        L = self.lengths[axis]
        c = (self.mesh[axis] + 0.5 * L) % L - 0.5 * L
        return c

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return self.dims[:-1] + (self.dims[-1] // 2 + 1,)

    @cached_property
    def mode_indices(self) -> tuple[np.ndarray, ...]:
        """Integer mode numbers per axis in rfftn layout, broadcastable."""
        out = []
        for a, n in enumerate(self.dims):
            if a == self.ndim - 1:
                idx = np.arange(n // 2 + 1)
            else:
                idx = np.fft.fftfreq(n, d=1.0 / n).astype(int)
            shape = [1] * self.ndim
            shape[a] = idx.size
            out.append(idx.reshape(shape))
        return tuple(out)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        return tuple(TWO_PI * idx / L for idx, L in zip(self.mode_indices, self.lengths))

    @cached_property
    def derivative_symbols(self) -> tuple[np.ndarray, ...]:
        # Nyquist mode has no real derivative; drop it.
        syms = []
        for a, (k, idx) in enumerate(zip(self.wavenumbers, self.mode_indices)):
            s = 1j * k
            s = np.where(np.abs(idx) == self.dims[a] // 2, 0.0, s)
            syms.append(s)
        return tuple(syms)

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.wavenumbers)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.ones(self.spectral_shape, dtype=bool)
        for idx, n in zip(self.mode_indices, self.dims):
            mask = mask & (np.abs(idx) <= n // 3)
        return mask


def to_spectral(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.fft.rfftn(values, s=grid.dims, axes=tuple(range(-grid.ndim, 0)))


def from_spectral(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.irfftn(coeffs, s=grid.dims, axes=tuple(range(-grid.ndim, 0)))


def derivative_values(grid: Grid, values: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
    """Spectral derivative of a raw sample array."""
    hat = to_spectral(grid, values)
    if order == 1:
        sym = grid.derivative_symbols[axis]
    else:
        sym = (1j * grid.wavenumbers[axis]) ** order
        if order % 2:
            sym = np.where(np.abs(grid.mode_indices[axis]) == grid.dims[axis] // 2, 0.0, sym)
    return from_spectral(grid, hat * sym)


def gradient_values(grid: Grid, values: np.ndarray) -> list[np.ndarray]:
    hat = to_spectral(grid, values)
    return [from_spectral(grid, hat * s) for s in grid.derivative_symbols]


def dealias_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    return from_spectral(grid, to_spectral(grid, values) * grid.dealias_mask)


def screened_inverse_values(grid: Grid, values: np.ndarray, alpha2: float = 1.0) -> np.ndarray:
    """Solve ``alpha2 * h - lap(h) = values``; the mean is dropped when alpha2 == 0."""
    hat = to_spectral(grid, values)
    denom = alpha2 + grid.k_squared
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = np.where(denom > 0, 1.0 / denom, 0.0)
    return from_spectral(grid, hat * sym)


def laplacian_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    return from_spectral(grid, -grid.k_squared * to_spectral(grid, values))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real scalar field sampled on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.dims:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.dims}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = v.copy() if v is self.values else v
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        vals = np.broadcast_to(fn(*grid.mesh), grid.dims)
        return cls(grid, np.array(vals, dtype=np.float64))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.dims, float(c)))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls.constant(grid, 0.0)

    def _check(self, other: "ScalarField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def _lift(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return other.values
        return other

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._lift(other))

    def __rsub__(self, other):
        return ScalarField(self.grid, self._lift(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarField(self.grid, self.values / self._lift(other))

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class VectorFieldComponents:
    grid: Grid
    components: tuple[ScalarField, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.grid.ndim:
            raise ValueError(f"expected {self.grid.ndim} components, got {len(comps)}")
        if any(c.grid != self.grid for c in comps):
            raise ValueError("all components must share the vector field's grid")
        object.__setattr__(self, "components", comps)

    def __getitem__(self, i: int) -> ScalarField:
        return self.components[i]

    def __len__(self) -> int:
        return len(self.components)

    def max_abs(self) -> float:
        return max(c.max_abs() for c in self.components)


def partial_derivative(field: ScalarField, axis: int) -> ScalarField:
    if not 0 <= axis < field.grid.ndim:
        raise ValueError(f"axis {axis} out of range for {field.grid.ndim}-d grid")
    return ScalarField(field.grid, derivative_values(field.grid, field.values, axis))


def laplacian(field: ScalarField) -> ScalarField:
    return ScalarField(field.grid, laplacian_values(field.grid, field.values))


def helmholtz_inverse(field: ScalarField) -> ScalarField:
    """Apply ``(1 - lap)^{-1}``, symbol ``1 / (1 + |k|^2)``."""
    return ScalarField(field.grid, screened_inverse_values(field.grid, field.values, 1.0))


def screened_inverse(field: ScalarField, alpha2: float) -> ScalarField:
    if alpha2 < 0:
        raise ValueError("alpha2 must be non-negative")
    return ScalarField(field.grid, screened_inverse_values(field.grid, field.values, alpha2))


def dealias(field: ScalarField) -> ScalarField:
    return ScalarField(field.grid, dealias_values(field.grid, field.values))


def _basis(grid: Grid, axis: int, x: np.ndarray, half: bool = False) -> np.ndarray:
    """Per-point trigonometric basis, shape (npts, modes).

    Full FFT ordering, or rfft ordering with interior modes doubled when
    ``half`` is set.  The Nyquist mode is split evenly between +-N/2 so the
    interpolant is real.
    """
    n = grid.dims[axis]
    idx = np.arange(n // 2 + 1) if half else np.fft.fftfreq(n, d=1.0 / n)
    k = TWO_PI * idx / grid.lengths[axis]
    B = np.exp(1j * np.outer(x, k))
    nyq = n // 2
    B[:, nyq] = np.cos(k[nyq] * x)
    if half:
        B[:, 1:nyq] *= 2.0
    return B / n


def interpolate_values(grid: Grid, stack: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation of several sample arrays at once.

    ``stack`` has shape ``(nfields, *grid.dims)``; ``points`` has shape
    ``(npts, ndim)``.  Returns ``(nfields, npts)``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != grid.ndim:
        raise ValueError(f"points have dimension {points.shape[1]}, grid has {grid.ndim}")
    stack = np.asarray(stack, dtype=np.float64)
    nf = stack.shape[0]
    axes = tuple(range(1, grid.ndim + 1))
    hat = np.fft.rfftn(stack, axes=axes)
    wrapped = np.mod(points, np.asarray(grid.lengths))
    last = grid.ndim - 1
    B = [_basis(grid, a, wrapped[:, a], half=(a == last)) for a in range(grid.ndim)]
    # Contract the last axis with one matrix product, then the rest pointwise.
    nlast = hat.shape[-1]
    tmp = hat.reshape(-1, nlast) @ B[last].T
    tmp = tmp.reshape(hat.shape[:-1] + (len(wrapped),))
    for a in range(last - 1, -1, -1):
        tmp = np.einsum("...ip,pi->...p", tmp, B[a])
    return tmp.reshape(nf, -1).real


def interpolate(field: ScalarField, points) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``field`` at ``points``.

    Points are wrapped periodically.  A 1-D grid accepts a flat sequence of
    coordinates.
    """
    pts = np.asarray(points, dtype=np.float64)
    if field.grid.ndim == 1 and pts.ndim <= 1:
        pts = pts.reshape(-1, 1)
    return interpolate_values(field.grid, field.values[None], pts)[0]


@dataclass(frozen=True)
class Norms:
    l_inf: float
    l2: float
    h1: float


def norms(field: ScalarField) -> Norms:
    g = field.grid
    v = field.values
    l2sq = float(np.sum(v * v) * g.cell_volume)
    # Parseval on the rfft layout: interior columns of the last axis count twice.
    hat = to_spectral(g, v)
    w = np.full(hat.shape[-1], 2.0)
    w[0] = 1.0
    if g.dims[-1] % 2 == 0:
        w[-1] = 1.0
    h1sq = float(np.sum(w * (1.0 + g.k_squared) * np.abs(hat) ** 2) * g.volume / g.npoints**2)
    return Norms(float(np.max(np.abs(v))), math.sqrt(max(l2sq, 0.0)), math.sqrt(max(h1sq, 0.0)))


def save_snapshot(field: ScalarField, path: str | Path) -> None:
    g = field.grid
    header = " ".join([SNAPSHOT_MAGIC, str(g.ndim), *map(str, g.dims), *(repr(L) for L in g.lengths)])
    with open(path, "wb") as fh:
        fh.write((header + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes(order="C"))


def load_snapshot(path: str | Path) -> ScalarField:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        payload = fh.read()
    if not header or header[0] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a {SNAPSHOT_MAGIC} snapshot")
    try:
        ndim = int(header[1])
        dims = tuple(int(s) for s in header[2:2 + ndim])
        lengths = tuple(float(s) for s in header[2 + ndim:2 + 2 * ndim])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed snapshot header") from exc
    if len(dims) != ndim or len(lengths) != ndim or len(header) != 2 + 2 * ndim:
        raise ValueError(f"{path}: malformed snapshot header")
    grid = Grid(dims, lengths)
    data = np.frombuffer(payload, dtype="<f8")
    if data.size != grid.npoints:
        raise ValueError(f"{path}: expected {grid.npoints} values, found {data.size}")
    return ScalarField(grid, data.reshape(dims).astype(np.float64))


def random_trig_polynomial(grid: Grid, rng: np.random.Generator, max_mode: int = 3,
                           amplitude: float = 1.0) -> ScalarField:
    """Random real trig polynomial with |mode| <= max_mode on each axis."""
    hat = np.zeros(grid.spectral_shape, dtype=complex)
    sel = np.ones(grid.spectral_shape, dtype=bool)
    for idx in grid.mode_indices:
        sel &= np.abs(idx) <= max_mode
    n = int(sel.sum())
    hat[sel] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    vals = from_spectral(grid, hat)
    vals = dealias_values(grid, vals)
    scale = np.max(np.abs(vals))
    return ScalarField(grid, amplitude * vals / scale)
