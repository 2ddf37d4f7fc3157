"""Scenario configuration: key=value parsing, presets and initial conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contact import ContactModel, ModelKind, contact_laplacian
from .evolution import (
    BetaPlane,
    CamassaHolm,
    ContactEA,
    Quasigeostrophic,
    Reduced1D,
    StepperConfig,
)
from .spectral import Grid, ScalarField, load_snapshot, random_trig_polynomial


class ConfigError(ValueError):
    pass


EQUATIONS = ("contact", "camassa-holm", "qg", "beta-plane", "reduced1d")
REQUIRED = ("equation", "grid", "t_end")

DEFAULTS = {
    "initial_condition": "random_trig",
    "length": None,
    "dt": None,
    "cfl_limit": "0.4",
    "blowup_linf_threshold": "1e6",
    "dealias": "true",
    "check_cfl": "true",
    "cadence": "10",
    "out": "out",
    "particles": "0",
    "seed": "0",
    "alpha": "1.0",
    "beta": "0.0",
}
KEYS = frozenset(REQUIRED) | frozenset(DEFAULTS) | {"preset"}

PRESETS: dict[str, dict[str, str]] = {
    "quanto-steady": {
        "_help": "Torus3, f0 = cos z: quantomorphism data, steady for all time",
        "equation": "contact", "grid": "32,32,32", "initial_condition": "cos_z",
        "t_end": "1.0", "dt": "0.05",
    },
    "contact-generic": {
        "_help": "Torus3, smooth positive momentum, 1000 particles for the transport law",
        "equation": "contact", "grid": "32,32,32", "initial_condition": "smooth",
        "t_end": "0.5", "dt": "0.0625", "particles": "1000", "cadence": "1",
    },
    "ch-smooth": {
        "_help": "Camassa-Holm on the circle, smooth data",
        "equation": "camassa-holm", "grid": "256", "initial_condition": "smooth",
        "t_end": "1.0", "dt": "0.005",
    },
    "ch-peakon": {
        "_help": "Camassa-Holm, mollified single peakon of momentum 1",
        "equation": "camassa-holm", "grid": "512", "initial_condition": "smoothed_peakon",
        "t_end": "1.0", "dt": "0.002", "cadence": "50",
    },
    "qg-fplane": {
        "_help": "f-plane quasigeostrophic flow on the quotient 2-torus, alpha = 1",
        "equation": "qg", "grid": "128,128", "initial_condition": "qg_smooth",
        "t_end": "1.0", "dt": "0.008", "alpha": "1.0",
    },
    "qg-beta": {
        "_help": "beta-plane quasigeostrophic flow, beta = 1, psi = centred y",
        "equation": "beta-plane", "grid": "128,128", "initial_condition": "qg_smooth",
        "t_end": "1.0", "dt": "0.008", "alpha": "1.0", "beta": "1.0",
    },
    "reduced-positive": {
        "_help": "reduced 1-d profile equation, nonnegative momentum: global solution",
        "equation": "reduced1d", "grid": "1024", "length": "40", "initial_condition": "phi_positive",
        "t_end": "10.0", "dt": "0.005", "cadence": "20",
    },
    "reduced-negative": {
        "_help": "reduced 1-d profile equation, even negative profile: finite-time blowup",
        "equation": "reduced1d", "grid": "1024", "length": "40", "initial_condition": "phi_negative",
        "t_end": "3.0", "dt": "0.001", "cadence": "10",
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    equation: str
    grid: tuple[int, ...]
    t_end: float
    initial_condition: str = "random_trig"
    length: tuple[float, ...] | None = None
    stepper: StepperConfig = field(default_factory=lambda: StepperConfig(0.01))
    cadence: int = 10
    out: Path = Path("out")
    particles: int = 0
    seed: int = 0
    alpha: float = 1.0
    beta: float = 0.0
    preset: str | None = None

    def make_grid(self) -> Grid:
        return Grid(self.grid, self.length)

    def build(self):
        """Equation object and initial state field."""
        grid = self.make_grid()
        eq = make_equation(self.equation, grid, self.alpha, self.beta)
        m0 = initial_condition(self.initial_condition, eq, np.random.default_rng(self.seed))
        return eq, m0


def _split_lines(text: str) -> dict[str, tuple[str, int]]:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" in s:
            key, val = s.split("=", 1)
        elif ":" in s:
            key, val = s.split(":", 1)
        else:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first set on line {raw[key][1]})")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = (val, lineno)
    return raw


def parse_raw(text: str) -> dict[str, str]:
    """Key/value pairs with presets expanded; no validation of values yet."""
    raw = {k: v for k, (v, _) in _split_lines(text).items()}
    return expand_preset(raw)


def expand_preset(raw: dict[str, str]) -> dict[str, str]:
    name = raw.get("preset")
    if not name:
        return dict(raw)
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    merged = {k: v for k, v in PRESETS[name].items() if not k.startswith("_")}
    merged.update(raw)
    return merged


def _num(raw, key, conv, check=None, what=""):
    try:
        val = conv(raw[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw[key]!r}") from exc
    if check is not None and not check(val):
        raise ConfigError(f"{key}: {what}, got {raw[key]!r}")
    return val


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def _tuple(conv):
    return lambda s: tuple(conv(p) for p in s.replace("x", ",").split(",") if p.strip())


def build_config(raw: dict[str, str]) -> ScenarioConfig:
    missing = [k for k in REQUIRED if not raw.get(k)]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)} (required: {', '.join(REQUIRED)})")
    unknown = set(raw) - KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    vals = dict(DEFAULTS)
    vals.update({k: v for k, v in raw.items() if v is not None})
    eqname = vals["equation"]
    if eqname not in EQUATIONS:
        raise ConfigError(f"equation: must be one of {', '.join(EQUATIONS)}, got {eqname!r}")
    dims = _num(vals, "grid", _tuple(int), lambda d: 1 <= len(d) <= 3, "expected 1-3 axis sizes")
    length = None
    if vals.get("length"):
        length = _num(vals, "length", _tuple(float), lambda L: all(x > 0 for x in L), "lengths must be positive")
        if len(length) == 1 and len(dims) > 1:
            length = length * len(dims)
        if len(length) != len(dims):
            raise ConfigError("length: number of lengths must match grid axes")
    t_end = _num(vals, "t_end", float, lambda t: t >= 0 and math.isfinite(t), "must be >= 0")
    dt = _num(vals, "dt", float, lambda x: x > 0, "must be > 0") if vals.get("dt") else min(0.01, t_end or 0.01)
    try:
        stepper = StepperConfig(
            dt=dt,
            cfl_limit=_num(vals, "cfl_limit", float),
            blowup_linf_threshold=_num(vals, "blowup_linf_threshold", float),
            dealias=_num(vals, "dealias", _bool),
            check_cfl=_num(vals, "check_cfl", _bool),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"stepper: {exc}") from exc
    cfg = ScenarioConfig(
        equation=eqname,
        grid=dims,
        t_end=t_end,
        initial_condition=vals["initial_condition"],
        length=length,
        stepper=stepper,
        cadence=_num(vals, "cadence", int, lambda c: c >= 1, "must be >= 1"),
        out=Path(vals["out"]),
        particles=_num(vals, "particles", int, lambda n: n >= 0, "must be >= 0"),
        seed=_num(vals, "seed", int),
        alpha=_num(vals, "alpha", float, lambda a: a >= 0, "must be >= 0"),
        beta=_num(vals, "beta", float),
        preset=vals.get("preset"),
    )
    try:
        cfg.make_grid()
        make_equation(cfg.equation, cfg.make_grid(), cfg.alpha, cfg.beta)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    ic = cfg.initial_condition
    if not (ic in INITIAL_CONDITIONS or ic.startswith("snapshot:")):
        raise ConfigError(f"initial_condition: unknown {ic!r}; use one of "
                          f"{', '.join(INITIAL_CONDITIONS)} or snapshot:PATH")
    return cfg


def parse_config(text: str) -> ScenarioConfig:
    return build_config(parse_raw(text))


# -- equations and initial data ------------------------------------------------

def make_equation(name: str, grid: Grid, alpha: float = 1.0, beta: float = 0.0):
    if name == "contact":
        kind = {1: ModelKind.CIRCLE, 2: ModelKind.QUANTO_TORUS2, 3: ModelKind.TORUS3}[grid.ndim]
        return ContactEA(ContactModel(kind, grid))
    if name == "camassa-holm":
        return CamassaHolm(ContactModel(ModelKind.CIRCLE, grid))
    if name == "qg":
        return Quasigeostrophic(ContactModel(ModelKind.QUANTO_TORUS2, grid), alpha)
    if name == "beta-plane":
        model = ContactModel(ModelKind.QUANTO_TORUS2, grid)
        psi = ScalarField(grid, np.broadcast_to(grid.centered_coords(1), grid.dims))
        return BetaPlane(model, alpha, beta=beta, psi=psi)
    if name == "reduced1d":
        return Reduced1D(grid)
    raise ValueError(f"unknown equation {name!r}")


def _momentum_from_stream(eq, f: ScalarField) -> ScalarField:
    return contact_laplacian(eq.model, f)


def _ic_cos_z(eq, rng):
    grid = eq.grid
    if grid.ndim != 3:
        raise ConfigError("initial_condition: cos_z needs a 3-d grid")
    return _momentum_from_stream(eq, ScalarField.from_function(grid, lambda x, y, z: np.cos(z)))


def _ic_smooth(eq, rng):
    grid = eq.grid
    if isinstance(eq, Reduced1D):
        return _ic_phi(eq, 1.0)
    if isinstance(eq, Quasigeostrophic):
        return _ic_qg(eq, rng)
    if grid.ndim == 1:
        f = ScalarField.from_function(grid, lambda x: 1 + 0.3 * np.sin(x) + 0.2 * np.cos(2 * x))
    else:
        f = ScalarField.from_function(grid, lambda x, y, z: 1 + 0.1 * (
            np.sin(x) * np.cos(z) + 0.7 * np.cos(y + z) + 0.5 * np.sin(2 * x - y)))
    return _momentum_from_stream(eq, f)


def _ic_random(eq, rng):
    f = random_trig_polynomial(eq.grid, rng, max_mode=3, amplitude=0.5)
    if isinstance(eq, (Quasigeostrophic, Reduced1D)):
        return f
    return _momentum_from_stream(eq, f)


def _ic_qg(eq, rng):
    return ScalarField.from_function(eq.grid, lambda x, y: np.sin(x) * np.cos(2 * y)
                                     + 0.6 * np.cos(3 * x + y) + 0.4 * np.sin(x - 2 * y))


def _ic_peakon(eq, rng, p: float = 1.0, width: float = 0.05):
    """Gaussian-mollified delta of total momentum ``p`` centred at L/2."""
    grid = eq.grid
    x = grid.mesh[0] - 0.5 * grid.lengths[0]
    bump = np.exp(-0.5 * (x / width) ** 2)
    bump *= p / (bump.sum() * grid.cell_volume)
    return ScalarField(grid, bump)


def _ic_phi(eq, sign: float):
    y = eq.grid.centered_coords(0)
    return ScalarField(eq.grid, sign * np.exp(-y * y))


INITIAL_CONDITIONS = {
    "cos_z": _ic_cos_z,
    "smooth": _ic_smooth,
    "random_trig": _ic_random,
    "qg_smooth": _ic_qg,
    "smoothed_peakon": _ic_peakon,
    "phi_positive": lambda eq, rng: _ic_phi(eq, 1.0),
    "phi_negative": lambda eq, rng: _ic_phi(eq, -1.0),
}


def initial_condition(name: str, eq, rng: np.random.Generator) -> ScalarField:
    if name.startswith("snapshot:"):
        field_ = load_snapshot(name.split(":", 1)[1])
        if field_.grid != eq.grid:
            raise ConfigError("initial_condition: snapshot grid does not match the configured grid")
        return field_
    try:
        fn = INITIAL_CONDITIONS[name]
    except KeyError:
        raise ConfigError(f"initial_condition: unknown {name!r}") from None
    return fn(eq, rng)
