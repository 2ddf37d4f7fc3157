"""Built-in identity suites run by ``contactea verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contact import (
    ContactModel,
    contact_laplacian,
    contact_poisson,
    contact_vector_field,
    divergence_of_contact_field,
    inverse_contact_laplacian,
    reeb_derivative,
)
from .evolution import CamassaHolm, ContactEA
from .peakon import green_periodic, steady_shear_verify
from .spectral import (
    Grid,
    ScalarField,
    dealias,
    helmholtz_inverse,
    interpolate,
    partial_derivative,
    random_trig_polynomial,
)


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.tol)

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        return f"[{tag}] {self.suite}: {self.name} = {self.value:.3e} (tol {self.tol:.0e})"


def spectral_suite(rng: np.random.Generator) -> list[Check]:
    g = Grid((32, 32))
    f = ScalarField.from_function(g, lambda x, y: np.sin(3 * x) * np.cos(2 * y))
    exact = ScalarField.from_function(g, lambda x, y: -2 * np.sin(3 * x) * np.sin(2 * y))
    h = random_trig_polynomial(g, rng, 4)
    node = interpolate(h, [[g.spacing[0] * 3, g.spacing[1] * 5]])[0]
    d = dealias(h)
    return [
        Check("spectral", "d/dy of sin3x cos2y", (partial_derivative(f, 1) - exact).max_abs(), 1e-12),
        Check("spectral", "(1-lap)^-1 (1-lap) h - h",
              (helmholtz_inverse(h - partial_derivative(partial_derivative(h, 0), 0)
                                 - partial_derivative(partial_derivative(h, 1), 1)) - h).max_abs(), 1e-10),
        Check("spectral", "interpolation at a node", abs(node - h.values[3, 5]), 1e-12),
        Check("spectral", "dealias idempotent", (dealias(d) - d).max_abs(), 1e-14),
    ]


def operator_suite(rng: np.random.Generator, n: int = 32, samples: int = 20) -> list[Check]:
    model = ContactModel.torus3(n)
    div_err = 0.0
    lap_err = 0.0
    for _ in range(samples):
        f = random_trig_polynomial(model.grid, rng, 3)
        div = divergence_of_contact_field(model, f)
        div_err = max(div_err, (div - (model.n + 1) * reeb_derivative(model, f)).max_abs())
        back = inverse_contact_laplacian(model, contact_laplacian(model, f))
        lap_err = max(lap_err, (back - f).max_abs())
    one = ScalarField.constant(model.grid, 1.0)
    s1 = contact_vector_field(model, one)
    reeb = model.reeb_components()
    s1_err = max(float(np.max(np.abs(c.values - r))) for c, r in zip(s1.components, reeb))
    return [
        Check("operators", "max |div(S f) - 2 E(f)|", div_err, 1e-10),
        Check("operators", "max |S(1) - E|", s1_err, 1e-12),
        Check("operators", "momentum round trip", lap_err, 1e-10),
    ]


def bracket_suite(rng: np.random.Generator, n: int = 32, samples: int = 5) -> list[Check]:
    model = ContactModel.torus3(n)
    anti = 0.0
    jac = 0.0
    for _ in range(samples):
        f, g = (random_trig_polynomial(model.grid, rng, 3) for _ in range(2))
        anti = max(anti, (contact_poisson(model, f, g) + contact_poisson(model, g, f)).max_abs())
        a, b, c = (random_trig_polynomial(model.grid, rng, 2) for _ in range(3))
        br = lambda x, y: contact_poisson(model, x, y)
        j = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
        jac = max(jac, j.max_abs())
    f = random_trig_polynomial(model.grid, rng, 3)
    one = ScalarField.constant(model.grid, 1.0)
    unit = (contact_poisson(model, one, f) - reeb_derivative(model, f)).max_abs()
    return [
        Check("bracket", "antisymmetry", anti, 1e-9),
        Check("bracket", "Jacobi identity", jac, 1e-7),
        Check("bracket", "{1, f} - E(f)", unit, 1e-12),
    ]


def reduction_suite(rng: np.random.Generator, n: int = 256, samples: int = 50) -> list[Check]:
    model = ContactModel.circle(n)
    full, ch = ContactEA(model), CamassaHolm(model)
    worst = 0.0
    for _ in range(samples):
        f = random_trig_polynomial(model.grid, rng, 20)
        m = contact_laplacian(model, f).values
        worst = max(worst, float(np.max(np.abs(full.evaluate(m).dm - ch.evaluate(m).dm))))
    return [Check("reduction", "contact(n=0) vs Camassa-Holm rhs", worst, 1e-10)]


def shear_suite(rng: np.random.Generator) -> list[Check]:
    rep = steady_shear_verify(Grid((16, 16, 64)))
    sp = math.sinh(math.pi)
    return [
        Check("shear", "f - f_zz off the surface", rep.helmholtz_residual, 1e-10),
        Check("shear", "frame formula vs closed form", rep.velocity_mismatch, 1e-8),
        Check("shear", "one-sided limits", max(rep.limit_error_minus, rep.limit_error_plus), 1e-12 * math.cosh(math.pi)),
        Check("shear", "z-component", rep.max_uz, 0.0),
        Check("shear", "x-jump - 2 sinh(pi)", abs(rep.x_jump - 2 * sp), 1e-12 * math.cosh(math.pi)),
    ]


def peakon_suite(rng: np.random.Generator) -> list[Check]:
    x = np.linspace(-3, 3, 601)
    line = np.max(np.abs(green_periodic(x, 20.0) - 0.5 * np.exp(-np.abs(x))))
    kmax = 100000
    k = np.arange(-kmax, kmax + 1)
    series = float(np.sum(1.0 / (2 * math.pi * (1 + k**2.0))))
    # the omitted tail is bounded by 2/(2 pi kmax); allow a factor 2 for rounding
    tail = 2.0 * 2.0 / (2 * math.pi * kmax)
    return [
        Check("peakon", "G_20 vs exp(-|x|)/2", line, 1e-6),
        Check("peakon", "G(0) vs Fourier series", abs(green_periodic(0.0) - series), tail),
    ]


SUITES: dict[str, Callable[[np.random.Generator], list[Check]]] = {
    "spectral": spectral_suite,
    "operators": operator_suite,
    "bracket": bracket_suite,
    "reduction": reduction_suite,
    "shear": shear_suite,
    "peakon": peakon_suite,
}


def run_all(seed: int = 0, only: list[str] | None = None) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []
    for name, suite in SUITES.items():
        if only and name not in only:
            continue
        out.extend(suite(rng))
    return out
