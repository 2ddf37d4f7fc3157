"""Acceptance criteria, one or more PASS/FAIL lines per criterion.

Each check prints a line as it runs and the full list is repeated in the
terminal summary.  Tolerances are pinned here and never tuned to results.
"""

import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from contactea.config import INITIAL_CONDITIONS, make_equation, parse_config
from contactea.contact import (
    ContactModel,
    contact_laplacian,
    contact_poisson,
    contact_vector_field,
    divergence_of_contact_field,
    reeb_derivative,
)
from contactea.evolution import CamassaHolm, ContactEA, Quasigeostrophic, Reduced1D, StepperConfig, run
from contactea.lagrangian import seed_flow, transport_residual
from contactea.peakon import PeakonState, green_periodic, hamiltonian, integrate_peakons, steady_shear_verify
from contactea.spectral import Grid, ScalarField, random_trig_polynomial

pytestmark = pytest.mark.slow


def report(criterion: str, what: str, value: float, tol: float, ok: bool | None = None) -> None:
    ok = bool(value <= tol) if ok is None else bool(ok)
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {what} = {value:.3e} (tol {tol:.1e})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# -- shared runs -----------------------------------------------------------------

GENERIC_DTS = (1 / 16, 1 / 32, 1 / 64)


@pytest.fixture(scope="module")
def generic_runs():
    """Torus3 32^3 smooth positive data to t = 0.5 with 1000 particles, three step sizes."""
    cfg = parse_config("preset = contact-generic")
    eq, m0 = cfg.build()
    out = {}
    for dt in GENERIC_DTS:
        flow = seed_flow(m0, per_axis=10)
        out[dt] = run(eq, m0, StepperConfig(dt), 0.5, flow=flow)
    return eq, m0, out


@pytest.fixture(scope="module")
def reduced_negative():
    grid = Grid((1024,), (40.0,))
    eq = Reduced1D(grid)
    y = grid.centered_coords(0)
    i0 = int(np.argmin(np.abs(y)))
    series = []

    def probe(state, rec, flow):
        g = eq.stream_function(state.m.values)
        g_t = eq.stream_function(eq.evaluate(state.m.values).dm)
        series.append((state.t, g[i0], g_t[i0], rec.bkm_integral))

    phi0 = ScalarField(grid, -np.exp(-y * y))
    with pytest.warns(Warning):  # the CFL monitor fires as the profile collapses
        res = run(eq, phi0, StepperConfig(1e-3), 3.0, observers=[probe])
    return res, np.array(series)


# -- 1-3: operator identities -----------------------------------------------------

def test_criterion_01_operator_identities():
    rng = np.random.default_rng(2024)
    model = ContactModel.torus3(32)
    worst = 0.0
    for _ in range(20):
        f = random_trig_polynomial(model.grid, rng, 3)
        div = divergence_of_contact_field(model, f)
        worst = max(worst, (div - reeb_derivative(model, f) * 2.0).max_abs())
    report("1", "max ||div(S f) - 2 E(f)||_inf over 20 samples", worst, 1e-10)
    s1 = contact_vector_field(model, ScalarField.constant(model.grid, 1.0))
    err = max(float(np.max(np.abs(c.values - e))) for c, e in zip(s1.components, model.reeb_components()))
    report("1", "||S(1) - E||_inf", err, 1e-12)


def test_criterion_02_bracket():
    rng = np.random.default_rng(7)
    model = ContactModel.torus3(32)
    anti = jac = 0.0
    br = lambda a, b: contact_poisson(model, a, b)
    for _ in range(5):
        f, g = random_trig_polynomial(model.grid, rng, 3), random_trig_polynomial(model.grid, rng, 3)
        anti = max(anti, (br(f, g) + br(g, f)).max_abs())
        a, b, c = (random_trig_polynomial(model.grid, rng, 2) for _ in range(3))
        jac = max(jac, (br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))).max_abs())
    report("2", "bracket antisymmetry", anti, 1e-9)
    report("2", "Jacobi identity", jac, 1e-7)


def test_criterion_03_reduction():
    rng = np.random.default_rng(3)
    model = ContactModel.circle(256)
    full, ch = ContactEA(model), CamassaHolm(model)
    worst = 0.0
    for _ in range(50):
        m = contact_laplacian(model, random_trig_polynomial(model.grid, rng, 20)).values
        worst = max(worst, float(np.max(np.abs(full.evaluate(m).dm - ch.evaluate(m).dm))))
    report("3", "max ||rhs_contact(n=0) - rhs_CH||_inf over 50 states", worst, 1e-10)


# -- 4-5: the generic three-dimensional run ---------------------------------------

def _rel(a: float, b: float) -> float:
    return abs(b - a) / abs(a)


def test_criterion_04_c0(generic_runs):
    # Expected to fail: E is not a Killing field of the flat metric used on T^3,
    # so int m changes at the rate -int f_z (cos z f_x - sin z f_y).
    _, _, runs = generic_runs
    recs = runs[GENERIC_DTS[0]].records
    report("4", "relative drift of C0", _rel(recs[0].c0, recs[-1].c0), 1e-6)


def test_criterion_04_c1(generic_runs):
    _, _, runs = generic_runs
    recs = runs[GENERIC_DTS[0]].records
    report("4", "relative drift of C1", _rel(recs[0].c1, recs[-1].c1), 1e-6)


def test_criterion_04_cminus(generic_runs):
    _, m0, runs = generic_runs
    recs = runs[GENERIC_DTS[0]].records
    assert m0.values.min() > 0 and all(r.cm1_valid for r in recs)
    report("4", "relative drift of C_-1,+ (r = 2/3)", _rel(recs[0].c_minus_plus, recs[-1].c_minus_plus), 1e-4)


def test_criterion_05_transport(generic_runs):
    eq, _, runs = generic_runs
    res = {dt: transport_residual(r.flow, eq.model, r.state.m, eq.n) for dt, r in runs.items()}
    coarse = res[GENERIC_DTS[0]]
    assert coarse.per_particle.size == 1000
    report("5", "max transport residual, 1000 particles, dt = 1/16", coarse.max_abs, 1e-4)
    r1, r2, r3 = (res[dt].per_particle for dt in GENERIC_DTS)
    order = math.log2(np.max(np.abs(r1 - r2)) / np.max(np.abs(r2 - r3)))
    report("5", "observed dt-order of the residual (Richardson)", order, 3.5, ok=order >= 3.5)


# -- 6-7: steady and quasigeostrophic runs ----------------------------------------

def test_criterion_06_quantomorphism():
    cfg = parse_config("preset = quanto-steady")
    eq, m0 = cfg.build()
    dev = []
    res = run(eq, m0, cfg.stepper, 1.0,
              observers=[lambda s, r, f: dev.append(float(np.max(np.abs(s.m.values - m0.values))))])
    assert res.state.t == pytest.approx(1.0)
    report("6", "max_t ||E(f(t))||_inf", max(r.reeb_f_linf for r in res.records), 1e-8)
    report("6", "max_t ||m(t) - m0||_inf", max(dev), 1e-8)


def _qg_run(name: str, beta: float):
    eq = make_equation(name, Grid((128, 128)), alpha=1.0, beta=beta)
    w0 = INITIAL_CONDITIONS["qg_smooth"](eq, None)
    res = run(eq, w0, StepperConfig(0.008), 1.0)
    return w0, res.state.m


def test_criterion_07_quasigeostrophic():
    # int w0 is zero for this data, so drifts are scaled by int |w0|
    w0, w = _qg_run("qg", 0.0)
    scale = float(np.abs(w0.values).sum() * w0.grid.cell_volume)
    report("7", "f-plane relative drift of int w", abs(w.integral() - w0.integral()) / scale, 1e-7)
    e0 = (w0 * w0).integral()
    report("7", "f-plane relative drift of int w^2", abs((w * w).integral() - e0) / e0, 1e-7)
    w0b, wb = _qg_run("beta-plane", 1.0)
    report("7", "beta-plane relative drift of int w", abs(wb.integral() - w0b.integral()) / scale, 1e-7)


# -- 8-9: singular solutions ---------------------------------------------------------

def test_criterion_08_steady_shear():
    rep = steady_shear_verify(Grid((32, 32, 64)))
    cp = math.cosh(math.pi)
    report("8", "one-sided limits at z = -+pi", max(rep.limit_error_minus, rep.limit_error_plus), 1e-12 * cp)
    report("8", "max |u_z|", rep.max_uz, 0.0)
    report("8", "max |f - f_zz| off the surface", rep.helmholtz_residual, 1e-10)
    report("8", "|x-jump - 2 sinh(pi)|", abs(rep.x_jump - 2 * math.sinh(math.pi)), 1e-12 * cp)


def test_criterion_09_peakons():
    q0, p = 1.0, 1.0
    traj = integrate_peakons(PeakonState([q0], [p]), 1.0, 1e-3)
    report("9", "single peakon position error at t = 1",
           abs(traj.q[-1, 0] - (q0 + green_periodic(0.0) * p)), 1e-6)
    pair = PeakonState([0.5, 2.0], [2.0, 1.0])
    traj = integrate_peakons(pair, 5.0, 1e-3)
    H = [hamiltonian(PeakonState(q, pp)) for q, pp in zip(traj.q, traj.p)]
    report("9", "two-peakon Hamiltonian drift over t <= 5", float(np.max(np.abs(np.array(H) - H[0]))), 1e-8)
    x = np.linspace(-3, 3, 601)
    report("9", "max |G_20(x) - exp(-|x|)/2| on |x| <= 3",
           float(np.max(np.abs(green_periodic(x, 20.0) - 0.5 * np.exp(-np.abs(x))))), 1e-6)


# -- 10-12: reduced dynamics, integrator order, BKM ---------------------------------

def test_criterion_10a_positive_profile():
    cfg = parse_config("preset = reduced-positive")
    eq, phi0 = cfg.build()
    g0 = float(np.max(np.abs(eq.stream_function(phi0.values))))
    gmax = []
    res = run(eq, phi0, cfg.stepper, 10.0, cadence=cfg.cadence,
              observers=[lambda s, r, f: gmax.append(float(np.max(np.abs(eq.stream_function(s.m.values)))))])
    ok = res.status == "ok" and res.state.t == pytest.approx(10.0) and max(gmax) <= 10 * g0
    report("10a", "sup_t ||g||_inf / ||g0||_inf up to t = 10", max(gmax) / g0, 10.0, ok=ok)


def test_criterion_10b_negative_profile(reduced_negative):
    res, s = reduced_negative
    t, g, g_t = s[:, 0], s[:, 1], s[:, 2]
    report("10b", "blowup status (1 = yes)", float(res.blew_up), 1.0, ok=res.blew_up)
    report("10b", "max increment of g(t,0)", float(np.max(np.diff(g))), 0.0, ok=np.all(np.diff(g) < 0))
    late = np.abs(g) > 2 * abs(g[0])
    assert late.sum() >= 10
    ratio = float(np.min(g_t[late] / (-math.sqrt(6) * g[late] ** 2)))
    report("10b", "min g_t(t,0) / (-sqrt6 g(t,0)^2) once |g| > 2|g0|", ratio, 0.8, ok=ratio >= 0.8)


@pytest.mark.filterwarnings("ignore::contactea.evolution.CFLWarning")
def test_criterion_11_integrator_order():
    model = ContactModel.circle(256)
    f0 = ScalarField.from_function(model.grid, lambda x: 1 + 0.3 * np.sin(x) + 0.2 * np.cos(2 * x))
    eq, m0 = CamassaHolm(model), contact_laplacian(model, f0)
    u = [run(eq, m0, StepperConfig(dt), 1.0).state.m.values for dt in (0.005, 0.0025, 0.00125)]
    order = math.log2(np.max(np.abs(u[0] - u[1])) / np.max(np.abs(u[1] - u[2])))
    report("11", "RK4 Richardson order on smooth CH", order, 4.2, ok=3.8 <= order <= 4.2)


def test_criterion_12_bkm(reduced_negative):
    res, s = reduced_negative
    assert res.blew_up
    t, bkm = s[:, 0], s[:, 3]
    slopes = np.diff(bkm) / np.diff(t)
    report("12", "min increment of the BKM series", float(np.min(np.diff(bkm))), 0.0,
           ok=np.all(np.diff(bkm) >= 0))
    report("12", "initial slope / final slope of the BKM series", slopes[0] / slopes[-1], 1.0,
           ok=slopes[-1] > slopes[0])
