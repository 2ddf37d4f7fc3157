import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactea.contact import (
    ContactModel,
    ModelKind,
    UnsupportedModelError,
    advect,
    contact_laplacian,
    contact_poisson,
    contact_vector_field,
    divergence_of_contact_field,
    hamiltonian_field,
    inverse_contact_laplacian,
    reeb_derivative,
)
from contactea.spectral import Grid, ScalarField, VectorFieldComponents, random_trig_polynomial


@pytest.fixture(scope="module")
def t3():
    return ContactModel.torus3(16)


def field(model, fn):
    return ScalarField.from_function(model.grid, fn)


def test_model_validation():
    with pytest.raises(ValueError):
        ContactModel(ModelKind.TORUS3, Grid((16, 16)))
    with pytest.raises(ValueError):
        ContactModel(ModelKind.TORUS3, Grid((16, 16, 16), (1.0, 1.0, 1.0)))
    assert [ContactModel.circle(16).n, ContactModel.torus3(8).n] == [0, 1]


def test_reeb_derivative_examples(t3):
    assert reeb_derivative(t3, field(t3, lambda x, y, z: np.cos(2 * z) + np.sin(z))).max_abs() <= 1e-12
    c = ContactModel.circle(32)
    assert (reeb_derivative(c, field(c, np.sin)) - field(c, np.cos)).max_abs() <= 1e-13
    exact = field(t3, lambda x, y, z: np.sin(z) * np.cos(x))
    assert (reeb_derivative(t3, field(t3, lambda x, y, z: np.sin(x))) - exact).max_abs() <= 1e-12


def test_reeb_derivative_grid_mismatch(t3):
    with pytest.raises(ValueError):
        reeb_derivative(t3, ScalarField.zeros(Grid((8, 8, 8))))


def test_contact_field_examples(t3):
    one = contact_vector_field(t3, ScalarField.constant(t3.grid, 1.0))
    for comp, ref in zip(one.components, t3.reeb_components()):
        assert np.max(np.abs(comp.values - ref)) <= 1e-12
    u = contact_vector_field(t3, field(t3, lambda x, y, z: np.sin(z)))
    assert np.max(np.abs(u[0].values - 1.0)) <= 1e-12
    assert u[1].max_abs() <= 1e-12 and u[2].max_abs() <= 1e-12
    c = ContactModel.circle(32)
    s = field(c, np.sin)
    assert (contact_vector_field(c, s)[0] - s).max_abs() == 0.0


def test_contact_field_unsupported_on_quotient():
    q = ContactModel.quanto_torus2(16)
    with pytest.raises(UnsupportedModelError):
        contact_vector_field(q, ScalarField.zeros(q.grid))
    with pytest.raises(UnsupportedModelError):
        hamiltonian_field(ContactModel.circle(16), ScalarField.zeros(Grid((16,))))


def test_contact_field_satisfies_contact_conditions(t3, rng):
    # theta(u) = f and the dz-part of i_u d(theta) equals -f_z
    f = random_trig_polynomial(t3.grid, rng, 3)
    u = contact_vector_field(t3, f)
    Z = t3.grid.mesh[2]
    assert np.max(np.abs(np.sin(Z) * u[0].values + np.cos(Z) * u[1].values - f.values)) <= 1e-12
    from contactea.spectral import partial_derivative
    fz = partial_derivative(f, 2).values
    dz_part = -np.cos(Z) * u[0].values + np.sin(Z) * u[1].values
    assert np.max(np.abs(dz_part + fz)) <= 1e-12


def test_hamiltonian_field_examples():
    q = ContactModel.quanto_torus2(16)
    assert hamiltonian_field(q, ScalarField.constant(q.grid, 2.0)).max_abs() == 0.0
    h = hamiltonian_field(q, ScalarField.from_function(q.grid, lambda x, y: np.sin(x)))
    assert h[0].max_abs() <= 1e-13
    assert (h[1] - ScalarField.from_function(q.grid, lambda x, y: np.cos(x))).max_abs() <= 1e-13


def test_quotient_bracket_for_y_dependent_f():
    q = ContactModel.quanto_torus2(32)
    f = ScalarField.from_function(q.grid, lambda x, y: np.cos(2 * y))
    g = ScalarField.from_function(q.grid, lambda x, y: np.sin(3 * x + y))
    exact = ScalarField.from_function(q.grid, lambda x, y: -(-2 * np.sin(2 * y)) * 3 * np.cos(3 * x + y))
    assert (contact_poisson(q, f, g) - exact).max_abs() <= 1e-12


def test_advect_examples(t3):
    one = ScalarField.constant(t3.grid, 1.0)
    zero = ScalarField.zeros(t3.grid)
    ux = VectorFieldComponents(t3.grid, (one, zero, zero))
    assert advect(t3, ux, ScalarField.constant(t3.grid, 3.0)).max_abs() == 0.0
    m = field(t3, lambda x, y, z: np.sin(x))
    assert (advect(t3, ux, m) - field(t3, lambda x, y, z: np.cos(x))).max_abs() <= 1e-12


def test_advect_matches_finite_differences_at_second_order(t3, rng):
    grid = t3.grid
    u = contact_vector_field(t3, random_trig_polynomial(grid, rng, 2, 0.5))
    m = random_trig_polynomial(grid, rng, 2)
    ref = advect(t3, u, m).values
    errs = []
    for shift in (1, 2):
        # centered differences with spacing shift*h on the node grid
        fd = sum(c.values * (np.roll(m.values, -shift, a) - np.roll(m.values, shift, a))
                 / (2 * shift * grid.spacing[a]) for a, c in enumerate(u.components))
        errs.append(np.max(np.abs(fd - ref)))
    ratio = errs[1] / errs[0]
    assert 3.0 < ratio < 5.0


def test_bracket_identities(t3, rng):
    f = random_trig_polynomial(t3.grid, rng, 3)
    one = ScalarField.constant(t3.grid, 1.0)
    ef = reeb_derivative(t3, f)
    assert (contact_poisson(t3, one, f) - ef).max_abs() <= 1e-12
    assert (contact_poisson(t3, f, one) + ef).max_abs() <= 1e-12
    a = field(t3, lambda x, y, z: np.cos(z) + 0.3 * np.sin(2 * z))
    b = field(t3, lambda x, y, z: np.sin(3 * z))
    assert contact_poisson(t3, a, b).max_abs() <= 1e-12


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_bracket_antisymmetry(seed):
    model = ContactModel.torus3(16)
    rng = np.random.default_rng(seed)
    f, g = random_trig_polynomial(model.grid, rng, 3), random_trig_polynomial(model.grid, rng, 3)
    assert (contact_poisson(model, f, g) + contact_poisson(model, g, f)).max_abs() <= 1e-9


def test_bracket_jacobi(rng):
    # low modes keep the double brackets inside the dealiased band on 32^3
    model = ContactModel.torus3(32)
    a, b, c = (random_trig_polynomial(model.grid, rng, 2) for _ in range(3))
    br = lambda x, y: contact_poisson(model, x, y)
    jac = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
    assert jac.max_abs() <= 1e-7


def test_contact_laplacian_examples_and_round_trip(t3, rng):
    c = ContactModel.circle(32)
    assert (contact_laplacian(c, ScalarField.constant(c.grid, 1.5)) - 1.5).max_abs() <= 1e-14
    s = field(c, np.sin)
    assert (contact_laplacian(c, s) - s * 2.0).max_abs() <= 1e-13
    f = random_trig_polynomial(t3.grid, rng, 3)
    assert (inverse_contact_laplacian(t3, contact_laplacian(t3, f)) - f).max_abs() <= 1e-10


def test_contact_laplacian_is_symmetric_and_positive(t3, rng):
    f, g = random_trig_polynomial(t3.grid, rng, 3), random_trig_polynomial(t3.grid, rng, 3)
    lf, lg = contact_laplacian(t3, f), contact_laplacian(t3, g)
    assert abs((lf * g).integral() - (f * lg).integral()) <= 1e-10
    assert (lf * f).integral() >= (f * f).integral() > 0


def test_divergence_identity(t3, rng):
    for _ in range(3):
        f = random_trig_polynomial(t3.grid, rng, 3)
        div = divergence_of_contact_field(t3, f)
        assert (div - reeb_derivative(t3, f) * 2.0).max_abs() <= 1e-10
    assert divergence_of_contact_field(t3, ScalarField.constant(t3.grid, 1.0)).max_abs() <= 1e-12
    c = ContactModel.circle(64)
    s = field(c, np.sin)
    assert (divergence_of_contact_field(c, s) - field(c, np.cos)).max_abs() <= 1e-12
