import numpy as np
import pytest

from defectwalk.errors import ResourceLimit
from defectwalk.operators import (
    ScalarField,
    apply_d,
    apply_d_adjoint,
    apply_dtilde,
    apply_dtilde_adjoint,
    apply_T,
    apply_T0tilde,
    apply_Ttilde,
    build_dense_T,
    build_dense_U,
    coin_identity_check,
    iota,
    iota_adjoint,
    mu_components,
    potential_v0,
)
from defectwalk.walk import LatticeWindow, WaveFunction, apply_evolution

from conftest import S2, random_params, random_state


def random_field(rng, window, *, punctured=False):
    vals = rng.normal(size=window.shape) + 1j * rng.normal(size=window.shape)
    return ScalarField(window, vals, punctured=punctured)


def test_mu_and_v0(pstar, flat):
    np.testing.assert_allclose(mu_components(pstar), [0.4])
    assert abs(potential_v0(pstar)) < 1e-15
    assert mu_components(flat)[0] == 0 and potential_v0(flat) == pytest.approx(0.6)


# --- d~ and its adjoint -------------------------------------------------------


def test_dtilde_examples(pstar):
    w = LatticeWindow.zero_padded(3)
    f = apply_dtilde(pstar, WaveFunction.delta(w, (1,), [S2, S2]))
    assert f.at((1,)) == pytest.approx(1.0) and np.count_nonzero(np.abs(f.values) > 1e-15) == 1
    assert not np.any(apply_dtilde(pstar, WaveFunction.delta(w, (0,), [0.3, 0.7j])).values)
    f = apply_dtilde(pstar, WaveFunction.delta(w, (2,), [S2, -S2]))
    assert np.max(np.abs(f.values)) < 1e-15


def test_dtilde_adjoint_examples(pstar):
    w = LatticeWindow.zero_padded(3)
    psi = apply_dtilde_adjoint(pstar, ScalarField.delta(w, (1,)))
    np.testing.assert_allclose(psi.at((1,)), [S2, S2])
    assert not np.any(apply_dtilde_adjoint(pstar, ScalarField.delta(w, (0,))).amplitudes)


def test_dtilde_dtilde_star_is_indicator(rng, pstar):
    w = LatticeWindow.zero_padded(8)
    f = random_field(rng, w)
    back = apply_dtilde(pstar, apply_dtilde_adjoint(pstar, f))
    expected = f.values.copy()
    expected[w.origin_index] = 0
    np.testing.assert_allclose(back.values, expected, atol=1e-12)


def test_adjoint_pairing(rng, params2d):
    w = LatticeWindow.zero_padded(3, 2)
    psi, f = random_state(rng, w), random_field(rng, w)
    lhs = apply_dtilde(params2d, psi).inner(f)
    rhs = psi.inner(apply_dtilde_adjoint(params2d, f))
    assert abs(lhs - rhs) < 1e-12


@pytest.mark.parametrize("n, radius", [(1, 6), (2, 3)])
def test_coin_identity(rng, n, radius):
    params = random_params(rng, n)
    w = LatticeWindow.zero_padded(radius, n)
    for _ in range(100 if n == 1 else 20):
        assert coin_identity_check(params, random_state(rng, w)) <= 1e-12
    assert coin_identity_check(params, WaveFunction.zeros(w)) == 0


# --- iota -----------------------------------------------------------------------


def test_iota_identities(rng):
    w = LatticeWindow.zero_padded(8)
    k = random_field(rng, w, punctured=True)
    np.testing.assert_array_equal(iota_adjoint(iota(k)).values, k.values)
    kt = random_field(rng, w)
    ind = kt.values.copy()
    ind[w.origin_index] = 0
    np.testing.assert_array_equal(iota(iota_adjoint(kt)).values, ind)


def test_d_is_coisometry(rng, params2d):
    w = LatticeWindow.zero_padded(4, 2)
    k = random_field(rng, w, punctured=True)
    np.testing.assert_allclose(apply_d(params2d, apply_d_adjoint(params2d, k)).values, k.values, atol=1e-12)


# --- discriminants --------------------------------------------------------------


def test_T0tilde_examples(pstar, flat, rng):
    w = LatticeWindow.zero_padded(3)
    f = apply_T0tilde(pstar, ScalarField.delta(w, (0,)))
    assert f.at((1,)) == pytest.approx(0.4) and f.at((-1,)) == pytest.approx(0.4) and f.at((0,)) == 0
    t = LatticeWindow.torus(7)
    params = random_params(rng)
    const = ScalarField(t, np.full(t.shape, 0.3 - 0.1j))
    eig = 2 * np.sum(mu_components(params).real) + potential_v0(params)
    np.testing.assert_allclose(apply_T0tilde(params, const).values, eig * const.values, atol=1e-14)
    g = random_field(rng, w)
    np.testing.assert_allclose(apply_T0tilde(flat, g).values, 0.6 * g.values, atol=1e-15)


def test_Ttilde_examples(pstar):
    w = LatticeWindow.zero_padded(5)
    assert np.max(np.abs(apply_Ttilde(pstar, ScalarField.delta(w, (0,))).values)) == 0
    d2 = ScalarField.delta(w, (2,))
    np.testing.assert_allclose(apply_Ttilde(pstar, d2).values, apply_T0tilde(pstar, d2).values, atol=1e-15)


def test_T_example(pstar):
    w = LatticeWindow.zero_padded(4)
    f = apply_T(pstar, ScalarField.delta(w, (1,), punctured=True))
    assert f.at((2,)) == pytest.approx(0.4) and f.at((1,)) == 0 and f.at((0,)) == 0


@pytest.mark.parametrize("n, radius", [(1, 8), (2, 4)])
def test_T_compositions_agree(rng, n, radius):
    params = random_params(rng, n)
    w = LatticeWindow.zero_padded(radius, n)
    for _ in range(20):
        k = random_field(rng, w, punctured=True)
        t = apply_T(params, k).values
        via_ttilde = iota_adjoint(apply_Ttilde(params, iota(k))).values
        via_t0 = iota_adjoint(apply_T0tilde(params, iota(k))).values
        # the window edge drops hops to the outside the same way in every route
        np.testing.assert_allclose(via_ttilde, t, atol=1e-12)
        np.testing.assert_allclose(via_t0, t, atol=1e-12)


def test_T_self_adjoint_and_contractive(rng):
    params = random_params(rng)
    w = LatticeWindow.torus(11)
    a, b = random_field(rng, w, punctured=True), random_field(rng, w, punctured=True)
    assert abs(a.inner(apply_T(params, b)) - apply_T(params, a).inner(b)) < 1e-12
    assert apply_T(params, a).norm() <= a.norm() * (1 + 1e-12)


def test_mu_zero_T_is_multiple_of_identity(rng, flat):
    w = LatticeWindow.zero_padded(5)
    for _ in range(20):
        k = random_field(rng, w, punctured=True)
        np.testing.assert_allclose(apply_T(flat, k).values, 0.6 * k.values, atol=1e-12)


# --- dense matrices -------------------------------------------------------------


def test_dense_U_small(pstar):
    op = build_dense_U(pstar, 4)
    assert op.entries.shape == (8, 8)
    assert op.unitarity_deviation() <= 1e-12


def test_dense_U_columns_match_matrix_free(rng, params2d):
    op = build_dense_U(params2d, 5)
    w = op.window
    psi = random_state(rng, w)
    np.testing.assert_allclose(op.entries @ psi.vector(), apply_evolution(params2d, psi).vector(), atol=1e-12)


def test_dense_U_large(pstar, params2d):
    assert build_dense_U(pstar, 400).unitarity_deviation() <= 1e-10
    op = build_dense_U(params2d, 12)
    assert op.dimension == 576 and op.unitarity_deviation() <= 1e-10


def test_dense_T(pstar, flat, rng):
    op = build_dense_T(pstar, 4)
    assert op.entries.shape == (3, 3) and op.hermiticity_deviation() <= 1e-14
    assert not np.any(op.sites == 0)
    np.testing.assert_allclose(build_dense_T(flat, 6).entries, 0.6 * np.eye(5))
    params = random_params(rng, 2)
    op = build_dense_T(params, 7)
    assert op.hermiticity_deviation() <= 1e-12
    assert np.max(np.abs(np.linalg.eigvalsh(op.entries))) <= 1 + 1e-10


def test_dense_budget(pstar):
    with pytest.raises(ResourceLimit):
        build_dense_U(pstar, 400, budget=100)
    with pytest.raises(ValueError):
        build_dense_U(pstar, 2)
