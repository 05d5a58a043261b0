import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from localgen.errors import DimensionError, NumericalRangeError, ValidationError
from localgen.lindblad import SIGMA_Z
from localgen.superop import (
    as_density_matrix,
    choi,
    expm,
    expm_frechet,
    hermitian_eigvals,
    identity_superop,
    sandwich_superop,
    transpose_superop,
    unvec,
    vec,
)
from localgen.models import dephasing_generator
from localgen.generator import gauss_legendre_01

from conftest import random_density, random_generator, random_hermitian, random_matrix


def E(i, j, d=2):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1
    return m


def choi_by_loop(s, d):
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            c += np.kron(E(i, j, d), unvec(s @ vec(E(i, j, d))))
    return c


# -- vec ----------------------------------------------------------------------

def test_vec_basis_cases():
    np.testing.assert_array_equal(vec(E(0, 0)), [1, 0, 0, 0])
    np.testing.assert_array_equal(vec(E(0, 1)), [0, 0, 1, 0])


def test_vec_rejects_non_square():
    with pytest.raises(DimensionError):
        vec(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        unvec(np.zeros(5))


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_vec_round_trip_exact(rng, d):
    m = random_matrix(rng, d)
    np.testing.assert_array_equal(unvec(vec(m)), m)


@settings(max_examples=50, deadline=None)
@given(arrays(np.complex128, st.sampled_from([(2, 2), (3, 3), (4, 4)]),
              elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)))
def test_vec_round_trip_property(m):
    np.testing.assert_array_equal(unvec(vec(m)), m)


# -- sandwich -----------------------------------------------------------------

def test_sandwich_identity():
    np.testing.assert_array_equal(sandwich_superop(np.eye(2), np.eye(2)), np.eye(4))


def test_sandwich_sigma_z_is_diagonal():
    # sz E_ij sz = (-1)^(i+j) E_ij
    s = sandwich_superop(SIGMA_Z, SIGMA_Z)
    np.testing.assert_array_equal(s, np.diag([1, -1, -1, 1]))


def test_sandwich_convention_is_kron_bT_a(rng):
    a, b = random_matrix(rng, 3), random_matrix(rng, 3)
    np.testing.assert_array_equal(sandwich_superop(a, b), np.kron(b.T, a))


@pytest.mark.parametrize("d", [2, 3])
def test_sandwich_matches_triple_product(rng, d):
    worst = 0.0
    for _ in range(100):
        a, b = random_matrix(rng, d), random_matrix(rng, d)
        rho = random_density(rng, d)
        s = sandwich_superop(a, b)
        worst = max(worst, np.abs(unvec(s @ vec(rho)) - a @ rho @ b).max())
    assert worst <= 1e-13


def test_sandwich_dimension_mismatch():
    with pytest.raises(DimensionError):
        sandwich_superop(np.eye(2), np.eye(3))


# -- choi ---------------------------------------------------------------------

def test_choi_identity_rank_one():
    ev = np.linalg.eigvalsh(choi(identity_superop(2)))
    np.testing.assert_allclose(ev, [0, 0, 0, 2], atol=1e-14)


def test_choi_transpose_not_cp():
    ev = np.linalg.eigvalsh(choi(transpose_superop(2)))
    np.testing.assert_allclose(ev, [-1, 1, 1, 1], atol=1e-14)


def test_choi_single_kraus_psd():
    ev = np.linalg.eigvalsh(choi(sandwich_superop(SIGMA_Z, SIGMA_Z)))
    np.testing.assert_allclose(ev, [0, 0, 0, 2], atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_choi_matches_loop_definition(rng, d):
    s = random_matrix(rng, d * d)
    np.testing.assert_allclose(choi(s), choi_by_loop(s, d), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3])
def test_choi_hermitian_for_lindblad_maps(rng, d):
    for _ in range(10):
        c = choi(expm(0.7 * random_generator(rng, d)))
        assert np.abs(c - c.conj().T).max() <= 1e-10


# -- expm ---------------------------------------------------------------------

def test_expm_trivial_cases():
    np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(expm(np.diag([0.3, -2.0])), np.diag(np.exp([0.3, -2.0])), rtol=1e-15)
    np.testing.assert_allclose(expm([[0, 1], [0, 0]]), [[1, 1], [0, 1]], atol=1e-15)


def test_expm_inverse(rng):
    for d in (2, 4, 8):
        a = random_matrix(rng, d)
        a *= 5 / np.linalg.norm(a, 2)
        assert np.abs(expm(a) @ expm(-a) - np.eye(d)).max() <= 1e-11


def test_expm_matches_eigendecomposition_for_hermitian(rng):
    # norm up to 50: compare against exp of the spectrum
    h = random_hermitian(rng, 4)
    h *= 50 / np.linalg.norm(h, 2)
    w, v = np.linalg.eigh(h)
    ref = (v * np.exp(w)) @ v.conj().T
    assert np.abs(expm(h) - ref).max() <= 1e-12 * np.abs(ref).max()


def test_expm_overflow():
    with pytest.raises(NumericalRangeError):
        expm(np.diag([1000.0, 0.0]))


# -- frechet ------------------------------------------------------------------

def test_frechet_at_zero_is_direction(rng):
    e = random_matrix(rng, 3)
    ea, d = expm_frechet(np.zeros((3, 3)), e)
    np.testing.assert_allclose(ea, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(d, e, atol=1e-14)


def test_frechet_commuting_direction(rng):
    a = random_matrix(rng, 3) * 0.5
    e = 2 * a @ a - 0.3 * a + np.eye(3)
    ea, d = expm_frechet(a, e)
    np.testing.assert_allclose(d, expm(a) @ e, atol=1e-12)


def test_frechet_finite_difference_oracle(rng):
    a, e = random_matrix(rng, 4), random_matrix(rng, 4)
    h = 1e-6
    fd = (expm(a + h * e) - expm(a - h * e)) / (2 * h)
    _, d = expm_frechet(a, e)
    assert np.abs(d - fd).max() <= 1e-6 * max(1.0, np.abs(d).max())


def test_frechet_gauss_legendre_oracle(rng):
    nodes, weights = gauss_legendre_01(16)
    for _ in range(10):
        a, e = random_matrix(rng, 4) * 0.5, random_matrix(rng, 4)
        ref = sum(w * expm(s * a) @ e @ expm((1 - s) * a) for s, w in zip(nodes, weights))
        _, d = expm_frechet(a, e)
        assert np.abs(d - ref).max() <= 1e-9


def test_frechet_dimension_mismatch():
    with pytest.raises(DimensionError):
        expm_frechet(np.eye(2), np.eye(3))


# -- eigenvalues and states -----------------------------------------------------

def test_hermitian_eigvals_basic():
    np.testing.assert_allclose(hermitian_eigvals(SIGMA_Z), [-1, 1])
    np.testing.assert_allclose(hermitian_eigvals(np.eye(3)), [1, 1, 1])


def test_hermitian_eigvals_reconstruction(rng):
    h = random_hermitian(rng, 5)
    w = hermitian_eigvals(h)
    assert np.all(np.diff(w) >= 0)
    _, v = np.linalg.eigh(h)
    rec = sum(wk * np.outer(v[:, k], v[:, k].conj()) for k, wk in enumerate(w))
    assert np.abs(rec - h).max() <= 1e-10


def test_hermitian_eigvals_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        hermitian_eigvals([[0, 1], [0, 0]])


def test_density_matrix_validation(rng):
    rho = random_density(rng, 3)
    as_density_matrix(rho)
    with pytest.raises(ValidationError):
        as_density_matrix(2 * rho)
    with pytest.raises(ValidationError):
        as_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        as_density_matrix([[0.5, 0.5], [0.0, 0.5]])
    with pytest.raises(ValidationError):
        as_density_matrix([[np.nan, 0], [0, 1]])


def test_dephasing_generator_convention():
    # sz E12 sz - E12 = -2 E12 under column stacking E12 -> index 2
    l0 = dephasing_generator()
    assert l0[2, 2] == -2 and l0[1, 1] == -2 and l0[0, 0] == 0 and l0[3, 3] == 0
