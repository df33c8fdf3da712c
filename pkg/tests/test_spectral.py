import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SX, SY, SZ, I2, eig_projectors
from qhv import (
    SpectrumFunction,
    ValidationError,
    apply_function,
    commute_check,
    eigendecompose,
    expectation,
    tensor_embed,
    validate_state,
)
from qhv.sampling import random_hermitian_matrix, random_observable, random_state
from qhv.spectral import decomposition_defects

TOL = 1e-10


def assert_invariants(obs):
    for name, dev in decomposition_defects(obs).items():
        assert dev <= TOL, (name, dev)


def test_diagonal_decomposition():
    obs = eigendecompose(np.diag([1.0, -1.0]))
    assert obs.eigenvalues == (-1.0, 1.0)
    np.testing.assert_allclose(obs.projectors[0], np.diag([0, 1]))
    np.testing.assert_allclose(obs.projectors[1], np.diag([1, 0]))


def test_identity_is_single_cluster():
    obs = eigendecompose(np.eye(2))
    assert obs.eigenvalues == (1.0,)
    np.testing.assert_allclose(obs.projectors[0], np.eye(2))


def test_sigma_x_decomposition_by_reconstruction():
    obs = eigendecompose(SX)
    assert obs.eigenvalues == pytest.approx((-1.0, 1.0))
    np.testing.assert_allclose(obs.projectors[0], [[0.5, -0.5], [-0.5, 0.5]], atol=1e-14)
    np.testing.assert_allclose(obs.projectors[1], [[0.5, 0.5], [0.5, 0.5]], atol=1e-14)
    # oracle: reconstruction and orthogonality computed by hand
    p_minus, p_plus = obs.projectors
    assert np.linalg.norm(p_plus - p_minus - SX) <= TOL
    assert np.linalg.norm(p_plus @ p_minus) <= TOL
    assert_invariants(obs)


def test_near_degenerate_eigenvalues_are_clustered():
    m = np.diag([1.0, 1.0 + 1e-12, -2.0])
    obs = eigendecompose(m)
    assert len(obs.eigenvalues) == 2
    assert np.trace(obs.projectors[1]).real == pytest.approx(2.0)


def test_non_hermitian_rejected_with_norm():
    with pytest.raises(ValidationError, match=r"\|\|A - A\^dagger\|\|_F"):
        eigendecompose(np.array([[0, 1], [0, 0]]))


def test_non_square_rejected():
    with pytest.raises(ValidationError):
        eigendecompose(np.zeros((2, 3)))


@settings(max_examples=60, deadline=None)
@given(d=st.integers(1, 6), seed=st.integers(0, 2**32 - 1), levels=st.integers(1, 6))
def test_decomposition_invariants_random(d, seed, levels):
    rng = np.random.default_rng(seed)
    obs = random_observable(d, rng, n_levels=min(levels, d))
    assert_invariants(obs)
    # oracle: independent eigh-based projector table agrees on the number of clusters
    assert len(eig_projectors(obs.matrix)) == len(obs.eigenvalues)


@pytest.mark.parametrize(
    "matrix",
    [np.eye(2) / 2, np.diag([1.0, 0.0])],
    ids=["maximally-mixed", "pure"],
)
def test_valid_states(matrix):
    rho = validate_state(matrix)
    np.testing.assert_allclose(rho.matrix, matrix)


def test_negative_state_rejected():
    with pytest.raises(ValidationError, match="negative eigenvalue"):
        validate_state(np.diag([1.2, -0.2]))


def test_trace_rejected():
    with pytest.raises(ValidationError, match="trace"):
        validate_state(np.diag([0.7, 0.2]))


def test_tiny_negative_eigenvalue_clamped():
    rho = validate_state(np.diag([1.0 + 1e-12, -1e-12]))
    assert np.min(np.linalg.eigvalsh(rho.matrix)) >= 0
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-15)


def test_commute_check_examples():
    z, x = eigendecompose(SZ), eigendecompose(SX)
    assert commute_check(z, eigendecompose(I2))
    assert not commute_check(z, x)
    # oracle: ||[sz, sx]||_F = ||2i sy||_F = 2 sqrt2
    assert np.linalg.norm(SZ @ SX - SX @ SZ) == pytest.approx(2 * np.sqrt(2))


def test_commute_check_disjoint_factors():
    rng = np.random.default_rng(4)
    a = eigendecompose(np.kron(random_hermitian_matrix(2, rng), I2))
    b = eigendecompose(np.kron(I2, random_hermitian_matrix(2, rng)))
    assert commute_check(a, b)


def test_commute_check_dimension_mismatch():
    with pytest.raises(ValidationError):
        commute_check(eigendecompose(SZ), eigendecompose(np.eye(3)))


def test_apply_function_identity():
    z = eigendecompose(SZ)
    fz = apply_function(SpectrumFunction.identity_on(z), z)
    assert fz.eigenvalues == z.eigenvalues
    np.testing.assert_allclose(fz.matrix, z.matrix)


def test_apply_function_square_merges():
    x = eigendecompose(np.diag([1.0, 0.0, -1.0]))
    sq = apply_function(SpectrumFunction({1.0: 1.0, 0.0: 0.0, -1.0: 1.0}), x)
    np.testing.assert_allclose(sq.matrix, np.diag([1, 0, 1]))
    assert sq.eigenvalues == (0.0, 1.0)
    np.testing.assert_allclose(sq.projectors[1], x.projector([1.0, -1.0]))


def test_apply_function_relu_matrix_oracle():
    x = eigendecompose(np.diag([2.0, -3.0]))
    fx = apply_function(SpectrumFunction.from_callable(lambda v: max(v, 0.0), x), x)
    expected = sum(max(lam, 0.0) * p for lam, p in x.spectrum)
    np.testing.assert_allclose(fx.matrix, expected)
    np.testing.assert_allclose(fx.matrix, np.diag([2.0, 0.0]))


def test_apply_function_undefined_point():
    x = eigendecompose(np.diag([1.0, 0.0]))
    with pytest.raises(ValidationError, match="undefined"):
        apply_function(SpectrumFunction({1.0: 2.0}), x)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5))
def test_apply_function_composition_law(seed, d):
    rng = np.random.default_rng(seed)
    x = random_observable(d, rng)
    phi = SpectrumFunction({lam: float(rng.integers(-2, 3)) for lam in x.eigenvalues})
    fx = apply_function(phi, x)
    psi = SpectrumFunction({lam: float(rng.integers(-1, 2)) for lam in fx.eigenvalues})
    lhs = apply_function(psi, fx)
    rhs = apply_function(psi.compose(phi), x)
    assert lhs.eigenvalues == rhs.eigenvalues
    for p, q in zip(lhs.projectors, rhs.projectors):
        assert np.linalg.norm(p - q) <= TOL
    assert commute_check(x, fx)


def test_tensor_embed():
    z = eigendecompose(SZ)
    lifted = tensor_embed(z, 1, [2, 2])
    np.testing.assert_allclose(lifted.matrix, np.kron(I2, SZ))
    assert lifted.eigenvalues == z.eigenvalues
    for p, q in zip(lifted.projectors, z.projectors):
        np.testing.assert_allclose(p, np.kron(I2, q))
        assert np.trace(p).real == pytest.approx(2.0)
    np.testing.assert_allclose(tensor_embed(z, 0, [2, 2]).matrix, np.kron(SZ, I2))
    np.testing.assert_allclose(tensor_embed(eigendecompose(I2), 0, [2, 3]).matrix, np.eye(6))


def test_tensor_embed_mismatch():
    with pytest.raises(ValidationError):
        tensor_embed(eigendecompose(SZ), 1, [2, 3])
    with pytest.raises(ValidationError):
        tensor_embed(eigendecompose(SZ), 2, [2, 2])


def test_expectation_examples():
    pure = validate_state(np.diag([1.0, 0.0]))
    assert expectation(pure, eigendecompose(SZ)) == 1.0
    assert expectation(pure, eigendecompose(SX)) == 0.0
    assert expectation(validate_state(I2 / 2), eigendecompose(SY)) == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 4), a=st.floats(0.05, 0.95))
def test_expectation_linearity(seed, d, a):
    rng = np.random.default_rng(seed)
    r1, r2 = random_state(d, rng), random_state(d, rng)
    x, y = random_hermitian_matrix(d, rng), random_hermitian_matrix(d, rng)
    mix = a * r1.matrix + (1 - a) * r2.matrix
    assert expectation(mix, x) == pytest.approx(a * expectation(r1, x) + (1 - a) * expectation(r2, x), abs=1e-12)
    assert expectation(r1, 2 * x - y) == pytest.approx(2 * expectation(r1, x) - expectation(r1, y), abs=1e-12)
