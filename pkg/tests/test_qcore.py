import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from seqmeas.qcore import (
    InvalidStateError,
    NonHermitianError,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    check_density_matrix,
    conjugate_map,
    hermitian_eigensystem,
    is_density_matrix,
    ket,
    partial_trace,
    partial_transpose,
    projector,
    random_density_matrix,
    random_pure_state,
    singular_values,
    tensor_product,
)

seeds = hst.integers(min_value=0, max_value=2**32 - 1)


def test_ket_ordering_puts_first_qubit_leftmost():
    assert np.array_equal(ket(1, 0), np.array([0, 0, 1, 0]))
    assert np.array_equal(ket(0, 1), np.array([0, 1, 0, 0]))


def test_tensor_product_matches_kron_and_rejects_big_factors():
    assert np.array_equal(tensor_product(SIGMA_X, SIGMA_Z), np.kron(SIGMA_X, SIGMA_Z))
    with pytest.raises(ValueError):
        tensor_product(np.eye(4), np.eye(2))


def test_partial_trace_of_product_state():
    a = projector(np.array([1, 1j]) / np.sqrt(2))
    b = projector(np.array([0.6, 0.8]))
    rho = tensor_product(a, b)
    assert np.allclose(partial_trace(rho, keep="A"), a, atol=1e-14)
    assert np.allclose(partial_trace(rho, keep="B"), b, atol=1e-14)


def test_partial_transpose_is_involution_and_preserves_trace():
    rho = random_density_matrix(np.random.default_rng(3))
    pt = partial_transpose(rho)
    assert np.allclose(partial_transpose(pt), rho)
    assert np.isclose(np.trace(pt), 1.0)
    # transposing both factors is the full transpose
    assert np.allclose(partial_transpose(pt, qubit="A"), rho.T)


def test_conjugate_map_returns_branch_weight():
    rho = projector(ket(0, 0))
    branch, p = conjugate_map(rho, np.diag([0.6, 0, 0, 0]))
    assert p == pytest.approx(0.36)
    assert branch[0, 0] == pytest.approx(0.36)


@settings(max_examples=60, deadline=None)
@given(seeds, hst.sampled_from([2, 4]))
def test_eigensystem_reconstructs_random_hermitian(seed, dim):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = g + g.conj().T
    w, v = hermitian_eigensystem(h)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v.conj().T @ v, np.eye(dim), atol=1e-12)
    assert np.allclose((v * w) @ v.conj().T, h, atol=1e-11)
    assert np.allclose(w, np.linalg.eigvalsh(h), atol=1e-11)


def test_eigensystem_reconstruction_over_many_matrices():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = g + g.conj().T
        w, v = hermitian_eigensystem(h)
        worst = max(worst, np.linalg.norm((v * w) @ v.conj().T - h))
    assert worst <= 1e-10


def test_eigensystem_degenerate_and_diagonal_inputs():
    w, v = hermitian_eigensystem(np.eye(4))
    assert np.allclose(w, 1.0)
    assert np.allclose(v.conj().T @ v, np.eye(4))
    w, _ = hermitian_eigensystem(np.diag([3.0, -1.0, 2.0, 0.0]))
    assert np.allclose(w, [-1, 0, 2, 3])


def test_eigensystem_of_pauli_y():
    w, v = hermitian_eigensystem(SIGMA_Y)
    assert np.allclose(w, [-1, 1], atol=1e-15)
    assert np.allclose(SIGMA_Y @ v[:, 1], v[:, 1])


def test_non_hermitian_input_reports_asymmetry():
    m = np.array([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(NonHermitianError) as err:
        hermitian_eigensystem(m)
    assert err.value.asymmetry == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_singular_values_match_lapack(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(singular_values(m), np.linalg.svd(m, compute_uv=False), atol=1e-12)


def test_density_matrix_checks():
    rho = random_density_matrix(np.random.default_rng(0), rank=2)
    assert is_density_matrix(rho)
    check_density_matrix(rho, dim=4)
    with pytest.raises(InvalidStateError):
        check_density_matrix(2 * rho)
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.diag([1.2, -0.2, 0, 0]))
    with pytest.raises(InvalidStateError, match="Hermitian"):
        check_density_matrix(rho + np.triu(np.ones((4, 4)), 1) * 1e-6)
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(3) / 3)


def test_random_states_are_valid():
    rng = np.random.default_rng(11)
    for rank in (1, 2, 4):
        rho = random_density_matrix(rng, rank=rank)
        assert is_density_matrix(rho)
        assert np.linalg.matrix_rank(rho, tol=1e-10) == rank
    psi = random_pure_state(rng)
    assert np.isclose(np.linalg.norm(psi), 1.0)
