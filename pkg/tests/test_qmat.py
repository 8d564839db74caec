"""Matrix helper tests: adjoints, Kronecker structure, partial traces."""

import numpy as np
import pytest

from eventum import qmat


def _random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def test_kets_and_projectors():
    assert np.array_equal(qmat.ket_g(), [1, 0])
    assert np.array_equal(qmat.ket_e(), [0, 1])
    assert np.array_equal(qmat.ket0(), [1, 0])
    assert np.array_equal(qmat.ket1(), [0, 1])
    np.testing.assert_array_equal(qmat.proj0(), np.diag([1.0, 0.0]))
    np.testing.assert_array_equal(qmat.proj1(), np.diag([0.0, 1.0]))
    v = qmat.atom_ket(0.6, 0.8j)
    np.testing.assert_allclose(qmat.outer(v, v), [[0.36, -0.48j], [0.48j, 0.64]], atol=1e-15)


def test_adjoint_involution_and_product_rule():
    rng = np.random.default_rng(11)
    a = _random_matrix(rng, 4)
    b = _random_matrix(rng, 4)
    np.testing.assert_array_equal(qmat.adjoint(qmat.adjoint(a)), a)
    np.testing.assert_allclose(qmat.adjoint(a @ b), qmat.adjoint(b) @ qmat.adjoint(a), atol=1e-14)


def test_matmul_checks_shapes():
    a = np.eye(2)
    b = np.eye(3)
    with pytest.raises(ValueError, match="2"):
        qmat.matmul(a, b)
    np.testing.assert_array_equal(qmat.matmul(a, a), a)


def test_kron_mixed_product_rule():
    # (A kron B)(C kron D) = AC kron BD
    rng = np.random.default_rng(12)
    a, b, c, d = (_random_matrix(rng, 2) for _ in range(4))
    lhs = qmat.kron(a, b) @ qmat.kron(c, d)
    np.testing.assert_allclose(lhs, qmat.kron(a @ c, b @ d), atol=1e-14)


def test_kron_left_factor_is_slow():
    # atom slot varies slowest: |g><g| kron P1 selects index 1 of the 4-basis
    m = qmat.kron(qmat.proj0(), qmat.proj1())
    np.testing.assert_array_equal(m, np.diag([0.0, 1.0, 0.0, 0.0]))


def test_partial_trace_recovers_product_factors():
    rng = np.random.default_rng(13)
    a = _random_matrix(rng, 2)
    b = _random_matrix(rng, 3)
    m = qmat.kron(a, b)
    np.testing.assert_allclose(qmat.partial_trace(m, (2, 3), which=1), a * np.trace(b), atol=1e-13)
    np.testing.assert_allclose(qmat.partial_trace(m, (2, 3), which=0), b * np.trace(a), atol=1e-13)


def test_trace_requires_square():
    with pytest.raises(ValueError):
        qmat.trace(np.ones((2, 3)))


def test_hermitian_and_unitary_predicates():
    h = np.array([[1.0, 2.0 - 1j], [2.0 + 1j, -3.0]])
    assert qmat.is_hermitian(h)
    assert not qmat.is_hermitian(h + np.array([[0, 1e-6], [0, 0]]))
    theta = 0.7
    u = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    assert qmat.is_unitary(u)
    assert not qmat.is_unitary(1.001 * u)
    with pytest.raises(ValueError):
        qmat.require_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_eigenvalues_sorted_real():
    rng = np.random.default_rng(14)
    a = _random_matrix(rng, 5)
    h = a + qmat.adjoint(a)
    w = qmat.hermitian_eigenvalues(h)
    assert w.dtype.kind == "f"
    assert np.all(np.diff(w) >= 0)
    np.testing.assert_allclose(np.sum(w), np.trace(h).real, atol=1e-12)
