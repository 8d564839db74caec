"""Dense complex matrix plumbing shared by every other module.

Everything is a plain ``numpy.ndarray`` with dtype complex128.  Basis
conventions are fixed package-wide: the atom basis is ordered (ground,
excited), the two-level apparatus basis is ordered (|0>, |1>), and
``kron`` puts its left factor on the slower-varying index, so the
composite atom (x) apparatus basis reads (g0, g1, e0, e1).
"""

from __future__ import annotations

import numpy as np

ATOL = 1e-12


def ket(*amplitudes) -> np.ndarray:
    return np.array(amplitudes, dtype=complex)


def ket_g() -> np.ndarray:
    return ket(1, 0)


def ket_e() -> np.ndarray:
    return ket(0, 1)


def ket0() -> np.ndarray:
    return ket(1, 0)


def ket1() -> np.ndarray:
    return ket(0, 1)


def atom_ket(alpha: complex, beta: complex) -> np.ndarray:
    """State alpha|g> + beta|e>; callers are responsible for normalization."""
    return ket(alpha, beta)


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a><b| as a matrix."""
    return np.outer(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex).conj())


def proj0() -> np.ndarray:
    return outer(ket0(), ket0())


def proj1() -> np.ndarray:
    return outer(ket1(), ket1())


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=complex).conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with the left factor on the slower index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def trace(a: np.ndarray) -> complex:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"trace needs a square matrix, got shape {a.shape}")
    return complex(np.trace(a))


def partial_trace(a: np.ndarray, dims: tuple[int, int], which: int) -> np.ndarray:
    """Trace out factor ``which`` (0 = left/slow, 1 = right/fast) of a
    bipartite operator on a space of shape dims[0]*dims[1]."""
    d0, d1 = dims
    a = np.asarray(a, dtype=complex)
    if a.shape != (d0 * d1, d0 * d1):
        raise ValueError(f"partial_trace: operator shape {a.shape} does not match dims {dims}")
    t = a.reshape(d0, d1, d0, d1)
    if which == 0:
        return np.trace(t, axis1=0, axis2=2)
    if which == 1:
        return np.trace(t, axis1=1, axis2=3)
    raise ValueError(f"partial_trace: which must be 0 or 1, got {which}")


def is_hermitian(a: np.ndarray, atol: float = ATOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.all(np.abs(a - a.conj().T) <= atol))


def is_unitary(a: np.ndarray, atol: float = ATOL) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.all(np.abs(a.conj().T @ a - np.eye(a.shape[0])) <= atol))


def require_hermitian(a: np.ndarray, name: str = "matrix", atol: float = ATOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, atol):
        raise ValueError(f"{name} must be Hermitian within {atol}")
    return a


def hermitian_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Ascending real eigenvalues; used for positivity checks."""
    return np.linalg.eigvalsh(require_hermitian(a))
