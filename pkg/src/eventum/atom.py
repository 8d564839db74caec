"""Two-level atom decaying at rate nu, and its one-event unitary dilation.

The decay operator is J = u |g><e| with u = exp(-i*epsilon*t) a phase (the
default epsilon = 0 makes u = 1).  J is nilpotent (J^2 = 0) and JJ+ + J+J = 1,
which is exactly what makes the scattering block matrix

    S = [[JJ+, J+],
         [J,  J+J]]

unitary on atom (x) apparatus.  All module-level conventions (basis order,
kron index speed) come from :mod:`eventum.qmat`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat

NORM_ATOL = 1e-9


@dataclass(frozen=True)
class AtomParams:
    """Model parameters: decay rate, initial amplitudes, detuning phase rate."""

    nu: float
    alpha: complex
    beta: complex
    epsilon: float = 0.0

    def __post_init__(self):
        if not (self.nu > 0 and np.isfinite(self.nu)):
            raise ValueError(f"nu must be positive and finite, got {self.nu}")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"initial amplitudes must be normalized, |alpha|^2+|beta|^2 = {norm}")

    @property
    def psi(self) -> np.ndarray:
        return qmat.atom_ket(self.alpha, self.beta)

    def u(self, t: float) -> complex:
        return complex(np.exp(-1j * self.epsilon * t))


@dataclass(frozen=True)
class DilationOps:
    """Operators of the one-event dilation at a fixed interaction time.

    J is the 2x2 decay operator, S the 4x4 interaction unitary on
    atom (x) apparatus, F = S|0> the 4x2 isometry (columns indexed by the
    atom basis), and L the 4x2 stacked pair sqrt(nu)*(-J+J, J) whose
    blocks are the two dissipation components of the master equation.
    """

    J: np.ndarray
    S: np.ndarray
    F: np.ndarray
    L: np.ndarray

    @property
    def f0(self) -> np.ndarray:
        """Atom block of F paired with apparatus outcome 0."""
        return self.F[0::2, :]

    @property
    def f1(self) -> np.ndarray:
        """Atom block of F paired with apparatus outcome 1."""
        return self.F[1::2, :]

    @property
    def l_components(self) -> tuple[np.ndarray, np.ndarray]:
        return self.L[0:2, :], self.L[2:4, :]


def build_dilation(p: AtomParams, t: float = 0.0) -> DilationOps:
    """Assemble J, S, F, L for an interaction at time ``t``."""
    u = p.u(t)
    J = u * qmat.outer(qmat.ket_g(), qmat.ket_e())
    JJd = J @ qmat.adjoint(J)
    JdJ = qmat.adjoint(J) @ J
    # S = sum_kl S_kl (x) |k><l| over the apparatus index, atom on the slow index
    k0, k1 = qmat.ket0(), qmat.ket1()
    S = (qmat.kron(JJd, qmat.outer(k0, k0)) + qmat.kron(qmat.adjoint(J), qmat.outer(k0, k1))
         + qmat.kron(J, qmat.outer(k1, k0)) + qmat.kron(JdJ, qmat.outer(k1, k1)))
    F = S @ qmat.kron(qmat.eye(2), qmat.ket0().reshape(2, 1))
    L = np.vstack([-np.sqrt(p.nu) * JdJ, np.sqrt(p.nu) * J])
    return DilationOps(J=J, S=S, F=F, L=L)


def lindblad_rhs(rho: np.ndarray, ops: DilationOps) -> np.ndarray:
    """Right-hand side -1/2 {L+L, rho} + sum_k L_k rho L_k+ of the master equation."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"rho must be 2x2, got shape {rho.shape}")
    lsum = qmat.adjoint(ops.L) @ ops.L
    blocks = ops.L.reshape(2, 2, 2)
    sandwich = np.einsum("kij,jl,kml->im", blocks, rho, blocks.conj())
    return sandwich - 0.5 * (lsum @ rho + rho @ lsum)


def lindblad_superoperator(ops: DilationOps) -> np.ndarray:
    """4x4 matrix M with M @ vec(rho) = vec(lindblad_rhs(rho)), row-major vec."""
    lsum = qmat.adjoint(ops.L) @ ops.L
    eye2 = qmat.eye(2)
    m = -0.5 * (qmat.kron(lsum, eye2) + qmat.kron(eye2, lsum.T))
    for lk in ops.L.reshape(2, 2, 2):
        m += qmat.kron(lk, lk.conj())
    return m


def analytic_rho(p: AtomParams, t: float) -> np.ndarray:
    """Closed-form state at time t: survival-weighted |psi><psi| plus decayed |g><g|."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    survival = np.exp(-p.nu * t)
    psi = p.psi
    return survival * qmat.outer(psi, psi) + (1.0 - survival) * qmat.outer(qmat.ket_g(), qmat.ket_g())


def spontaneous_decay_law(p: AtomParams, t: float) -> tuple[float, float]:
    """(survival, decay) probabilities of the exponential decay time at rate nu."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    s = float(np.exp(-p.nu * t))
    return s, 1.0 - s


def integrate_master(p: AtomParams, rho0: np.ndarray, t_end: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step classical RK4 trajectory of the master equation.

    The generator is constant, so the four RK4 stages collapse exactly to
    the degree-4 polynomial step matrix 1 + hM + (hM)^2/2 + (hM)^3/6
    + (hM)^4/24, precomputed once and applied per step.  Steps of size dt,
    with one shorter final step when t_end is not a multiple of dt.
    Returns (times, rhos) with rhos[k] the state at times[k]; rhos[0] is
    rho0.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise ValueError(f"rho0 must be 2x2, got shape {rho0.shape}")
    if not (dt > 0):
        raise ValueError(f"dt must be positive, got {dt}")
    if dt >= t_end:
        raise ValueError(f"dt={dt} must be smaller than t_end={t_end}")
    m = lindblad_superoperator(build_dilation(p))

    def rk4_step_matrix(h):
        hm = h * m
        out = np.eye(4, dtype=complex)
        term = np.eye(4, dtype=complex)
        for k in (1, 2, 3, 4):
            term = term @ hm / k
            out += term
        return out

    n_full = int(np.floor(t_end / dt + 1e-12))
    rem = t_end - n_full * dt
    times = np.array([i * dt for i in range(n_full + 1)])
    out = np.empty((n_full + 1 + (rem > 1e-9 * dt), 4), dtype=complex)
    step = rk4_step_matrix(dt)
    y = rho0.reshape(4).copy()
    out[0] = y
    for i in range(1, n_full + 1):
        y = step @ y
        out[i] = y
    if rem > 1e-9 * dt:
        out[-1] = rk4_step_matrix(rem) @ y
        times = np.append(times, t_end)
    times[-1] = t_end
    return times, out.reshape(-1, 2, 2)


def channel_apply(rho: np.ndarray, ops: DilationOps) -> np.ndarray:
    """One full interaction followed by discarding the apparatus:
    rho -> JJ+ rho JJ+ + J rho J+ (always lands on |g><g| for unit trace)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"rho must be 2x2, got shape {rho.shape}")
    jjd = ops.J @ qmat.adjoint(ops.J)
    return jjd @ rho @ jjd + ops.J @ rho @ qmat.adjoint(ops.J)
