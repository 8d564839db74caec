"""Pseudo-Hilbert consistency layer.

The two-level fiber is padded to a four-dimensional column (scalar, two
fiber components, scalar), carrying the indefinite metric eta that swaps
the two scalar slots.  Conjugating the padded interaction by a Weyl
triangle centered on the coherent amplitude produces a unit upper
block-triangular operator whose off-diagonal column is exactly the
dissipation pair of the master equation, and the quadratic form of its
gauge image reproduces the master-equation right-hand side.  Everything
here is finite matrix algebra used as an independent route to the same
dynamics; layout is atom slowest, then the padded fiber.
"""

from __future__ import annotations

import numpy as np

from . import qmat
from .atom import AtomParams, build_dilation, lindblad_rhs


def pseudo_metric() -> np.ndarray:
    """eta on the padded fiber: identity on the middle block, the two
    scalar slots swapped.  Hermitian and its own inverse."""
    eta = np.zeros((4, 4), dtype=complex)
    eta[0, 3] = eta[3, 0] = 1.0
    eta[1, 1] = eta[2, 2] = 1.0
    return eta


def extended_metric() -> np.ndarray:
    """eta tensored with the atom identity (atom on the slow index)."""
    return qmat.kron(qmat.eye(2), pseudo_metric())


def star(k: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Metric adjoint eta K+ eta."""
    k = np.asarray(k, dtype=complex)
    if k.shape != eta.shape:
        raise ValueError(f"operator shape {k.shape} does not match metric shape {eta.shape}")
    return eta @ qmat.adjoint(k) @ eta


def gauge_vector() -> np.ndarray:
    """Null gauge column (0, 0, 0, 1): its metric square vanishes."""
    return np.array([0, 0, 0, 1], dtype=complex)


def coherent_xi(nu: float) -> np.ndarray:
    """Fiber amplitude sqrt(nu) |0> that the Weyl triangle is centered on."""
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    return np.array([np.sqrt(nu), 0.0], dtype=complex)


def weyl(xi: np.ndarray) -> np.ndarray:
    """Unit upper-triangular Weyl matrix of a fiber amplitude:
    top row (1, -xi+, -|xi|^2/2), middle block identity with column xi."""
    xi = np.asarray(xi, dtype=complex).reshape(2)
    z = np.eye(4, dtype=complex)
    z[0, 1:3] = -xi.conj()
    z[0, 3] = -0.5 * float(np.vdot(xi, xi).real)
    z[1:3, 3] = xi
    return z


def _fiber_unit(a: int, b: int) -> np.ndarray:
    e = np.zeros((4, 4), dtype=complex)
    e[a, b] = 1.0
    return e


def padded_interaction(s: np.ndarray) -> np.ndarray:
    """Trivial padding diag(1, S, 1) of the 4x4 interaction to the padded
    fiber, as an 8x8 on atom (x) padded fiber."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (4, 4):
        raise ValueError(f"interaction must be 4x4, got shape {s.shape}")
    out = qmat.kron(qmat.eye(2), _fiber_unit(0, 0) + _fiber_unit(3, 3))
    for k in (0, 1):
        for l in (0, 1):
            out += qmat.kron(s[k::2, l::2], _fiber_unit(1 + k, 1 + l))
    return out


def extend_fiber_op(z: np.ndarray) -> np.ndarray:
    """Pad a 4x4 fiber operator with the atom identity."""
    return qmat.kron(qmat.eye(2), np.asarray(z, dtype=complex))


def transform_interaction(s: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Dress the padded interaction by the Weyl triangle: Z* diag(1,S,1) Z,
    an 8x8 unit upper block-triangular operator."""
    zz = extend_fiber_op(weyl(xi))
    return star(zz, extended_metric()) @ padded_interaction(s) @ zz


def coupling_from_scattering(s: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Stacked coupling pair (S - 1) applied to the fiber amplitude; for
    the decay interaction this is exactly sqrt(nu) * (-J+J, J)."""
    s = np.asarray(s, dtype=complex)
    xi = np.asarray(xi, dtype=complex).reshape(2, 1)
    return ((s - np.eye(4)) @ qmat.kron(qmat.eye(2), xi)).reshape(2, 2, 2).swapaxes(0, 1).reshape(4, 2)


def generator(l: np.ndarray) -> np.ndarray:
    """Unit upper block-triangular generator of the dressed evolution:
    top row (1, -L*, -L*L/2), middle identity with column L.  Metric
    unitary: star(G) G = 1."""
    l = np.asarray(l, dtype=complex)
    if l.shape != (4, 2):
        raise ValueError(f"coupling pair must be 4x2, got shape {l.shape}")
    blocks = l.reshape(2, 2, 2)
    lsum = qmat.adjoint(l) @ l
    out = qmat.kron(qmat.eye(2), _fiber_unit(0, 0) + _fiber_unit(3, 3))
    out += qmat.kron(qmat.eye(2), _fiber_unit(1, 1) + _fiber_unit(2, 2))
    out += qmat.kron(-0.5 * lsum, _fiber_unit(0, 3))
    for k in (0, 1):
        out += qmat.kron(-qmat.adjoint(blocks[k]), _fiber_unit(0, 1 + k))
        out += qmat.kron(blocks[k], _fiber_unit(1 + k, 3))
    return out


def gauge_image(g: np.ndarray) -> np.ndarray:
    """Column of the generator along the gauge vector, an 8x2 whose fiber
    blocks read (-L*L/2, L_0, L_1, 1)."""
    g = np.asarray(g, dtype=complex)
    if g.shape != (8, 8):
        raise ValueError(f"generator must be 8x8, got shape {g.shape}")
    return g @ qmat.kron(qmat.eye(2), gauge_vector().reshape(4, 1))


def star_quadratic_rhs(rho: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Master-equation right-hand side recovered from the gauge image:
    the metric pairing swaps the two scalar blocks, so the quadratic form
    evaluates to 1.rho.(-L*L/2) + sum_k L_k rho L_k+ + (-L*L/2).rho.1."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"rho must be 2x2, got shape {rho.shape}")
    f = gauge_image(g)
    blocks = [f[a::4, :] for a in range(4)]
    swap = (3, 1, 2, 0)
    out = np.zeros((2, 2), dtype=complex)
    for a in range(4):
        out += blocks[swap[a]] @ rho @ qmat.adjoint(blocks[a])
    return out


def is_unit_upper_triangular(k: np.ndarray, atol: float = 1e-12) -> bool:
    """Block pattern test against the (scalar, fiber, scalar) partition:
    nothing below the block diagonal, identity scalar corner blocks.  The
    middle diagonal block is unconstrained (it is S for the dressed
    interaction, the identity for the Weyl triangle and the generator)."""
    k = np.asarray(k, dtype=complex)
    if k.shape == (4, 4):
        k = extend_fiber_op(k)
    if k.shape != (8, 8):
        return False
    blocks = {(a, b): k[a::4, b::4] for a in range(4) for b in range(4)}
    eye2 = np.eye(2)
    below = [np.abs(blocks[ab]).max() for ab in ((1, 0), (2, 0), (3, 0), (3, 1), (3, 2))]
    corners = [np.abs(blocks[(0, 0)] - eye2).max(), np.abs(blocks[(3, 3)] - eye2).max()]
    return max(below) <= atol and max(corners) <= atol


def consistency_checks(p: AtomParams, seed: int = 0, perturb_s: float = 0.0,
                       density_draws: int = 50) -> list[tuple[str, float, bool]]:
    """Run the whole identity battery at 1e-12; returns (name, max
    deviation, passed) triples.  ``perturb_s`` adds that amount to one
    entry of the interaction before checking (a deliberate negative
    control: any nonzero value must fail the unitarity check)."""
    tol = 1e-12
    rng = np.random.default_rng(seed)
    ops = build_dilation(p)
    s = ops.S.copy()
    s[0, 0] += perturb_s
    eta = pseudo_metric()
    eta8 = extended_metric()
    xi = coherent_xi(p.nu)
    checks: list[tuple[str, float, bool]] = []

    def add(name: str, dev: float):
        checks.append((name, float(dev), bool(dev <= tol)))

    add("metric_involution", max(np.abs(eta - qmat.adjoint(eta)).max(), np.abs(eta @ eta - np.eye(4)).max()))
    add("gauge_null", abs(gauge_vector().conj() @ eta @ gauge_vector()))
    k_rand = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    add("star_involution", np.abs(star(star(k_rand, eta8), eta8) - k_rand).max())
    add("scattering_unitary", np.abs(qmat.adjoint(s) @ s - np.eye(4)).max())
    z = weyl(xi)
    add("weyl_star_unitary", np.abs(star(z, eta) @ z - np.eye(4)).max())
    add("defect_identity", np.abs(qmat.adjoint(s - np.eye(4)) @ (s - np.eye(4)) - 2 * (np.eye(4) - s)).max())
    l = coupling_from_scattering(s, xi)
    add("coupling_pair", np.abs(l - ops.L).max())
    dressed = transform_interaction(s, xi)
    expected = padded_interaction(s)
    expected += qmat.kron(-0.5 * (qmat.adjoint(l) @ l), _fiber_unit(0, 3))
    for k in (0, 1):
        lk = l[2 * k:2 * k + 2, :]
        expected += qmat.kron(qmat.adjoint(lk), _fiber_unit(0, 1 + k))
        expected += qmat.kron(lk, _fiber_unit(1 + k, 3))
    add("dressed_interaction_blocks", np.abs(dressed - expected).max())
    g = generator(ops.L)
    add("generator_star_unitary", np.abs(star(g, eta8) @ g - np.eye(8)).max())
    f = gauge_image(g)
    lsum = qmat.adjoint(ops.L) @ ops.L
    f_blocks = [f[a::4, :] for a in range(4)]
    dev_f = max(np.abs(f_blocks[0] + 0.5 * lsum).max(),
                np.abs(f_blocks[1] - ops.L[0:2, :]).max(),
                np.abs(f_blocks[2] - ops.L[2:4, :]).max(),
                np.abs(f_blocks[3] - np.eye(2)).max())
    add("gauge_image_blocks", dev_f)
    dev_rhs = 0.0
    for _ in range(density_draws):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        dev_rhs = max(dev_rhs, float(np.abs(star_quadratic_rhs(rho, g) - lindblad_rhs(rho, ops)).max()))
    add("master_equation_rhs", dev_rhs)
    return checks
