"""Conditioning on the counting record.

An observation record up to time t is the chain of event times together
with the 0/1 outcome read at each event.  For this model only three
record classes have positive probability:

* ``Empty``    -- no event yet; the conditional atom state is still psi;
* ``AllZero``  -- events happened, every readout was 0;
* ``FirstOne`` -- the first event read 1, every later one read 0.

Any other outcome pattern is rejected at construction.  Conditional
expectations are scalars on each class, the jump coefficients replay them
as a piecewise-constant series, and the whole tower closes back onto the
unconditional master-equation state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmat
from .atom import AtomParams, analytic_rho, build_dilation
from .chainspace import Chain, expectation_quadrature, sample_poisson_chain

EMPTY = "Empty"
ALL_ZERO = "AllZero"
FIRST_ONE = "FirstOne"

_ZERO_BRANCH_EPS = 1e-14


@dataclass(frozen=True)
class ObservationRecord:
    """Event times plus their 0/1 readouts, in time order."""

    chain: Chain
    outcomes: tuple[int, ...] = ()

    def __post_init__(self):
        outcomes = tuple(int(k) for k in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        if len(outcomes) != len(self.chain):
            raise ValueError(
                f"record must pair every event with an outcome: {len(self.chain)} events, {len(outcomes)} outcomes")
        if any(k not in (0, 1) for k in outcomes):
            raise ValueError(f"outcomes must be 0/1 symbols, got {outcomes}")
        if any(k == 1 for k in outcomes[1:]):
            raise ValueError(f"impossible record {outcomes}: a 1 readout can only occur at the first event")

    @property
    def klass(self) -> str:
        if not self.outcomes:
            return EMPTY
        return FIRST_ONE if self.outcomes[0] == 1 else ALL_ZERO

    def __len__(self) -> int:
        return len(self.chain)


@dataclass(frozen=True)
class FilterState:
    """Conditional atom ket given a record observed up to time t."""

    t: float
    record: ObservationRecord
    ket: np.ndarray


@dataclass(frozen=True)
class OutputDistribution:
    """Law of the record up to time t, truncated at n_max events.

    zero_weights[n-1] / one_weights[n-1] are the probabilities of an
    n-event AllZero / FirstOne record; tail_mass is the exact probability
    of more than n_max events.
    """

    p_empty: float
    zero_weights: np.ndarray
    one_weights: np.ndarray
    tail_mass: float

    def total_mass(self) -> float:
        return float(self.p_empty + self.zero_weights.sum() + self.one_weights.sum() + self.tail_mass)


def observation_probabilities(p: AtomParams, t: float) -> tuple[float, float, float]:
    """(P[Empty], P[AllZero], P[FirstOne]) at time t."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    survival = math.exp(-p.nu * t)
    decayed = 1.0 - survival
    return survival, decayed * abs(p.alpha) ** 2, decayed * abs(p.beta) ** 2


def output_distribution(p: AtomParams, t: float, n_max: int) -> OutputDistribution:
    """Per-count record probabilities: the n-event weight is the Poisson
    mass exp(-nu*t)(nu*t)^n/n!, split across the two nonempty classes by
    |alpha|^2 and |beta|^2."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    lam = p.nu * t
    w = math.exp(-lam)
    p_empty = w
    covered = w
    zero_w = np.empty(n_max)
    one_w = np.empty(n_max)
    a2, b2 = abs(p.alpha) ** 2, abs(p.beta) ** 2
    for n in range(1, n_max + 1):
        w *= lam / n
        zero_w[n - 1] = w * a2
        one_w[n - 1] = w * b2
        covered += w
    return OutputDistribution(p_empty, zero_w, one_w, max(0.0, 1.0 - covered))


def sample_observation(p: AtomParams, t: float, rng: np.random.Generator) -> ObservationRecord:
    """Draw one record of the counting measurement up to time t."""
    if not (t > 0):
        raise ValueError(f"t must be positive, got {t}")
    survival = math.exp(-p.nu * t)
    if rng.random() < survival:
        return ObservationRecord(Chain(), ())
    while True:
        c = sample_poisson_chain(p.nu, (0.0, t), rng)
        if len(c) >= 1:
            break
    first = 1 if rng.random() < abs(p.beta) ** 2 else 0
    return ObservationRecord(c, (first,) + (0,) * (len(c) - 1))


def conditional_ket(p: AtomParams, record: ObservationRecord) -> np.ndarray:
    """Atom ket given the record: psi while nothing happened, ground after
    any event (whatever was read)."""
    return p.psi if record.klass == EMPTY else qmat.ket_g()


def filter_state(p: AtomParams, record: ObservationRecord, t: float) -> FilterState:
    return FilterState(t=t, record=record, ket=conditional_ket(p, record))


def conditional_expectation(x: np.ndarray, p: AtomParams, record: ObservationRecord) -> float:
    """<ket| X |ket> on the record's conditional ket; X must be 2x2 Hermitian."""
    x = qmat.require_hermitian(np.asarray(x, dtype=complex), "X")
    if x.shape != (2, 2):
        raise ValueError(f"X must be 2x2, got shape {x.shape}")
    ket = conditional_ket(p, record)
    return float(np.vdot(ket, x @ ket).real)


def conditional_counts(record: ObservationRecord, t: float) -> tuple[int, int]:
    """Conditional values of the two event counters given the record:
    deterministic integers (the type-1 counter is 0 or 1)."""
    n_t = record.chain.count_before(t)
    if n_t == 0:
        return 0, 0
    if record.outcomes[0] == 1:
        return n_t - 1, 1
    return n_t, 0


def tower_check(x: np.ndarray, p: AtomParams, t: float, n_max: int) -> tuple[float, float]:
    """Tower property: class probabilities from the quadrature engine times
    the conditional values, against the master-equation average.

    Returns (conditioned average, trace against the closed-form state).
    """
    x = qmat.require_hermitian(np.asarray(x, dtype=complex), "X")
    p_empty = expectation_quadrature("Pi_empty", p, t, n_max).value
    p_zero = expectation_quadrature("Pi_0", p, t, n_max).value
    p_one = expectation_quadrature("Pi_1", p, t, n_max).value
    g = qmat.ket_g()
    lhs = (p_empty * float(np.vdot(p.psi, x @ p.psi).real)
           + (p_zero + p_one) * float(np.vdot(g, x @ g).real))
    rhs = float(np.trace(x @ analytic_rho(p, t)).real)
    return lhs, rhs


def kappa(x: np.ndarray, p: AtomParams, record: ObservationRecord, event_index: int) -> tuple[float, float]:
    """Jump coefficients (kappa_0, kappa_1) of the conditional expectation
    at the record's event_index-th event (1-based).

    At the first event both readouts reset the conditional value from
    <psi|X|psi> to <g|X|g>.  At later events a 0 readout changes nothing;
    the 1 coefficient is -<g|X|g> (that branch has probability zero but
    the coefficient is still defined).
    """
    x = qmat.require_hermitian(np.asarray(x, dtype=complex), "X")
    if not 1 <= event_index <= len(record):
        raise ValueError(f"event_index must be in 1..{len(record)}, got {event_index}")
    g = qmat.ket_g()
    g_val = float(np.vdot(g, x @ g).real)
    if event_index == 1:
        jump = g_val - float(np.vdot(p.psi, x @ p.psi).real)
        return jump, jump
    return 0.0, -g_val


def sde_replay(x: np.ndarray, p: AtomParams, record: ObservationRecord) -> list[tuple[float, float]]:
    """Piecewise-constant conditional expectation rebuilt from the jump
    coefficients alone: starts at <psi|X|psi>, adds kappa_{read outcome}
    at each event.  The final value must agree with
    :func:`conditional_expectation`."""
    x = qmat.require_hermitian(np.asarray(x, dtype=complex), "X")
    value = float(np.vdot(p.psi, x @ p.psi).real)
    series = [(0.0, value)]
    for i, (z, k) in enumerate(zip(record.chain, record.outcomes), start=1):
        value += kappa(x, p, record, i)[k]
        series.append((float(z), value))
    return series


def renormalized_sigma(p: AtomParams, step_index: int, prior_outcomes: tuple[int, ...] = ()) -> np.ndarray:
    """Branch-normalized propagator block for the step_index-th event.

    Step 1 splits the initial state: the 0-branch block is JJ+ scaled by
    1/|alpha| and the 1-branch block is J scaled by 1/|beta|, with
    zero-probability branches removed.  From step 2 on the atom is in the
    ground state, so only the 0-branch survives (J kills the ground
    state): the block is diag(JJ+, 0) on atom (x) newest fiber, tensored
    with Q on every earlier fiber, where Q is the identity unless one
    amplitude vanishes (then Q collapses to that branch's readout
    projector).  Layout: atom slowest, then fibers newest to oldest.
    """
    if step_index < 1:
        raise ValueError(f"step_index must be >= 1, got {step_index}")
    prior = tuple(int(k) for k in prior_outcomes)
    if len(prior) != step_index - 1:
        raise ValueError(f"step {step_index} needs {step_index - 1} prior outcomes, got {len(prior)}")
    if any(k not in (0, 1) for k in prior):
        raise ValueError(f"prior outcomes must be 0/1 symbols, got {prior}")
    ops = build_dilation(p)
    jjd = ops.J @ qmat.adjoint(ops.J)
    a, b = abs(p.alpha), abs(p.beta)
    if step_index == 1:
        block0 = jjd / a if a > _ZERO_BRANCH_EPS else np.zeros((2, 2), dtype=complex)
        block1 = ops.J / b if b > _ZERO_BRANCH_EPS else np.zeros((2, 2), dtype=complex)
        return qmat.kron(block0, qmat.proj0()) + qmat.kron(block1, qmat.proj1())
    if a <= _ZERO_BRANCH_EPS:
        q = qmat.proj1()
    elif b <= _ZERO_BRANCH_EPS:
        q = qmat.proj0()
    else:
        q = qmat.eye(2)
    out = qmat.kron(jjd, qmat.proj0())
    for _ in range(step_index - 1):
        out = qmat.kron(out, q)
    return out
