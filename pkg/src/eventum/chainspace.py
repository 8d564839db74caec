"""Finite event chains, vectors over them, and expectation engines.

A chain is a strictly increasing tuple of event times inside the window
[0, r).  A vector evaluated at a chain of n events carries one two-level
apparatus factor per event; tensor factors are ordered latest event
slowest, so flattening the apparatus factors gives an index whose bit
(k-1) is the state of the fiber attached to the k-th earliest event.
In particular the earliest event lives on the least significant bit.

The squared coherent weight nu^n * exp(-nu*r) is exactly the density of
a rate-nu Poisson process on [0, r), which is what both expectation
engines lean on:

* the quadrature engine collapses the simplex integral for each event
  count n to the Poisson weight exp(-nu*t) (nu*t)^n / n!, because the
  conditioned integrand depends on the chain only through the number of
  events before t (events at or after t are untouched and marginalize
  to exactly 1);
* the Monte Carlo engine samples chains from that same Poisson law, so
  the importance weights cancel exactly and each sample contributes the
  normalized branch value of the observable.

Both reductions are pinned to the generic dense route (semi-tensor
application of the interaction at every event) by the test suite.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from . import qmat
from .atom import AtomParams, build_dilation

OBSERVABLE_NAMES = ("N0", "N1", "Pi_empty", "Pi_0", "Pi_1")

ObservableSpec = Union[str, np.ndarray]

_DENSE_MATRIX_CAP = 12


@dataclass(frozen=True)
class Chain:
    """Finite ordered set of event times."""

    times: tuple[float, ...] = ()

    def __post_init__(self):
        ts = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", ts)
        if any(not math.isfinite(t) for t in ts):
            raise ValueError(f"chain times must be finite, got {ts}")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"chain times must be strictly increasing, got {ts}")

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    def count_before(self, t: float) -> int:
        return bisect.bisect_left(self.times, t)

    def split(self, t: float) -> tuple["Chain", "Chain"]:
        return chain_split(self, t)


def chain_split(c: Chain, t: float) -> tuple[Chain, Chain]:
    """Partition a chain into (events before t, events at or after t)."""
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"split time must be finite and nonnegative, got {t}")
    k = c.count_before(t)
    return Chain(c.times[:k]), Chain(c.times[k:])


@dataclass(frozen=True)
class CoherentParams:
    """Window [0, r) and intensity nu of the reference coherent vector."""

    nu: float
    r: float

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be positive and finite, got {self.nu}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"r must be positive and finite, got {self.r}")


@dataclass(frozen=True)
class ChainVector:
    """Evaluation of a vector at one chain.

    tensor is either 1-d of length 2^n (apparatus factors only) or 2-d of
    shape (2, 2^n) (atom factor on the slow axis).
    """

    chain: Chain
    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=complex)
        object.__setattr__(self, "tensor", t)
        dim = 2 ** len(self.chain)
        if t.ndim == 1:
            ok = t.shape == (dim,)
        elif t.ndim == 2:
            ok = t.shape == (2, dim)
        else:
            ok = False
        if not ok:
            raise ValueError(f"tensor shape {t.shape} does not match chain of {len(self.chain)} events")

    def norm_squared(self) -> float:
        return float(np.vdot(self.tensor, self.tensor).real)


def coherent_eval(cp: CoherentParams, c: Chain) -> ChainVector:
    """Reference coherent vector at a chain: every fiber in state |0>,
    scalar weight nu^(n/2) * exp(-nu*r/2)."""
    if any(not (0 <= z < cp.r) for z in c):
        raise ValueError(f"chain {c.times} is not inside the window [0, {cp.r})")
    vec = np.zeros(2 ** len(c), dtype=complex)
    vec[0] = cp.nu ** (len(c) / 2.0) * math.exp(-cp.nu * cp.r / 2.0)
    return ChainVector(c, vec)


@dataclass(frozen=True)
class AdaptedOperator:
    """A block acting at every event before ``t``, identity afterwards."""

    t: float
    block: Union[np.ndarray, Callable[[float], np.ndarray]]

    def apply(self, v: ChainVector) -> ChainVector:
        return semi_tensor_apply(self.block, v.chain, self.t, v)


def _block_at(block, z: float) -> np.ndarray:
    b = np.asarray(block(z) if callable(block) else block, dtype=complex)
    if b.shape != (4, 4):
        raise ValueError(f"event block must be 4x4 on atom (x) fiber, got shape {b.shape}")
    return b


def semi_tensor_apply(block, c: Chain, t: float, v: ChainVector) -> ChainVector:
    """Apply a 4x4 atom (x) fiber block at every event of ``c`` before ``t``,
    in increasing time order, sharing the atom factor across events.

    ``block`` is a fixed matrix or a callable of the event time.
    """
    if v.tensor.ndim != 2:
        raise ValueError("semi_tensor_apply needs a vector with an atom factor (2-d tensor)")
    n = len(c)
    arr = v.tensor.reshape((2,) + (2,) * n)
    for k, z in enumerate(c.times, start=1):
        if z >= t:
            break
        b = _block_at(block, z)
        axis = n - k + 1  # event k sits on the (k-1)-th bit, axes run slow to fast
        moved = np.moveaxis(arr, axis, 1)
        shape = moved.shape
        out = (b @ moved.reshape(4, -1)).reshape(shape)
        arr = np.moveaxis(out, 1, axis)
    return ChainVector(c, arr.reshape(2, 2 ** n))


def psi_t_eval(p: AtomParams, r: float, t: float, c: Chain) -> ChainVector:
    """Conditioned vector at time t, evaluated at a chain: the interaction
    unitary applied at every event before t to (initial atom state) (x)
    (coherent vector over [0, r))."""
    coh = coherent_eval(CoherentParams(p.nu, r), c)
    start = ChainVector(c, np.outer(p.psi, coh.tensor))
    return semi_tensor_apply(lambda z: build_dilation(p, z).S, c, t, start)


def psi_t_closed(p: AtomParams, r: float, t: float, c: Chain) -> ChainVector:
    """Closed evaluation of the same vector: if no event precedes t the
    initial state rides the coherent weight unchanged; otherwise the first
    event carries the one decay quantum (ground atom, fiber |1> amplitude
    u*beta) and every other fiber stays |0>."""
    n = len(c)
    n_t = c.count_before(t)
    coeff = p.nu ** (n / 2.0) * math.exp(-p.nu * r / 2.0)
    tensor = np.zeros((2, 2 ** n), dtype=complex)
    if n_t == 0:
        tensor[:, 0] = coeff * p.psi
    else:
        u1 = p.u(c.times[0])
        tensor[0, 0] = coeff * p.alpha
        tensor[0, 1] = coeff * u1 * p.beta
    return ChainVector(c, tensor)


def _sparse_branches(p: AtomParams, t: float, c: Chain) -> list[tuple[int, np.ndarray]]:
    """Normalized branch decomposition of the conditioned vector: pairs
    (apparatus bit pattern, atom vector), with the coherent weight stripped."""
    n_t = c.count_before(t)
    if n_t == 0:
        return [(0, p.psi)]
    u1 = p.u(c.times[0])
    return [(0, p.alpha * qmat.ket_g()), (1, u1 * p.beta * qmat.ket_g())]


# -- diagonal observables on the apparatus factors ---------------------------

def _mask(n_t: int) -> int:
    return (1 << n_t) - 1


def _diag_value(name: str, bits: int, n_t: int) -> float:
    low = bits & _mask(n_t)
    if name == "N1":
        return float(low.bit_count())
    if name == "N0":
        return float(n_t - low.bit_count())
    if name == "Pi_empty":
        return 1.0 if n_t == 0 else 0.0
    if name == "Pi_0":
        return 1.0 if n_t >= 1 and low == 0 else 0.0
    if name == "Pi_1":
        return 1.0 if n_t >= 1 and low == 1 else 0.0
    if name == "identity":
        return 1.0
    raise ValueError(f"unknown observable {name!r}; valid names: {OBSERVABLE_NAMES}")


def _resolve(observable: ObservableSpec):
    """Return ("diag", name) for a named counting observable or
    ("atom", X) for a 2x2 Hermitian atom observable extended by identity."""
    if isinstance(observable, str):
        if observable not in OBSERVABLE_NAMES and observable != "identity":
            raise ValueError(f"unknown observable {observable!r}; valid names: {OBSERVABLE_NAMES}")
        return ("diag", observable)
    x = qmat.require_hermitian(np.asarray(observable, dtype=complex), "atom observable")
    if x.shape != (2, 2):
        raise ValueError(f"atom observable must be 2x2, got shape {x.shape}")
    return ("atom", x)


def number_operator_diag(k: int, t: float, c: Chain) -> np.ndarray:
    """Diagonal of the count-of-outcome-k operator over the chain's
    apparatus factors, as a vector of length 2^n."""
    if k not in (0, 1):
        raise ValueError(f"outcome label must be 0 or 1, got {k}")
    n, n_t = len(c), c.count_before(t)
    idx = np.arange(2 ** n, dtype=np.uint64)
    low = np.bitwise_count(idx & np.uint64(_mask(n_t)))
    ones = low.astype(float)
    return (ones if k == 1 else n_t - ones).astype(complex)


def number_operator_eval(k: int, t: float, c: Chain) -> np.ndarray:
    """Dense diagonal matrix form of :func:`number_operator_diag`."""
    if len(c) > _DENSE_MATRIX_CAP:
        raise ValueError(f"dense matrix limited to chains of {_DENSE_MATRIX_CAP} events, got {len(c)}")
    return np.diag(number_operator_diag(k, t, c))


def _outcomes_of(record_or_outcomes) -> tuple[int, ...]:
    outcomes = getattr(record_or_outcomes, "outcomes", record_or_outcomes)
    outcomes = tuple(int(k) for k in outcomes)
    if any(k not in (0, 1) for k in outcomes):
        raise ValueError(f"outcomes must be 0/1 symbols, got {outcomes}")
    return outcomes


def projector_diag(record_or_outcomes, t: float, c: Chain) -> np.ndarray:
    """Diagonal of the observation projector: matches the outcome pattern
    against the events before t (earliest event on the lowest bit) and is
    identity on later fibers; the zero vector when the counts differ."""
    outcomes = _outcomes_of(record_or_outcomes)
    n, n_t = len(c), c.count_before(t)
    idx = np.arange(2 ** n, dtype=np.uint64)
    if len(outcomes) != n_t:
        return np.zeros(2 ** n, dtype=complex)
    pattern = sum(k << i for i, k in enumerate(outcomes))
    return ((idx & np.uint64(_mask(n_t))) == np.uint64(pattern)).astype(complex)


def projector_eval(record_or_outcomes, t: float, c: Chain) -> np.ndarray:
    """Dense diagonal matrix form of :func:`projector_diag`."""
    if len(c) > _DENSE_MATRIX_CAP:
        raise ValueError(f"dense matrix limited to chains of {_DENSE_MATRIX_CAP} events, got {len(c)}")
    return np.diag(projector_diag(record_or_outcomes, t, c))


# -- integrand evaluation -----------------------------------------------------

def normalized_integrand(observable: ObservableSpec, p: AtomParams, t: float, c: Chain) -> float:
    """Value of the conditioned expectation density at one chain, with the
    squared coherent weight divided out (so the Poisson law is the measure)."""
    kind, ob = _resolve(observable)
    total = 0.0
    n_t = c.count_before(t)
    for bits, atom_vec in _sparse_branches(p, t, c):
        if kind == "diag":
            total += _diag_value(ob, bits, n_t) * float(np.vdot(atom_vec, atom_vec).real)
        else:
            total += float(np.vdot(atom_vec, ob @ atom_vec).real)
    return total


def dense_integrand(observable: ObservableSpec, p: AtomParams, r: float, t: float, c: Chain) -> float:
    """Same quantity through the generic route: semi-tensor conditioned
    vector and the full diagonal, including the squared coherent weight."""
    kind, ob = _resolve(observable)
    v = psi_t_eval(p, r, t, c).tensor
    if kind == "diag":
        idx = np.arange(2 ** len(c), dtype=np.uint64)
        low = idx & np.uint64(_mask(c.count_before(t)))
        d = np.array([_diag_value(ob, int(b), c.count_before(t)) for b in low])
        return float(np.einsum("aj,j,aj->", v.conj(), d, v).real)
    return float(np.einsum("aj,ab,bj->", v.conj(), ob, v).real)


class QuadratureResult(NamedTuple):
    value: float
    tail_bound: float


class MCResult(NamedTuple):
    estimate: float
    stderr: float


def expectation_analytic(observable: ObservableSpec, p: AtomParams, t: float) -> float:
    """Closed-form expectation of a named counting observable or of an
    atom observable extended by identity."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    kind, ob = _resolve(observable)
    decayed = 1.0 - math.exp(-p.nu * t)
    b2 = abs(p.beta) ** 2
    if kind == "atom":
        g = qmat.ket_g()
        return float((1.0 - decayed) * np.vdot(p.psi, ob @ p.psi).real
                     + decayed * np.vdot(g, ob @ g).real)
    if ob == "N0":
        return p.nu * t - decayed * b2
    if ob == "N1":
        return decayed * b2
    if ob == "Pi_empty":
        return 1.0 - decayed
    if ob == "Pi_0":
        return decayed * abs(p.alpha) ** 2
    if ob == "Pi_1":
        return decayed * b2
    return 1.0  # identity


def expectation_quadrature(observable: ObservableSpec, p: AtomParams, t: float,
                           n_max: int) -> QuadratureResult:
    """Chain-integral expectation, reduced over event counts.

    For each count n <= n_max the simplex integral collapses to the
    Poisson weight exp(-nu*t)(nu*t)^n/n! times the integrand value at any
    representative chain of n events before t (the integrand is constant
    in the event times; events at or after t marginalize to 1).  The
    neglected mass beyond n_max is returned as tail_bound.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    _resolve(observable)
    lam = p.nu * t
    w = math.exp(-lam)
    total = 0.0
    covered = 0.0
    for n in range(n_max + 1):
        if n > 0:
            w *= lam / n
        if w > 0.0:
            rep = Chain(tuple(t * (i + 1) / (n + 1) for i in range(n)))
            total += w * normalized_integrand(observable, p, t, rep)
        covered += w
    return QuadratureResult(total, max(0.0, 1.0 - covered))


def sample_poisson_chain(nu: float, window: tuple[float, float], rng: np.random.Generator) -> Chain:
    """Rate-nu Poisson chain on [window[0], window[1]): Poisson count,
    sorted uniform times, ties re-drawn."""
    t0, t1 = window
    if not (t1 > t0 >= 0):
        raise ValueError(f"window must satisfy 0 <= t0 < t1, got {window}")
    n = int(rng.poisson(nu * (t1 - t0)))
    while True:
        times = np.sort(rng.uniform(t0, t1, size=n))
        if n < 2 or bool(np.all(np.diff(times) > 0)):
            return Chain(tuple(times))


def mc_expectations(observables: Sequence[ObservableSpec], p: AtomParams, t: float,
                    samples: int, seed: int, streams: int = 1) -> list[MCResult]:
    """Monte Carlo expectations of several observables over one shared set
    of sampled chains.

    Chains are drawn from the rate-nu Poisson law on [0, t), which equals
    the squared coherent weight, so every sample contributes the
    normalized integrand directly (the importance weight cancels exactly).
    Each of ``streams`` worker streams gets an independent generator
    spawned from the root seed (numpy SeedSequence.spawn); per-stream sums
    are merged by summation, so results are reproducible for a fixed
    (seed, streams) pair.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if streams < 1:
        raise ValueError(f"streams must be >= 1, got {streams}")
    if not (t > 0):
        raise ValueError(f"t must be positive, got {t}")
    resolved = [_resolve(ob) for ob in observables]
    sums = np.zeros(len(observables))
    sums_sq = np.zeros(len(observables))
    base, extra = divmod(samples, streams)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(streams)):
        rng = np.random.default_rng(child)
        for _ in range(base + (1 if i < extra else 0)):
            c = sample_poisson_chain(p.nu, (0.0, t), rng)
            n_t = c.count_before(t)
            branches = [(bits, av, float(np.vdot(av, av).real))
                        for bits, av in _sparse_branches(p, t, c)]
            for j, (kind, ob) in enumerate(resolved):
                if kind == "diag":
                    f = sum(_diag_value(ob, bits, n_t) * w for bits, _, w in branches)
                else:
                    f = sum(float(np.vdot(av, ob @ av).real) for _, av, _ in branches)
                sums[j] += f
                sums_sq[j] += f * f
    means = sums / samples
    var = np.maximum(sums_sq / samples - means ** 2, 0.0)
    stderr = np.sqrt(var / samples)
    return [MCResult(float(m), float(s)) for m, s in zip(means, stderr)]


def expectation_mc(observable: ObservableSpec, p: AtomParams, t: float,
                   samples: int, seed: int, streams: int = 1) -> MCResult:
    """Monte Carlo expectation of one observable; see :func:`mc_expectations`."""
    return mc_expectations([observable], p, t, samples, seed, streams)[0]
