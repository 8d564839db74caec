"""FastAPI application wrapping the simulator core.

Each endpoint is stateless: the full experiment configuration rides in
the request, results (and pass/fail verdicts) ride back in the response,
and all randomness is seeded, so identical requests give identical
responses.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, belavkin, qmat
from ..atom import analytic_rho, integrate_master
from ..chainspace import expectation_analytic, expectation_quadrature, mc_expectations
from ..filtering import (
    conditional_counts,
    observation_probabilities,
    sample_observation,
    sde_replay,
)
from .models import (
    BelavkinCheckRequest,
    BelavkinCheckResponse,
    CheckRow,
    DecayRequest,
    DecayResponse,
    DecayRow,
    ExpectRequest,
    ExpectResponse,
    ExpectRow,
    TrajectoriesRequest,
    TrajectoriesResponse,
    TrajectoryRecord,
    TrajectorySummary,
    x_matrix,
)

DECAY_TOLERANCE = 1e-6
IDENTITY_TOLERANCE = 1e-12
MC_FLAG_SIGMAS = 4.0

app = FastAPI(title="eventum", version=__version__)


def _complex_row(m: np.ndarray) -> list[float]:
    out: list[float] = []
    for v in np.asarray(m).reshape(-1):
        out.extend((float(v.real), float(v.imag)))
    return out


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/api/decay", response_model=DecayResponse)
def decay(req: DecayRequest) -> DecayResponse:
    """Closed-form state vs fixed-step RK4 integration over the t grid."""
    try:
        p = req.config.atom_params()
        rho0 = qmat.outer(p.psi, p.psi)
        rows = []
        worst = 0.0
        for t in req.config.t_grid:
            ana = analytic_rho(p, t)
            if t == 0:
                rk = rho0
            else:
                dt = req.config.dt if req.config.dt < t else t / 2.0
                rk = integrate_master(p, rho0, t, dt)[1][-1]
            dev = float(np.abs(ana - rk).max())
            worst = max(worst, dev)
            rows.append(DecayRow(t=t, analytic=_complex_row(ana), rk4=_complex_row(rk), max_abs_dev=dev))
        return DecayResponse(tolerance=DECAY_TOLERANCE, max_abs_dev=worst,
                             passed=worst <= DECAY_TOLERANCE, rows=rows)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/api/expect", response_model=ExpectResponse)
def expect(req: ExpectRequest) -> ExpectResponse:
    """Expectation of one counting observable over the t grid, by the
    requested engine.  The mc engine also computes the closed form and
    flags any point further than 4 standard errors from it."""
    try:
        p = req.config.atom_params()
        rows = []
        flagged = False
        for t in req.config.t_grid:
            if req.engine == "analytic":
                rows.append(ExpectRow(t=t, value=expectation_analytic(req.observable, p, t)))
            elif req.engine == "quadrature":
                est = expectation_quadrature(req.observable, p, t, req.config.n_max)
                rows.append(ExpectRow(t=t, value=est.value, tail_bound=est.tail_bound))
            else:
                if t == 0:
                    rows.append(ExpectRow(t=t, value=expectation_analytic(req.observable, p, t), stderr=0.0))
                    continue
                est = mc_expectations([req.observable], p, t, req.config.samples,
                                      req.config.effective_seed(), req.config.streams)[0]
                exact = expectation_analytic(req.observable, p, t)
                if abs(est.estimate - exact) > MC_FLAG_SIGMAS * est.stderr:
                    flagged = True
                rows.append(ExpectRow(t=t, value=est.estimate, stderr=est.stderr))
        return ExpectResponse(observable=req.observable, engine=req.engine, flagged=flagged, rows=rows)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/api/trajectories", response_model=TrajectoriesResponse)
def trajectories(req: TrajectoriesRequest) -> TrajectoriesResponse:
    """Sampled observation records over [0, last grid time), each with its
    replayed conditional-expectation series and conditional counts."""
    try:
        p = req.config.atom_params()
        x = x_matrix(req.x)
        t_obs = req.config.t_grid[-1]
        if not t_obs > 0:
            raise ValueError(f"the observation window (last t_grid entry) must be positive, got {t_obs}")
        rng = np.random.default_rng(req.config.effective_seed())
        tally = {"Empty": 0, "AllZero": 0, "FirstOne": 0}
        records = []
        for _ in range(req.config.samples):
            rec = sample_observation(p, t_obs, rng)
            tally[rec.klass] += 1
            n0, n1 = conditional_counts(rec, t_obs)
            records.append(TrajectoryRecord(
                times=list(rec.chain.times),
                outcomes=list(rec.outcomes),
                klass=rec.klass,
                eps_series=[(tt, vv) for tt, vv in sde_replay(x, p, rec)],
                counts={"n0": n0, "n1": n1},
            ))
        probs = observation_probabilities(p, t_obs)
        expected = dict(zip(("Empty", "AllZero", "FirstOne"), probs))
        n = req.config.samples
        freqs = {k: tally[k] / n for k in tally}
        ok = all(
            abs(freqs[k] - expected[k]) <= 3.0 * np.sqrt(expected[k] * (1 - expected[k]) / n) + 1e-12
            for k in tally
        )
        summary = TrajectorySummary(samples=n, window=t_obs, frequencies=freqs,
                                    expected=expected, within_3sigma=ok)
        return TrajectoriesResponse(summary=summary, passed=ok, records=records)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/api/belavkin-check", response_model=BelavkinCheckResponse)
def belavkin_check(req: BelavkinCheckRequest) -> BelavkinCheckResponse:
    """Identity battery of the pseudo-Hilbert layer at 1e-12; perturb_s
    deliberately damages the interaction as a negative control."""
    try:
        p = req.config.atom_params()
        rows = [CheckRow(name=n, max_abs_dev=d, passed=ok)
                for n, d, ok in belavkin.consistency_checks(
                    p, seed=req.config.effective_seed(), perturb_s=req.perturb_s)]
        return BelavkinCheckResponse(tolerance=IDENTITY_TOLERANCE,
                                     passed=all(r.passed for r in rows), checks=rows)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
