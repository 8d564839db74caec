"""Service endpoint tests over the in-process ASGI app."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from eventum.service.app import app
from eventum.service.models import x_matrix

client = TestClient(app)

CFG = {"t_grid": [0.5, 1.0], "samples": 300, "seed": 5}


def test_health():
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_named_and_explicit_atom_observables():
    np.testing.assert_array_equal(x_matrix("excited"), np.diag([0.0, 1.0]))
    np.testing.assert_array_equal(x_matrix("ground"), np.diag([1.0, 0.0]))
    np.testing.assert_array_equal(x_matrix("sigma_x"), [[0.0, 1.0], [1.0, 0.0]])
    # layout: four real entries row-major, then four imaginary entries
    m = x_matrix((1.0, 0.0, 0.0, 0.5, 0.0, -1.0, 1.0, 0.0))
    np.testing.assert_array_equal(m, [[1.0, -1j], [1j, 0.5]])
    with pytest.raises(ValueError):
        x_matrix("huh")
    with pytest.raises(ValueError):
        x_matrix((1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0))  # not Hermitian


def test_decay_endpoint():
    body = client.post("/api/decay", json={"config": CFG}).json()
    assert body["passed"] is True
    assert body["max_abs_dev"] < body["tolerance"]
    assert [row["t"] for row in body["rows"]] == CFG["t_grid"]
    row = body["rows"][0]
    assert len(row["analytic"]) == 8 and len(row["rk4"]) == 8


def test_decay_handles_grid_start_at_zero():
    body = client.post("/api/decay", json={"config": {**CFG, "t_grid": [0.0, 0.0005, 1.0]}}).json()
    assert body["passed"] is True
    assert body["rows"][0]["max_abs_dev"] == 0.0


def test_expect_engines_agree():
    values = {}
    for engine in ("analytic", "quadrature", "mc"):
        body = client.post(
            "/api/expect",
            json={"config": {**CFG, "samples": 4000}, "observable": "N1", "engine": engine},
        ).json()
        assert body["engine"] == engine
        values[engine] = [row["value"] for row in body["rows"]]
        if engine == "quadrature":
            assert all(row["tail_bound"] < 1e-10 for row in body["rows"])
        if engine == "mc":
            assert body["flagged"] is False
            for row, exact in zip(body["rows"], values["analytic"]):
                assert abs(row["value"] - exact) <= 4 * row["stderr"]
    np.testing.assert_allclose(values["analytic"], values["quadrature"], atol=1e-10)


def test_trajectories_endpoint():
    body = client.post("/api/trajectories", json={"config": CFG, "x": "excited"}).json()
    assert body["summary"]["samples"] == CFG["samples"]
    assert body["summary"]["window"] == CFG["t_grid"][-1]
    assert len(body["records"]) == CFG["samples"]
    freq = body["summary"]["frequencies"]
    assert abs(sum(freq.values()) - 1.0) < 1e-12
    for rec in body["records"][:20]:
        assert rec["class"] in ("Empty", "AllZero", "FirstOne")
        assert len(rec["times"]) == len(rec["outcomes"])
        assert rec["counts"]["n1"] in (0, 1)
        assert rec["eps_series"][0] == [0.0, pytest.approx(0.5)]


def test_trajectories_accepts_explicit_observable():
    x = [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0]  # sigma_y
    body = client.post(
        "/api/trajectories", json={"config": {**CFG, "samples": 20}, "x": x}
    ).json()
    assert len(body["records"]) == 20


def test_belavkin_check_endpoint():
    body = client.post("/api/belavkin-check", json={"config": CFG}).json()
    assert body["passed"] is True
    assert body["tolerance"] == 1e-12
    names = [c["name"] for c in body["checks"]]
    assert "master_equation_rhs" in names and "generator_star_unitary" in names
    body = client.post(
        "/api/belavkin-check", json={"config": CFG, "perturb_s": 1e-3}
    ).json()
    assert body["passed"] is False
    failed = {c["name"] for c in body["checks"] if not c["passed"]}
    assert "scattering_unitary" in failed


@pytest.mark.parametrize(
    "path,payload",
    [
        ("/api/expect", {"config": CFG, "observable": "bogus"}),
        ("/api/expect", {"config": CFG, "engine": "bogus"}),
        ("/api/trajectories", {"config": CFG, "x": [1, 2, 3]}),
        ("/api/trajectories", {"config": CFG, "x": [1, 0, 1, 0, 0, 0, 0, 0]}),
        ("/api/decay", {"config": {"nu": -1.0}}),
        ("/api/decay", {"config": {"t_grid": [99.0]}}),
        ("/api/decay", {"config": {"whatever": 1}}),
    ],
)
def test_validation_errors_are_422(path, payload):
    assert client.post(path, json=payload).status_code == 422


def test_responses_are_deterministic():
    payload = {"config": CFG, "observable": "Pi_1", "engine": "mc"}
    a = client.post("/api/expect", json=payload)
    b = client.post("/api/expect", json=payload)
    assert a.content == b.content
    a = client.post("/api/trajectories", json={"config": CFG, "x": "excited"})
    b = client.post("/api/trajectories", json={"config": CFG, "x": "excited"})
    assert a.content == b.content
