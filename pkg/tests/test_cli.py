"""CLI tests, run in-process against the bundled service."""

import json
import math

import pytest

from eventum.cli import build_parser, main

FAST = ["--t-grid", "0.5,1.0", "--samples", "200", "--seed", "3"]


def run(argv):
    return main(argv)


def test_decay_writes_csv_and_succeeds(tmp_path):
    out = tmp_path / "decay.csv"
    assert run(["decay", *FAST, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "t" and header[-1] == "max_abs_dev"
    assert len(header) == 18
    assert len(lines) == 3
    assert float(lines[1].split(",")[-1]) < 1e-6


def test_decay_to_stdout(capsys):
    assert run(["decay", "--t-grid", "0.5", "--dt", "0.01"]) == 0
    captured = capsys.readouterr().out
    assert captured.startswith("t,analytic_gg_re")


def test_expect_analytic_value(tmp_path):
    out = tmp_path / "expect.csv"
    assert run(["expect", "--observable", "N1", "--t-grid", "1.0", "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()
    assert header == "t,value"
    t, value = row.split(",")
    assert float(t) == 1.0
    assert math.isclose(float(value), (1 - math.exp(-1.0)) * 0.5, abs_tol=1e-12)


def test_expect_engines_emit_their_columns(tmp_path):
    quad = tmp_path / "quad.csv"
    run(["expect", "--engine", "quadrature", *FAST, "--out", str(quad)])
    assert quad.read_text().splitlines()[0] == "t,value,tail_bound"
    mc = tmp_path / "mc.csv"
    assert run(["expect", "--engine", "mc", *FAST, "--out", str(mc)]) == 0
    assert mc.read_text().splitlines()[0] == "t,value,stderr"


def test_unknown_observable_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["expect", "--observable", "N2"])
    assert exc.value.code == 2
    assert "N1" in capsys.readouterr().err  # the valid names are listed


def test_malformed_config_file_is_a_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nu": -2.0}')
    assert run(["decay", "--config", str(bad)]) == 2
    assert "nu" in capsys.readouterr().err
    missing = tmp_path / "missing.json"
    assert run(["decay", "--config", str(missing)]) == 2


def test_config_file_with_flag_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nu": 2.0, "t_grid": [0.5], "seed": 11}))
    out = tmp_path / "e.csv"
    assert run(["expect", "--config", str(cfg), "--nu", "1.0", "--out", str(out)]) == 0
    _, row = out.read_text().splitlines()
    # the flag wins over the file value of nu
    assert math.isclose(float(row.split(",")[1]), (1 - math.exp(-0.5)) * 0.5, abs_tol=1e-12)


def test_trajectories_jsonl_shape(tmp_path):
    out = tmp_path / "t.jsonl"
    assert run(["trajectories", *FAST, "--samples", "25", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 26
    for line in lines[:-1]:
        rec = json.loads(line)
        assert set(rec) == {"times", "outcomes", "class", "eps_series", "counts"}
    summary = json.loads(lines[-1])["summary"]
    assert summary["samples"] == 25
    assert summary["window"] == 1.0


def test_trajectories_x_validation(capsys):
    assert run(["trajectories", *FAST, "--x", "nope"]) == 2
    assert "excited" in capsys.readouterr().err
    # eight entries that do not form a Hermitian matrix are rejected server-side
    assert run(["trajectories", *FAST, "--x", "1,0,1,0,0,0,0,0"]) == 2
    assert run(["trajectories", *FAST, "--x", "1,2,3"]) == 2


def test_trajectories_explicit_x(tmp_path):
    out = tmp_path / "t.jsonl"
    assert run(["trajectories", *FAST, "--samples", "10", "--x", "0,1,1,0,0,0,0,0",
                "--out", str(out)]) == 0
    first = json.loads(out.read_text().splitlines()[0])
    assert first["eps_series"][0][0] == 0.0


def test_belavkin_check_and_negative_control(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run(["belavkin-check", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "name,max_abs_dev,passed"
    assert all(line.endswith(",true") for line in rows[1:])
    assert run(["belavkin-check", "--perturb-s", "1e-3", "--out", str(out)]) == 1
    assert any(line.endswith(",false") for line in out.read_text().splitlines()[1:])


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    run(["trajectories", *FAST, "--out", str(a)])
    run(["trajectories", *FAST, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_fallback(tmp_path, monkeypatch):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    args = ["expect", "--engine", "mc", "--t-grid", "1.0", "--samples", "150"]
    monkeypatch.setenv("EVENTUM_SEED", "77")
    run([*args, "--out", str(a)])
    monkeypatch.delenv("EVENTUM_SEED")
    run([*args, "--seed", "77", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    # the flag wins over the environment
    monkeypatch.setenv("EVENTUM_SEED", "99")
    run([*args, "--seed", "77", "--out", str(c)])
    assert c.read_bytes() == b.read_bytes()


def test_invalid_seed_env_is_a_usage_error(monkeypatch, capsys):
    monkeypatch.setenv("EVENTUM_SEED", "not-a-seed")
    assert run(["expect", "--t-grid", "0.5"]) == 2
    assert "EVENTUM_SEED" in capsys.readouterr().err


def test_parser_covers_all_subcommands():
    parser = build_parser()
    for cmd in ("decay", "expect", "trajectories", "belavkin-check"):
        assert parser.parse_args([cmd]).command == cmd
    ns = parser.parse_args(["serve", "--port", "9000"])
    assert ns.command == "serve" and ns.port == 9000
