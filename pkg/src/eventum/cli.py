"""Command line client for the simulator service.

By default each subcommand talks to the bundled FastAPI application
in-process (no network, no server to start); pass --url to point the
same client at a running remote instance.  Exit codes: 0 success,
1 a numerical check failed, 2 usage or validation error.

Seed resolution order: --seed flag, then the config file, then the
EVENTUM_SEED environment variable, then the service default.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import os
import sys

import httpx
from pydantic import ValidationError

from .chainspace import OBSERVABLE_NAMES
from .config import ExperimentConfig, read_config_file
from .service.models import X_NAMES

SEED_ENV_VAR = "EVENTUM_SEED"
_IN_PROCESS_BASE = "http://eventum"


class UsageError(Exception):
    pass


class CheckFailure(Exception):
    pass


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated floats, got {text!r}")


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file (defaults are used when omitted)")
    sub.add_argument("--out", help="output file (stdout when omitted)")
    sub.add_argument("--url", help="base URL of a running service (in-process when omitted)")
    sub.add_argument("--seed", type=int, help="RNG seed, overrides config file and environment")
    sub.add_argument("--nu", type=float, help="decay rate")
    sub.add_argument("--r", type=float, help="chain window length")
    sub.add_argument("--epsilon", type=float, help="rotation frequency")
    sub.add_argument("--alpha", type=_pair, metavar="RE,IM", help="ground amplitude")
    sub.add_argument("--beta", type=_pair, metavar="RE,IM", help="excited amplitude")
    sub.add_argument("--t-grid", type=_float_list, metavar="T1,T2,...", help="evaluation times")
    sub.add_argument("--dt", type=float, help="integrator step")
    sub.add_argument("--nmax", type=int, help="quadrature event-count cutoff")
    sub.add_argument("--samples", type=int, help="Monte Carlo sample count")
    sub.add_argument("--streams", type=int, help="independent Monte Carlo streams")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eventum", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("decay", help="closed-form state vs RK4 integration")
    _add_config_flags(p)

    p = subs.add_parser("expect", help="counting-observable expectations")
    _add_config_flags(p)
    p.add_argument("--observable", choices=OBSERVABLE_NAMES, default="N1")
    p.add_argument("--engine", choices=("analytic", "quadrature", "mc"), default="analytic")

    p = subs.add_parser("trajectories", help="sampled observation records with replayed filters")
    _add_config_flags(p)
    p.add_argument("--x", default="excited", metavar="NAME|8 FLOATS",
                   help=f"atom observable: one of {', '.join(X_NAMES)}, or the four real "
                        "entries row-major followed by the four imaginary entries")

    p = subs.add_parser("belavkin-check", help="pseudo-Hilbert identity battery")
    _add_config_flags(p)
    p.add_argument("--perturb-s", type=float, default=0.0,
                   help="corrupt the interaction by this amount (negative control)")

    p = subs.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _resolve_seed(args: argparse.Namespace, base: dict) -> int | None:
    if args.seed is not None:
        return args.seed
    if base.get("seed") is not None:
        return int(base["seed"])
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is not None:
        try:
            return int(raw)
        except ValueError:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")
    return None


_OVERRIDES = ("nu", "r", "epsilon", "alpha", "beta", "t_grid", "dt", "nmax", "samples", "streams")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    try:
        base = read_config_file(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config file: {exc}")
    for name in _OVERRIDES:
        value = getattr(args, name)
        if value is not None:
            base["n_max" if name == "nmax" else name] = value
    base["seed"] = _resolve_seed(args, base)
    try:
        return ExperimentConfig(**base)
    except ValidationError as exc:
        raise UsageError(str(exc))


def _post(path: str, payload: dict, url: str | None) -> dict:
    async def go() -> httpx.Response:
        if url is None:
            from .service.app import app

            transport = httpx.ASGITransport(app=app)
            client = httpx.AsyncClient(transport=transport, base_url=_IN_PROCESS_BASE, timeout=None)
        else:
            client = httpx.AsyncClient(base_url=url, timeout=None)
        async with client:
            return await client.post(path, json=payload)

    try:
        resp = asyncio.run(go())
    except httpx.HTTPError as exc:
        raise CheckFailure(f"request to {path} failed: {exc}")
    if resp.status_code in (400, 422):
        raise UsageError(f"{path} rejected the request: {resp.text}")
    if resp.status_code != 200:
        raise CheckFailure(f"{path} returned HTTP {resp.status_code}: {resp.text}")
    return resp.json()


def _open_out(args: argparse.Namespace):
    if args.out:
        return open(args.out, "w", newline="")
    return sys.stdout


def _g(value: float) -> str:
    return f"{value:.17g}"


def _write_rows(args: argparse.Namespace, header: list[str], rows: list[list[str]]) -> None:
    fh = _open_out(args)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_decay(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    data = _post("/api/decay", {"config": cfg.model_dump(mode="json")}, args.url)
    header = ["t"]
    for group in ("analytic", "rk4"):
        for entry in ("gg", "ge", "eg", "ee"):
            header += [f"{group}_{entry}_re", f"{group}_{entry}_im"]
    header.append("max_abs_dev")
    rows = [[_g(r["t"]), *map(_g, r["analytic"]), *map(_g, r["rk4"]), _g(r["max_abs_dev"])]
            for r in data["rows"]]
    _write_rows(args, header, rows)
    return 0 if data["passed"] else 1


def cmd_expect(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    payload = {"config": cfg.model_dump(mode="json"),
               "observable": args.observable, "engine": args.engine}
    data = _post("/api/expect", payload, args.url)
    extra = {"analytic": [], "quadrature": ["tail_bound"], "mc": ["stderr"]}[args.engine]
    header = ["t", "value"] + extra
    rows = [[_g(r["t"]), _g(r["value"]), *(_g(r[k]) for k in extra)] for r in data["rows"]]
    _write_rows(args, header, rows)
    return 1 if data["flagged"] else 0


def _parse_x(text: str):
    if text in X_NAMES:
        return text
    values = text.split(",")
    if len(values) != 8:
        raise UsageError(
            f"--x must be one of {', '.join(X_NAMES)} or 8 comma separated floats, got {text!r}")
    try:
        return [float(v) for v in values]
    except ValueError:
        raise UsageError(f"--x entries must be floats, got {text!r}")


def cmd_trajectories(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    payload = {"config": cfg.model_dump(mode="json"), "x": _parse_x(args.x)}
    data = _post("/api/trajectories", payload, args.url)
    fh = _open_out(args)
    try:
        for rec in data["records"]:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
        fh.write(json.dumps({"summary": data["summary"]}, separators=(",", ":")) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0 if data["passed"] else 1


def cmd_belavkin_check(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    payload = {"config": cfg.model_dump(mode="json"), "perturb_s": args.perturb_s}
    data = _post("/api/belavkin-check", payload, args.url)
    rows = [[c["name"], _g(c["max_abs_dev"]), str(c["passed"]).lower()] for c in data["checks"]]
    _write_rows(args, ["name", "max_abs_dev", "passed"], rows)
    return 0 if data["passed"] else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "decay": cmd_decay,
        "expect": cmd_expect,
        "trajectories": cmd_trajectories,
        "belavkin-check": cmd_belavkin_check,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
