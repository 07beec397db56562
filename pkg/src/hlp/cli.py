"""Thin command-line client for the experiment service.

``hlp run`` and ``hlp validate`` talk HTTP to the service: against a
remote instance when --server is given, otherwise against an in-process
application over a test transport, so no daemon is needed for local
work.  The client's only jobs are reading the config file, mapping
errors to exit codes, and writing returned artifacts to disk.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
Diagnostics go to stderr; verbosity follows HLP_LOG
(quiet | info | debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import httpx

from . import __version__

log = logging.getLogger("hlp.cli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

_LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO,
               "debug": logging.DEBUG}


def _configure_logging():
    name = os.environ.get("HLP_LOG", "info").lower()
    level = _LOG_LEVELS.get(name, logging.INFO)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _client(server):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # In-process service over the standard test transport; same HTTP
    # surface as a deployed instance.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _load_config(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        log.error("cannot read config %s: %s", path, e)
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        log.error("config %s is not valid JSON: %s", path, e)
        return None


def _print_detail(payload):
    detail = payload.get("detail", payload)
    if isinstance(detail, list):  # FastAPI 422 body
        for item in detail:
            loc = ".".join(str(p) for p in item.get("loc", [])) or "config"
            log.error("%s: %s", loc, item.get("msg", "invalid"))
    elif isinstance(detail, dict):
        log.error("%s", detail.get("message", detail))
    else:
        log.error("%s", detail)


def cmd_run(args) -> int:
    raw = _load_config(args.config)
    if raw is None:
        return EXIT_VALIDATION
    out_dir = args.out or raw.get("out_dir") or "."
    with _client(args.server) as client:
        resp = client.post("/run", json={"config": raw, "seed": args.seed})
        if resp.status_code in (400, 422):
            _print_detail(resp.json())
            return EXIT_VALIDATION
        if resp.status_code != 200:
            _print_detail(resp.json())
            return EXIT_NUMERICAL
        payload = resp.json()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for artifact in payload["artifacts"]:
        target = out / artifact["name"]
        target.write_text(artifact["content"])
        log.info("wrote %s", target)
    return EXIT_OK


def cmd_validate(args) -> int:
    raw = _load_config(args.config)
    if raw is None:
        return EXIT_VALIDATION
    with _client(args.server) as client:
        resp = client.post("/validate", json={"config": raw})
        if resp.status_code != 200:
            _print_detail(resp.json())
            return EXIT_VALIDATION
        payload = resp.json()
    if not payload["valid"]:
        for err in payload["errors"]:
            log.error("%s", err)
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hlp",
        description="Simulate and solve guarded planar steering problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to a config JSON file")
    p_run.add_argument("--out", help="output directory (default: config "
                       "out_dir or current directory)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="echoed into report.json; reserved for "
                       "stochastic multi-start")
    p_run.add_argument("--server", help="base URL of a running service; "
                       "default is in-process")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config", help="path to a config JSON file")
    p_val.add_argument("--server", help="base URL of a running service")
    p_val.set_defaults(func=cmd_validate)

    p_ver = sub.add_parser("version", help="print the package version")
    p_ver.set_defaults(func=lambda args: print(f"hlp {__version__}") or EXIT_OK)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
