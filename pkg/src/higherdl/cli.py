"""Command-line entry point: ``higherdl <command> [flags]``.

Exit codes: 0 pass, 1 verification failure, 2 invalid configuration,
3 resource cap exceeded, 4 no generic character for the requested torus.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .experiments import RUNNERS, Outcome, RunConfig, run
from .twistgroup import ResourceCapError, table_checksum

SCHEMA = "higherdl.result/1"
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP, EXIT_NO_GENERIC = 0, 1, 2, 3, 4


@dataclass
class ResultEnvelope:
    config: dict
    status: str
    summary: dict
    items: list[dict]
    checksums: dict
    seconds: float

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "tool": "higherdl", "version": __version__, "config": self.config,
                "status": self.status, "summary": self.summary, "items": self.items,
                "checksums": self.checksums, "timing": {"seconds": round(self.seconds, 3)}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_jsonable)

    def to_csv(self) -> str:
        cols: list[str] = []
        for it in self.items:
            for k in it:
                if k not in cols:
                    cols.append(k)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for it in self.items:
            writer.writerow([_cell(it.get(k)) for k in cols])
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True, default=_jsonable)
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="higherdl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--p", type=int, default=2, help="residue characteristic")
        sp.add_argument("--m", type=int, default=1, help="q = p^m")
        sp.add_argument("--n", type=int, default=2, help="rank of GL_n")
        sp.add_argument("--r", type=int, default=2, help="level: O_r = F_q[pi]/pi^r")
        sp.add_argument("--torus", default="", help="cycle type, e.g. '3', '2,1' or '1,1,1' (default: Coxeter)")
        sp.add_argument("--theta", default="generic",
                        help="'all', 'generic' or dual coordinates 'a,b,c' (';' separates several)")
        sp.add_argument("--mode", default="exact", choices=("numeric", "exact", "both"))
        sp.add_argument("--format", default="json", choices=("json", "csv"))
        sp.add_argument("--cache-dir", default=None, help="directory for enumerated group tables")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--output", "-o", default=None, help="write the envelope to a file")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(command=ns.command, p=ns.p, m=ns.m, n=ns.n, r=ns.r, torus=ns.torus,
                     theta=ns.theta, mode=ns.mode, format=ns.format, cache_dir=ns.cache_dir,
                     workers=ns.workers)


def execute(cfg: RunConfig) -> tuple[ResultEnvelope, int]:
    start = time.perf_counter()
    outcome: Outcome = run(cfg)
    sums = {g.spec.cache_key(): table_checksum(g) for g in outcome.groups}
    env = ResultEnvelope(config=cfg.echo(), status=outcome.status, summary=outcome.summary,
                         items=outcome.items, checksums=sums, seconds=time.perf_counter() - start)
    code = {"pass": EXIT_PASS, "no_generic": EXIT_NO_GENERIC}.get(outcome.status, EXIT_FAIL)
    return env, code


def _error_envelope(cfg: RunConfig | None, status: str, msg: str) -> ResultEnvelope:
    return ResultEnvelope(config=cfg.echo() if cfg else {}, status=status, summary={"error": msg},
                          items=[], checksums={}, seconds=0.0)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        env, code = execute(cfg)
    except ResourceCapError as exc:
        env, code = _error_envelope(cfg, "resource_cap", str(exc)), EXIT_CAP
    except ValueError as exc:
        env, code = _error_envelope(cfg, "invalid_config", str(exc)), EXIT_CONFIG
    text = env.to_json() if cfg.format == "json" else env.to_csv()
    if ns.output:
        with open(ns.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if code != EXIT_PASS:
        print(f"higherdl: {env.status}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
