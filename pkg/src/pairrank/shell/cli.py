"""Command line entry point: ``pairrank run FILE``."""
from __future__ import annotations

import argparse
import json
import sys

from ..settings import ORACLES
from .parser import ScriptError, parse_file
from .runner import SCHEMA_VERSION, Options, Runner, exit_status


def _rank_text(r: dict) -> str:
    return r["display"]


def _bool_text(x) -> str:
    return "unknown" if x is None else str(x).lower()


def format_text(report: dict) -> str:
    lines = []
    for entry in report["results"]:
        head = entry.get("query") or entry.get("statement")
        tag = f"[{entry['index']}]" if "index" in entry else f"[statement {entry['statement_index']}]"
        if "error" in entry:
            lines.append(f"{tag} {head}\n    error {entry['error']['code']}: {entry['error']['message']}")
            continue
        res = entry["result"]
        if "rank" in res:
            body = f"rank = {_rank_text(res['rank'])}"
        elif "independent" in res:
            st = res["star"]
            body = (f"independent = {_bool_text(res['independent'])}, rank drop = {_rank_text(res['rank_drop'])}, "
                    "(a, b, c) = (" + ", ".join(_bool_text(st[k]) for k in ("cond_a", "cond_b", "cond_c")) + ")")
        elif "isogenous" in res:
            body = f"isogenous = {_bool_text(res['isogenous'])}"
        elif "is_homogeny" in res:
            body = f"homogeny = {_bool_text(res['is_homogeny'])}, isogeny = {_bool_text(res['is_isogeny'])}"
        else:
            fails = [c["check"] for c in res["checks"] if not c["passed"]]
            body = "valid" if res["ok"] else "invalid: " + ", ".join(fails)
        lines.append(f"{tag} {head}\n    {body}")
    return "\n".join(lines) + ("\n" if lines else "")


def dump_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pairrank", description="Geometric ranks and forking for imaginaries.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a script")
    run.add_argument("file", help="script path")
    fmt = run.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="JSON report (default)")
    fmt.add_argument("--text", dest="format", action="store_const", const="text", help="one block per query")
    run.add_argument("--oracle", choices=ORACLES, default="jacobian", help="transcendence degree oracle")
    run.add_argument("--seed", type=int, default=0, help="seed for randomized rank checks")
    run.add_argument("--budget", type=int, default=1_000_000, help="Groebner step budget")
    run.add_argument("--stable", action="store_true", help="omit timings so output is byte-reproducible")
    run.add_argument("--save-session", metavar="FILE", help="write report and declarations for later load")
    run.set_defaults(format="json")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.budget <= 0:
        print("pairrank: --budget must be positive", file=sys.stderr)
        return 2
    try:
        script = parse_file(args.file)
    except OSError as exc:
        print(f"pairrank: {exc}", file=sys.stderr)
        return 2
    except ScriptError as err:
        if args.format == "json":
            sys.stdout.write(dump_json({"version": SCHEMA_VERSION, "error": err.as_dict()}))
        print(f"{args.file}:{err}", file=sys.stderr)
        return 2
    runner = Runner(Options(args.oracle, args.seed, args.budget, args.stable))
    report = runner.run(script)
    if args.save_session:
        with open(args.save_session, "w", encoding="utf-8") as fh:
            fh.write(dump_json({**report, "session": runner.session()}))
    sys.stdout.write(dump_json(report) if args.format == "json" else format_text(report))
    return exit_status(report)


if __name__ == "__main__":
    sys.exit(main())
