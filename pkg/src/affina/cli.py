"""``affina run`` and ``affina examples``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import __version__
from .algebra import AlgebraError, GuardrailError
from .datum import DatumError
from .instance import ANALYSES, InputError, load_instance, run_instance
from .instances import emit_examples
from .modexp import ModuleError

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def jsonable(x):
    """Tuples to lists, numpy scalars to Python numbers, dict keys to strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def build_report(inst, results, timing) -> dict:
    body = {
        "tool": "affina",
        "version": __version__,
        "instance": inst.ident,
        "analyses": jsonable(results),
        "pass": all(r.get("pass", False) for r in results.values()),
    }
    body["stability_hash"] = hashlib.sha256(canonical(body).encode()).hexdigest()
    body["timing"] = timing
    return body


def format_text(report) -> str:
    lines = [f"instance {report['instance']}: {'pass' if report['pass'] else 'FAIL'}"]
    for name, res in report["analyses"].items():
        status = res.get("status") or ("pass" if res.get("pass") else "FAIL")
        sizes = res.get("sizes")
        extra = f" sizes={canonical(sizes)}" if sizes is not None else ""
        lines.append(f"  {name}: {status}{extra}")
        if "error" in res:
            lines.append(f"    error: {res['error']}")
        for clause, ok in res.get("clauses", {}).items():
            lines.append(f"    {'ok  ' if ok else 'FAIL'} {clause}")
        for reason in res.get("reasons", []) or []:
            lines.append(f"    note {reason}")
    lines.append(f"  stability {report['stability_hash'][:16]}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    try:
        inst = load_instance(args.file)
        results, timing = run_instance(inst, args.analysis or None, force=args.force)
    except GuardrailError as exc:
        print(f"error: {exc} (use --force)", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, AlgebraError, DatumError, ModuleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = build_report(inst, results, timing)
    if args.format == "json":
        print(json.dumps(report, indent=1, sort_keys=True))
    else:
        print(format_text(report))
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def cmd_examples(args) -> int:
    try:
        paths = emit_examples(args.dir, overwrite=args.overwrite)
    except (FileExistsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for p in paths:
        print(p)
    return EXIT_PASS


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affina", description="Verify extension theory on finite algebras.")
    parser.add_argument("--version", action="version", version=f"affina {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run analyses on an instance file")
    run.add_argument("file")
    run.add_argument("--analysis", action="append", choices=ANALYSES, help="repeatable; default: the file's list")
    run.add_argument("--format", choices=("json", "text"), default="json")
    run.add_argument("--force", action="store_true", help="override the size guardrails")
    run.set_defaults(func=cmd_run)
    ex = sub.add_parser("examples", help="write the bundled instance files")
    ex.add_argument("dir")
    ex.add_argument("--overwrite", action="store_true")
    ex.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
