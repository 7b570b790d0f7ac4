"""Command-line driver: ``noether2 {el,relation,claw,verify} FILE``."""

from __future__ import annotations

import argparse
import json
import sys

from .dsl import load
from .errors import Noether2Error, ParseError
from .pipeline import STAGES, Options, run_pipeline

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="noether2", description="Noether second-theorem engine for .n2 problem files")
    ap.add_argument("command", choices=list(STAGES), help="stage to run")
    ap.add_argument("file", help="path to a .n2 problem file")
    ap.add_argument("--trials", type=int, default=200, help="random points per zero test (default 200)")
    ap.add_argument("--tol", type=float, default=1e-9, help="relative tolerance on the float path")
    ap.add_argument("--seed", type=int, default=0, help="seed for the sampling RNG")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--expect-strict", action="store_true",
                    help="golden values must match term for term (fluxes component-wise)")
    ap.add_argument("--timing", action="store_true", help="include wall-clock timing in the output")
    return ap


def _text(doc: dict) -> str:
    lines = [f"problem {doc['problem']['name']} ({doc['problem']['kind']}), command {doc['command']}"]
    for a, e in doc["euler"].items():
        lines.append(f"E[{a}] = {e}")

    def verdict(v):
        s = f"{v['status']} (trials {v['trials']}, max residual {v['max_residual']:.3g}, seed {v['seed']})"
        if v.get("counterexample"):
            s += " at " + ", ".join(f"{k}={x}" for k, x in v["counterexample"].items())
        return s

    if "invariance" in doc:
        lines.append(f"X(L) = {doc['invariance']['expr']}: {verdict(doc['invariance']['verdict'])}")
    for r in doc.get("relations", []):
        tail = f": {verdict(r['verdict'])}" if "verdict" in r else ""
        lines.append(f"relation[{r['gamma']}] = {r['expr']}{tail}")
    for r in doc.get("residuals", []):
        lines.append(f"residual[{r['gamma']}] = {r['expr']}: {verdict(r['verdict'])}")
    if "elimination" in doc:
        lines.append(f"eliminated = {doc['elimination']['expr']}: {verdict(doc['elimination']['verdict'])}")
    cl = doc.get("conservation_law")
    if cl:
        for a, f in cl["fluxes"].items():
            lines.append(f"P[{a}] = {f}")
        lines.append(f"div P - R0: {verdict(cl['identity'])}")
    for s in doc.get("specializations", []):
        b = ", ".join(f"{g}={v}" for g, v in s["bindings"].items())
        for a, f in s["fluxes"].items():
            lines.append(f"[{b}] P[{a}] = {f}")
    if "potential_link" in doc:
        pl = doc["potential_link"]
        lines.append(f"potential link: {pl['expr']} ({'holds' if pl['holds'] else 'fails'})")
    for g in doc["goldens"]:
        lines.append(f"golden {g['what']}: {'match' if g['match'] else 'MISMATCH'}")
    if "first_mismatch" in doc:
        lines.append(doc["first_mismatch"])
    if "timing_seconds" in doc:
        lines.append(f"time {doc['timing_seconds']}s")
    lines.append(f"status: {doc['status']}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.trials < 1 or args.tol <= 0:
        print("noether2: error: --trials must be >= 1 and --tol > 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        problem = load(args.file)
    except OSError as exc:
        print(f"noether2: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    opts = Options(args.trials, args.tol, args.seed, args.expect_strict, args.timing)
    try:
        doc = run_pipeline(problem, args.command, opts)
    except Noether2Error as exc:
        print(f"noether2: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        print(_text(doc))
    return EXIT_OK if doc["status"] == "ok" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
