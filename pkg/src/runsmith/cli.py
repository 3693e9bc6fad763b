"""Command-line front end: ``runsmith generate | run | bench``.

Exit codes: 0 ok, 2 bad arguments, 3 I/O or file-format failure,
4 duplicate key in an input that needs distinct keys, 5 oracle budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import formats
from .errors import BudgetExceeded, DuplicateKey, UnknownName
from .harness import ADAPTIVE, ALGORITHMS, GENERATORS, ExperimentSpec, get_algorithm, run_experiment

EXIT_ARGS, EXIT_IO, EXIT_DUP, EXIT_BUDGET = 2, 3, 4, 5
CSV_HEADER = ["seed", "r", "opt", "ratio", "mean_run_len", "duration_ms"]


class ArgError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _number(text: str):
    value = Fraction(text)
    return int(value) if value.denominator == 1 else float(value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="runsmith", description="Bounded-buffer run generation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated input file")
    g.add_argument("--gen", required=True)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--c", type=_number)
    g.add_argument("--t", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--runs", type=int)
    g.add_argument("--eps", type=_fraction)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--binary", action="store_true")

    r = sub.add_parser("run", help="run one algorithm on an input file")
    r.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    r.add_argument("--m", type=int, required=True)
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--eps", type=_fraction, default=Fraction(1, 3))
    r.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="run an experiment spec and write a CSV")
    b.add_argument("--spec", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--timing", action="store_true", help="fill duration_ms (makes the CSV non-reproducible)")
    b.add_argument("--threads", type=int)
    return p


def cmd_generate(args) -> int:
    if args.gen in ADAPTIVE:
        raise ArgError(f"{args.gen} reacts to an algorithm; use bench instead")
    if args.gen not in GENERATORS:
        raise ArgError(f"unknown generator {args.gen!r}; choose from {', '.join(sorted(GENERATORS))}")
    if args.m < 1:
        raise ArgError("--m must be positive")
    params = {k: getattr(args, k) for k in ("c", "t", "n", "runs") if getattr(args, k) is not None}
    try:
        keys = GENERATORS[args.gen](params, args.m, args.seed)
    except (ValueError, TypeError) as e:
        raise ArgError(str(e)) from None
    (formats.write_binary if args.binary else formats.write_text)(args.out, keys)
    print(len(keys))
    return 0


def cmd_run(args) -> int:
    if args.m < 1:
        raise ArgError("--m must be positive")
    data = formats.read_input(args.inp)
    fn, _ = get_algorithm(args.algo)
    out = fn(data, args.m, args.seed, args.eps)
    out.validate(data)
    opt = provenance = witness = None
    if args.algo == "oracle":
        res = out.meta["oracle"]
        opt, provenance, witness = res.opt_runs, "bruteforce", res.witness_directions
    obj = formats.result_dict(args.algo, args.m, args.seed, out, opt, provenance, witness)
    formats.write_result(args.out, obj)
    print(f"r={obj['r']}" + (f" opt={opt}" if opt is not None else ""))
    return 0


def _fmt(v) -> str:
    return "" if v is None else str(v)


def bench_csv(records, timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow([rec.seed, rec.run_count, _fmt(rec.opt), _fmt(rec.ratio), _fmt(rec.mean_run_length),
                    f"{rec.duration_ms:.3f}" if timing else ""])
    return buf.getvalue()


def cmd_bench(args) -> int:
    try:
        raw = json.loads(Path(args.spec).read_text())
    except json.JSONDecodeError as e:
        raise ArgError(f"spec is not valid JSON: {e}") from None
    try:
        spec = ExperimentSpec.from_json(raw)
    except (KeyError, TypeError, ValueError) as e:
        raise ArgError(f"bad spec: {e}") from None
    records = run_experiment(spec, threads=args.threads)
    Path(args.out).write_text(bench_csv(records, args.timing))
    realized = [r for r in records if r.realized is not None]
    if realized:
        folder = Path(str(args.out) + ".inputs")
        folder.mkdir(parents=True, exist_ok=True)
        for rec in realized:
            formats.write_text(folder / f"seed-{rec.seed}.txt", rec.realized)
    print(f"{len(records)} trials -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    handler = {"generate": cmd_generate, "run": cmd_run, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except (ArgError, UnknownName) as e:
        print(f"runsmith: {e}", file=sys.stderr)
        return EXIT_ARGS
    except DuplicateKey as e:
        print(f"runsmith: duplicate key {e.key}", file=sys.stderr)
        return EXIT_DUP
    except BudgetExceeded as e:
        print(f"runsmith: oracle budget exceeded after {e.nodes} nodes", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, formats.FormatError) as e:
        print(f"runsmith: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
