"""Command-line front end.

Exit status: 0 on success or ``equal``, 1 on a mismatch, a validation
violation or a refused compilation, 2 on usage errors, unreadable files,
exhausted node budgets and ``inconclusive`` verdicts.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path

from ptmrnn.equivalence import EQUAL, INCONCLUSIVE, check_statistical, check_strong_multiset, check_weak
from ptmrnn.fileformat import SpecError, load_spec, parse_spec, serialize
from ptmrnn.machines import (
    MachineError,
    RnnLm,
    advisories,
    is_deterministic,
    is_rd,
    is_real_time,
    is_sigma_deterministic,
    validate,
)
from ptmrnn.numerics import rat_format
from ptmrnn.reports import format_string, render_equiv, render_paths, render_table
from ptmrnn.simulate import CUTOFF, BudgetExceeded, enumerate_paths, sample, semimeasure
from ptmrnn.transforms import PASSES, run_pipeline

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    """Bad input that is not a property of a machine."""


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str):
    return parse_spec(_read(path))


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def cmd_validate(args) -> int:
    try:
        machine = load_spec(_read(args.file).decode("utf-8"))
    except UnicodeDecodeError:
        print("report validate\nverdict violation\ndetail file is not UTF-8")
        return EXIT_FAIL
    problems = validate(machine)
    lines = ["report validate", f"verdict {'violation' if problems else 'ok'}", f"rows {len(problems)}"]
    lines += [f"row {p}" for p in problems]
    if not isinstance(machine, RnnLm):
        lines += [f"advisory {a}" for a in advisories(machine)]
    print("\n".join(lines))
    return EXIT_FAIL if problems else EXIT_OK


def cmd_info(args) -> int:
    m = _load(args.file)
    lines = ["report info", f"name {m.name}", f"class {type(m).__name__}"]
    if isinstance(m, RnnLm):
        lines += [f"hidden {m.D}", f"inputs {m.R}", f"phases {m.phases}", f"emission_phase {m.emission_phase}"]
        lines += [f"block {name} {start} {stop}" for name, start, stop in m.layout]
    else:
        lines += [
            f"states {len(m.states)}",
            f"transitions {len(m.rules)}",
            f"sigma_deterministic {_yes(is_sigma_deterministic(m))}",
            f"deterministic {_yes(is_deterministic(m))}",
            f"real_time {_yes(is_real_time(m))}",
            f"rd {_yes(is_rd(m))}",
        ]
    print("\n".join(lines))
    return EXIT_OK


def cmd_compile(args) -> int:
    names = [n.strip() for n in args.passes.split(",") if n.strip()]
    unknown = [n for n in names if n not in PASSES]
    if not names or unknown:
        raise _Usage(f"unknown pass {', '.join(unknown) or '(empty)'}; choose from {', '.join(PASSES)}")
    out, reports = run_pipeline(names, _load(args.file))
    text = serialize(out)
    summary = ["report compile"]
    for r in reports:
        summary.append(f"row {r.pass_name} {r.source} {r.target} {r.states_added} {r.transitions_added} {r.grade}")
    grade = "weak" if any(r.grade == "weak" for r in reports) else "strong"
    summary.append(f"grade {grade}")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print("\n".join(summary + [f"output {args.output}"]))
    else:
        sys.stdout.write(text)
        print("\n".join(summary), file=sys.stderr)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    m = _load(args.file)
    if args.paths:
        print(render_paths(enumerate_paths(m, args.max_steps), m.name, args.max_steps), end="")
    else:
        print(render_table(semimeasure(m, None, args.max_steps), m.name), end="")
    return EXIT_OK


def cmd_semimeasure(args) -> int:
    m = _load(args.file)
    print(render_table(semimeasure(m, args.max_len, args.max_steps), m.name), end="")
    return EXIT_OK


def cmd_sample(args) -> int:
    m = _load(args.file)
    outcomes = [sample(m, args.seed + i, args.max_steps) for i in range(args.n)]
    counts = Counter("CUTOFF" if o is CUTOFF else format_string(o) for o in outcomes)
    lines = ["report sample", f"machine {m.name}", f"seed {args.seed}", f"n {args.n}", f"max_steps {args.max_steps}"]
    lines.append(f"cutoff_fraction {rat_format(Fraction(counts['CUTOFF'], args.n))}")
    lines.append(f"rows {len(outcomes)}")
    for i, o in enumerate(outcomes):
        lines.append(f"row {args.seed + i} {'CUTOFF' if o is CUTOFF else format_string(o)}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_check_equiv(args) -> int:
    a, b = _load(args.a), _load(args.b)
    if args.mode == "weak":
        if args.max_len is None:
            raise _Usage("--mode weak needs --max-len")
        report = check_weak(a, b, args.max_len, args.max_steps)
    elif args.mode == "strong":
        report = check_strong_multiset(a, b, args.max_steps)
    else:
        if args.n <= 0:
            raise _Usage("--n must be positive")
        report = check_statistical(a, b, args.n, args.max_steps, args.tolerance, args.seed)
    print(render_equiv(report), end="")
    if report.verdict == EQUAL:
        return EXIT_OK
    return EXIT_USAGE if report.verdict == INCONCLUSIVE else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptmrnn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a machine or RNN file")
    p.add_argument("file")
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("info", help="class, size and predicate summary")
    p.add_argument("file")
    p.set_defaults(run=cmd_info)

    p = sub.add_parser("compile", help="run a pass or a comma-chained pipeline")
    p.add_argument("file")
    p.add_argument("--pass", dest="passes", required=True, help=", ".join(PASSES))
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_compile)

    p = sub.add_parser("enumerate", help="halting mass per string within a step bound")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, required=True)
    p.add_argument("--paths", action="store_true", help="list individual halting paths")
    p.set_defaults(run=cmd_enumerate)

    p = sub.add_parser("semimeasure", help="per-string mass with length and step bounds")
    p.add_argument("file")
    p.add_argument("--max-len", type=int)
    p.add_argument("--max-steps", type=int, required=True)
    p.set_defaults(run=cmd_semimeasure)

    p = sub.add_parser("sample", help="seeded exact-rational sampling")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--max-steps", type=int, default=1000)
    p.set_defaults(run=cmd_sample)

    p = sub.add_parser("check-equiv", help="compare two machines")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--mode", choices=("weak", "strong", "stat"), default="weak")
    p.add_argument("--max-len", type=int)
    p.add_argument("--max-steps", type=int, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_check_equiv)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("max_steps", "max_len", "n"):
        value = getattr(args, name, None)
        if value is not None and value < 0:
            print(f"error: --{name.replace('_', '-')} must be non-negative", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.run(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except MachineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
