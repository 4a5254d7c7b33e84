"""Command-line experiment runner.

Exit codes: 0 success, 1 usage or input error, 2 contract or bound violation.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import tempfile
from pathlib import Path

from penum.anothersol import completeness_check, roundtrip
from penum.core import DEFAULT_COST_CAP, DelayTrace, Instance, brute_force_enum, format_solutions, run_to_completion
from penum.errors import BoundViolation, EnumerationError, InsufficientData, ParseError
from penum.instrument import (
    RunRecord,
    check_cap_bound,
    check_delay_bound,
    check_schedule_bound,
    dumps,
    fit_exponent,
    memory_profile,
    report,
)
from penum.problems import (
    SUITE,
    SyntheticSpec,
    graph_instance,
    horn_instance,
    parse_dimacs,
    parse_edge_list,
    random_graph,
    random_horn,
    random_synthetic,
    synthetic_instance,
)
from penum.regularize import BudgetSchedule, cap_to_inc, calibrate_schedule, queue_samples_csv

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


class InputError(Exception):
    pass


def cost_cap_default() -> int:
    value = os.environ.get("ENUM_COST_CAP")
    return int(value) if value else DEFAULT_COST_CAP


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_instance(args) -> Instance:
    if args.problem == "vertex-cover":
        if not args.graph or args.k is None:
            raise InputError("vertex-cover needs --graph and --k")
        return graph_instance(parse_edge_list(_read(args.graph), args.k))
    if args.problem == "horn-sat":
        if not args.cnf:
            raise InputError("horn-sat needs --cnf")
        return horn_instance(parse_dimacs(_read(args.cnf)))
    if not args.spec:
        raise InputError("synthetic needs --spec")
    return synthetic_instance(SyntheticSpec.from_json(json.loads(_read(args.spec))))


def random_instances(problem: str, count: int, seed: int) -> list[Instance]:
    rng = random.Random(seed)
    if problem == "vertex-cover":
        return [graph_instance(random_graph(rng)) for _ in range(count)]
    if problem == "horn-sat":
        return [horn_instance(random_horn(rng)) for _ in range(count)]
    return [synthetic_instance(random_synthetic(rng, max_m=200)) for _ in range(count)]


def _emit_outputs(args, solutions, trace, doc) -> None:
    text = format_solutions(solutions)
    if args.solutions:
        write_atomic(args.solutions, text)
    else:
        sys.stdout.write(text)
    if args.trace:
        write_atomic(args.trace, trace.to_csv())
    if args.report:
        write_atomic(args.report, dumps(doc))


def _record(args, x: Instance, solutions, trace) -> RunRecord:
    rec = RunRecord(args.problem, x.raw, x.size, x.param, len(solutions), args.trace)
    try:
        rec.fits.append(fit_exponent(trace))
    except InsufficientData:
        pass
    return rec


def cmd_enumerate(args) -> int:
    x = load_instance(args)
    entry = SUITE[args.problem]
    solutions, trace = run_to_completion(entry.make_enum(x), args.cost_cap)
    rec = _record(args, x, solutions, trace)
    bound = entry.declared_bound(x)
    rec.bounds.append(check_cap_bound(trace, bound.t_of_k(x.param), bound.p(x.size), bound.exponent))
    _emit_outputs(args, solutions, trace, report(rec))
    return EXIT_OK if rec.passed else EXIT_VIOLATION


def cmd_regularize(args) -> int:
    x = load_instance(args)
    entry = SUITE[args.problem]
    if args.schedule:
        text = args.schedule if args.schedule.lstrip().startswith("{") else _read(args.schedule).decode()
        schedule = BudgetSchedule.loads(text)
    else:
        schedule = calibrate_schedule(entry.make_enum(x), x.param, x.size, args.exponent, args.cost_cap)
    run = cap_to_inc(entry.make_enum(x), schedule, x.param, x.size, allow_late=args.allow_late)
    rec = RunRecord(args.problem, x.raw, x.size, x.param, 0, args.trace)
    try:
        solutions, trace = run_to_completion(run, args.cost_cap)
    except BoundViolation as exc:
        doc = report(rec)
        doc["runs"][0].update({"pass": False, "violation_index": exc.index, "error": str(exc)})
        doc["overall_pass"] = False
        if args.report:
            write_atomic(args.report, dumps(doc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    rec = _record(args, x, solutions, trace)
    rec.memory = memory_profile(run)
    rec.bounds.append(check_schedule_bound(trace, schedule, x.param, x.size, args.emit_slack))
    doc = report(rec)
    if run.state.violations:
        doc["runs"][0]["late_indices"] = run.state.violations
    if args.queue_csv:
        write_atomic(args.queue_csv, queue_samples_csv(rec.memory.samples))
    _emit_outputs(args, solutions, trace, doc)
    return EXIT_OK if rec.passed and not run.state.violations else EXIT_VIOLATION


def _instances(args) -> list[Instance]:
    if args.random:
        return random_instances(args.problem, args.random, args.seed)
    return [load_instance(args)]


def cmd_roundtrip(args) -> int:
    entry = SUITE[args.problem]
    ok = True
    for x in _instances(args):
        result = roundtrip(entry.problem, x, entry.declared_bound(x), entry.make_enum,
                           replay=args.replay, cost_cap=args.cost_cap)
        print(result.dumps())
        ok &= result.passed
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_compare(args) -> int:
    entry = SUITE[args.problem]
    ok = True
    for x in _instances(args):
        solutions, _ = run_to_completion(entry.make_enum(x), args.cost_cap)
        truth = brute_force_enum(entry.problem, x, args.cost_cap)
        equal = len(solutions) == len(truth) and set(solutions) == truth
        covers = completeness_check(entry.make_enum, entry.declared_bound(x), x, truth)
        print(json.dumps({"problem": args.problem, "equal": equal, "enumerated": len(solutions),
                          "brute_force": len(truth), "completeness_check": covers}, sort_keys=True))
        ok &= equal and covers
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_fit(args) -> int:
    trace = DelayTrace.from_csv(_read(args.trace).decode())
    lo, hi = args.window if args.window else (None, None)
    print(json.dumps(fit_exponent(trace, lo, hi).to_json(), sort_keys=True))
    return EXIT_OK


def cmd_report(args) -> int:
    runs = []
    for path in args.run or []:
        doc = json.loads(_read(path))
        runs.extend(doc.get("runs", [doc]))
    for path in args.trace or []:
        trace = DelayTrace.from_csv(_read(path).decode())
        rec = RunRecord("trace", _read(path), 0, 0, trace.n, path)
        try:
            rec.fits.append(fit_exponent(trace, *(args.window or (None, None))))
        except InsufficientData:
            pass
        if args.scale is not None:
            rec.bounds.append(check_delay_bound(trace, args.scale, 1, args.a))
            rec.bounds.append(check_cap_bound(trace, 2 * args.scale, 1, args.a + 1))
        runs.append(rec)
    doc = report(*runs)
    if args.out:
        write_atomic(args.out, dumps(doc))
    else:
        sys.stdout.write(dumps(doc))
    return EXIT_OK if doc["overall_pass"] else EXIT_VIOLATION


def _add_instance_args(p: argparse.ArgumentParser, outputs: bool = True) -> None:
    p.add_argument("--problem", required=True, choices=sorted(SUITE))
    p.add_argument("--graph", help="edge list file (vertex-cover)")
    p.add_argument("--k", type=int, help="cover size bound (vertex-cover)")
    p.add_argument("--cnf", help="DIMACS CNF file (horn-sat)")
    p.add_argument("--spec", help="synthetic spec JSON file")
    if outputs:
        p.add_argument("--solutions", help="write solutions here instead of stdout")
        p.add_argument("--trace", help="write the delay trace CSV here")
        p.add_argument("--report", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="penum", description=__doc__)
    parser.add_argument("--cost-cap", type=int, default=None,
                        help="global tick cap (default $ENUM_COST_CAP or 10^8)")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="run a problem's enumerator")
    _add_instance_args(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("regularize", help="run an enumerator through the priority-queue regularizer")
    _add_instance_args(p)
    p.add_argument("--schedule", help="schedule JSON (file path or inline object)")
    p.add_argument("--exponent", type=int, default=1, help="exponent for a calibrated schedule")
    p.add_argument("--queue-csv", help="write queue sizes at each emission here")
    p.add_argument("--allow-late", action="store_true",
                   help="keep going after a bound violation, emitting late")
    p.add_argument("--emit-slack", type=int, default=64, help="additive per-delay allowance in ticks")
    p.set_defaults(func=cmd_regularize)

    for name, func, helptext in (
        ("roundtrip", cmd_roundtrip, "enumerate via the AnotherSol oracle built from the enumerator"),
        ("compare", cmd_compare, "compare the enumerator with brute force"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_instance_args(p, outputs=False)
        p.add_argument("--random", type=int, default=0, metavar="COUNT",
                       help="use COUNT seeded random instances instead of a file")
        if name == "roundtrip":
            p.add_argument("--replay", action="store_true",
                           help="answer oracle calls from one recorded run")
        p.set_defaults(func=func)

    p = sub.add_parser("fit", help="fit the delay exponent of a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--window", type=int, nargs=2, metavar=("I_MIN", "I_MAX"))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="aggregate run reports and trace CSVs")
    p.add_argument("--run", action="append", help="run report JSON (repeatable)")
    p.add_argument("--trace", action="append", help="trace CSV (repeatable)")
    p.add_argument("--window", type=int, nargs=2, metavar=("I_MIN", "I_MAX"))
    p.add_argument("--scale", type=int, help="t*p for delay/cap bound checks on traces")
    p.add_argument("--a", type=int, default=0, help="delay exponent for trace bound checks")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cost_cap is None:
        args.cost_cap = cost_cap_default()
    if args.cost_cap < 1:
        parser.error("--cost-cap must be >= 1")
    try:
        return args.func(args)
    except (InputError, ParseError, json.JSONDecodeError, InsufficientData, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EnumerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
