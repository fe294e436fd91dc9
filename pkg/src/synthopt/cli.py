"""Command-line entry point.

Exit status: 0 complete answer, 2 incomplete answer (synthesis stalled or
the instance has no tour), 1 bad input or failed verification.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from synthopt import bench, oracles
from synthopt.engine import EngineFault, dump_trace, load_trace, replay_trace
from synthopt.instances import InstanceError, load_instance
from synthopt.partition import (
    HEAP1,
    HEAP2,
    PartitionInstance,
    build_partition_environment,
    partition_metrics,
    solve_partition,
)
from synthopt.tsp import DEFAULT_LAMBDA, build_tsp_environment, solve_tsp, tsp_metrics

EXIT_OK, EXIT_INPUT, EXIT_INCOMPLETE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for incomplete answers
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_solver_flags(p):
    p.add_argument("--instance", required=True, metavar="PATH")
    p.add_argument("--valency", choices=("greedy", "regret"), default="greedy")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA, metavar="REAL")
    p.add_argument("--polish", action="store_true", help="polish partition answers")
    p.add_argument("--out", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synthopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="synthesize an answer for one instance")
    _add_solver_flags(p)
    p.add_argument("--oracle", action="store_true", help="also report efficiency")

    p = sub.add_parser("oracle", help="exact optimum for one instance")
    p.add_argument("--instance", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("trace", help="write the step-by-step trace")
    _add_solver_flags(p)
    p.add_argument("--verify", action="store_true", help="replay the written trace")

    p = sub.add_parser("bench", help="seeded benchmark against baselines and oracles")
    p.add_argument("--task", choices=("partition", "tsp"), required=True)
    p.add_argument("--sizes", required=True, metavar="N[,N...]")
    p.add_argument("--count", type=int, default=10, metavar="INT", help="instances per size")
    p.add_argument("--seed", type=int, default=0, metavar="INT")
    p.add_argument("--valency", choices=("greedy", "regret"), default="greedy")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA, metavar="REAL")
    p.add_argument("--polish", action="store_true")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--workers", type=int, default=1, metavar="INT")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("plot", help="efficiency-vs-n chart from a bench report")
    p.add_argument("--instance", required=True, metavar="PATH", help="bench report (csv or jsonl)")
    p.add_argument("--out", required=True, metavar="PATH", help="image file")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _solve(inst, args):
    if isinstance(inst, PartitionInstance):
        return solve_partition(inst, polish_result=args.polish)
    return solve_tsp(inst, args.valency, args.lam)


def _partition_doc(inst, res, with_oracle):
    a = res.assignment
    d, eff = partition_metrics(inst, a)
    doc = {
        "type": "partition",
        "complete": res.summary.complete,
        "completeness": len(res.summary.singles) / inst.n,
        "steps": len(res.trace),
        "polished": a is not res.greedy,
        "heaps": [
            [i for i, s in enumerate(a.sides) if s == HEAP1],
            [i for i, s in enumerate(a.sides) if s == HEAP2],
        ],
        "sums": list(a.sums),
        "discrepancy": d,
    }
    if with_oracle:
        try:
            exact = oracles.exact_partition(inst)
        except oracles.OracleRefusal as exc:
            doc["oracle"] = f"refused: {exc}"
        else:
            doc["optimum"] = exact.optimum
            doc["efficiency"] = eff
    return doc, EXIT_OK


def _tsp_doc(inst, res, with_oracle):
    tour = res.tour
    doc = {
        "type": "tsp",
        "complete": res.complete,
        "completeness": tour.completeness if not res.complete else 1.0,
        "steps": len(res.trace),
    }
    if res.complete:
        doc["tour"] = list(tour.order)
        doc["length"] = tour.length
    else:
        doc["edges"] = [list(e) for e in tour.edges]
        doc["length"] = None
    if with_oracle:
        try:
            exact = oracles.exact_tsp(inst)
        except oracles.OracleRefusal as exc:
            doc["oracle"] = f"refused: {exc}"
        else:
            doc["optimum"] = exact.optimum
            if res.complete and exact.optimum is not None:
                doc["efficiency"] = tsp_metrics(inst, tour, exact.optimum)[1]
    return doc, EXIT_OK if res.complete else EXIT_INCOMPLETE


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    res = _solve(inst, args)
    if isinstance(inst, PartitionInstance):
        doc, status = _partition_doc(inst, res, args.oracle)
    else:
        doc, status = _tsp_doc(inst, res, args.oracle)
    _emit(_dump(doc), args.out)
    return status


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    if isinstance(inst, PartitionInstance):
        exact = oracles.exact_partition(inst)
        a = exact.witness
        doc = {
            "type": "partition",
            "method": exact.method.value,
            "optimum": exact.optimum,
            "heaps": [
                [i for i, s in enumerate(a.sides) if s == HEAP1],
                [i for i, s in enumerate(a.sides) if s == HEAP2],
            ],
            "sums": list(a.sums),
        }
        _emit(_dump(doc), args.out)
        return EXIT_OK
    exact = oracles.exact_tsp(inst)
    doc = {
        "type": "tsp",
        "method": exact.method.value,
        "feasible": exact.feasible,
        "optimum": exact.optimum,
        "tour": list(exact.witness.order) if exact.feasible else None,
    }
    _emit(_dump(doc), args.out)
    return EXIT_OK if exact.feasible else EXIT_INCOMPLETE


def _fresh_environment(inst):
    if isinstance(inst, PartitionInstance):
        return build_partition_environment(inst)
    return build_tsp_environment(inst)


def verify_trace_text(inst, text: str, expected_states) -> None:
    """Replay serialized trace ``text`` on a fresh environment.

    Raises :class:`~synthopt.engine.EngineFault` on any divergence.
    """
    env = _fresh_environment(inst)
    replay_trace(env, load_trace(text))
    if env.states != expected_states:
        raise EngineFault("replayed trace ends in a different state")
    env.check()


def cmd_trace(args) -> int:
    inst = load_instance(args.instance)
    res = _solve(inst, args)
    text = dump_trace(res.trace)
    _emit(text, args.out)
    if args.verify:
        written = Path(args.out).read_text() if args.out else text
        try:
            verify_trace_text(inst, written, res.env.states)
        except EngineFault as exc:
            print(f"trace verification failed: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(f"trace verified: {len(res.trace)} steps replayed", file=sys.stderr)
    return EXIT_OK if res.summary.complete else EXIT_INCOMPLETE


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise UsageError(f"--sizes: expected comma-separated integers, got {text!r}") from None
    if not sizes:
        raise UsageError("--sizes: at least one size is required")
    return sizes


def cmd_bench(args) -> int:
    try:
        cfg = bench.BenchConfig(
            task=args.task,
            sizes=_parse_sizes(args.sizes),
            instances_per_size=args.count,
            seed=args.seed,
            valency_mode=args.valency,
            polish=args.polish,
            lam=args.lam,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = bench.run_benchmark(cfg)
    text = bench.report_csv(report) if args.format == "csv" else bench.report_jsonl(report)
    _emit(text, args.out)
    if args.out:
        print(bench.format_summary(report.summary))
    return EXIT_OK


def cmd_plot(args) -> int:
    rows = bench.read_report(args.instance)
    bench.plot_report(rows, args.out)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "trace": cmd_trace,
    "bench": cmd_bench,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.verb](args)
    except (InstanceError, UsageError, oracles.OracleRefusal) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
