"""
Command line entry point, `hybrid-sched <command> ...`.

Exit codes: 0 success, 1 verification or certificate failure, 2 invalid input,
3 LP or scheduling failure, 4 size caps exceeded.  Every failure prints one
`error=<kind> exit=<code> reason="<message>"` line on stderr.
"""
import argparse
import io
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .bench import generate_corpus, load_corpus, run_bench, write_csv
from .bounds import bounds_report
from .config import OracleLimits, ReductionLimits, RuntimeConfig
from .exceptions import HybridSchedError, InvalidInputError
from .formats import (
    dump_gantt_csv,
    dump_graph,
    dump_instance,
    dump_lp,
    dump_schedule,
    load_graph,
    load_instance,
    load_schedule,
    validation_message,
)
from .genlab.certificate import yes_case_plan, yes_case_schedule
from .genlab.gap import gap_bounds
from .genlab.qpartite import QPartiteGraph, ReductionParams, qpartite_yes_graph
from .genlab.random_dag import random_layered_dag
from .genlab.reduction import corollary_instance, reduction_instance
from .lp import build_allocation_lp
from .schedule import run_pipeline
from .validate import validate_schedule

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_IO = 2


def _fraction(text: str) -> float:
    """Accept `0.0625` as well as `1/16`."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"`{text}` is not a number or a fraction")


def _emit(text: str, path: Optional[Path]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _report_error(kind: str, code: int, message: str) -> int:
    reason = message.replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")
    print(f'error={kind} exit={code} reason="{reason}"', file=sys.stderr)
    return code


def cmd_solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    if args.lp_dump is not None:
        _emit(dump_lp(build_allocation_lp(instance)), args.lp_dump)

    result = run_pipeline(instance, args.rounding, args.b)
    _emit(dump_schedule(result.schedule), args.out)
    _emit(result.diagnostics.model_dump_json(), args.diagnostics)
    if args.gantt is not None:
        _emit(dump_gantt_csv(instance, result.schedule), args.gantt)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.dir is not None:
        entries = load_corpus(args.dir)
    else:
        entries = generate_corpus(args.generate, seed=args.seed)

    if args.workers is None:
        workers = RuntimeConfig.from_env().threads
    else:
        try:
            workers = RuntimeConfig(threads=args.workers).threads
        except ValidationError as e:
            raise InvalidInputError(f"--workers: {validation_message(e)}") from e
    records = run_bench(entries, workers=workers, b_choice=args.b, timing=args.timing)

    buffer = io.StringIO()
    write_csv(records, buffer)
    _emit(buffer.getvalue(), args.csv)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    schedule = load_schedule(args.schedule)

    report = validate_schedule(instance, schedule.allocation(), schedule)
    _emit(report.model_dump_json(), None)
    if report.ok:
        return EXIT_OK

    return _report_error(
        "verification",
        EXIT_VERIFY_FAILED,
        f"{len(report.violations)} violations: {', '.join(sorted(set(report.kinds())))}",
    )


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    limits = OracleLimits(max_tasks=args.max_tasks, max_machines=args.max_machines)
    _emit(bounds_report(instance, oracle_limits=limits).model_dump_json(), None)
    return EXIT_OK


def cmd_generate_random(args: argparse.Namespace) -> int:
    instance = random_layered_dag(
        args.tasks,
        args.layers,
        args.edge_prob,
        cpu_range=(args.cpu_range[0], args.cpu_range[1]),
        gpu_range=(args.gpu_range[0], args.gpu_range[1]),
        m=args.m,
        k=args.k,
        seed=args.seed,
    )
    _emit(dump_instance(instance), args.out)
    return EXIT_OK


def _reduction_params(
    q: int, Q: int, n: int, epsilon: Optional[float], delta: Optional[float]
) -> ReductionParams:
    if epsilon is None:
        epsilon = 1 / Q**2
    if delta is None:
        delta = 1 / (2 * Q)
    try:
        return ReductionParams(q=q, Q=Q, n=n, epsilon=epsilon, delta=delta)
    except ValidationError as e:
        raise InvalidInputError(validation_message(e)) from e


def cmd_generate_qpartite(args: argparse.Namespace) -> int:
    params = _reduction_params(args.q, args.Q, args.n, args.epsilon, args.delta)
    graph = qpartite_yes_graph(params, args.edge_prob, args.seed)
    limits = ReductionLimits(max_tasks=args.max_tasks, max_arcs=args.max_arcs)

    if args.corollary:
        if args.m_target is None:
            raise InvalidInputError("--corollary needs --m-target")
        instance = corollary_instance(graph, params, args.m_target, limits)
    else:
        instance = reduction_instance(graph, params, limits)

    if args.graph_out is not None:
        _emit(dump_graph(graph), args.graph_out)
    _emit(dump_instance(instance), args.out)
    return EXIT_OK


def _params_from_graph(graph: QPartiteGraph, args: argparse.Namespace) -> ReductionParams:
    if graph.planted is None:
        raise InvalidInputError("graph carries no planted labels")
    Q = max(graph.planted, default=0) + 1
    return _reduction_params(graph.q, Q, graph.n, args.epsilon, args.delta)


def cmd_certify_schedule(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    params = _params_from_graph(graph, args)
    instance = load_instance(args.instance)

    schedule = yes_case_schedule(instance, graph, params)
    _emit(dump_schedule(schedule), args.out)
    return EXIT_OK


def cmd_certify_plan(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    params = _params_from_graph(graph, args)
    _emit(yes_case_plan(graph, params).model_dump_json(), args.out)
    return EXIT_OK


def cmd_gap(args: argparse.Namespace) -> int:
    _emit(gap_bounds(args.q, args.Q).model_dump_json(), None)
    return EXIT_OK


def _add_reduction_tolerances(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--epsilon", type=_fraction, help="class size slack, default 1/Q²"
    )
    parser.add_argument("--delta", type=_fraction, help="default 1/(2Q)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-sched",
        description="HLP-b scheduling on hybrid CPU/GPU platforms.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        help="logging level, default from HYBRID_SCHED_LOG_LEVEL or WARNING",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="schedule one instance")
    solve.add_argument("--instance", type=Path, required=True)
    solve.add_argument("--rounding", choices=("hlpb", "half", "fastest"), default="hlpb")
    solve.add_argument("--b", default="auto", help="`auto`, `inf` or a number >= 2")
    solve.add_argument("--out", type=Path, help="schedule JSON, default stdout")
    solve.add_argument("--diagnostics", type=Path, help="diagnostics JSON, default stdout")
    solve.add_argument("--gantt", type=Path, help="per machine rows as CSV")
    solve.add_argument("--lp-dump", type=Path, help="allocation LP as CPLEX-LP text")
    solve.set_defaults(handler=cmd_solve)

    bench = commands.add_parser("bench", help="compare HLP-b and 1/2 rounding")
    source = bench.add_mutually_exclusive_group(required=True)
    source.add_argument("--dir", type=Path, help="directory of instance JSON files")
    source.add_argument("--generate", type=int, help="number of random instances")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--b", default="auto")
    bench.add_argument("--csv", type=Path, help="default stdout")
    bench.add_argument("--workers", type=int, help="default HYBRID_SCHED_THREADS")
    bench.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    bench.set_defaults(handler=cmd_bench)

    verify = commands.add_parser("verify", help="check a schedule against an instance")
    verify.add_argument("--instance", type=Path, required=True)
    verify.add_argument("--schedule", type=Path, required=True)
    verify.set_defaults(handler=cmd_verify)

    oracle = commands.add_parser("oracle", help="lower bounds and exact optimum")
    oracle.add_argument("--instance", type=Path, required=True)
    oracle.add_argument("--max-tasks", type=int, default=OracleLimits().max_tasks)
    oracle.add_argument("--max-machines", type=int, default=OracleLimits().max_machines)
    oracle.set_defaults(handler=cmd_oracle)

    generate = commands.add_parser("generate", help="write a generated instance")
    kinds = generate.add_subparsers(dest="kind", required=True)

    random_dag = kinds.add_parser("random", help="random layered DAG")
    random_dag.add_argument("--tasks", type=int, required=True)
    random_dag.add_argument("--layers", type=int, required=True)
    random_dag.add_argument("--edge-prob", type=float, default=0.5)
    random_dag.add_argument("--m", type=int, required=True)
    random_dag.add_argument("--k", type=int, required=True)
    random_dag.add_argument("--seed", type=int, default=0)
    random_dag.add_argument(
        "--cpu-range", type=float, nargs=2, default=(1.0, 10.0), metavar=("LOW", "HIGH")
    )
    random_dag.add_argument(
        "--gpu-range", type=float, nargs=2, default=(1.0, 10.0), metavar=("LOW", "HIGH")
    )
    random_dag.add_argument("--out", type=Path)
    random_dag.set_defaults(handler=cmd_generate_random)

    qpartite = kinds.add_parser("qpartite", help="reduction from a planted YES graph")
    qpartite.add_argument("--q", type=int, required=True)
    qpartite.add_argument("--Q", type=int, required=True)
    qpartite.add_argument("--n", type=int, required=True)
    _add_reduction_tolerances(qpartite)
    qpartite.add_argument("--edge-prob", type=float, default=0.5)
    qpartite.add_argument("--seed", type=int, default=0)
    qpartite.add_argument("--corollary", action="store_true")
    qpartite.add_argument("--m-target", type=int)
    qpartite.add_argument("--max-tasks", type=int, default=ReductionLimits().max_tasks)
    qpartite.add_argument("--max-arcs", type=int, default=ReductionLimits().max_arcs)
    qpartite.add_argument("--out", type=Path, help="instance JSON, default stdout")
    qpartite.add_argument("--graph-out", type=Path, help="graph JSON")
    qpartite.set_defaults(handler=cmd_generate_qpartite)

    certify = commands.add_parser("certify", help="YES case certificates")
    certificates = certify.add_subparsers(dest="certificate", required=True)

    yes_schedule = certificates.add_parser("yes-schedule")
    yes_schedule.add_argument("--instance", type=Path, required=True)
    yes_schedule.add_argument("--graph", type=Path, required=True)
    _add_reduction_tolerances(yes_schedule)
    yes_schedule.add_argument("--out", type=Path)
    yes_schedule.set_defaults(handler=cmd_certify_schedule)

    yes_plan = certificates.add_parser("yes-plan", help="set level, no instance needed")
    yes_plan.add_argument("--graph", type=Path, required=True)
    _add_reduction_tolerances(yes_plan)
    yes_plan.add_argument("--out", type=Path)
    yes_plan.set_defaults(handler=cmd_certify_plan)

    gap = commands.add_parser("gap", help="YES and NO makespan bounds")
    gap.add_argument("--q", type=int, required=True)
    gap.add_argument("--Q", type=int, required=True)
    gap.set_defaults(handler=cmd_gap)

    return parser


def _configure_logging(level: Optional[str]) -> None:
    if level is None:
        level = RuntimeConfig.from_env().log_level
    else:
        try:
            level = RuntimeConfig(log_level=level).log_level
        except ValidationError as e:
            raise InvalidInputError(f"--log-level: {validation_message(e)}") from e
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.handler

    try:
        _configure_logging(args.log_level)
        return handler(args)
    except HybridSchedError as e:
        return _report_error(e.kind, e.exit_code, str(e))
    except ValidationError as e:
        return _report_error(
            InvalidInputError.kind, InvalidInputError.exit_code, validation_message(e)
        )
    except OSError as e:
        return _report_error("io", EXIT_IO, f"{e.filename}: {e.strerror}")


if __name__ == "__main__":
    sys.exit(main())
