#!/usr/bin/env python3
"""
interdict - command-line front end.
Solve, verify, score, estimate and generate interdiction and Bridges instances.
"""

import argparse
import json
import os
import platform
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

# Add project root to path for imports
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import networkx as nx  # noqa: E402
import numpy as np  # noqa: E402
import scipy  # noqa: E402

from app.config import Config  # noqa: E402
from app.logging_config import get_logger, setup_logging  # noqa: E402
from interdiction import __version__  # noqa: E402
from interdiction.bridges import (  # noqa: E402
    BridgesInstance,
    bridges_digest,
    bridges_to_dict,
    claws_satisfied,
    parse_bridges,
    score,
)
from interdiction.errors import (  # noqa: E402
    DigestMismatchError,
    InfeasibleError,
    InterdictionError,
    SchemaError,
    ValidationFailed,
)
from interdiction.evader import (  # noqa: E402
    capture_probabilities,
    hitting_probabilities,
    is_full_interdiction,
    objective_value,
)
from interdiction.generators import (  # noqa: E402
    generate_family_instance,
    generate_maxcov_instance,
    generate_mis_netflow,
    generate_mis_tnfn,
    generate_vc_instance,
)
from interdiction.instance import (  # noqa: E402
    Graph,
    Placement,
    instance_digest,
    instance_to_dict,
    parse_instance,
    placement_cost,
)
from interdiction.metrics import RatioReport, generate_html_report  # noqa: E402
from interdiction.oracle import estimate_placement  # noqa: E402
from interdiction.runner import FamilyRunner  # noqa: E402
from interdiction.schema import (  # noqa: E402
    BRIDGES_FORMAT,
    BridgeSolutionDoc,
    GraphDoc,
    SetsDoc,
    SolutionDoc,
    document_format,
    load_document,
)
from interdiction.solve import ALGORITHMS, BRIDGE_ALGORITHMS, run_solver  # noqa: E402

logger = get_logger(__name__)

PROG = "interdict"
OBJECTIVE_TOL = 1e-9


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _parse_nodes(text: Optional[str]) -> List[int]:
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise SchemaError(f"node list '{text}' is not comma-separated integers") from e


def _load_any(path: str) -> Any:
    text = _read(path)
    if document_format(text) == BRIDGES_FORMAT:
        return parse_bridges(text)
    return parse_instance(text)


def _digest(instance: Any) -> str:
    if isinstance(instance, BridgesInstance):
        return bridges_digest(instance)
    return instance_digest(instance)


def build_manifest(
    argv: Sequence[str],
    instance: Any = None,
    algorithm: Optional[str] = None,
    seed: int = 0,
    wall_time: float = 0.0,
) -> Dict[str, Any]:
    return {
        "command": " ".join([PROG, *argv]),
        "instance_digest": _digest(instance) if instance is not None else None,
        "algorithm": algorithm,
        "seed": seed,
        "versions": {
            PROG: __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "networkx": nx.__version__,
        },
        "wall_time": round(wall_time, 6),
    }


def emit(document: Dict[str, Any], output: Optional[str] = None) -> None:
    """Machine output: stdout, or the ``--output`` file."""
    text = json.dumps(document, indent=2)
    if output:
        directory = os.path.dirname(output)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def save_history(document: Dict[str, Any], exit_code: int = 0) -> None:
    if not Config.HISTORY_DB:
        return
    try:
        from app.database import save_run_to_db

        save_run_to_db(document, exit_code)
    except Exception as e:
        logger.warning(f"Failed to save run to history database: {e}")


def save_report(report: RatioReport, output_dir: str = "reports", fmt: str = "json") -> List[str]:
    """Save a ratio report to file(s) in the requested format."""
    os.makedirs(output_dir, exist_ok=True)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    stem = os.path.join(output_dir, f"ratio_report_{report.algorithm}_{report.family}_{timestamp}")
    files = []
    if fmt in ("json", "both"):
        with open(stem + ".json", "w", encoding="utf-8") as f:
            f.write(report.to_json())
        files.append(stem + ".json")
    if fmt in ("text", "both"):
        with open(stem + ".txt", "w", encoding="utf-8") as f:
            f.write(report.to_text() + "\n")
        files.append(stem + ".txt")
    if fmt in ("html", "both"):
        files.append(generate_html_report(report, output_dir))
    return files


def print_summary(lines: List[str]) -> None:
    """Human-readable summary on stderr."""
    print("\n".join(lines), file=sys.stderr)


# -- commands ---------------------------------------------------------------


def cmd_solve(args: argparse.Namespace, argv: Sequence[str]) -> int:
    instance = parse_instance(_read(args.instance))
    start = time.perf_counter()
    solution = run_solver(instance, args.algorithm, args.guard)
    elapsed = time.perf_counter() - start
    document = solution.to_dict()
    document["problem"] = instance.problem.to_dict()
    document["manifest"] = build_manifest(argv, instance, solution.algorithm, args.seed, elapsed)
    emit(document, args.output)
    save_history(document)
    print_summary(
        [
            f"Algorithm: {solution.algorithm}"
            + ("" if solution.certified_optimal else " (approximate)"),
            f"Placement: {solution.placement.sorted_nodes()}",
            f"Cost: {solution.cost}   Objective: {solution.objective:.6f}",
        ]
    )
    return 0


def cmd_bridges(args: argparse.Namespace, argv: Sequence[str]) -> int:
    instance = parse_bridges(_read(args.instance))
    start = time.perf_counter()
    solution = run_solver(instance, args.algorithm, args.guard)
    elapsed = time.perf_counter() - start
    document = solution.to_dict()
    document["manifest"] = build_manifest(argv, instance, solution.algorithm, args.seed, elapsed)
    emit(document, args.output)
    save_history(document)
    s = solution.score
    print_summary(
        [
            f"Algorithm: {solution.algorithm}"
            + ("" if solution.certified_optimal else f" (within {solution.bound}x optimal)"),
            f"Open bridges: {sorted(solution.open)}",
            f"FP+FN: {float(s.errors):.6g}   TN-FN: {float(s.net):.6g}   "
            f"precision {s.precision:.3f} recall {s.recall:.3f} F1 {s.f1:.3f}",
        ]
    )
    return 0


def _check_digest(instance: Any, manifest: Optional[Dict[str, Any]]) -> None:
    expected = (manifest or {}).get("instance_digest")
    if expected and expected != _digest(instance):
        raise DigestMismatchError(
            "solution was produced for a different instance "
            f"(digest {expected[:12]}... vs {_digest(instance)[:12]}...)"
        )


def cmd_verify(args: argparse.Namespace, argv: Sequence[str]) -> int:
    instance = _load_any(args.instance)
    text = _read(args.solution)
    if isinstance(instance, BridgesInstance):
        doc = load_document(text, BridgeSolutionDoc)
        _check_digest(instance, doc.manifest)
        s = score(instance, doc.open)
        reported = (doc.score or {}).get("fp_plus_fn")
        in_range = all(0 <= b < instance.bridge_count for b in doc.open)
        result: Dict[str, Any] = {
            "feasible": in_range,
            "claws_satisfied": in_range and claws_satisfied(instance, doc.open),
            "open": sorted(doc.open),
            "score": s.to_dict(),
            "score_matches": reported is None or abs(reported - float(s.errors)) <= OBJECTIVE_TOL,
        }
    else:
        doc_i = load_document(text, SolutionDoc)
        _check_digest(instance, doc_i.manifest)
        placement = Placement.of(doc_i.placement)
        cost = placement_cost(instance, placement)
        objective = objective_value(instance, placement)
        if instance.problem.is_fi:
            feasible = is_full_interdiction(instance, placement)
        else:
            feasible = cost <= (instance.budget or 0)
        result = {
            "feasible": feasible,
            "placement": placement.sorted_nodes(),
            "cost": cost,
            "objective": objective,
            "capture": capture_probabilities(instance, placement),
            "problem": instance.problem.to_dict(),
            "cost_matches": doc_i.cost is None or doc_i.cost == cost,
            "objective_matches": doc_i.objective is None
            or abs(doc_i.objective - objective) <= OBJECTIVE_TOL,
        }
    ok = bool(result["feasible"]) and all(
        v for k, v in result.items() if k.endswith("_matches")
    )
    result["manifest"] = build_manifest(argv, instance, "verify", args.seed)
    emit(result, args.output)
    save_history(result, 0 if ok else 1)
    print_summary([f"Verification {'passed' if ok else 'FAILED'}"])
    return 0 if ok else 1


def cmd_score(args: argparse.Namespace, argv: Sequence[str]) -> int:
    instance = parse_bridges(_read(args.instance))
    if args.solution:
        opened = load_document(_read(args.solution), BridgeSolutionDoc).open
    else:
        opened = _parse_nodes(args.open)
    s = score(instance, opened)
    document = {"open": sorted(set(opened)), "score": s.to_dict()}
    document["manifest"] = build_manifest(argv, instance, "score", args.seed)
    emit(document, args.output)
    print_summary([f"FP+FN = {s.errors}   TN-FN = {s.net}"])
    return 0


def cmd_estimate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    instance = parse_instance(_read(args.instance))
    if args.solution:
        nodes = load_document(_read(args.solution), SolutionDoc).placement
    else:
        nodes = _parse_nodes(args.placement)
    placement = Placement.of(nodes)
    start = time.perf_counter()
    estimates = estimate_placement(instance, placement, args.trials, args.seed)
    elapsed = time.perf_counter() - start
    exact = capture_probabilities(instance, placement)
    evaders = []
    for evader, est, j in zip(instance.evaders, estimates, exact):
        row = est.to_dict()
        row["capture_probability"] = j
        reach = sorted(hitting_probabilities(evader).items())
        row["reach_probabilities"] = {str(v): p for v, p in reach}
        row["within_3_sigma"] = abs(est.estimate - j) <= 3 * est.stderr + est.truncation_bound
        evaders.append(row)
    document = {
        "placement": placement.sorted_nodes(),
        "evaders": evaders,
        "objective_estimate": sum(
            e.weight * est.estimate for e, est in zip(instance.evaders, estimates)
        ),
        "objective": objective_value(instance, placement),
        "manifest": build_manifest(argv, instance, "monte-carlo", args.seed, elapsed),
    }
    emit(document, args.output)
    print_summary(
        [
            f"Evader {i}: estimate {row['estimate']:.5f} +/- {row['stderr']:.1e}, "
            f"exact {row['capture_probability']:.5f}"
            for i, row in enumerate(evaders)
        ]
    )
    return 0


def _load_graph(path: str) -> Graph:
    doc = load_document(_read(path), GraphDoc)
    return Graph(
        node_count=doc.n, edges=tuple((u, v) for u, v in doc.edges), directed=doc.directed
    )


def cmd_generate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    kind = args.kind
    if kind == "vc":
        instance, threshold = generate_vc_instance(_load_graph(args.graph), args.budget)
        document = instance_to_dict(instance)
        print_summary([f"Vertex-cover threshold: {threshold}"])
    elif kind == "maxcov":
        sets = load_document(_read(args.sets), SetsDoc).sets
        document = instance_to_dict(generate_maxcov_instance(sets, args.k))
    elif kind == "mis-netflow":
        document = bridges_to_dict(generate_mis_netflow(_load_graph(args.graph)))
    elif kind == "mis-tnfn":
        document = bridges_to_dict(generate_mis_tnfn(_load_graph(args.graph), args.k))
    else:
        runner = FamilyRunner(profile=args.profile)
        generated = generate_family_instance(runner.family(args.family), args.index)
        if isinstance(generated, BridgesInstance):
            document = bridges_to_dict(generated)
        else:
            document = instance_to_dict(generated)
    emit(document, args.output)
    return 0


def cmd_report(args: argparse.Namespace, argv: Sequence[str]) -> int:
    def progress(update: Dict[str, Any]) -> None:
        if args.verbose:
            print(f"  [{update['current']}/{update['total']}] {update['message']}", file=sys.stderr)

    runner = FamilyRunner(profile=args.profile, progress_callback=progress, jobs=args.jobs)
    report = runner.ratio_report(args.family, args.algorithm, args.count)
    files = save_report(report, args.output_dir, args.format)
    if Config.HISTORY_DB:
        try:
            from app.database import save_ratio_to_db

            save_ratio_to_db(json.loads(report.to_json()))
        except Exception as e:
            logger.warning(f"Failed to save report to history database: {e}")
    print_summary([report.to_text(), ""] + [f"Report saved to: {f}" for f in files])
    return 0 if report.passed else 1


def cmd_history(args: argparse.Namespace, argv: Sequence[str]) -> int:
    if not Config.HISTORY_DB:
        raise InterdictionError("run history is disabled (HISTORY_DB is empty)")
    from app.database import recent_ratio_records

    records = recent_ratio_records(args.algorithm, args.limit)
    rows = [
        {
            "timestamp": r.timestamp.isoformat(),
            "algorithm": r.algorithm,
            "family": r.family,
            "seed": r.seed,
            "bound": r.bound,
            "instances": r.instances,
            "min_ratio": r.min_ratio,
            "max_ratio": r.max_ratio,
            "mean_ratio": r.mean_ratio,
            "passed": r.passed,
        }
        for r in records
    ]
    emit({"reports": rows}, args.output)
    print_summary(
        [
            f"{row['timestamp']}  {row['algorithm']} on {row['family']}: "
            f"{row['instances']} instances, {'PASS' if row['passed'] else 'FAIL'}"
            for row in rows
        ]
        or ["No reports recorded"]
    )
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, Sequence[str]], int]] = {
    "solve": cmd_solve,
    "bridges": cmd_bridges,
    "verify": cmd_verify,
    "score": cmd_score,
    "estimate": cmd_estimate,
    "generate": cmd_generate,
    "report": cmd_report,
    "history": cmd_history,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="Write the JSON document here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose output")

    parser = argparse.ArgumentParser(
        prog=PROG, description="Sensor placement against evaders, and the Bridges problem"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="Solve an interdiction instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--algorithm", default="auto", choices=ALGORITHMS)
    p.add_argument("--guard", type=int, help="Brute-force search-space guard")

    p = sub.add_parser("bridges", parents=[common], help="Solve a Bridges instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--algorithm", default="auto", choices=BRIDGE_ALGORITHMS)
    p.add_argument("--guard", type=int, help="Brute-force search-space guard")

    p = sub.add_parser("verify", parents=[common], help="Re-check a solution")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)

    p = sub.add_parser("score", parents=[common], help="Score a set of open bridges")
    p.add_argument("--instance", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--open", help="Comma-separated bridge ids")
    group.add_argument("--solution")

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo capture estimate")
    p.add_argument("--instance", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--placement", help="Comma-separated node ids")
    group.add_argument("--solution")
    p.add_argument("--trials", type=int, default=None, help="Walks per evader (default: MC_TRIALS)")

    p = sub.add_parser("generate", parents=[common], help="Generate an instance")
    p.add_argument("kind", choices=["vc", "maxcov", "random", "mis-netflow", "mis-tnfn"])
    p.add_argument("--graph", help="Graph document for vc / mis-* constructions")
    p.add_argument("--budget", type=int, default=0)
    p.add_argument("--sets", help="Set family document for maxcov")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--family", help="Family name for random instances")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--profile", default="default")

    p = sub.add_parser("report", parents=[common], help="Approximation-ratio report over a family")
    p.add_argument("--family", required=True)
    p.add_argument("--algorithm")
    p.add_argument("--profile", default="default")
    p.add_argument("--count", type=int)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument(
        "--format",
        choices=["json", "text", "html", "both"],
        default=Config.REPORT_FORMAT,
        help=f"Report format (default: {Config.REPORT_FORMAT})",
    )
    p.add_argument("--output-dir", default="reports")

    p = sub.add_parser("history", parents=[common], help="Recent approximation-ratio reports")
    p.add_argument("--algorithm", help="Only reports for this algorithm")
    p.add_argument("--limit", type=int, default=20)
    return parser


def _check_generate_args(args: argparse.Namespace) -> None:
    needs = {
        "vc": "graph",
        "mis-netflow": "graph",
        "mis-tnfn": "graph",
        "maxcov": "sets",
        "random": "family",
    }
    if args.command == "generate" and not getattr(args, needs[args.kind]):
        raise SchemaError(f"generate {args.kind} needs --{needs[args.kind]}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)

    setup_logging("DEBUG" if args.verbose else None)
    is_valid, error_msg = Config.validate()
    if not is_valid:
        logger.error(f"Configuration Error: {error_msg}")
        return 1
    if args.verbose:
        print(f"Configuration: {json.dumps(Config.get_summary())}", file=sys.stderr)

    try:
        _check_generate_args(args)
        return COMMANDS[args.command](args, argv)
    except InfeasibleError as e:
        print(f"Error [{e.code}]: {e.message}", file=sys.stderr)
        return 2
    except ValidationFailed as e:
        print(f"Error [{e.code}]: instance has {len(e.violations)} violation(s)", file=sys.stderr)
        for v in e.violations:
            print(f"  {v.code}: {v.message}", file=sys.stderr)
        return 1
    except InterdictionError as e:
        print(f"Error [{e.code}]: {e.message}", file=sys.stderr)
        if args.verbose:
            import traceback

            traceback.print_exc()
        return 1
    except FileNotFoundError as e:
        print(f"Error: file not found - {e.filename}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"Error during {args.command}: {e}", file=sys.stderr)
        if args.verbose:
            import traceback

            traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
