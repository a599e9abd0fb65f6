"""Solver registry and automatic dispatch."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from app.logging_config import get_logger
from interdiction.bridges import (
    BridgeSolution,
    BridgesInstance,
    check_convex,
    frequency,
    score,
    solve_convex,
    solve_scsc,
)
from interdiction.errors import (
    InterdictionError,
    ProblemMismatchError,
    UnknownAlgorithmError,
)
from interdiction.evader import is_full_interdiction, objective_value
from interdiction.flow import fi_mincut_single, fi_mincut_union
from interdiction.greedy import GreedyTrace, bi_greedy, fi_greedy
from interdiction.instance import (
    Instance,
    Placement,
    detect_topology,
    placement_cost,
    require_topology,
)
from interdiction.intervals import path_bi, path_fi, solve_cycle, tree_fi
from interdiction.oracle import brute_force

logger = get_logger(__name__)

ALGORITHMS = (
    "auto",
    "path-fi",
    "tree-fi",
    "path-dp",
    "cycle",
    "mincut",
    "greedy-fi",
    "greedy-bi",
    "brute",
)
BRIDGE_ALGORITHMS = ("auto", "convex", "scsc", "brute")

FI_ONLY = {"path-fi", "tree-fi", "mincut", "greedy-fi"}
BI_ONLY = {"path-dp", "greedy-bi"}


@dataclass
class Solution:
    placement: Placement
    cost: int
    objective: float
    algorithm: str
    certified_optimal: bool
    feasible: bool
    notes: List[str] = field(default_factory=list)
    trace: Optional[GreedyTrace] = None

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "placement": self.placement.sorted_nodes(),
            "cost": self.cost,
            "objective": self.objective,
            "algorithm": self.algorithm,
            "certified_optimal": self.certified_optimal,
            "feasible": self.feasible,
        }
        if self.notes:
            doc["notes"] = list(self.notes)
        if self.trace is not None and len(self.trace):
            doc["trace"] = self.trace.to_list()
        return doc


def choose_algorithm(instance: Instance) -> Tuple[str, List[str]]:
    """Concrete algorithm for ``auto`` plus any approximation warnings."""
    topology = detect_topology(instance.graph)
    if instance.problem.is_fi:
        if topology == "path":
            return "path-fi", []
        if topology == "tree" and instance.costs.is_unit:
            return "tree-fi", []
        if topology == "cycle":
            return "cycle", []
        if len(instance.evaders) == 1:
            return "mincut", []
        if all(e.deterministic for e in instance.evaders):
            return "greedy-fi", ["greedy hitting set: cost within H_m of optimal"]
        return "mincut", ["union of per-evader minimum cuts: feasible, not certified optimal"]
    if topology == "path":
        return "path-dp", []
    if topology == "cycle":
        return "cycle", []
    return "greedy-bi", ["cost-benefit greedy: approximate, (1-1/e) for unit costs"]


def _check_compatible(instance: Instance, algorithm: str) -> None:
    if algorithm not in ALGORITHMS:
        raise UnknownAlgorithmError(
            f"unknown algorithm '{algorithm}'; choose from {', '.join(ALGORITHMS)}"
        )
    kind = instance.problem.kind
    if kind == "fi" and algorithm in BI_ONLY or kind == "bi" and algorithm in FI_ONLY:
        raise ProblemMismatchError(f"algorithm '{algorithm}' does not solve {kind.upper()}")
    if algorithm in ("path-fi", "path-dp"):
        require_topology(instance, "path")
    elif algorithm == "tree-fi":
        require_topology(instance, "tree")
        if not instance.costs.is_unit:
            raise ProblemMismatchError("tree-fi needs unit sensor costs")
    elif algorithm == "cycle":
        require_topology(instance, "cycle")


def solve(instance: Instance, algorithm: str = "auto", guard: Optional[int] = None) -> Solution:
    notes: List[str] = []
    if algorithm == "auto":
        algorithm, notes = choose_algorithm(instance)
        logger.info(f"Auto dispatch selected '{algorithm}'")
        for note in notes:
            logger.warning(f"Result is approximate: {note}")
    _check_compatible(instance, algorithm)

    trace: Optional[GreedyTrace] = None
    certified = True
    if algorithm == "path-fi":
        placement = path_fi(instance)
    elif algorithm == "path-dp":
        placement = path_bi(instance).placement
    elif algorithm == "tree-fi":
        placement = tree_fi(instance)
    elif algorithm == "cycle":
        placement = solve_cycle(instance).placement
    elif algorithm == "mincut":
        if len(instance.evaders) == 1:
            placement = fi_mincut_single(instance).placement
        else:
            placement = fi_mincut_union(instance)
            certified = False
            if not notes:
                notes.append("union of per-evader minimum cuts: feasible, not certified optimal")
    elif algorithm == "greedy-fi":
        result = fi_greedy(instance)
        placement, trace, certified = result.placement, result.trace, False
    elif algorithm == "greedy-bi":
        try:
            result = bi_greedy(instance)
        except ValueError as e:
            raise ProblemMismatchError(str(e)) from e
        placement, trace, certified = result.placement, result.trace, False
    else:
        placement = Placement.of(brute_force(instance, guard).chosen)

    cost = placement_cost(instance, placement)
    objective = objective_value(instance, placement)
    if instance.problem.is_fi:
        feasible = is_full_interdiction(instance, placement)
    else:
        feasible = cost <= (instance.budget or 0)
    logger.debug(
        f"{algorithm}: placement {placement.sorted_nodes()}, cost {cost}, objective {objective:.6g}"
    )
    return Solution(placement, cost, objective, algorithm, certified, feasible, notes, trace)


def solve_bridges(
    instance: BridgesInstance, algorithm: str = "auto", guard: Optional[int] = None
) -> BridgeSolution:
    if algorithm not in BRIDGE_ALGORITHMS:
        raise UnknownAlgorithmError(
            f"unknown algorithm '{algorithm}'; choose from {', '.join(BRIDGE_ALGORITHMS)}"
        )
    if algorithm == "auto":
        algorithm = "convex" if check_convex(instance) is not None else "scsc"
        logger.info(f"Auto dispatch selected '{algorithm}'")
        if algorithm == "scsc":
            logger.warning(f"Result is approximate: FP+FN within {frequency(instance)}x optimal")
    if algorithm == "convex":
        return solve_convex(instance)
    if algorithm == "scsc":
        return solve_scsc(instance)
    chosen = brute_force(instance, guard).chosen
    return BridgeSolution(chosen, score(instance, chosen), "brute", certified_optimal=True)


def run_solver(instance: Any, algorithm: str = "auto", guard: Optional[int] = None) -> Any:
    """Dispatch on the instance kind."""
    if isinstance(instance, BridgesInstance):
        return solve_bridges(instance, algorithm, guard)
    if isinstance(instance, Instance):
        return solve(instance, algorithm, guard)
    raise InterdictionError(f"cannot solve object of type {type(instance).__name__}")
