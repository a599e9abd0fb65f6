"""Greedy approximations: weighted hitting set for FI, cost-benefit for BI."""

import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Set, Tuple

from app.logging_config import get_logger
from interdiction.errors import InfeasibleError
from interdiction.evader import collect_route_sets, objective_value
from interdiction.instance import Instance, Placement

logger = get_logger(__name__)

GAIN_TOL = 1e-12


@dataclass(frozen=True)
class GreedyStep:
    node: int
    gain: float
    ratio: float
    value: float
    cost: int

    def to_dict(self) -> Dict[str, float]:
        return {
            "node": self.node,
            "gain": self.gain,
            "ratio": self.ratio,
            "value": self.value,
            "cost": self.cost,
        }


@dataclass(frozen=True)
class GreedyTrace:
    steps: Tuple[GreedyStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def ratios_nonincreasing(self, slack: float = 1e-9) -> bool:
        """Submodularity audit: per-unit-cost gains never grow between steps."""
        ratios = [s.ratio for s in self.steps]
        return all(b <= a + slack for a, b in zip(ratios, ratios[1:]))

    def to_list(self) -> List[Dict[str, float]]:
        return [s.to_dict() for s in self.steps]


class GreedyResult(NamedTuple):
    placement: Placement
    value: float
    trace: GreedyTrace


def _ratio(gain: float, cost: int) -> float:
    if cost == 0:
        return math.inf if gain > 0 else 0.0
    return gain / cost


def harmonic(m: int) -> float:
    return float(sum(1.0 / k for k in range(1, m + 1)))


def fi_greedy(instance: Instance) -> GreedyResult:
    """Greedy hitting set over route sets; cost within H_m of optimal.

    ``value`` is the placement cost.
    """
    route_sets = collect_route_sets(instance)
    for r in route_sets:
        if not r.nodes:
            raise InfeasibleError(f"route set of evader {r.evader} has no sensorable node")
    uncovered = [r.nodes for r in route_sets]
    costs = instance.costs
    chosen: List[int] = []
    steps: List[GreedyStep] = []
    spent = 0
    while uncovered:
        counts: Dict[int, int] = {}
        for nodes in uncovered:
            for u in nodes:
                counts[u] = counts.get(u, 0) + 1
        best = max(counts, key=lambda u: (_ratio(counts[u], costs[u]), -u))
        chosen.append(best)
        spent += costs[best]
        uncovered = [nodes for nodes in uncovered if best not in nodes]
        hit = float(len(route_sets) - len(uncovered))
        ratio = _ratio(counts[best], costs[best])
        steps.append(GreedyStep(best, float(counts[best]), ratio, hit, spent))
        logger.debug(f"FI greedy: node {best} hits {counts[best]}, {len(uncovered)} left")
    return GreedyResult(Placement.of(chosen), float(spent), GreedyTrace(tuple(steps)))


def bi_greedy(instance: Instance, budget: Optional[int] = None) -> GreedyResult:
    """Lazy cost-benefit greedy on sum w_i J_i, compared with the best single node.

    Stale heap entries carry upper bounds on the true gain by submodularity,
    so a popped entry that is current is the best choice for this round.
    """
    budget = instance.budget if budget is None else budget
    if budget is None or budget < 0:
        raise ValueError(f"budget must be a nonnegative integer, got {budget!r}")
    for i, evader in enumerate(instance.evaders):
        if evader.weight < 0:
            raise ValueError(f"evader {i} has negative weight; greedy needs weights >= 0")
    costs = instance.costs

    base = objective_value(instance, ())
    singles: Dict[int, float] = {}
    heap: List[Tuple[float, int, int, float]] = []
    for v in instance.graph.nodes:
        if costs[v] > budget:
            continue
        gain = objective_value(instance, (v,)) - base
        singles[v] = base + gain
        heap.append((-_ratio(gain, costs[v]), v, 0, gain))
    heapq.heapify(heap)

    chosen: Set[int] = set()
    steps: List[GreedyStep] = []
    value, spent, rnd = base, 0, 0
    evaluations = len(heap)
    while heap:
        _, v, stamp, gain = heapq.heappop(heap)
        if spent + costs[v] > budget:
            continue
        if stamp != rnd:
            gain = objective_value(instance, chosen | {v}) - value
            evaluations += 1
            heapq.heappush(heap, (-_ratio(gain, costs[v]), v, rnd, gain))
            continue
        if gain <= GAIN_TOL:
            break
        chosen.add(v)
        spent += costs[v]
        value += gain
        rnd += 1
        steps.append(GreedyStep(v, gain, _ratio(gain, costs[v]), value, spent))

    # leftover budget goes to zero-gain nodes, cheapest first
    for v in sorted(set(singles) - chosen, key=lambda u: (costs[u], u)):
        if spent + costs[v] <= budget:
            chosen.add(v)
            spent += costs[v]
            steps.append(GreedyStep(v, 0.0, 0.0, value, spent))

    placement = Placement.of(chosen)
    value = objective_value(instance, placement)
    if singles:
        single = max(singles, key=lambda u: (singles[u], -u))
        if singles[single] > value + GAIN_TOL:
            logger.debug(f"BI greedy: single node {single} beats the greedy set")
            placement, value = Placement.of((single,)), singles[single]
    logger.debug(
        f"BI greedy: {len(placement)} sensors, value {value:.6g}, {evaluations} objective evaluations"
    )
    return GreedyResult(placement, float(value), GreedyTrace(tuple(steps)))
