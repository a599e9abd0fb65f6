"""Exact solvers on paths, trees and cycles.

On a line every walk visits a contiguous run of nodes before it is absorbed,
so capture is "some sensor lies in the run". Full interdiction becomes
interval piercing; budgeted interdiction becomes a weighted piercing DP over
intervals whose values are marginal reach probabilities.
"""

import bisect
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from app.logging_config import get_logger
from interdiction.errors import InfeasibleError, TopologyError
from interdiction.evader import MarkovEvader, hit_before
from interdiction.instance import Graph, Instance, Placement, is_tree, require_topology

logger = get_logger(__name__)

ZERO_VALUE = 1e-12


@dataclass(frozen=True)
class Interval:
    """Inclusive node range [lo, hi]; never contains its owner's target."""

    lo: int
    hi: int
    owner: int = 0
    side: Optional[str] = None

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, u: object) -> bool:
        return isinstance(u, int) and self.lo <= u <= self.hi

    def pierced_by(self, nodes: Iterable[int]) -> bool:
        return any(self.lo <= u <= self.hi for u in nodes)


@dataclass(frozen=True)
class WeightedInterval:
    interval: Interval
    value: float

    @property
    def lo(self) -> int:
        return self.interval.lo

    @property
    def hi(self) -> int:
        return self.interval.hi

    @property
    def owner(self) -> int:
        return self.interval.owner


@dataclass(frozen=True)
class TreePath:
    """Unique x--y path of a tree, excluding the owner's target."""

    x: int
    y: int
    owner: int = 0

    def nodes(self, tree: nx.Graph) -> FrozenSet[int]:
        return frozenset(nx.shortest_path(tree, self.x, self.y))


class PiercingResult(NamedTuple):
    placement: Placement
    value: float


def _sweep_key(interval) -> Tuple[int, int, int, int]:
    return (interval.hi, interval.hi - interval.lo, interval.lo, interval.owner)


# -- paths ------------------------------------------------------------------


def extract_smallest_intervals(instance: Instance) -> List[Interval]:
    """Per evader, the tightest interval on each side of its target."""
    require_topology(instance, "path")
    out: List[Interval] = []
    for i, evader in enumerate(instance.evaders):
        t = evader.target
        left = [s for s in evader.start_nodes if s < t]
        right = [s for s in evader.start_nodes if s > t]
        if left:
            out.append(Interval(max(left), t - 1, i, "left"))
        if right:
            out.append(Interval(t + 1, min(right), i, "right"))
    return out


def pierce_path_fi(intervals: Sequence[Interval], n: int) -> Placement:
    """Minimum-cardinality piercing set by the right-endpoint sweep."""
    for interval in intervals:
        if interval.lo > interval.hi:
            raise InfeasibleError(
                f"interval [{interval.lo}, {interval.hi}] of evader {interval.owner} is empty"
            )
        if interval.lo < 0 or interval.hi >= n:
            raise ValueError(f"interval [{interval.lo}, {interval.hi}] outside 0..{n - 1}")
    chosen: List[int] = []
    last = -1
    for interval in sorted(intervals, key=_sweep_key):
        if last >= interval.lo:
            continue
        last = interval.hi
        chosen.append(last)
    logger.debug(f"Path sweep pierced {len(intervals)} intervals with {len(chosen)} sensors")
    return Placement.of(chosen)


def bi_path_dp(
    intervals: Sequence[WeightedInterval], costs: Sequence[int], budget: int
) -> PiercingResult:
    """Maximum total value of pierced intervals under a sensor budget.

    ``opt[l, k, b]`` is the best value using the ``l`` left-most intervals
    (by right endpoint), nodes ``0..k-1`` and budget ``b``. Taking node
    ``k-1`` collects every counted interval containing it and recurses on
    the intervals ending strictly before it. Values may be negative.
    """
    costs = [int(c) for c in costs]
    n = len(costs)
    budget = int(budget)
    if budget < 0:
        raise ValueError(f"budget {budget} must be >= 0")
    ordered = sorted(intervals, key=_sweep_key)
    for iv in ordered:
        if not (0 <= iv.lo <= iv.hi < n):
            raise ValueError(f"interval [{iv.lo}, {iv.hi}] outside 0..{n - 1}")

    m = len(ordered)
    his = [iv.hi for iv in ordered]
    pr = [bisect.bisect_left(his, v) for v in range(n)]

    incidence = np.zeros((m, n))
    for j, iv in enumerate(ordered):
        incidence[j, iv.lo : iv.hi + 1] = iv.value
    val = np.vstack([np.zeros((1, n)), np.cumsum(incidence, axis=0)])

    opt = np.zeros((m + 1, n + 1, budget + 1))
    ells = np.arange(m + 1)
    for k in range(1, n + 1):
        v = k - 1
        c = costs[v]
        take = np.full((m + 1, budget + 1), -np.inf)
        if c <= budget:
            sub = opt[np.minimum(ells, pr[v]), k - 1, : budget + 1 - c]
            take[:, c:] = val[:, v][:, None] + sub
        opt[:, k, :] = np.maximum(opt[:, k - 1, :], take)

    chosen: List[int] = []
    ell, k, b = m, n, budget
    while k > 0:
        v = k - 1
        if opt[ell, k, b] == opt[ell, k - 1, b]:
            k -= 1
            continue
        chosen.append(v)
        b -= costs[v]
        ell = min(ell, pr[v])
        k -= 1
    value = float(opt[m, n, budget])
    logger.debug(f"Path DP: m={m}, n={n}, B={budget}, value={value:.6g}")
    return PiercingResult(Placement.of(chosen), value)


def fi_path_weighted(intervals: Sequence[Interval], costs: Sequence[int]) -> Placement:
    """Cheapest piercing set for general costs: smallest budget whose DP pierces all."""
    for interval in intervals:
        if interval.lo > interval.hi:
            raise InfeasibleError(
                f"interval [{interval.lo}, {interval.hi}] of evader {interval.owner} is empty"
            )
    if not intervals:
        return Placement()
    unit = [WeightedInterval(iv, 1.0) for iv in intervals]
    need = len(unit) - 0.5
    covered = set()
    for iv in intervals:
        covered.update(range(iv.lo, iv.hi + 1))
    lo, hi = 0, sum(int(costs[u]) for u in covered)
    while lo < hi:
        mid = (lo + hi) // 2
        if bi_path_dp(unit, costs, mid).value >= need:
            hi = mid
        else:
            lo = mid + 1
    return bi_path_dp(unit, costs, lo).placement


def _line_decomposition(
    evader: MarkovEvader, owner: int, order: Sequence[int], cut: Optional[int]
) -> Tuple[List[WeightedInterval], float]:
    """Intervals over line positions plus a constant, for one evader.

    For any placement P on the line, w * J(P + cut) equals the constant plus
    the values of the intervals P pierces. ``cut`` is a sensored node adjacent
    to both ends of the line (cycle reduction) or None (plain path).
    """
    pos = {u: i for i, u in enumerate(order)}
    size = len(order)
    t = evader.target
    a = evader.start_map
    killed: Tuple[int, ...] = () if cut is None or cut == t else (cut,)
    starts = [s for s in evader.start_nodes if s in pos]

    constant = 0.0
    if killed and a.get(cut, 0.0) > 0:
        constant += evader.weight * a[cut]

    values: Dict[Tuple[int, int], float] = {}
    sides: Dict[Tuple[int, int], str] = {}

    def add(lo: int, hi: int, side: str, value: float) -> None:
        key = (lo, hi)
        values[key] = values.get(key, 0.0) + value
        sides.setdefault(key, side)

    if not starts:
        return [], constant

    reach = [hit_before(evader, x, killed, starts, owner) for x in order]
    if killed:
        exit_cut = hit_before(evader, cut, (), starts, owner)
    else:
        exit_cut = {s: 0.0 for s in starts}

    for s in starts:
        i = pos[s]
        mass = evader.weight * a[s]

        def r(x: int) -> float:
            return reach[x][s]

        if t in pos:
            pt = pos[t]
            constant += mass * exit_cut[s]
            if i < pt:
                for lo in range(0, i + 1):
                    before = r(lo - 1) if lo > 0 else exit_cut[s]
                    add(lo, pt - 1, "left", mass * (r(lo) - before))
            else:
                for hi in range(i, size):
                    beyond = r(hi + 1) if hi < size - 1 else exit_cut[s]
                    add(pt + 1, hi, "right", mass * (r(hi) - beyond))
        else:
            # target is the cut node: the walk leaves through either end
            for hi in range(i, size - 1):
                add(0, hi, "left", mass * (r(hi) - r(hi + 1)))
            for lo in range(1, i + 1):
                add(lo, size - 1, "right", mass * (r(lo) - r(lo - 1)))
            add(0, size - 1, "both", mass * (r(0) + r(size - 1) - 1.0))

    out = [
        WeightedInterval(Interval(lo, hi, owner, sides[(lo, hi)]), value)
        for (lo, hi), value in values.items()
        if abs(value) >= ZERO_VALUE
    ]
    out.sort(key=_sweep_key)
    return out, constant


def marginal_intervals(instance: Instance) -> List[WeightedInterval]:
    """Weighted intervals reducing Markov budgeted interdiction on a path to the DP."""
    require_topology(instance, "path")
    order = list(range(instance.n))
    out: List[WeightedInterval] = []
    for i, evader in enumerate(instance.evaders):
        intervals, _ = _line_decomposition(evader, i, order, None)
        out.extend(intervals)
    return out


def path_fi(instance: Instance) -> Placement:
    intervals = extract_smallest_intervals(instance)
    if instance.costs.is_unit:
        return pierce_path_fi(intervals, instance.n)
    return fi_path_weighted(intervals, list(instance.costs))


def path_bi(instance: Instance) -> PiercingResult:
    return bi_path_dp(marginal_intervals(instance), list(instance.costs), instance.budget or 0)


# -- trees ------------------------------------------------------------------


def _tree_graph(tree: Graph) -> nx.Graph:
    if not is_tree(tree):
        raise TopologyError("input graph is not a tree")
    g = nx.Graph()
    g.add_nodes_from(tree.nodes)
    g.add_edges_from(tree.edges)
    return g


def tree_paths(instance: Instance) -> List[TreePath]:
    """Each start's route to its target, target excluded."""
    g = _tree_graph(instance.graph)
    seen = set()
    out: List[TreePath] = []
    for i, evader in enumerate(instance.evaders):
        for s in evader.start_nodes:
            route = nx.shortest_path(g, s, evader.target)
            path = TreePath(s, route[-2], i)
            if path not in seen:
                seen.add(path)
                out.append(path)
    return out


def pierce_tree_fi(paths: Sequence[TreePath], tree: Graph) -> Placement:
    """Minimum piercing set of tree paths: deepest LCA first, sensor at the LCA."""
    g = _tree_graph(tree)
    depth = nx.single_source_shortest_path_length(g, 0)
    parent = dict(nx.bfs_predecessors(g, 0))

    prepared = []
    for path in paths:
        x, y = path.x, path.y
        nodes = {x, y}
        while x != y:
            if depth[x] >= depth[y]:
                x = parent[x]
                nodes.add(x)
            else:
                y = parent[y]
                nodes.add(y)
        prepared.append((-depth[x], x, min(path.x, path.y), max(path.x, path.y), frozenset(nodes)))
    prepared.sort(key=lambda item: item[:4])

    chosen: set = set()
    for _, lca, _, _, nodes in prepared:
        if not (nodes & chosen):
            chosen.add(lca)
    logger.debug(f"Tree sweep pierced {len(paths)} paths with {len(chosen)} sensors")
    return Placement.of(chosen)


def tree_fi(instance: Instance) -> Placement:
    return pierce_tree_fi(tree_paths(instance), instance.graph)


# -- cycles -----------------------------------------------------------------


def cycle_arcs(instance: Instance) -> List[Tuple[int, FrozenSet[int]]]:
    """Directional routes start -> target fully inside an evader's support.

    Each arc is one necessary piercing constraint for full interdiction.
    """
    n = instance.n
    out = []
    seen = set()
    for i, evader in enumerate(instance.evaders):
        t = evader.target
        for s in evader.start_nodes:
            for step in (1, -1):
                nodes = []
                u = s
                while u != t:
                    nodes.append(u)
                    nxt = (u + step) % n
                    if nxt not in evader.successors.get(u, ()):
                        break
                    u = nxt
                else:
                    arc = (i, frozenset(nodes))
                    if arc not in seen:
                        seen.add(arc)
                        out.append(arc)
    return out


def _cut_order(n: int, v: int) -> List[int]:
    return [(v + 1 + k) % n for k in range(n - 1)]


def solve_cycle_fi(instance: Instance) -> Placement:
    require_topology(instance, "cycle")
    n = instance.n
    arcs = cycle_arcs(instance)
    if not arcs:
        return Placement()
    best: Optional[Tuple[int, Placement]] = None
    for v in range(n):
        order = _cut_order(n, v)
        pos = {u: i for i, u in enumerate(order)}
        rest = []
        for owner, nodes in arcs:
            if v in nodes:
                continue
            positions = [pos[u] for u in nodes]
            rest.append(Interval(min(positions), max(positions), owner))
        if instance.costs.is_unit:
            inner = pierce_path_fi(rest, n - 1)
        else:
            inner = fi_path_weighted(rest, [instance.costs[u] for u in order])
        placement = Placement.of([v] + [order[p] for p in inner])
        cost = sum(instance.costs[u] for u in placement)
        if best is None or cost < best[0]:
            best = (cost, placement)
    logger.debug(f"Cycle FI: best cut cost {best[0]}")
    return best[1]


def solve_cycle_bi(instance: Instance) -> PiercingResult:
    require_topology(instance, "cycle")
    n = instance.n
    budget = instance.budget or 0
    best = PiercingResult(Placement(), 0.0)
    for v in range(n):
        c = instance.costs[v]
        if c > budget:
            continue
        order = _cut_order(n, v)
        intervals: List[WeightedInterval] = []
        constant = 0.0
        for i, evader in enumerate(instance.evaders):
            ivs, const = _line_decomposition(evader, i, order, v)
            intervals.extend(ivs)
            constant += const
        inner = bi_path_dp(intervals, [instance.costs[u] for u in order], budget - c)
        value = constant + inner.value
        if value > best.value + ZERO_VALUE:
            best = PiercingResult(
                Placement.of([v] + [order[p] for p in inner.placement]), value
            )
    return best


def solve_cycle(instance: Instance) -> PiercingResult:
    """Cycle solver; FI results carry the placement cost as their value."""
    if instance.problem.is_fi:
        placement = solve_cycle_fi(instance)
        return PiercingResult(placement, float(sum(instance.costs[u] for u in placement)))
    return solve_cycle_bi(instance)
