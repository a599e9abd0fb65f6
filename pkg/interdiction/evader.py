"""Evader semantics: capture probability, reach probabilities, route sets.

Chains use the killing-state convention: the target row is dropped on load,
and a sensored node behaves like a second killing state (the walk is captured
when it leaves). Every quantity below is an absorption probability of the
chain restricted to the states reachable from the start support, solved with
a dense LU factorization.
"""

from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import (
    TYPE_CHECKING,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

import networkx as nx
import numpy as np
from scipy.linalg import lu_factor, lu_solve

from app.logging_config import get_logger
from interdiction.errors import (
    NonAbsorbingError,
    NondeterministicEvaderError,
    NumericalError,
)

if TYPE_CHECKING:
    from interdiction.instance import Instance

logger = get_logger(__name__)

PROB_TOL = 1e-12
CLAMP_TOL = 1e-9
RESIDUAL_TOL = 1e-8

SparseRow = Tuple[Tuple[int, float], ...]


@dataclass(frozen=True)
class MarkovEvader:
    """Evader given by start distribution ``a``, transition rows ``M``, target ``t``.

    ``start`` and ``rows`` are stored sparsely as sorted tuples; the target
    row is never stored.
    """

    start: SparseRow
    rows: Tuple[Tuple[int, SparseRow], ...]
    target: int
    weight: float = 1.0
    route: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    @classmethod
    def from_rows(
        cls,
        start: Mapping[int, float],
        rows: Mapping[int, Mapping[int, float]],
        target: int,
        weight: float = 1.0,
    ) -> "MarkovEvader":
        target = int(target)
        start_items = tuple(
            sorted((int(u), float(p)) for u, p in start.items() if p != 0)
        )
        row_items = []
        for u, row in rows.items():
            u = int(u)
            if u == target:
                continue
            entries = tuple(sorted((int(v), float(p)) for v, p in row.items() if p != 0))
            if entries:
                row_items.append((u, entries))
        return cls(
            start=start_items,
            rows=tuple(sorted(row_items)),
            target=target,
            weight=float(weight),
        )

    @classmethod
    def from_route(cls, route: Sequence[int], weight: float = 1.0) -> "MarkovEvader":
        """Deterministic evader walking ``route`` and stopping at its last node."""
        nodes = tuple(int(v) for v in route)
        if len(nodes) < 2:
            raise ValueError("route needs at least a start and a target")
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"route {list(nodes)} revisits a node")
        rows = {u: {v: 1.0} for u, v in zip(nodes, nodes[1:])}
        evader = cls.from_rows({nodes[0]: 1.0}, rows, nodes[-1], weight)
        return replace(evader, route=nodes)

    @cached_property
    def start_map(self) -> Dict[int, float]:
        return dict(self.start)

    @cached_property
    def row_map(self) -> Dict[int, Dict[int, float]]:
        return {u: dict(row) for u, row in self.rows}

    @cached_property
    def start_nodes(self) -> Tuple[int, ...]:
        return tuple(u for u, p in self.start if p > 0)

    @cached_property
    def successors(self) -> Dict[int, Tuple[int, ...]]:
        """Support of each row (entries with positive probability)."""
        return {u: tuple(v for v, p in row if p > 0) for u, row in self.rows}

    @cached_property
    def states(self) -> Tuple[int, ...]:
        nodes = {self.target}
        nodes.update(u for u, _ in self.start)
        for u, row in self.rows:
            nodes.add(u)
            nodes.update(v for v, _ in row)
        return tuple(sorted(nodes))

    @cached_property
    def reachable(self) -> FrozenSet[int]:
        """Nodes the walk can visit before absorption at the target (target included)."""
        return frozenset(_live_states(self, frozenset({self.target}), self.start_nodes))

    @cached_property
    def deterministic(self) -> bool:
        for u in self.reachable:
            if u == self.target:
                continue
            row = self.row_map.get(u)
            if not row or len(row) != 1:
                return False
            (p,) = row.values()
            if abs(p - 1.0) > PROB_TOL:
                return False
        return True


@dataclass(frozen=True)
class RouteSet:
    """Nodes one deterministic route visits strictly before its target."""

    nodes: FrozenSet[int]
    probability: float
    evader: int = 0


@dataclass(frozen=True)
class RouteSetCollection:
    route_sets: Tuple[RouteSet, ...] = ()

    def __iter__(self) -> Iterator[RouteSet]:
        return iter(self.route_sets)

    def __len__(self) -> int:
        return len(self.route_sets)

    @classmethod
    def merge(cls, collections: Iterable["RouteSetCollection"]) -> "RouteSetCollection":
        return cls(tuple(r for c in collections for r in c.route_sets))


def _live_states(
    evader: MarkovEvader, stops: FrozenSet[int], sources: Iterable[int]
) -> List[int]:
    """States reachable from ``sources`` without leaving a stop state."""
    seen = set()
    queue = deque()
    for s in sources:
        if s not in seen:
            seen.add(s)
            queue.append(s)
    successors = evader.successors
    while queue:
        u = queue.popleft()
        if u in stops:
            continue
        for v in successors.get(u, ()):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return sorted(seen)


def _check_absorbing(
    evader: MarkovEvader,
    live: List[int],
    stops: FrozenSet[int],
    evader_index: Optional[int] = None,
) -> None:
    """Raise ``NonAbsorbingError`` if some live state can never be stopped."""
    successors = evader.successors
    predecessors: Dict[int, List[int]] = {}
    exits = []
    for u in live:
        if u in stops or not successors.get(u):
            exits.append(u)
            continue
        for v in successors[u]:
            predecessors.setdefault(v, []).append(u)

    reached = set(exits)
    queue = deque(exits)
    while queue:
        v = queue.popleft()
        for u in predecessors.get(v, ()):
            if u not in reached:
                reached.add(u)
                queue.append(u)

    trapped = [u for u in live if u not in reached]
    if not trapped:
        return
    trapped_set = set(trapped)
    sub = nx.DiGraph()
    sub.add_nodes_from(trapped)
    sub.add_edges_from(
        (u, v) for u in trapped for v in successors.get(u, ()) if v in trapped_set
    )
    recurrent = min(nx.attracting_components(sub), key=min)
    raise NonAbsorbingError(sorted(recurrent), evader_index)


def find_recurrent_class(evader: MarkovEvader) -> Optional[List[int]]:
    """Recurrent class that traps the unsensored walk, or None if it is absorbed."""
    stops = frozenset({evader.target})
    try:
        _check_absorbing(evader, _live_states(evader, stops, evader.start_nodes), stops)
    except NonAbsorbingError as e:
        return e.recurrent_class
    return None


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    x = lu_solve(lu_factor(a), b)
    residual = float(np.max(np.abs(a @ x - b))) if len(b) else 0.0
    scale = float(np.max(np.abs(b))) if len(b) else 0.0
    if not np.all(np.isfinite(x)) or residual > RESIDUAL_TOL * scale:
        raise NumericalError(
            f"absorption solve failed residual check ({residual:.3e} > {RESIDUAL_TOL:.0e}*{scale:.3e})"
        )
    return x


def hit_before(
    evader: MarkovEvader,
    goal: int,
    stops: Iterable[int],
    sources: Iterable[int],
    evader_index: Optional[int] = None,
) -> Dict[int, float]:
    """Probability, from each source, of reaching ``goal`` before any stop state.

    The target always stops the walk. A source that is itself a stop state
    (other than ``goal``) scores 0.
    """
    sources = list(sources)
    stop_set = frozenset(stops) | {evader.target, goal}
    live = _live_states(evader, stop_set, sources)
    _check_absorbing(evader, live, stop_set, evader_index)

    value = {u: (1.0 if u == goal else 0.0) for u in live if u in stop_set}
    interior = [u for u in live if u not in stop_set]
    if interior:
        index = {u: i for i, u in enumerate(interior)}
        a = np.eye(len(interior))
        b = np.zeros(len(interior))
        row_map = evader.row_map
        for u in interior:
            i = index[u]
            for v, p in row_map.get(u, {}).items():
                j = index.get(v)
                if j is not None:
                    a[i, j] -= p
                elif v == goal:
                    b[i] += p
        value.update(zip(interior, _solve(a, b)))
    return {s: float(value.get(s, 0.0)) for s in sources}


def _clamp(p: float) -> float:
    if 0.0 <= p <= 1.0:
        return p
    if -CLAMP_TOL <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + CLAMP_TOL:
        return 1.0
    raise NumericalError(f"probability {p!r} outside [0, 1] beyond tolerance")


def capture_probability(
    evader: MarkovEvader, placement: Iterable[int], evader_index: Optional[int] = None
) -> float:
    """J = 1 - P(absorbed at the target before leaving a sensored node)."""
    sensored = frozenset(placement) - {evader.target}
    sources = evader.start_nodes
    escape = hit_before(evader, evader.target, sensored, sources, evader_index)
    escaped = sum(evader.start_map[s] * escape[s] for s in sources)
    return _clamp(1.0 - escaped)


def reach_probability(
    evader: MarkovEvader, v: int, evader_index: Optional[int] = None
) -> float:
    """p_v: probability the walk visits ``v`` before absorption at the target."""
    if v == evader.target:
        raise ValueError(f"reach probability is undefined at the target {v}")
    if v not in evader.states:
        return 0.0
    sources = evader.start_nodes
    hit = hit_before(evader, v, (), sources, evader_index)
    return _clamp(sum(evader.start_map[s] * hit[s] for s in sources))


def hitting_probabilities(evader: MarkovEvader) -> Dict[int, float]:
    """Reach probability of every non-target state of the chain."""
    return {
        v: reach_probability(evader, v) for v in evader.states if v != evader.target
    }


def enumerate_route_sets(evader: MarkovEvader, evader_index: int = 0) -> RouteSetCollection:
    """One route set per start with positive mass; equal sets are merged."""
    if not evader.deterministic:
        raise NondeterministicEvaderError(
            f"evader {evader_index} is not deterministic; its route family is unbounded"
        )
    merged: Dict[FrozenSet[int], float] = {}
    order: List[FrozenSet[int]] = []
    for s in evader.start_nodes:
        visited: List[int] = []
        seen = set()
        u = s
        while u != evader.target:
            if u in seen:
                cycle = visited[visited.index(u):]
                raise NonAbsorbingError(cycle, evader_index)
            seen.add(u)
            visited.append(u)
            (u,) = evader.successors[u]
        nodes = frozenset(visited)
        if nodes not in merged:
            order.append(nodes)
            merged[nodes] = 0.0
        merged[nodes] += evader.start_map[s]
    return RouteSetCollection(
        tuple(RouteSet(nodes, merged[nodes], evader_index) for nodes in order)
    )


def collect_route_sets(instance: "Instance") -> RouteSetCollection:
    return RouteSetCollection.merge(
        enumerate_route_sets(e, i) for i, e in enumerate(instance.evaders)
    )


def capture_probabilities(instance: "Instance", placement: Iterable[int]) -> List[float]:
    nodes = frozenset(placement)
    return [capture_probability(e, nodes, i) for i, e in enumerate(instance.evaders)]


def objective_value(instance: "Instance", placement: Iterable[int]) -> float:
    """Weighted sum of capture probabilities."""
    nodes = frozenset(placement)
    return float(
        sum(
            e.weight * capture_probability(e, nodes, i)
            for i, e in enumerate(instance.evaders)
        )
    )


def separates(evader: MarkovEvader, placement: Iterable[int]) -> bool:
    """True iff every start is cut from the target in the evader's support graph.

    Sensored nodes are not expanded; the target stays reachable even when
    sensored.
    """
    blocked = frozenset(placement) - {evader.target}
    live = _live_states(evader, blocked | {evader.target}, evader.start_nodes)
    return evader.target not in live


def is_full_interdiction(instance: "Instance", placement: Iterable[int]) -> bool:
    nodes = frozenset(placement)
    return all(separates(e, nodes) for e in instance.evaders)
