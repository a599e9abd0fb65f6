"""Full interdiction on general graphs by minimum vertex cut.

Each non-target node v is split into (v, "in") -> (v, "out") with capacity
c_v; original arcs get an effectively infinite capacity, and a super-source
feeds every start. A finite s*-t cut then names a set of sensored nodes.
"""

from dataclasses import dataclass
from typing import FrozenSet, Hashable, List, NamedTuple, Sequence, Set, Tuple

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from app.logging_config import get_logger
from interdiction.evader import MarkovEvader
from interdiction.instance import Instance, Placement

logger = get_logger(__name__)

SOURCE = "s*"
IN, OUT = "in", "out"


@dataclass(frozen=True)
class SplitDigraph:
    digraph: nx.DiGraph
    source: Hashable
    sink: Hashable
    infinity: int


class MinCutResult(NamedTuple):
    placement: Placement
    flow: int


def build_split_digraph(evader: MarkovEvader, costs: Sequence[int]) -> SplitDigraph:
    """Split digraph over the evader's support reachable from its starts.

    Zero-probability arcs and unreachable nodes are dropped before splitting.
    """
    t = evader.target
    infinity = sum(int(c) for c in costs) + 1
    g = nx.DiGraph()
    g.add_node(SOURCE)
    g.add_node(t)

    def head(v: int) -> Hashable:
        return t if v == t else (v, IN)

    for v in evader.reachable:
        if v == t:
            continue
        g.add_edge((v, IN), (v, OUT), capacity=int(costs[v]))
        for w in evader.successors.get(v, ()):
            g.add_edge((v, OUT), head(w), capacity=infinity)
    for s in evader.start_nodes:
        g.add_edge(SOURCE, head(s), capacity=infinity)
    return SplitDigraph(g, SOURCE, t, infinity)


def max_flow(
    digraph: SplitDigraph, source: Hashable = None, sink: Hashable = None
) -> Tuple[int, FrozenSet[Tuple[Hashable, Hashable]]]:
    """Max-flow value and the arcs leaving the source side of a minimum cut."""
    source = digraph.source if source is None else source
    sink = digraph.sink if sink is None else sink
    g = digraph.digraph
    value, (reachable, non_reachable) = nx.minimum_cut(
        g, source, sink, capacity="capacity", flow_func=edmonds_karp
    )
    cut = frozenset(
        (u, v) for u in reachable for v in g.successors(u) if v in non_reachable
    )
    return int(value), cut


def _cut_to_nodes(
    cut: FrozenSet[Tuple[Hashable, Hashable]], target: int, costs: Sequence[int]
) -> Set[int]:
    """Internal arcs name their node; any other cut arc is replaced by an endpoint.

    The substitute is the cheaper non-target endpoint, lower id on ties.
    """
    nodes: Set[int] = set()
    for u, v in sorted(cut, key=repr):
        if isinstance(u, tuple) and isinstance(v, tuple) and u[0] == v[0]:
            nodes.add(u[0])
            continue
        eligible = [
            x[0] if isinstance(x, tuple) else x
            for x in (u, v)
            if x != SOURCE and x != target
        ]
        if eligible:
            nodes.add(min(eligible, key=lambda x: (costs[x], x)))
    return nodes


def mincut_for_evader(
    evader: MarkovEvader, costs: Sequence[int], evader_index: int = 0
) -> MinCutResult:
    if evader.target not in evader.reachable:
        return MinCutResult(Placement(), 0)
    split = build_split_digraph(evader, costs)
    flow, cut = max_flow(split)
    nodes = _cut_to_nodes(cut, evader.target, costs)
    logger.debug(
        f"Evader {evader_index}: split digraph with {split.digraph.number_of_nodes()} nodes, "
        f"flow {flow}, cut {sorted(nodes)}"
    )
    return MinCutResult(Placement.of(nodes), flow)


def fi_mincut_single(instance: Instance) -> MinCutResult:
    """Minimum-cost full interdiction of a single evader."""
    if len(instance.evaders) != 1:
        raise ValueError(
            f"min-cut solver needs exactly one evader, got {len(instance.evaders)}"
        )
    return mincut_for_evader(instance.evaders[0], list(instance.costs), 0)


def fi_mincut_union(instance: Instance) -> Placement:
    """Union of per-evader minimum cuts; feasible, not necessarily optimal."""
    costs: List[int] = list(instance.costs)
    placement = Placement()
    for i, evader in enumerate(instance.evaders):
        placement = placement | mincut_for_evader(evader, costs, i).placement
    return placement
