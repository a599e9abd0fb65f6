"""Canonical data model for interdiction instances.

Parsing goes document -> pydantic schema -> frozen dataclasses -> semantic
validation. Invalid instances never leave ``parse_instance``.
"""

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import networkx as nx

from app.logging_config import get_logger
from interdiction.errors import (
    SchemaError,
    TopologyError,
    UnknownNodeError,
    ValidationFailed,
)
from interdiction.evader import PROB_TOL, MarkovEvader, find_recurrent_class
from interdiction.schema import (
    INSTANCE_FORMAT,
    BIProblemDoc,
    EvaderDoc,
    InstanceDoc,
    load_document,
)

logger = get_logger(__name__)

TOPOLOGIES = ("path", "cycle", "tree", "general")


@dataclass(frozen=True)
class Graph:
    node_count: int
    edges: Tuple[Tuple[int, int], ...] = ()
    directed: bool = False
    names: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    @property
    def nodes(self) -> range:
        return range(self.node_count)

    def arcs(self) -> Iterator[Tuple[int, int]]:
        """Directed pairs; undirected edges yield both orientations."""
        for u, v in self.edges:
            yield (u, v)
            if not self.directed:
                yield (v, u)

    @cached_property
    def arc_set(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(self.arcs())

    @cached_property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        out: List[List[int]] = [[] for _ in self.nodes]
        for u, v in self.arcs():
            out[u].append(v)
        return tuple(tuple(sorted(nbrs)) for nbrs in out)

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arc_set

    def to_networkx(self) -> nx.Graph:
        g = nx.DiGraph() if self.directed else nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    def undirected_pairs(self) -> FrozenSet[FrozenSet[int]]:
        return frozenset(frozenset(e) for e in self.edges)


@dataclass(frozen=True)
class SensorCostTable:
    costs: Tuple[int, ...]

    @classmethod
    def unit(cls, n: int) -> "SensorCostTable":
        return cls(tuple([1] * n))

    def __getitem__(self, u: int) -> int:
        return self.costs[u]

    def __len__(self) -> int:
        return len(self.costs)

    def __iter__(self) -> Iterator[int]:
        return iter(self.costs)

    @property
    def is_unit(self) -> bool:
        return all(c == 1 for c in self.costs)

    @property
    def total(self) -> int:
        return sum(self.costs)


@dataclass(frozen=True)
class Problem:
    kind: str
    budget: Optional[int] = None

    @classmethod
    def fi(cls) -> "Problem":
        return cls("fi")

    @classmethod
    def bi(cls, budget: int) -> "Problem":
        return cls("bi", int(budget))

    @property
    def is_fi(self) -> bool:
        return self.kind == "fi"

    def to_dict(self) -> Dict[str, Any]:
        if self.is_fi:
            return {"type": "fi"}
        return {"type": "bi", "budget": self.budget}


@dataclass(frozen=True)
class Placement:
    """Sensored nodes. A sensor at u interdicts every edge leaving u."""

    nodes: FrozenSet[int] = frozenset()

    @classmethod
    def of(cls, nodes: Iterable[int] = ()) -> "Placement":
        return cls(frozenset(int(u) for u in nodes))

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, u: object) -> bool:
        return u in self.nodes

    def __or__(self, other: Iterable[int]) -> "Placement":
        return Placement(self.nodes | frozenset(other))

    def sorted_nodes(self) -> List[int]:
        return sorted(self.nodes)

    def edge_matrix(self, graph: Graph) -> FrozenSet[Tuple[int, int]]:
        """Interdicted arcs r_uv = 1, i.e. every arc leaving a sensored node."""
        return frozenset((u, v) for u, v in graph.arcs() if u in self.nodes)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    costs: SensorCostTable
    evaders: Tuple[MarkovEvader, ...]
    problem: Problem
    topology_hint: Optional[str] = None
    provenance: Optional[Dict[str, Any]] = field(default=None, compare=False, hash=False)

    @property
    def n(self) -> int:
        return self.graph.node_count

    @property
    def budget(self) -> Optional[int]:
        return self.problem.budget


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def to_dict(self) -> Dict[str, str]:
        return {"code": self.code, "message": self.message}


# -- topology ---------------------------------------------------------------


def _pairs_equal(graph: Graph, expected: Iterable[Tuple[int, int]]) -> bool:
    want = frozenset(frozenset(p) for p in expected)
    if graph.undirected_pairs() != want:
        return False
    # directed graphs may carry each pair in one or both orientations
    return graph.directed or len(graph.edges) == len(want)


def is_path(graph: Graph) -> bool:
    """Nodes 0..n-1 form the path in order."""
    n = graph.node_count
    return _pairs_equal(graph, ((i, i + 1) for i in range(n - 1)))


def is_cycle(graph: Graph) -> bool:
    """Edges i -- i+1 (mod n) close a ring, n >= 3."""
    n = graph.node_count
    return n >= 3 and _pairs_equal(graph, ((i, (i + 1) % n) for i in range(n)))


def is_tree(graph: Graph) -> bool:
    if graph.node_count < 1:
        return False
    g = nx.Graph()
    g.add_nodes_from(graph.nodes)
    g.add_edges_from(graph.edges)
    if not graph.directed and len(graph.edges) != g.number_of_edges():
        return False
    return nx.is_tree(g)


def detect_topology(graph: Graph) -> str:
    if is_path(graph):
        return "path"
    if is_cycle(graph):
        return "cycle"
    if is_tree(graph):
        return "tree"
    return "general"


def topology_matches(graph: Graph, hint: str) -> bool:
    if hint == "path":
        return is_path(graph)
    if hint == "cycle":
        return is_cycle(graph)
    if hint == "tree":
        return is_tree(graph)
    return hint == "general"


def require_topology(instance: Instance, kind: str) -> None:
    if not topology_matches(instance.graph, kind):
        raise TopologyError(
            f"instance graph is not a verified {kind} (detected {detect_topology(instance.graph)})"
        )


# -- validation -------------------------------------------------------------


def _validate_graph(graph: Graph) -> List[Violation]:
    out: List[Violation] = []
    n = graph.node_count
    if n < 1:
        out.append(Violation("EMPTY_GRAPH", "graph needs at least one node"))
    seen = set()
    for i, (u, v) in enumerate(graph.edges):
        bad = [x for x in (u, v) if not (0 <= x < n)]
        if bad:
            out.append(
                Violation(
                    "EDGE_OUT_OF_RANGE",
                    f"edge {i} ({u}, {v}) references node {bad[0]} outside 0..{n - 1}",
                )
            )
            continue
        if u == v:
            out.append(Violation("SELF_LOOP", f"edge {i} ({u}, {v}) is a self-loop"))
            continue
        key = (u, v) if graph.directed else frozenset((u, v))
        if key in seen:
            out.append(Violation("DUPLICATE_EDGE", f"edge {i} ({u}, {v}) is a duplicate"))
        seen.add(key)
    if graph.names is not None and len(graph.names) != n:
        out.append(
            Violation("NAME_COUNT_MISMATCH", f"{len(graph.names)} names for {n} nodes")
        )
    return out


def _validate_evader(
    evader: MarkovEvader, index: int, graph: Graph, arcs_ok: bool
) -> List[Violation]:
    out: List[Violation] = []
    n = graph.node_count
    t = evader.target
    tag = f"evader {index}"

    if evader.weight <= 0:
        out.append(Violation("NONPOSITIVE_WEIGHT", f"{tag} weight {evader.weight} must be > 0"))
    if not (0 <= t < n):
        out.append(Violation("TARGET_OUT_OF_RANGE", f"{tag} target {t} outside 0..{n - 1}"))
        return out

    bad_nodes = sorted(u for u in evader.states if not (0 <= u < n))
    if bad_nodes:
        out.append(
            Violation(
                "EVADER_NODE_OUT_OF_RANGE",
                f"{tag} references nodes {bad_nodes} outside 0..{n - 1}",
            )
        )
        return out

    masses = [p for _, p in evader.start]
    if any(p < 0 for p in masses):
        out.append(Violation("NEGATIVE_PROBABILITY", f"{tag} start has a negative mass"))
    total = sum(masses)
    if abs(total - 1.0) > PROB_TOL:
        out.append(Violation("START_NOT_NORMALIZED", f"{tag} start sums to {total!r}"))
    if evader.start_map.get(t, 0.0) > 0:
        out.append(Violation("STARTS_AT_TARGET", f"{tag} puts start mass on its target {t}"))

    row_map = evader.row_map
    for u, row in evader.rows:
        if any(p < 0 for _, p in row):
            out.append(Violation("NEGATIVE_PROBABILITY", f"{tag} row {u} has a negative entry"))
        row_sum = sum(p for _, p in row)
        if abs(row_sum - 1.0) > PROB_TOL:
            out.append(Violation("ROW_NOT_STOCHASTIC", f"{tag} row {u} sums to {row_sum!r}"))
        if arcs_ok:
            off = [v for v, p in row if p != 0 and not graph.has_arc(u, v)]
            if off:
                out.append(
                    Violation(
                        "TRANSITION_OFF_GRAPH",
                        f"{tag} row {u} moves to {off} without a graph edge",
                    )
                )
    dead = sorted(u for u in evader.reachable if u != t and u not in row_map)
    if dead:
        out.append(
            Violation(
                "ROW_NOT_STOCHASTIC",
                f"{tag} reachable nodes {dead} have no outgoing transitions",
            )
        )
    if not out:
        trap = find_recurrent_class(evader)
        if trap is not None:
            out.append(
                Violation(
                    "NONABSORBING",
                    f"{tag} can loop forever in recurrent class {trap}",
                )
            )
    return out


def validate(instance: Instance) -> List[Violation]:
    """All invariant violations of ``instance``; empty means valid."""
    out = _validate_graph(instance.graph)
    arcs_ok = not any(v.code == "EDGE_OUT_OF_RANGE" for v in out)
    n = instance.n

    if len(instance.costs) != n:
        out.append(
            Violation("COST_COUNT_MISMATCH", f"{len(instance.costs)} costs for {n} nodes")
        )
    for u, c in enumerate(instance.costs):
        if c < 0:
            out.append(Violation("NEGATIVE_COST", f"node {u} has cost {c}"))

    if instance.problem.kind not in ("fi", "bi"):
        out.append(Violation("UNKNOWN_PROBLEM", f"problem type {instance.problem.kind!r}"))
    elif not instance.problem.is_fi and (instance.budget is None or instance.budget < 0):
        out.append(Violation("NEGATIVE_BUDGET", f"budget {instance.budget} must be >= 0"))

    hint = instance.topology_hint
    if hint is not None:
        if hint not in TOPOLOGIES:
            out.append(Violation("TOPOLOGY_MISMATCH", f"unknown topology hint {hint!r}"))
        elif arcs_ok and not topology_matches(instance.graph, hint):
            out.append(
                Violation(
                    "TOPOLOGY_MISMATCH",
                    f"hint {hint!r} does not hold (detected {detect_topology(instance.graph)})",
                )
            )

    for i, evader in enumerate(instance.evaders):
        out.extend(_validate_evader(evader, i, instance.graph, arcs_ok))
    return out


def placement_cost(instance: Instance, placement: Iterable[int]) -> int:
    total = 0
    for u in placement:
        if not (0 <= u < instance.n):
            raise UnknownNodeError(f"placement node {u} outside 0..{instance.n - 1}")
        total += instance.costs[u]
    return total


# -- documents --------------------------------------------------------------


def _evader_from_doc(doc: EvaderDoc, index: int) -> MarkovEvader:
    if doc.route is not None:
        try:
            return MarkovEvader.from_route(doc.route, doc.weight)
        except ValueError as e:
            raise SchemaError(str(e), path=f"evaders.{index}.route") from e
    start = {int(u): p for u, p in (doc.start or {}).items()}
    rows = {
        int(u): {int(v): p for v, p in row.items()} for u, row in (doc.rows or {}).items()
    }
    return MarkovEvader.from_rows(start, rows, doc.target, doc.weight)


def instance_from_doc(doc: InstanceDoc) -> Instance:
    names = tuple(doc.names) if doc.names is not None else None
    graph = Graph(
        node_count=doc.graph.n,
        edges=tuple((int(u), int(v)) for u, v in doc.graph.edges),
        directed=doc.graph.directed,
        names=names,
    )
    if isinstance(doc.problem, BIProblemDoc):
        problem = Problem.bi(doc.problem.budget)
    else:
        problem = Problem.fi()
    return Instance(
        graph=graph,
        costs=SensorCostTable(tuple(doc.costs)),
        evaders=tuple(_evader_from_doc(e, i) for i, e in enumerate(doc.evaders)),
        problem=problem,
        topology_hint=doc.topology_hint,
        provenance=doc.provenance,
    )


def check_instance(instance: Instance) -> Instance:
    violations = validate(instance)
    if violations:
        raise ValidationFailed(violations)
    return instance


def parse_instance(text: str) -> Instance:
    """Parse and validate a JSON instance document."""
    instance = check_instance(instance_from_doc(load_document(text, InstanceDoc)))
    logger.debug(
        f"Parsed instance: n={instance.n}, evaders={len(instance.evaders)}, "
        f"problem={instance.problem.kind}"
    )
    return instance


def _sparse(items: Iterable[Tuple[int, float]]) -> Dict[str, float]:
    return {str(u): p for u, p in items}


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "format": INSTANCE_FORMAT,
        "version": 1,
        "graph": {
            "n": instance.n,
            "directed": instance.graph.directed,
            "edges": [[u, v] for u, v in instance.graph.edges],
        },
        "costs": list(instance.costs),
        "evaders": [
            {
                "weight": e.weight,
                "target": e.target,
                "start": _sparse(e.start),
                "rows": {str(u): _sparse(row) for u, row in e.rows},
            }
            for e in instance.evaders
        ],
        "problem": instance.problem.to_dict(),
    }
    if instance.topology_hint is not None:
        doc["topology_hint"] = instance.topology_hint
    if instance.graph.names is not None:
        doc["names"] = list(instance.graph.names)
    if instance.provenance is not None:
        doc["provenance"] = instance.provenance
    return doc


def serialize_instance(instance: Instance, indent: Optional[int] = 2) -> str:
    return json.dumps(instance_to_dict(instance), indent=indent)


def instance_digest(instance: Instance) -> str:
    """SHA-256 of the canonical serialization."""
    canonical = json.dumps(
        instance_to_dict(instance), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
