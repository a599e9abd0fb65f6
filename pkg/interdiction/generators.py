"""Instance generators: hardness constructions and seeded random families.

Every generated document carries ``provenance`` naming its construction and
seed, so a fixture can be regenerated from its own metadata.
"""

from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from app.logging_config import get_logger
from interdiction.bridges import BridgesInstance, Person
from interdiction.evader import MarkovEvader
from interdiction.instance import Graph, Instance, Problem, SensorCostTable, check_instance
from interdiction.rng import PRNG_ALGORITHM, make_rng
from interdiction.schema import FamilySpec

logger = get_logger(__name__)

TOWARD_MASS = 0.75

Generated = Union[Instance, BridgesInstance]


def _graph_from_nx(g: nx.Graph, directed: bool = False) -> Graph:
    if directed:
        edges = tuple(sorted(g.edges))
    else:
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in g.edges))
    return Graph(node_count=g.number_of_nodes(), edges=edges, directed=directed)


# -- reductions -------------------------------------------------------------


def generate_vc_instance(g: Graph, budget: int) -> Tuple[Instance, Fraction]:
    """Budgeted instance whose optimum reaches (n+B)/(2n) iff g has a vertex cover of size B.

    A new target t = n is joined to every node. From v the walk moves to t
    with probability 1/2 and otherwise to a uniform g-neighbor; an isolated
    node moves to t with probability 1.
    """
    n = g.node_count
    if n < 1:
        raise ValueError("vertex-cover construction needs at least one node")
    if budget < 0:
        raise ValueError(f"budget {budget} must be >= 0")
    t = n
    neighbors: Dict[int, List[int]] = {v: [] for v in range(n)}
    for u, v in g.edges:
        neighbors[u].append(v)
        neighbors[v].append(u)
    rows: Dict[int, Dict[int, float]] = {}
    for v in range(n):
        nbrs = sorted(set(neighbors[v]))
        if not nbrs:
            rows[v] = {t: 1.0}
            continue
        rows[v] = {t: 0.5}
        for u in nbrs:
            rows[v][u] = 0.5 / len(nbrs)
    start = {v: 1.0 / n for v in range(n)}
    edges = tuple(sorted({(min(u, v), max(u, v)) for u, v in g.edges})) + tuple(
        (v, t) for v in range(n)
    )
    threshold = Fraction(n + budget, 2 * n)
    instance = Instance(
        graph=Graph(node_count=n + 1, edges=edges),
        costs=SensorCostTable.unit(n + 1),
        evaders=(MarkovEvader.from_rows(start, rows, t),),
        problem=Problem.bi(budget),
        topology_hint="general",
        provenance={
            "construction": "vertex-cover",
            "graph_nodes": n,
            "budget": budget,
            "threshold": str(threshold),
            "isolated_rule": "isolated nodes move to the target with probability 1",
        },
    )
    return check_instance(instance), threshold


def generate_maxcov_instance(sets: Sequence[Sequence[int]], k: int) -> Instance:
    """Budgeted instance whose optimum is the best k-set coverage.

    Sets become nodes 0..S-1 and the target is S. Each element is a
    deterministic evader routed through its sets in increasing order.
    """
    if k < 0:
        raise ValueError(f"k {k} must be >= 0")
    size = len(sets)
    t = size
    membership: Dict[int, List[int]] = {}
    for j, members in enumerate(sets):
        for e in set(members):
            membership.setdefault(int(e), []).append(j)
    arcs = set()
    evaders = []
    for e in sorted(membership):
        route = sorted(membership[e]) + [t]
        arcs.update(zip(route, route[1:]))
        evaders.append(MarkovEvader.from_route(route))
    instance = Instance(
        graph=Graph(node_count=size + 1, edges=tuple(sorted(arcs)), directed=True),
        costs=SensorCostTable.unit(size + 1),
        evaders=tuple(evaders),
        problem=Problem.bi(k),
        topology_hint="general",
        provenance={
            "construction": "maximum-coverage",
            "sets": [sorted(set(int(e) for e in s)) for s in sets],
            "k": k,
            "elements": sorted(membership),
        },
    )
    return check_instance(instance)


def generate_mis_netflow(g: Graph) -> BridgesInstance:
    """Bridges instance whose best TN-FN equals the maximum independent set size of g."""
    degree = [0] * g.node_count
    pairs = sorted({(min(u, v), max(u, v)) for u, v in g.edges})
    for u, v in pairs:
        degree[u] += 1
        degree[v] += 1
    people: List[Person] = []
    for v in range(g.node_count):
        if degree[v] == 0:
            people.append(Person("good", Fraction(-1), frozenset({v})))
        for _ in range(max(degree[v] - 1, 0)):
            people.append(Person("bad", Fraction(1), frozenset({v})))
    for u, v in pairs:
        people.append(Person("good", Fraction(-1), frozenset({u, v})))
    return BridgesInstance(
        g.node_count,
        tuple(people),
        provenance={"construction": "mis-netflow", "edges": [list(p) for p in pairs]},
    )


def generate_mis_tnfn(g: Graph, k: int) -> BridgesInstance:
    """Bridges instance for TN under FN <= k, coupled to independent sets of size k."""
    pairs = sorted({(min(u, v), max(u, v)) for u, v in g.edges})
    people = [Person("bad", Fraction(1), frozenset({v})) for v in range(g.node_count)]
    for u, v in pairs:
        people.extend(Person("good", Fraction(-1), frozenset({u, v})) for _ in range(k + 1))
    return BridgesInstance(
        g.node_count,
        tuple(people),
        fn_bound=Fraction(k),
        provenance={"construction": "mis-tnfn", "k": k, "edges": [list(p) for p in pairs]},
    )


# -- random graphs ----------------------------------------------------------


def random_tree(rng: np.random.Generator, n: int) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for v in range(1, n):
        g.add_edge(int(rng.integers(0, v)), v)
    return g


def random_connected_graph(rng: np.random.Generator, n: int, density: float) -> nx.Graph:
    g = random_tree(rng, n)
    for u in range(n):
        for v in range(u + 1, n):
            if not g.has_edge(u, v) and rng.random() < density:
                g.add_edge(u, v)
    return g


def random_graph(rng: np.random.Generator, n: int, density: float) -> nx.Graph:
    """G(n, p) graph, possibly disconnected; used for the vertex-cover family."""
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < density:
                g.add_edge(u, v)
    return g


def topology_graph(kind: str, rng: np.random.Generator, n: int, density: float) -> nx.Graph:
    if kind == "path":
        return nx.path_graph(n)
    if kind == "cycle":
        return nx.cycle_graph(n)
    if kind == "tree":
        return random_tree(rng, n)
    return random_connected_graph(rng, n, density)


def walk_evader(
    rng: np.random.Generator,
    g: nx.Graph,
    deterministic: bool,
    weight: float = 1.0,
    max_starts: int = 2,
) -> MarkovEvader:
    """Evader drifting toward a random target.

    Deterministic evaders take the lowest-id shortest-path hop. Otherwise
    TOWARD_MASS is spread over neighbors closer to the target and the rest
    over the others, so every walk is absorbed.
    """
    n = g.number_of_nodes()
    t = int(rng.integers(0, n))
    distance = nx.single_source_shortest_path_length(g, t)
    others = [v for v in range(n) if v != t]
    k = int(rng.integers(1, min(max_starts, len(others)) + 1))
    starts = sorted(int(s) for s in rng.choice(others, size=k, replace=False))
    rows: Dict[int, Dict[int, float]] = {}
    for u in others:
        nbrs = sorted(g.neighbors(u))
        closer = [v for v in nbrs if distance[v] < distance[u]]
        farther = [v for v in nbrs if distance[v] >= distance[u]]
        if deterministic:
            rows[u] = {closer[0]: 1.0}
        elif not farther:
            rows[u] = {v: 1.0 / len(closer) for v in closer}
        else:
            rows[u] = {v: TOWARD_MASS / len(closer) for v in closer}
            for v in farther:
                rows[u][v] = (1.0 - TOWARD_MASS) / len(farther)
    return MarkovEvader.from_rows({s: 1.0 / k for s in starts}, rows, t, weight)


def random_instance(
    rng: np.random.Generator,
    kind: str,
    n: int,
    evaders: int,
    problem: Problem,
    deterministic: bool = False,
    density: float = 0.3,
    unit_costs: bool = True,
    max_cost: int = 3,
) -> Instance:
    g = topology_graph(kind, rng, n, density)
    costs = (
        SensorCostTable.unit(n)
        if unit_costs
        else SensorCostTable(tuple(int(c) for c in rng.integers(1, max_cost + 1, size=n)))
    )
    chains = tuple(
        walk_evader(rng, g, deterministic, float(rng.integers(1, 4))) for _ in range(evaders)
    )
    hint = kind if kind in ("path", "cycle", "tree") else "general"
    return check_instance(
        Instance(
            graph=_graph_from_nx(g),
            costs=costs,
            evaders=chains,
            problem=problem,
            topology_hint=hint,
        )
    )


def random_sets(
    rng: np.random.Generator, set_count: int, elements: int, density: float
) -> List[List[int]]:
    sets: List[List[int]] = [[] for _ in range(set_count)]
    for e in range(elements):
        chosen = [j for j in range(set_count) if rng.random() < density]
        if not chosen:
            chosen = [int(rng.integers(0, set_count))]
        for j in chosen:
            sets[j].append(e)
    return sets


def random_bridges(
    rng: np.random.Generator,
    bridges: int,
    people: int,
    convex: bool,
    max_set: int = 3,
    unit_weights: bool = True,
) -> BridgesInstance:
    """Random bridges instance; convex ones use contiguous runs of a hidden order."""
    hidden = [int(s) for s in rng.permutation(bridges)]
    crowd: List[Person] = []
    for _ in range(people):
        size = int(rng.integers(1, min(max_set, bridges) + 1))
        if convex:
            first = int(rng.integers(0, bridges - size + 1))
            members = frozenset(hidden[first : first + size])
        else:
            members = frozenset(int(s) for s in rng.choice(bridges, size=size, replace=False))
        magnitude = Fraction(1) if unit_weights else Fraction(int(rng.integers(1, 4)))
        if rng.random() < 0.5:
            crowd.append(Person("good", -magnitude, members))
        else:
            crowd.append(Person("bad", magnitude, members))
    return BridgesInstance(bridges, tuple(crowd))


# -- families ---------------------------------------------------------------


def _draw(rng: np.random.Generator, bounds: Tuple[int, int]) -> int:
    lo, hi = bounds
    return int(rng.integers(lo, hi + 1))


def generate_family_instance(spec: FamilySpec, index: int) -> Generated:
    """Instance ``index`` of a family; stream (seed, index) makes it reproducible."""
    rng = make_rng(spec.seed, index)
    provenance: Dict[str, Any] = {
        "generator": spec.generator,
        "seed": spec.seed,
        "index": index,
        "prng": PRNG_ALGORITHM,
    }
    kind = spec.generator
    if kind in ("bridges-convex", "bridges-general"):
        instance: Generated = random_bridges(
            rng,
            max(_draw(rng, spec.nodes), 1),
            _draw(rng, spec.people),
            convex=kind == "bridges-convex",
            max_set=spec.max_set,
            unit_weights=spec.unit_costs,
        )
    elif kind == "vc":
        n = max(_draw(rng, spec.nodes), 1)
        g = _graph_from_nx(random_graph(rng, n, spec.density))
        instance, _ = generate_vc_instance(g, min(_draw(rng, spec.budget), n))
    elif kind == "maxcov":
        set_count = max(_draw(rng, spec.nodes), 1)
        elements = max(_draw(rng, spec.people), 1)
        sets = random_sets(rng, set_count, elements, spec.density)
        instance = generate_maxcov_instance(sets, _draw(rng, spec.budget))
    else:
        minimum = 3 if kind == "cycle" else 2
        n = max(_draw(rng, spec.nodes), minimum)
        problem = Problem.fi() if spec.problem == "fi" else Problem.bi(_draw(rng, spec.budget))
        topology = {"routes": "general", "markov-path": "path"}.get(kind, kind)
        deterministic = spec.deterministic
        if kind == "routes":
            deterministic = True
        elif kind == "markov-path":
            deterministic = False
        instance = random_instance(
            rng,
            topology,
            n,
            max(_draw(rng, spec.evaders), 1),
            problem,
            deterministic=deterministic,
            density=spec.density,
            unit_costs=spec.unit_costs,
            max_cost=spec.max_cost,
        )
    merged = dict(instance.provenance or {})
    merged.update(provenance)
    if isinstance(instance, BridgesInstance):
        return BridgesInstance(instance.bridge_count, instance.people, instance.fn_bound, merged)
    return Instance(
        instance.graph,
        instance.costs,
        instance.evaders,
        instance.problem,
        instance.topology_hint,
        merged,
    )


def generate_family(spec: FamilySpec, count: Optional[int] = None) -> List[Generated]:
    count = spec.count if count is None else count
    logger.info(f"Generating {count} '{spec.generator}' instances from seed {spec.seed}")
    return [generate_family_instance(spec, i) for i in range(count)]
