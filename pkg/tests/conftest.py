"""Shared fixtures for the interdict test suite."""

import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.config import Config  # noqa: E402
from interdiction.bridges import BridgesInstance, Person, to_fraction  # noqa: E402
from interdiction.evader import MarkovEvader  # noqa: E402
from interdiction.instance import (  # noqa: E402
    Graph,
    Instance,
    Problem,
    SensorCostTable,
    check_instance,
    parse_instance,
)
from interdiction.rng import make_rng  # noqa: E402

FIXTURES = project_root / "data" / "fixtures"


def path_graph(n: int) -> Graph:
    return Graph(node_count=n, edges=tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    return Graph(node_count=n, edges=tuple((i, (i + 1) % n) for i in range(n)))


def biased_walk(
    n: int, starts: Dict[int, float], target: int, toward: float = 0.75, weight: float = 1.0
) -> MarkovEvader:
    """Walk on the path 0..n-1 drifting toward ``target``; endpoints bounce."""
    rows: Dict[int, Dict[int, float]] = {}
    for u in range(n):
        if u == target:
            continue
        step = 1 if u < target else -1
        near, far = u + step, u - step
        if far < 0 or far >= n:
            rows[u] = {near: 1.0}
        else:
            rows[u] = {near: toward, far: 1.0 - toward}
    return MarkovEvader.from_rows(starts, rows, target, weight)


def make_instance(
    graph: Graph,
    evaders: Sequence[MarkovEvader],
    budget: Optional[int] = None,
    costs: Optional[Sequence[int]] = None,
    hint: Optional[str] = None,
) -> Instance:
    table = SensorCostTable(tuple(costs)) if costs is not None else SensorCostTable.unit(
        graph.node_count
    )
    problem = Problem.fi() if budget is None else Problem.bi(budget)
    return check_instance(Instance(graph, table, tuple(evaders), problem, hint))


def route_instance(
    graph: Graph, routes: Sequence[Sequence[int]], budget: Optional[int] = None
) -> Instance:
    return make_instance(graph, [MarkovEvader.from_route(r) for r in routes], budget)


def make_bridges(
    bridge_count: int, people: List[Tuple[str, float, Sequence[int]]]
) -> BridgesInstance:
    """People as (kind, w, bridges); w carries the sign convention (goods negative)."""
    return BridgesInstance(
        bridge_count,
        tuple(Person(kind, to_fraction(w), frozenset(b)) for kind, w, b in people),
    )


@pytest.fixture(autouse=True)
def no_history(monkeypatch):
    """Tests never write the run-history database."""
    monkeypatch.setattr(Config, "HISTORY_DB", "")


@pytest.fixture
def walkers_text() -> str:
    return (FIXTURES / "two_walkers.json").read_text(encoding="utf-8")


@pytest.fixture
def walkers(walkers_text) -> Instance:
    """Two biased walkers on the 12-node path: (3,8)->6 and (3,11)->9."""
    return parse_instance(walkers_text)


@pytest.fixture
def walkers_bi(walkers) -> Instance:
    return Instance(walkers.graph, walkers.costs, walkers.evaders, Problem.bi(2), walkers.topology_hint)


@pytest.fixture
def rng():
    return make_rng(20240601)
