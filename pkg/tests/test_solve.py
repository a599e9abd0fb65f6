#!/usr/bin/env python3
"""
Tests for the solver registry and automatic dispatch.
"""

import pytest

from conftest import cycle_graph, make_bridges, make_instance, route_instance
from interdiction.bridges import BridgeSolution
from interdiction.errors import (
    InterdictionError,
    ProblemMismatchError,
    TopologyError,
    UnknownAlgorithmError,
)
from interdiction.evader import MarkovEvader
from interdiction.instance import Graph
from interdiction.solve import choose_algorithm, run_solver, solve, solve_bridges

TREE = Graph(node_count=5, edges=((0, 1), (0, 2), (0, 3), (1, 4)))
TRIANGLE_PLUS = Graph(node_count=4, edges=((0, 1), (1, 2), (0, 2), (2, 3)))


class TestAutoDispatch:
    """Test the algorithm chosen for ``auto``."""

    def test_path_fi(self, walkers):
        """Test a path FI instance goes to the sweep."""
        assert choose_algorithm(walkers) == ("path-fi", [])

    def test_path_bi(self, walkers_bi):
        """Test a budgeted path goes to the DP."""
        assert choose_algorithm(walkers_bi)[0] == "path-dp"

    def test_tree_unit_costs(self):
        """Test unit-cost trees use tree piercing."""
        instance = route_instance(TREE, [[4, 1, 0, 2]])
        assert choose_algorithm(instance)[0] == "tree-fi"

    def test_tree_weighted_falls_back(self):
        """Test weighted trees with one evader use the cut."""
        evader = MarkovEvader.from_route([4, 1, 0, 2])
        instance = make_instance(TREE, [evader], costs=[2, 1, 1, 1, 1])
        assert choose_algorithm(instance)[0] == "mincut"

    def test_cycle(self):
        """Test cycles use the cut-one-node reduction."""
        instance = route_instance(cycle_graph(5), [[0, 1, 2]])
        assert choose_algorithm(instance)[0] == "cycle"

    def test_general_routes_warn(self):
        """Test several route evaders go to the greedy with a warning."""
        instance = route_instance(TRIANGLE_PLUS, [[0, 2, 3], [1, 2, 3]])
        algorithm, notes = choose_algorithm(instance)
        assert algorithm == "greedy-fi"
        assert notes

    def test_general_bi(self):
        """Test general budgeted instances use the cost-benefit greedy."""
        instance = route_instance(TRIANGLE_PLUS, [[0, 2, 3]], budget=1)
        assert choose_algorithm(instance)[0] == "greedy-bi"


class TestSolve:
    """Test solution assembly and compatibility checks."""

    def test_walkers_solution(self, walkers):
        """Test the auto solution is optimal and certified."""
        solution = solve(walkers)
        doc = solution.to_dict()
        assert doc["placement"] == [5, 8, 11]
        assert doc["cost"] == 3
        assert doc["feasible"] and doc["certified_optimal"]
        assert solution.objective == pytest.approx(2.0)

    def test_brute_matches(self, walkers):
        """Test brute force reaches the same cost."""
        assert solve(walkers, "brute").cost == solve(walkers, "path-fi").cost

    def test_greedy_not_certified(self):
        """Test approximate algorithms are not certified and carry a trace."""
        instance = route_instance(TRIANGLE_PLUS, [[0, 2, 3], [1, 2, 3]])
        solution = solve(instance)
        assert not solution.certified_optimal
        assert solution.feasible
        assert "trace" in solution.to_dict()

    def test_budget_respected(self, walkers_bi):
        """Test a BI solution stays within budget."""
        solution = solve(walkers_bi)
        assert solution.feasible
        assert solution.cost <= 2

    def test_unknown_algorithm(self, walkers):
        """Test an unknown name is refused."""
        with pytest.raises(UnknownAlgorithmError):
            solve(walkers, "simplex")

    def test_problem_mismatch(self, walkers):
        """Test a BI algorithm refuses an FI instance."""
        with pytest.raises(ProblemMismatchError):
            solve(walkers, "path-dp")

    def test_topology_mismatch(self):
        """Test the path sweep refuses a cycle."""
        instance = route_instance(cycle_graph(5), [[0, 1, 2]])
        with pytest.raises(TopologyError):
            solve(instance, "path-fi")

    def test_tree_needs_unit_costs(self):
        """Test tree piercing refuses weighted costs."""
        evader = MarkovEvader.from_route([4, 1, 0, 2])
        instance = make_instance(TREE, [evader], costs=[2, 1, 1, 1, 1])
        with pytest.raises(ProblemMismatchError):
            solve(instance, "tree-fi")

    def test_multi_evader_mincut_note(self, walkers):
        """Test the union of cuts is flagged as uncertified."""
        solution = solve(walkers, "mincut")
        assert solution.feasible
        assert not solution.certified_optimal
        assert solution.notes


class TestBridgesDispatch:
    """Test bridges dispatch."""

    def test_auto_convex(self):
        """Test convex instances use the exact solver."""
        instance = make_bridges(2, [("good", -2.0, [0, 1]), ("bad", 1.0, [0]), ("bad", 1.0, [1])])
        assert solve_bridges(instance).algorithm == "convex"

    def test_auto_scsc(self):
        """Test non-convex instances use SCSC."""
        instance = make_bridges(
            3, [("good", -1.0, [0, 1]), ("good", -1.0, [1, 2]), ("bad", 1.0, [0, 2])]
        )
        solution = solve_bridges(instance)
        assert solution.algorithm == "scsc"
        assert solution.bound == 3

    def test_brute(self):
        """Test the brute-force option is certified."""
        instance = make_bridges(1, [("good", -1.0, [0])])
        solution = solve_bridges(instance, "brute")
        assert solution.certified_optimal
        assert solution.open == frozenset({0})

    def test_unknown_algorithm(self):
        """Test instance algorithms are refused for bridges."""
        with pytest.raises(UnknownAlgorithmError):
            solve_bridges(make_bridges(1, [("good", -1.0, [0])]), "path-fi")

    def test_run_solver_dispatch(self, walkers):
        """Test run_solver picks the right family."""
        assert isinstance(run_solver(make_bridges(1, [("bad", 1.0, [0])])), BridgeSolution)
        assert run_solver(walkers).algorithm == "path-fi"
        with pytest.raises(InterdictionError):
            run_solver("not an instance")
