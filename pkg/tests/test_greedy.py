#!/usr/bin/env python3
"""
Tests for the greedy FI hitting set and the BI cost-benefit greedy.
"""

import math

import pytest

from conftest import biased_walk, make_instance, path_graph, route_instance
from interdiction.errors import NondeterministicEvaderError
from interdiction.evader import MarkovEvader, collect_route_sets, is_full_interdiction, objective_value
from interdiction.generators import generate_family_instance, generate_maxcov_instance
from interdiction.greedy import GreedyStep, GreedyTrace, bi_greedy, fi_greedy, harmonic
from interdiction.instance import Graph, Instance, Problem, SensorCostTable, placement_cost
from interdiction.oracle import brute_force
from interdiction.schema import FamilySpec

SETS = [[0, 1, 2], [2, 3], [3, 4], [0, 4]]

# hub 0 lies on every route; leaves 1..4 start one route each
STAR = Graph(node_count=6, edges=((1, 0), (2, 0), (3, 0), (4, 0), (0, 5)))


class TestHarmonic:
    """Test the harmonic bound helper."""

    def test_values(self):
        """Test the first harmonic numbers."""
        assert harmonic(0) == 0.0
        assert harmonic(1) == 1.0
        assert harmonic(3) == pytest.approx(1 + 1 / 2 + 1 / 3)


class TestFIGreedy:
    """Test the greedy weighted hitting set."""

    def test_hub_first(self):
        """Test the node on every route is chosen alone."""
        instance = route_instance(STAR, [[1, 0, 5], [2, 0, 5], [3, 0, 5], [4, 0, 5]])
        result = fi_greedy(instance)
        assert result.placement.sorted_nodes() == [0]
        assert result.value == 1.0
        assert len(result.trace) == 1

    def test_costs_change_choice(self):
        """Test an expensive hub loses to cheap leaves."""
        routes = [[1, 0, 5], [2, 0, 5]]
        evaders = [MarkovEvader.from_route(r) for r in routes]
        instance = make_instance(STAR, evaders, costs=[5, 1, 1, 1, 1, 1])
        result = fi_greedy(instance)
        assert result.placement.sorted_nodes() == [1, 2]
        assert result.value == 2.0

    def test_trace_counts_hits(self):
        """Test the trace records cumulative route sets hit."""
        instance = route_instance(STAR, [[1, 0, 5], [2, 0, 5]])
        step = fi_greedy(instance).trace.steps[0]
        assert step.value == 2.0
        assert step.cost == 1

    def test_stochastic_rejected(self, walkers):
        """Test stochastic evaders are rejected."""
        with pytest.raises(NondeterministicEvaderError):
            fi_greedy(walkers)

    @pytest.mark.parametrize("index", range(100))
    def test_within_harmonic_bound(self, index):
        """Test cost stays within H_m of the optimum."""
        spec = FamilySpec(generator="routes", nodes=(4, 9), evaders=(1, 4), density=0.35, seed=41)
        instance = generate_family_instance(spec, index)
        result = fi_greedy(instance)
        optimum = brute_force(instance).value
        bound = harmonic(len(collect_route_sets(instance)))
        assert is_full_interdiction(instance, result.placement)
        assert result.value == placement_cost(instance, result.placement)
        assert result.value <= bound * optimum + 1e-9


class TestBIGreedy:
    """Test the cost-benefit greedy for budgeted interdiction."""

    def test_maxcov_full_coverage(self):
        """Test two sets cover all five elements."""
        instance = generate_maxcov_instance(SETS, 2)
        result = bi_greedy(instance)
        assert result.placement.sorted_nodes() == [0, 2]
        assert result.value == pytest.approx(5.0)

    def test_maxcov_single_set(self):
        """Test budget one takes the largest set."""
        result = bi_greedy(generate_maxcov_instance(SETS, 1))
        assert result.placement.sorted_nodes() == [0]
        assert result.value == pytest.approx(3.0)

    def test_zero_budget(self):
        """Test budget zero places nothing."""
        result = bi_greedy(generate_maxcov_instance(SETS, 0))
        assert len(result.placement) == 0
        assert result.value == pytest.approx(0.0, abs=1e-9)

    def test_budget_override(self):
        """Test an explicit budget replaces the instance budget."""
        result = bi_greedy(generate_maxcov_instance(SETS, 1), budget=2)
        assert result.value == pytest.approx(5.0)

    def test_negative_weight_rejected(self):
        """Test negative evader weights are refused."""
        evader = MarkovEvader.from_route([0, 1], weight=-1.0)
        instance = Instance(
            Graph(node_count=2, edges=((0, 1),)), SensorCostTable.unit(2), (evader,), Problem.bi(1)
        )
        with pytest.raises(ValueError):
            bi_greedy(instance)

    def test_negative_budget_rejected(self):
        """Test a negative budget is refused."""
        with pytest.raises(ValueError):
            bi_greedy(generate_maxcov_instance(SETS, 1), budget=-1)

    def test_single_node_fallback(self):
        """Test the best single node wins when greedy ratios mislead."""
        # node 1 has the best ratio but blocks node 0, which alone is worth more
        g = Graph(node_count=4, edges=((0, 3), (1, 3), (2, 0), (2, 1)), directed=True)
        evaders = [
            MarkovEvader.from_route([2, 0, 3], weight=10.0),
            MarkovEvader.from_route([1, 3], weight=3.0),
        ]
        instance = make_instance(g, evaders, budget=4, costs=[4, 1, 9, 1])
        result = bi_greedy(instance)
        assert result.placement.sorted_nodes() == [0]
        assert result.value == pytest.approx(10.0)

    def test_budget_covers_every_node(self):
        """Test a budget past the total cost buys every node."""
        evaders = [
            biased_walk(5, {1: 1.0}, 4, weight=2.0),
            biased_walk(5, {3: 1.0}, 0, weight=0.5),
        ]
        instance = make_instance(path_graph(5), evaders, budget=8, costs=[1, 2, 1, 3, 1])
        result = bi_greedy(instance)
        assert result.placement.sorted_nodes() == [0, 1, 2, 3, 4]
        assert placement_cost(instance, result.placement) == 8
        assert result.value == pytest.approx(2.5)

    def test_single_route_budget_one(self):
        """Test one sensor anywhere on a lone route captures it."""
        instance = route_instance(path_graph(4), [[0, 1, 2, 3]], budget=1)
        result = bi_greedy(instance)
        assert len(result.placement) == 1
        assert set(result.placement.sorted_nodes()) <= {0, 1, 2}
        assert result.value == pytest.approx(1.0)

    def test_leftover_budget_filled(self):
        """Test spare budget after the last positive gain still buys nodes."""
        instance = route_instance(path_graph(4), [[0, 1, 2, 3]], budget=2)
        result = bi_greedy(instance)
        assert result.placement.sorted_nodes() == [0, 1]
        assert result.value == pytest.approx(1.0)
        assert [s.gain for s in result.trace.steps] == [pytest.approx(1.0), 0.0]
        assert result.trace.ratios_nonincreasing()

    def test_ratios_nonincreasing(self, walkers_bi):
        """Test marginal ratios never grow along the trace."""
        result = bi_greedy(walkers_bi)
        assert result.trace.ratios_nonincreasing()
        assert placement_cost(walkers_bi, result.placement) <= 2
        assert objective_value(walkers_bi, result.placement) == pytest.approx(result.value)

    @pytest.mark.parametrize("index", range(100))
    def test_within_bound(self, index):
        """Test value stays above (1-1/e)/2 of the optimum."""
        spec = FamilySpec(
            generator="general",
            problem="bi",
            nodes=(4, 8),
            evaders=(1, 3),
            budget=(1, 4),
            density=0.35,
            unit_costs=False,
            seed=42,
        )
        instance = generate_family_instance(spec, index)
        result = bi_greedy(instance)
        optimum = brute_force(instance).value
        assert placement_cost(instance, result.placement) <= instance.budget
        assert result.value >= (1 - 1 / math.e) / 2 * optimum - 1e-9

    @pytest.mark.parametrize("index", range(100))
    def test_maxcov_within_bound(self, index):
        """Test unit-cost coverage reductions stay above 1-1/e of the optimum."""
        spec = FamilySpec(
            generator="maxcov", problem="bi", nodes=(3, 7), people=(3, 9), budget=(1, 3), seed=43
        )
        instance = generate_family_instance(spec, index)
        result = bi_greedy(instance)
        optimum = brute_force(instance).value
        assert placement_cost(instance, result.placement) <= instance.budget
        assert result.value >= (1 - 1 / math.e) * optimum - 1e-9


class TestTrace:
    """Test the trace helpers."""

    def test_detects_increase(self):
        """Test an increasing ratio sequence is flagged."""
        trace = GreedyTrace(
            (GreedyStep(0, 1.0, 1.0, 1.0, 1), GreedyStep(1, 2.0, 2.0, 3.0, 2))
        )
        assert not trace.ratios_nonincreasing()
        assert trace.to_list()[1]["node"] == 1
