#!/usr/bin/env python3
"""
Tests for Markov evaders: capture and reach probabilities, route sets, separation.
"""

import pytest

from conftest import biased_walk, make_instance, path_graph
from interdiction.errors import NonAbsorbingError, NondeterministicEvaderError
from interdiction.evader import (
    MarkovEvader,
    capture_probabilities,
    capture_probability,
    enumerate_route_sets,
    find_recurrent_class,
    hit_before,
    hitting_probabilities,
    is_full_interdiction,
    objective_value,
    reach_probability,
    separates,
)


def _deterministic_first_walker() -> MarkovEvader:
    rows = {3: {4: 1.0}, 4: {5: 1.0}, 5: {6: 1.0}, 8: {7: 1.0}, 7: {6: 1.0}}
    return MarkovEvader.from_rows({3: 0.5, 8: 0.5}, rows, 6)


class TestCaptureProbability:
    """Test J(evader, placement)."""

    def test_empty_placement(self, walkers):
        """Test no sensors capture nobody."""
        for evader in walkers.evaders:
            assert capture_probability(evader, []) == pytest.approx(0.0, abs=1e-9)

    def test_all_but_target(self, walkers):
        """Test sensoring every non-target node captures surely."""
        evader = walkers.evaders[0]
        nodes = [v for v in range(12) if v != evader.target]
        assert capture_probability(evader, nodes) == pytest.approx(1.0)

    def test_sensor_at_target_is_ignored(self, walkers):
        """Test a sensor on the target itself does not count."""
        evader = walkers.evaders[0]
        assert capture_probability(evader, [6]) == pytest.approx(0.0, abs=1e-9)

    def test_gamblers_ruin(self):
        """Test a one-step detour probability is recovered exactly."""
        evader = biased_walk(3, {1: 1.0}, 0)
        assert capture_probability(evader, [2]) == pytest.approx(0.25)

    def test_two_sided_escape(self):
        """Test the classic ruin probability on a fair walk."""
        rows = {1: {0: 0.5, 2: 0.5}, 2: {1: 0.5, 3: 0.5}, 3: {2: 0.5, 4: 0.5}}
        evader = MarkovEvader.from_rows({1: 1.0}, rows, 0)
        # fair walk from 1 reaches 4 before 0 with probability 1/4
        assert capture_probability(evader, [4]) == pytest.approx(0.25)

    def test_monotone_in_placement(self, walkers):
        """Test adding sensors never lowers J."""
        evader = walkers.evaders[1]
        values = [capture_probability(evader, nodes) for nodes in ([], [2], [2, 10], [2, 10, 5])]
        assert values == sorted(values)

    def test_submodular_audit(self, walkers, rng):
        """Test sampled triples A <= B, v never show a larger gain on B."""
        for _ in range(10_000):
            evader = walkers.evaders[int(rng.integers(0, 2))]
            inside = rng.random(12) < 0.3
            extra = inside | (rng.random(12) < 0.3)
            v = int(rng.integers(0, 12))
            small = [u for u in range(12) if inside[u] and u != v]
            large = [u for u in range(12) if extra[u] and u != v]
            j_small = capture_probability(evader, small)
            j_large = capture_probability(evader, large)
            gain_small = capture_probability(evader, small + [v]) - j_small
            gain_large = capture_probability(evader, large + [v]) - j_large
            assert 0.0 <= j_small <= j_large + 1e-9 <= 1.0 + 2e-9
            assert gain_large <= gain_small + 1e-9

    def test_full_interdiction_placement(self, walkers):
        """Test the three-sensor placement captures both walkers surely."""
        assert capture_probabilities(walkers, [4, 7, 10]) == [pytest.approx(1.0)] * 2

    def test_objective_uses_weights(self):
        """Test the objective weights each evader's J."""
        heavy = biased_walk(3, {1: 1.0}, 0, weight=2.0)
        light = biased_walk(3, {1: 1.0}, 2, weight=0.5)
        instance = make_instance(path_graph(3), [heavy, light], budget=1)
        expected = 2.0 * 0.25 + 0.5 * capture_probability(light, [2])
        assert objective_value(instance, [2]) == pytest.approx(expected)


class TestReachProbability:
    """Test p_v and hit_before."""

    def test_reach_detour_node(self):
        """Test the reach probability of the far endpoint."""
        evader = biased_walk(3, {1: 1.0}, 0)
        assert reach_probability(evader, 2) == pytest.approx(0.25)

    def test_reach_start_is_one(self, walkers):
        """Test a start node with full mass is reached surely."""
        evader = biased_walk(5, {2: 1.0}, 4)
        assert reach_probability(evader, 2) == pytest.approx(1.0)

    def test_reach_target_undefined(self, walkers):
        """Test asking for the target's reach probability fails."""
        with pytest.raises(ValueError):
            reach_probability(walkers.evaders[0], 6)

    def test_unknown_state_is_zero(self):
        """Test a node outside the chain is never reached."""
        evader = MarkovEvader.from_route([0, 1, 2])
        assert reach_probability(evader, 7) == 0.0

    def test_hitting_probabilities_cover_states(self, walkers):
        """Test every non-target state gets a probability in [0, 1]."""
        probs = hitting_probabilities(walkers.evaders[0])
        assert 6 not in probs
        assert probs[3] == pytest.approx(0.5)
        assert all(0.0 <= p <= 1.0 for p in probs.values())

    def test_hit_before_stop_source(self):
        """Test a source that is a stop state scores zero."""
        evader = biased_walk(4, {0: 1.0}, 3)
        assert hit_before(evader, 3, [0], [0]) == {0: 0.0}

    def test_trapped_walk_raises(self):
        """Test a chain that can circle away from every stop raises."""
        rows = {0: {1: 0.5, 3: 0.5}, 1: {2: 1.0}, 2: {1: 1.0}}
        evader = MarkovEvader.from_rows({0: 1.0}, rows, 3)
        assert find_recurrent_class(evader) == [1, 2]
        with pytest.raises(NonAbsorbingError):
            capture_probability(evader, [])


class TestRouteSets:
    """Test deterministic route-set enumeration."""

    def test_two_starts(self):
        """Test two starts give two route sets with their masses."""
        collection = enumerate_route_sets(_deterministic_first_walker())
        sets = {r.nodes: r.probability for r in collection}
        assert sets == {frozenset({3, 4, 5}): 0.5, frozenset({7, 8}): 0.5}

    def test_equal_sets_merge(self):
        """Test starts on the same route merge their mass."""
        rows = {0: {1: 1.0}, 1: {2: 1.0}}
        evader = MarkovEvader.from_rows({0: 0.5, 1: 0.5}, rows, 2)
        sets = [(r.nodes, r.probability) for r in enumerate_route_sets(evader)]
        assert sets == [(frozenset({0, 1}), 0.5), (frozenset({1}), 0.5)]

    def test_stochastic_rejected(self, walkers):
        """Test a stochastic evader has no finite route family here."""
        with pytest.raises(NondeterministicEvaderError):
            enumerate_route_sets(walkers.evaders[0])

    def test_deterministic_flag(self, walkers):
        """Test the deterministic flag follows the rows."""
        assert _deterministic_first_walker().deterministic
        assert not walkers.evaders[0].deterministic


class TestSeparation:
    """Test graph-search feasibility of full interdiction."""

    def test_walkers_three_sensors(self, walkers):
        """Test the three-sensor placement cuts every start."""
        assert is_full_interdiction(walkers, [4, 7, 10])

    def test_missing_sensor(self, walkers):
        """Test dropping the last sensor lets the second walker through."""
        assert not is_full_interdiction(walkers, [4, 7])
        assert separates(walkers.evaders[0], [4, 7])
        assert not separates(walkers.evaders[1], [4, 7])

    def test_separation_matches_capture(self, walkers):
        """Test separation agrees with J = 1."""
        for nodes in ([4, 7, 10], [5, 8, 11], [4, 7], [3, 8, 10]):
            full = all(p == pytest.approx(1.0) for p in capture_probabilities(walkers, nodes))
            assert is_full_interdiction(walkers, nodes) == full
