"""Ground truth for small instances: exhaustive search and walk simulation."""

import itertools
import math
from fractions import Fraction
from typing import FrozenSet, Iterable, Iterator, NamedTuple, Optional, Tuple, Union

import numpy as np

from app.config import Config
from app.logging_config import get_logger
from interdiction.bridges import BridgesInstance, score
from interdiction.errors import GuardExceededError, InfeasibleError
from interdiction.evader import MarkovEvader, is_full_interdiction, objective_value
from interdiction.instance import Graph, Instance, Placement, placement_cost
from interdiction.rng import make_rng

logger = get_logger(__name__)

VALUE_TIE = 1e-12


class OracleResult(NamedTuple):
    """Optimal choice and its value: cost (FI), objective (BI) or FP+FN (bridges)."""

    chosen: FrozenSet[int]
    value: Union[float, Fraction]
    evaluated: int


class MonteCarloEstimate(NamedTuple):
    estimate: float
    stderr: float
    truncated: int
    truncation_bound: float
    trials: int

    def to_dict(self) -> dict:
        return self._asdict()


def _check_guard(size: int, guard: Optional[int]) -> None:
    guard = Config.BRUTE_FORCE_GUARD if guard is None else guard
    candidates = 2**size
    if candidates > guard:
        raise GuardExceededError(
            f"search space 2^{size} = {candidates} exceeds guard {guard}"
        )


def _subsets(n: int) -> Iterator[Tuple[int, ...]]:
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


def brute_force(
    instance: Union[Instance, BridgesInstance], guard: Optional[int] = None
) -> OracleResult:
    """Exhaustive optimum; ties go to the lexicographically smallest sorted set."""
    if isinstance(instance, BridgesInstance):
        return _brute_force_bridges(instance, guard)
    _check_guard(instance.n, guard)
    if instance.problem.is_fi:
        return _brute_force_fi(instance)
    return _brute_force_bi(instance)


def _brute_force_fi(instance: Instance) -> OracleResult:
    best: Optional[Tuple[int, Tuple[int, ...]]] = None
    evaluated = 0
    for subset in _subsets(instance.n):
        cost = placement_cost(instance, subset)
        if best is not None and (cost, subset) >= best:
            continue
        evaluated += 1
        if is_full_interdiction(instance, subset):
            best = (cost, subset)
    if best is None:
        raise InfeasibleError("no placement fully interdicts every evader")
    logger.debug(f"Brute force FI: cost {best[0]} after {evaluated} checks")
    return OracleResult(frozenset(best[1]), float(best[0]), evaluated)


def _brute_force_bi(instance: Instance) -> OracleResult:
    budget = instance.budget or 0
    values = []
    for subset in _subsets(instance.n):
        if placement_cost(instance, subset) <= budget:
            values.append((subset, objective_value(instance, subset)))
    top = max(v for _, v in values)
    chosen = min(s for s, v in values if v >= top - VALUE_TIE)
    logger.debug(f"Brute force BI: value {top:.6g} over {len(values)} affordable sets")
    return OracleResult(frozenset(chosen), float(top), len(values))


def _brute_force_bridges(instance: BridgesInstance, guard: Optional[int]) -> OracleResult:
    _check_guard(instance.bridge_count, guard)
    best: Optional[Tuple[Fraction, Tuple[int, ...]]] = None
    evaluated = 0
    for subset in _subsets(instance.bridge_count):
        evaluated += 1
        errors = score(instance, subset).errors
        if best is None or (errors, subset) < best:
            best = (errors, subset)
    assert best is not None
    return OracleResult(frozenset(best[1]), best[0], evaluated)


def has_vertex_cover(g: Graph, k: int) -> bool:
    """Exhaustive vertex-cover check for the coupling audit."""
    pairs = [(u, v) for u, v in g.edges]
    for cover in itertools.combinations(range(g.node_count), min(k, g.node_count)):
        chosen = set(cover)
        if all(u in chosen or v in chosen for u, v in pairs):
            return True
    return False


def _walk_tables(
    evader: MarkovEvader, placement: Iterable[int]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    states = list(evader.states)
    index = {u: i for i, u in enumerate(states)}
    k = len(states)
    matrix = np.zeros((k, k))
    for u, row in evader.rows:
        for v, p in row:
            matrix[index[u], index[v]] = p
    cum = np.cumsum(matrix, axis=1)
    totals = cum[:, -1:]
    cum = np.divide(cum, totals, out=np.ones_like(cum), where=totals > 0)
    start = np.zeros(k)
    for u, p in evader.start:
        start[index[u]] = p
    start_cum = np.cumsum(start) / start.sum()
    sensored = np.zeros(k, dtype=bool)
    for u in placement:
        if u in index and u != evader.target:
            sensored[index[u]] = True
    return cum, start_cum, sensored, index[evader.target]


def _draws(seed: int, stream: int, lo: int, size: int) -> np.ndarray:
    """Elements ``lo .. lo+size`` of stream (seed, stream); one 64-bit draw per double."""
    rng = make_rng(seed, stream)
    rng.bit_generator.advance(lo)
    return rng.random(size)


def monte_carlo_capture(
    evader: MarkovEvader,
    placement: Iterable[int],
    trials: Optional[int] = None,
    seed: int = 0,
    max_steps: Optional[int] = None,
    block_size: Optional[int] = None,
) -> MonteCarloEstimate:
    """Simulated capture probability.

    A walk is captured when it stands on a sensored node (it is about to
    leave it) and absorbed when it reaches the target. Walks still running
    after ``max_steps`` are counted as truncated. Walk w starts from element
    w of stream (seed, 0) and takes its step t from element w of stream
    (seed, t + 1), so every walk is fixed by the seed and its own index and
    the block size only groups the work.
    """
    trials = Config.MC_TRIALS if trials is None else int(trials)
    max_steps = Config.MC_MAX_STEPS if max_steps is None else int(max_steps)
    block_size = Config.MC_BLOCK_SIZE if block_size is None else int(block_size)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")

    cum, start_cum, sensored, target = _walk_tables(evader, placement)
    captured = 0
    truncated = 0
    for lo in range(0, trials, block_size):
        size = min(block_size, trials - lo)
        pos = np.searchsorted(start_cum, _draws(seed, 0, lo, size), side="right")
        alive = np.ones(size, dtype=bool)
        for step in range(max_steps):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            cur = pos[idx]
            caught = sensored[cur]
            done = caught | (cur == target)
            captured += int(caught.sum())
            alive[idx[done]] = False
            moving = idx[~done]
            if moving.size == 0:
                break
            draws = _draws(seed, step + 1, lo, int(moving[-1]) + 1)[moving]
            pos[moving] = np.argmax(cum[pos[moving]] > draws[:, None], axis=1)
        else:
            idx = np.flatnonzero(alive)
            caught = sensored[pos[idx]]
            captured += int(caught.sum())
            alive[idx[caught | (pos[idx] == target)]] = False
        truncated += int(alive.sum())

    estimate = captured / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    logger.debug(
        f"Monte Carlo: {trials} walks, estimate {estimate:.6f} +/- {stderr:.2e}, "
        f"{truncated} truncated"
    )
    return MonteCarloEstimate(estimate, stderr, truncated, truncated / trials, trials)


def estimate_placement(
    instance: Instance,
    placement: Placement,
    trials: Optional[int] = None,
    seed: int = 0,
) -> Tuple[MonteCarloEstimate, ...]:
    """One estimate per evader; evader i uses seed stream (seed, i)."""
    return tuple(
        monte_carlo_capture(evader, placement, trials, int(make_rng(seed, i).integers(2**63)))
        for i, evader in enumerate(instance.evaders)
    )
