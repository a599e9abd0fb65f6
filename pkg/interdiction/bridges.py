"""The Bridges problem: open bridges so goods cross and bads do not.

Person weights keep their signed convention (bads positive, goods negative)
and are held as exact ``Fraction`` values; scores are exact.
"""

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from app.logging_config import get_logger
from interdiction.errors import NotConvexError, ValidationFailed
from interdiction.instance import Violation
from interdiction.intervals import Interval, WeightedInterval, bi_path_dp
from interdiction.metrics import f1_score, precision, recall
from interdiction.schema import BRIDGES_FORMAT, BridgesDoc, load_document

logger = get_logger(__name__)


def to_fraction(w: float) -> Fraction:
    """Exact value of the decimal literal, not of its binary float."""
    return Fraction(repr(float(w)))


@dataclass(frozen=True)
class Person:
    kind: str
    w: Fraction
    bridges: FrozenSet[int]

    @property
    def is_good(self) -> bool:
        return self.kind == "good"

    @property
    def magnitude(self) -> Fraction:
        return abs(self.w)


@dataclass(frozen=True)
class BridgesInstance:
    bridge_count: int
    people: Tuple[Person, ...]
    fn_bound: Optional[Fraction] = None
    provenance: Optional[Dict[str, Any]] = field(default=None, compare=False, hash=False)

    @property
    def goods(self) -> List[int]:
        return [i for i, p in enumerate(self.people) if p.is_good]

    @property
    def bads(self) -> List[int]:
        return [i for i, p in enumerate(self.people) if not p.is_good]

    def crossers(self, bridge: int) -> List[int]:
        """sigma^-1(bridge)."""
        return [i for i, p in enumerate(self.people) if bridge in p.bridges]


@dataclass(frozen=True)
class ErrorScore:
    tp: Fraction
    fp: Fraction
    tn: Fraction
    fn: Fraction

    @property
    def errors(self) -> Fraction:
        return self.fp + self.fn

    @property
    def net(self) -> Fraction:
        """TN - FN."""
        return self.tn - self.fn

    @property
    def precision(self) -> float:
        """Bads are the positive class; a failed bad is a true positive."""
        return precision(float(self.tp), float(self.fp))

    @property
    def recall(self) -> float:
        return recall(float(self.tp), float(self.fn))

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tp": float(self.tp),
            "fp": float(self.fp),
            "tn": float(self.tn),
            "fn": float(self.fn),
            "fp_plus_fn": float(self.errors),
            "tn_minus_fn": float(self.net),
            "exact": {"fp_plus_fn": str(self.errors), "tn_minus_fn": str(self.net)},
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class Claw:
    good: int
    arms: Tuple[Tuple[int, FrozenSet[int]], ...]

    @property
    def bridges(self) -> List[int]:
        return [s for s, _ in self.arms]


@dataclass(frozen=True)
class BridgeSolution:
    open: FrozenSet[int]
    score: ErrorScore
    algorithm: str = ""
    certified_optimal: bool = False
    bound: Optional[int] = None
    dual_charge: Optional[Fraction] = None

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "open": sorted(self.open),
            "score": self.score.to_dict(),
            "algorithm": self.algorithm,
            "certified_optimal": self.certified_optimal,
        }
        if self.bound is not None:
            doc["bound"] = self.bound
        if self.dual_charge is not None:
            doc["dual_charge"] = float(self.dual_charge)
        return doc


# -- documents --------------------------------------------------------------


def validate_bridges(instance: BridgesInstance) -> List[Violation]:
    out: List[Violation] = []
    n = instance.bridge_count
    for i, p in enumerate(instance.people):
        if not p.bridges:
            out.append(Violation("EMPTY_BRIDGE_SET", f"person {i} has no bridges"))
        for s in sorted(p.bridges):
            if not 0 <= s < n:
                out.append(
                    Violation("BRIDGE_OUT_OF_RANGE", f"person {i} uses bridge {s} outside 0..{n - 1}")
                )
        if p.is_good and p.w >= 0:
            out.append(Violation("SIGN_MISMATCH", f"good {i} must have w < 0, got {p.w}"))
        if not p.is_good and p.w <= 0:
            out.append(Violation("SIGN_MISMATCH", f"bad {i} must have w > 0, got {p.w}"))
    if instance.fn_bound is not None and instance.fn_bound < 0:
        out.append(Violation("NEGATIVE_FN_BOUND", f"fn_bound {instance.fn_bound} is negative"))
    return out


def bridges_from_doc(doc: BridgesDoc) -> BridgesInstance:
    people = []
    for i, p in enumerate(doc.people):
        if len(set(p.bridges)) != len(p.bridges):
            raise ValidationFailed(
                [Violation("DUPLICATE_BRIDGE", f"person {i} lists a bridge twice")]
            )
        people.append(Person(p.kind, to_fraction(p.w), frozenset(p.bridges)))
    fn_bound = None if doc.fn_bound is None else to_fraction(doc.fn_bound)
    instance = BridgesInstance(doc.bridges, tuple(people), fn_bound, doc.provenance)
    violations = validate_bridges(instance)
    if violations:
        raise ValidationFailed(violations)
    return instance


def parse_bridges(text: str) -> BridgesInstance:
    return bridges_from_doc(load_document(text, BridgesDoc))


def bridges_to_dict(instance: BridgesInstance) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "format": BRIDGES_FORMAT,
        "version": 1,
        "bridges": instance.bridge_count,
        "people": [
            {"kind": p.kind, "w": float(p.w), "bridges": sorted(p.bridges)}
            for p in instance.people
        ],
    }
    if instance.fn_bound is not None:
        doc["fn_bound"] = float(instance.fn_bound)
    if instance.provenance:
        doc["provenance"] = instance.provenance
    return doc


def serialize_bridges(instance: BridgesInstance, indent: Optional[int] = 2) -> str:
    return json.dumps(bridges_to_dict(instance), indent=indent, sort_keys=True)


# -- scoring ----------------------------------------------------------------


def crosses(person: Person, open_bridges: Iterable[int]) -> bool:
    """x_p = max over s in sigma(p) of y_s."""
    return not person.bridges.isdisjoint(open_bridges)


def score(instance: BridgesInstance, open_bridges: Iterable[int]) -> ErrorScore:
    opened = frozenset(open_bridges)
    tp = fp = tn = fn = Fraction(0)
    for p in instance.people:
        success = crosses(p, opened)
        if p.is_good:
            if success:
                tn += p.magnitude
            else:
                fp += p.magnitude
        elif success:
            fn += p.magnitude
        else:
            tp += p.magnitude
    return ErrorScore(tp, fp, tn, fn)


def move_cost(instance: BridgesInstance, opened: Iterable[int]) -> Fraction:
    """Submodular cost of opening a set of bridges: weight of the bads they let through."""
    opened = frozenset(opened)
    return sum(
        (instance.people[b].magnitude for b in instance.bads if crosses(instance.people[b], opened)),
        Fraction(0),
    )


# -- convexity --------------------------------------------------------------


def is_convex_order(instance: BridgesInstance, order: Sequence[int]) -> bool:
    pos = {s: i for i, s in enumerate(order)}
    if sorted(pos) != list(range(instance.bridge_count)):
        return False
    for p in instance.people:
        places = [pos[s] for s in p.bridges]
        if places and max(places) - min(places) + 1 != len(places):
            return False
    return True


def _overlaps(a: FrozenSet[int], b: FrozenSet[int]) -> bool:
    return bool(a & b) and not a <= b and not b <= a


def _component_blocks(sets: List[FrozenSet[int]]) -> Optional[List[Set[int]]]:
    """Ordered block partition of one overlap component's union, or None."""
    g = nx.Graph()
    g.add_nodes_from(range(len(sets)))
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if _overlaps(sets[i], sets[j]):
                g.add_edge(i, j)
    order = [v for _, v in nx.bfs_edges(g, 0)]
    blocks: List[Set[int]] = [set(sets[0])]
    for v in order:
        x = sets[v]
        covered = set().union(*blocks)
        touched = [i for i, block in enumerate(blocks) if block & x]
        a, b = touched[0], touched[-1]
        if touched != list(range(a, b + 1)):
            return None
        if any(not blocks[i] <= x for i in range(a + 1, b)):
            return None
        new = set(x) - covered
        last = len(blocks) - 1
        if a == b:
            block = blocks[a]
            inside, outside = block & x, block - x
            if not new:
                return None
            if a == last:
                parts = [outside, inside, new]
            elif a == 0:
                parts = [new, inside, outside]
            else:
                return None
            blocks[a : a + 1] = [p for p in parts if p]
            continue
        left = [blocks[a] - x, blocks[a] & x]
        right = [blocks[b] & x, blocks[b] - x]
        if new:
            if b == last and blocks[b] <= x:
                right.append(new)
            elif a == 0 and blocks[a] <= x:
                left.insert(0, new)
            else:
                return None
        middle = blocks[a + 1 : b]
        blocks[a : b + 1] = [p for p in left + middle + right if p]
    return blocks


def check_convex(instance: BridgesInstance) -> Optional[List[int]]:
    """Bridge order under which every sigma(p) is contiguous, or None.

    Consecutive-ones test: sets that properly overlap fix each other's
    relative order, so each overlap component has one block sequence up to
    reversal. Components nest inside a single block of their parent.
    """
    n = instance.bridge_count
    sets = sorted(
        {p.bridges for p in instance.people if 1 < len(p.bridges) < n},
        key=lambda s: (len(s), sorted(s)),
    )

    g = nx.Graph()
    g.add_nodes_from(range(len(sets)))
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if _overlaps(sets[i], sets[j]):
                g.add_edge(i, j)
    components = []
    for members in sorted(nx.connected_components(g), key=min):
        group = [sets[i] for i in sorted(members)]
        blocks = _component_blocks(group)
        if blocks is None:
            return None
        components.append((frozenset().union(*group), len(group) == 1, blocks))

    parent: Dict[int, Optional[int]] = {}
    for c, (union, single, _) in enumerate(components):
        candidates = [
            d
            for d, (other, other_single, _) in enumerate(components)
            if d != c
            and (union < other or (union == other and other_single and not single))
        ]
        # an overlap group sits below a single set with the same union
        parent[c] = (
            min(candidates, key=lambda d: (len(components[d][0]), components[d][1], d))
            if candidates
            else None
        )

    children: Dict[Optional[int], List[int]] = {}
    for c, p in parent.items():
        children.setdefault(p, []).append(c)

    def arrange(c: int) -> Optional[List[int]]:
        _, _, blocks = components[c]
        kids = children.get(c, [])
        placed = set()
        out: List[int] = []
        for block in blocks:
            inner = [k for k in kids if components[k][0] <= block]
            used: Set[int] = set()
            for k in sorted(inner, key=lambda k: min(components[k][0])):
                sub = arrange(k)
                if sub is None:
                    return None
                out.extend(sub)
                used.update(sub)
            placed.update(inner)
            out.extend(sorted(block - used))
        if placed != set(kids):
            return None
        return out

    order: List[int] = []
    for root in sorted(children.get(None, []), key=lambda k: min(components[k][0])):
        sub = arrange(root)
        if sub is None:
            return None
        order.extend(sub)
    seen = set(order)
    order.extend(s for s in range(n) if s not in seen)
    if not is_convex_order(instance, order):
        logger.debug("Convexity check: assembled order failed verification")
        return None
    return order


# -- solvers ----------------------------------------------------------------


def solve_convex(instance: BridgesInstance) -> BridgeSolution:
    """Exact FP+FN minimization on a convex instance via the budget-free path DP."""
    order = check_convex(instance)
    if order is None:
        raise NotConvexError("no bridge ordering makes every bridge set contiguous")
    pos = {s: i for i, s in enumerate(order)}
    intervals = []
    for i, p in enumerate(instance.people):
        places = [pos[s] for s in p.bridges]
        intervals.append(WeightedInterval(Interval(min(places), max(places), i), float(-p.w)))
    result = bi_path_dp(intervals, [0] * instance.bridge_count, 0)
    opened = frozenset(order[k] for k in result.placement)
    logger.debug(f"Convex bridges: order {order}, open {sorted(opened)}")
    return BridgeSolution(opened, score(instance, opened), "convex", certified_optimal=True)


def enumerate_claws(instance: BridgesInstance) -> List[Claw]:
    bads_on = _bads_by_bridge(instance)
    return [
        Claw(g, tuple((s, frozenset(bads_on.get(s, ()))) for s in sorted(instance.people[g].bridges)))
        for g in instance.goods
    ]


def claws_satisfied(instance: BridgesInstance, open_bridges: Iterable[int]) -> bool:
    """Every good fails, or crosses an open bridge whose bads all cross too."""
    opened = frozenset(open_bridges)
    for claw in enumerate_claws(instance):
        good = instance.people[claw.good]
        if not crosses(good, opened):
            continue
        if not any(
            s in opened and all(crosses(instance.people[b], opened) for b in bads)
            for s, bads in claw.arms
        ):
            return False
    return True


def _bads_by_bridge(instance: BridgesInstance) -> Dict[int, List[int]]:
    out: Dict[int, List[int]] = {}
    for b in instance.bads:
        for s in instance.people[b].bridges:
            out.setdefault(s, []).append(b)
    return out


def frequency(instance: BridgesInstance) -> int:
    """f = 1 + max |sigma(g)| over goods; the set-cover frequency of a claw."""
    return 1 + max((len(instance.people[g].bridges) for g in instance.goods), default=0)


def solve_scsc(instance: BridgesInstance) -> BridgeSolution:
    """Primal-dual submodular-cost set cover over claws.

    Claws are covered by the good's kill move (cost |w_g|) or by opening one of
    its bridges (cost: the bads that bridge newly lets through). Goods are
    processed lightest first; each raises a charge alpha_g paid into its
    kill move and, per bridge, into that bridge's lowest-id unpaid bad.
    Opening wins when a bridge and the kill move become tight together.
    """
    people = instance.people
    bads_on = _bads_by_bridge(instance)
    opened: Set[int] = set()
    for g in instance.goods:
        for s in people[g].bridges:
            if not bads_on.get(s):
                opened.add(s)

    paid: Dict[int, Fraction] = {b: Fraction(0) for b in instance.bads}

    def tight(b: int) -> bool:
        return paid[b] >= people[b].magnitude or crosses(people[b], opened)

    def open_ready(bridges: Iterable[int]) -> Optional[int]:
        ready = [s for s in sorted(bridges) if all(tight(b) for b in bads_on.get(s, ()))]
        return ready[0] if ready else None

    alphas: Dict[int, Fraction] = {}
    killed: List[int] = []
    for g in sorted(instance.goods, key=lambda g: (people[g].magnitude, g)):
        bridges = people[g].bridges
        if crosses(people[g], opened):
            continue
        alpha = Fraction(0)
        while True:
            s = open_ready(bridges)
            if s is not None:
                opened.add(s)
                break
            if alpha >= people[g].magnitude:
                killed.append(g)
                break
            rates: Dict[int, int] = {}
            for s in bridges:
                b = min(b for b in bads_on[s] if not tight(b))
                rates[b] = rates.get(b, 0) + 1
            delta = min(
                [people[g].magnitude - alpha]
                + [(people[b].magnitude - paid[b]) / r for b, r in rates.items()]
            )
            alpha += delta
            for b, r in rates.items():
                paid[b] += delta * r
        alphas[g] = alpha
        logger.debug(f"SCSC: good {g} charged {alpha}, open={sorted(opened)}")

    opened_set = frozenset(opened)
    f = frequency(instance)
    charged = sum(alphas.values(), Fraction(0))
    return BridgeSolution(
        opened_set,
        score(instance, opened_set),
        "scsc",
        certified_optimal=False,
        bound=f,
        dual_charge=charged,
    )


def bridges_digest(instance: BridgesInstance) -> str:
    """SHA-256 of the canonical serialization."""
    canonical = json.dumps(bridges_to_dict(instance), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
