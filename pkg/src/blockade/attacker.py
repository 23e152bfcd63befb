"""Attacker best-response oracle and brute-force defense ground truth.

The attacker maximizes the product of per-edge success probabilities
``(1-f(e))(1-B(e))`` over entry-to-DA paths; equivalently a shortest path
under edge distance ``-ln(1-f) - ln(1-B)``, solved with multi-source
Dijkstra from all entries.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EnumerationCapError, InputError
from .graph import AttackGraph, Edge, EdgeId

PURE = "pure"
MIXED = "mixed"


@dataclass(frozen=True)
class BlockingPolicy:
    """Edge -> block probability. Pure policies use {0, 1} only."""

    probabilities: Mapping[EdgeId, float]
    mode: str = PURE

    @classmethod
    def empty(cls) -> "BlockingPolicy":
        return cls(probabilities={}, mode=PURE)

    @classmethod
    def pure(cls, blocked: Iterable[EdgeId]) -> "BlockingPolicy":
        return cls(probabilities={eid: 1.0 for eid in blocked}, mode=PURE)

    @classmethod
    def mixed(cls, probabilities: Mapping[EdgeId, float]) -> "BlockingPolicy":
        return cls(probabilities=dict(probabilities), mode=MIXED)

    def probability(self, eid: EdgeId) -> float:
        return self.probabilities.get(eid, 0.0)

    @property
    def blocked_edges(self) -> tuple[EdgeId, ...]:
        return tuple(sorted(e for e, p in self.probabilities.items() if p >= 1.0))

    @property
    def spend(self) -> float:
        return sum(self.probabilities.values())

    def check_against(self, g: AttackGraph) -> None:
        for eid, p in self.probabilities.items():
            if not (0.0 <= p <= 1.0):
                raise InputError(f"block probability {p} outside [0, 1]")
            if p > 0.0:
                if not g.has_edge(*eid):
                    raise InputError(f"policy references missing edge {eid}")
                if not g.edge(*eid).blockable:
                    raise InputError(f"policy blocks unblockable edge {eid}")
            if self.mode == PURE and p not in (0.0, 1.0):
                raise InputError(f"pure policy has fractional probability {p}")


@dataclass(frozen=True)
class AttackResult:
    """Best attack under a policy: success rate, witnessing path, distance."""

    success_rate: float
    path: tuple[EdgeId, ...]
    distance: float

    @property
    def path_vertices(self) -> tuple[int, ...]:
        if not self.path:
            return ()
        return (self.path[0][0],) + tuple(dst for _, dst in self.path)


@dataclass(frozen=True)
class DefenseSolution:
    """A pure defense: blocking policy, its defended success rate, and
    whether the producing algorithm guarantees optimality."""

    policy: BlockingPolicy
    value: float
    optimal: bool
    stats: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class MixedDefense:
    """A mixed defense; ``bound`` carries a proven lower bound on the
    optimal attacker success rate when the producing solver emits one."""

    policy: BlockingPolicy
    value: float
    bound: float | None = None
    stats: Mapping[str, object] = field(default_factory=dict)


def edge_distance(f: float, B: float) -> float:
    """Transformed distance ``-ln(1-f) - ln(1-B)``; +inf when B == 1."""
    if not (0.0 <= f < 1.0):
        raise InputError(f"failure rate {f} outside [0, 1)")
    if not (0.0 <= B <= 1.0):
        raise InputError(f"block probability {B} outside [0, 1]")
    if B == 1.0:
        return math.inf
    return -math.log1p(-f) - math.log1p(-B)


def best_attack(g: AttackGraph, policy: BlockingPolicy | None = None) -> AttackResult:
    """Maximum entry-to-DA success rate under ``policy``.

    Multi-source Dijkstra seeded with all entries at distance 0. Path
    reconstruction walks from the best entry (ties: smallest id) choosing
    the smallest-id successor whose settled distance is consistent, so
    equal-distance ties resolve to the lexicographically smallest vertex
    sequence.
    """
    if policy is None:
        policy = BlockingPolicy.empty()
    policy.check_against(g)

    dist = [math.inf] * g.n  # distance from v to DA (reverse search)
    dist[g.da] = 0.0
    heap: list[tuple[float, int]] = [(0.0, g.da)]
    weights: dict[EdgeId, float] = {}
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for e in g.in_edges(v):
            w = weights.get(e.eid)
            if w is None:
                w = edge_distance(e.failure_rate, policy.probability(e.eid))
                weights[e.eid] = w
            nd = w + d
            if nd < dist[e.src]:
                dist[e.src] = nd
                heapq.heappush(heap, (nd, e.src))

    best_entry = None
    best_d = math.inf
    for v in sorted(g.entries):
        if dist[v] < best_d:
            best_d = dist[v]
            best_entry = v
    if best_entry is None or best_d == math.inf:
        return AttackResult(success_rate=0.0, path=(), distance=math.inf)

    path: list[EdgeId] = []
    v = best_entry
    guard = 0
    while v != g.da:
        nxt = None
        for e in sorted(g.out_edges(v), key=lambda e: e.dst):
            w = weights.get(e.eid)
            if w is None:
                continue
            if w + dist[e.dst] == dist[v]:
                nxt = e
                break
        if nxt is None:  # float drift fallback: pick the tightest successor
            nxt = min(
                (e for e in g.out_edges(v) if e.eid in weights),
                key=lambda e: (weights[e.eid] + dist[e.dst], e.dst),
            )
        path.append(nxt.eid)
        v = nxt.dst
        guard += 1
        if guard > g.n:
            raise RuntimeError("path reconstruction failed to reach DA")
    return AttackResult(
        success_rate=math.exp(-best_d), path=tuple(path), distance=best_d
    )


def brute_force_defense(
    g: AttackGraph, budget: int, cap: int = 10_000_000
) -> tuple[BlockingPolicy, float]:
    """Exhaustive minimum over all pure blocking sets of size <= budget.

    Deterministic tie-break: first minimizer in (size, lexicographic edge
    order) enumeration wins. Guarded by a candidate-count cap.
    """
    blockable = sorted(e.eid for e in g.edges if e.blockable)
    k = min(budget, len(blockable))
    total = sum(math.comb(len(blockable), r) for r in range(k + 1))
    if total > cap:
        raise EnumerationCapError(
            f"{total} candidate blocking sets exceed cap {cap}"
        )
    best_policy = BlockingPolicy.empty()
    best_value = best_attack(g, best_policy).success_rate
    for r in range(1, k + 1):
        for combo in itertools.combinations(blockable, r):
            policy = BlockingPolicy.pure(combo)
            value = best_attack(g, policy).success_rate
            if value < best_value:
                best_value = value
                best_policy = policy
    return best_policy, best_value
