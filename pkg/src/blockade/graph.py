"""Attack-graph data model, canonical JSON serialization, and a synthetic
tree-like graph generator.

Vertices are internally renumbered to dense ids ``0..n-1`` with the
destination (DA) fixed at id ``0``; original string ids survive in
``AttackGraph.labels``. Edges carry a failure rate in ``[0, 1)`` and a
blockable flag. All types are immutable after construction.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError

EdgeId = tuple[int, int]

_AUX_PREFIX = "__aux__"


@dataclass(frozen=True)
class Edge:
    """Directed edge with a traversal failure rate and a blockable flag."""

    src: int
    dst: int
    failure_rate: float
    blockable: bool

    @property
    def eid(self) -> EdgeId:
        return (self.src, self.dst)

    @property
    def distance(self) -> float:
        """Unblocked traversal distance ``-ln(1 - failure_rate)``."""
        return -math.log1p(-self.failure_rate)


@dataclass(frozen=True)
class AttackGraph:
    """Directed attack graph with one destination (DA, always id 0),
    a set of entry vertices, and per-edge failure/blockable attributes."""

    n: int
    edges: tuple[Edge, ...]
    entries: frozenset[int]
    labels: tuple[str, ...]
    da: int = 0

    def __post_init__(self) -> None:
        out: list[list[Edge]] = [[] for _ in range(self.n)]
        inc: list[list[Edge]] = [[] for _ in range(self.n)]
        index: dict[EdgeId, Edge] = {}
        for e in self.edges:
            if not (0 <= e.src < self.n and 0 <= e.dst < self.n):
                raise InputError(f"edge {e.src}->{e.dst} references unknown vertex")
            if e.eid in index:
                raise InputError(f"duplicate edge {self.labels[e.src]}->{self.labels[e.dst]}")
            out[e.src].append(e)
            inc[e.dst].append(e)
            index[e.eid] = e
        object.__setattr__(self, "_out", tuple(tuple(a) for a in out))
        object.__setattr__(self, "_in", tuple(tuple(a) for a in inc))
        object.__setattr__(self, "_index", index)

    # -- derived views ----------------------------------------------------

    def out_edges(self, v: int) -> tuple[Edge, ...]:
        return self._out[v]  # type: ignore[attr-defined]

    def in_edges(self, v: int) -> tuple[Edge, ...]:
        return self._in[v]  # type: ignore[attr-defined]

    def edge(self, src: int, dst: int) -> Edge:
        return self._index[(src, dst)]  # type: ignore[attr-defined]

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self._index  # type: ignore[attr-defined]

    @property
    def blockable_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.blockable)

    def label_of(self, eid: EdgeId) -> tuple[str, str]:
        return (self.labels[eid[0]], self.labels[eid[1]])

    def vertex_of_label(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown vertex label {label!r}") from None

    def hops_to_da(self) -> list[float]:
        """Minimum hop count from each vertex to DA (inf if DA unreachable)."""
        dist = [math.inf] * self.n
        dist[self.da] = 0
        queue = [self.da]
        while queue:
            nxt: list[int] = []
            for v in queue:
                for e in self.in_edges(v):
                    if dist[e.src] == math.inf:
                        dist[e.src] = dist[v] + 1
                        nxt.append(e.src)
            queue = nxt
        return dist


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for the synthetic tree-like generator."""

    n_vertices: int
    extra_edge_fraction: float = 0.1
    n_entries: int = 5
    high_failure_rate: float = 0.2
    low_failure_rate: float = 0.05
    high_rate_fraction: float = 0.5
    entry_pool_size: int | None = None
    seed: int = 0

    @property
    def pool_size(self) -> int:
        return self.entry_pool_size if self.entry_pool_size is not None else 2 * self.n_entries

    def validate(self) -> None:
        if self.n_vertices < 2:
            raise InputError("n_vertices must be at least 2")
        if not (0 <= self.extra_edge_fraction):
            raise InputError("extra_edge_fraction must be nonnegative")
        if not (self.n_entries >= 1):
            raise InputError("n_entries must be at least 1")
        if not (self.n_entries <= self.pool_size <= self.n_vertices - 1):
            raise InputError("need n_entries <= entry_pool_size <= n_vertices - 1")
        for name in ("high_failure_rate", "low_failure_rate"):
            r = getattr(self, name)
            if not (0.0 <= r < 1.0):
                raise InputError(f"{name} must be in [0, 1)")
        if not (0.0 <= self.high_rate_fraction <= 1.0):
            raise InputError("high_rate_fraction must be in [0, 1]")


@dataclass(frozen=True)
class GraphDiagnostics:
    """Result of :func:`validate_graph`; reporting only, never raises."""

    violations: tuple[str, ...]
    unreachable_to_da: tuple[str, ...]
    has_cycle: bool
    n_vertices: int
    n_edges: int
    n_blockable: int
    n_entries: int

    @property
    def ok(self) -> bool:
        return not self.violations


# -- loading / serialization ----------------------------------------------


def _check_rate(value: object, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise InputError(f"{where}: failure_rate must be a number")
    rate = float(value)
    if math.isnan(rate) or rate < 0.0 or rate > 1.0:
        raise InputError(f"{where}: failure_rate {rate} outside [0, 1]")
    return rate


def load_graph(document: str) -> AttackGraph:
    """Parse and validate a graph JSON document.

    Edges with failure rate exactly 1 are dropped with a warning (they can
    never be traversed). If both ``u->v`` and ``v->u`` are present, one
    direction is split through an auxiliary vertex so downstream code can
    treat vertex pairs as uniquely directed.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise InputError("document must be an object with 'vertices' and 'edges'")

    labels: list[str] = []
    entry_labels: set[str] = set()
    da_labels: list[str] = []
    for i, v in enumerate(doc["vertices"]):
        if not isinstance(v, dict) or "id" not in v:
            raise InputError(f"vertex #{i} must be an object with an 'id'")
        vid = v["id"]
        if not isinstance(vid, str):
            raise InputError(f"vertex #{i}: id must be a string")
        if vid in labels:
            raise InputError(f"duplicate vertex id {vid!r}")
        labels.append(vid)
        if v.get("entry", False):
            entry_labels.add(vid)
        if v.get("da", False):
            da_labels.append(vid)

    if len(da_labels) != 1:
        raise InputError(f"exactly one DA vertex required, found {len(da_labels)}")
    da_label = da_labels[0]
    if da_label in entry_labels:
        raise InputError("DA vertex cannot be an entry")

    raw_edges: dict[tuple[str, str], tuple[float, bool]] = {}
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict) or "src" not in e or "dst" not in e:
            raise InputError(f"edge #{i} must be an object with 'src' and 'dst'")
        src, dst = e["src"], e["dst"]
        if src not in labels or dst not in labels:
            raise InputError(f"edge #{i}: unknown endpoint {src!r}->{dst!r}")
        if src == dst:
            raise InputError(f"edge #{i}: self-loop on {src!r}")
        rate = _check_rate(e.get("failure_rate", 0.0), f"edge {src}->{dst}")
        blockable = bool(e.get("blockable", False))
        if (src, dst) in raw_edges:
            raise InputError(f"duplicate edge {src!r}->{dst!r}")
        if rate == 1.0:
            warnings.warn(
                f"dropping edge {src}->{dst} with failure_rate 1.0 (never usable)",
                stacklevel=2,
            )
            continue
        raw_edges[(src, dst)] = (rate, blockable)

    # Split one direction of mutually-directed pairs through an auxiliary
    # vertex: keep the lexicographically smaller (src, dst), reroute the other.
    for (src, dst) in sorted(raw_edges):
        if (dst, src) in raw_edges and (src, dst) < (dst, src):
            rate, blockable = raw_edges.pop((dst, src))
            aux = f"{_AUX_PREFIX}{dst}__{src}"
            if aux in labels:
                raise InputError(f"auxiliary label collision on {aux!r}")
            labels.append(aux)
            raw_edges[(dst, aux)] = (rate, blockable)
            raw_edges[(aux, src)] = (0.0, False)

    order = [da_label] + sorted(l for l in labels if l != da_label)
    number = {label: i for i, label in enumerate(order)}
    edges = tuple(
        Edge(number[s], number[d], rate, blockable)
        for (s, d), (rate, blockable) in sorted(raw_edges.items())
    )
    return AttackGraph(
        n=len(order),
        edges=edges,
        entries=frozenset(number[l] for l in entry_labels),
        labels=tuple(order),
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def serialize_graph(g: AttackGraph) -> str:
    """Canonical JSON text: vertices sorted by id, edges by (src, dst),
    floats printed with 17 significant digits."""
    vparts = []
    for label in sorted(g.labels):
        v = g.vertex_of_label(label)
        entry = "true" if v in g.entries else "false"
        da = "true" if v == g.da else "false"
        vparts.append(f'{{"id":{json.dumps(label)},"entry":{entry},"da":{da}}}')
    eparts = []
    for sl, dl, e in sorted((g.labels[e.src], g.labels[e.dst], e) for e in g.edges):
        b = "true" if e.blockable else "false"
        eparts.append(
            f'{{"src":{json.dumps(sl)},"dst":{json.dumps(dl)},'
            f'"failure_rate":{_fmt(e.failure_rate)},"blockable":{b}}}'
        )
    return '{"vertices":[' + ",".join(vparts) + '],"edges":[' + ",".join(eparts) + "]}"


def graph_from_parts(
    labels: Sequence[str],
    edges: Iterable[tuple[str, str, float, bool]],
    entries: Iterable[str],
    da: str,
) -> AttackGraph:
    """Build a graph from label-space parts (test and generator helper)."""
    order = [da] + sorted(l for l in labels if l != da)
    number = {label: i for i, label in enumerate(order)}
    return AttackGraph(
        n=len(order),
        edges=tuple(
            Edge(number[s], number[d], r, b) for s, d, r, b in sorted(edges)
        ),
        entries=frozenset(number[l] for l in entries),
        labels=tuple(order),
    )


# -- validation ------------------------------------------------------------


def validate_graph(g: AttackGraph) -> GraphDiagnostics:
    """Report invariant violations and structural facts without raising."""
    violations: list[str] = []
    if g.da in g.entries:
        violations.append("DA is marked as an entry vertex")
    if g.out_edges(g.da):
        violations.append("DA has outgoing edges (preprocessing removes them)")
    for e in g.edges:
        if not (0.0 <= e.failure_rate < 1.0):
            violations.append(
                f"edge {g.labels[e.src]}->{g.labels[e.dst]} failure_rate outside [0, 1)"
            )

    hops = g.hops_to_da()
    unreachable = tuple(g.labels[v] for v in range(g.n) if hops[v] == math.inf)

    color = [0] * g.n  # 0 unseen, 1 on stack, 2 done
    has_cycle = False
    for start in range(g.n):
        if color[start]:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        color[start] = 1
        while stack:
            v, i = stack[-1]
            if i < len(g.out_edges(v)):
                stack[-1] = (v, i + 1)
                w = g.out_edges(v)[i].dst
                if color[w] == 1:
                    has_cycle = True
                elif color[w] == 0:
                    color[w] = 1
                    stack.append((w, 0))
            else:
                color[v] = 2
                stack.pop()

    return GraphDiagnostics(
        violations=tuple(violations),
        unreachable_to_da=unreachable,
        has_cycle=has_cycle,
        n_vertices=g.n,
        n_edges=len(g.edges),
        n_blockable=sum(1 for e in g.edges if e.blockable),
        n_entries=len(g.entries),
    )


# -- synthetic generator ----------------------------------------------------


def _rng(seed: int) -> np.random.Generator:
    # Philox: counter-based, seedable, stable across platforms.
    return np.random.Generator(np.random.Philox(key=seed))


def _edge_hops(g_edges: Sequence[tuple[int, int]], hops: Sequence[float]) -> list[float]:
    """Hop(e) = hop distance from the edge head to DA (0 for edges into DA)."""
    return [hops[dst] for _, dst in g_edges]


def generate_synthetic(params: GeneratorParams) -> AttackGraph:
    """Random in-tree toward DA plus extra forward edges, with hop-based
    blockable assignment and furthest-from-DA entry selection.

    Fully deterministic given (params, seed).
    """
    params.validate()
    n = params.n_vertices
    rng = _rng(params.seed)

    # In-tree: vertex v>0 points at a uniformly random lower-numbered vertex,
    # so every vertex reaches DA (= vertex 0) and depth stays logarithmic.
    pairs: list[tuple[int, int]] = [(v, int(rng.integers(0, v))) for v in range(1, n)]
    pair_set = set(pairs)

    depth = [0] * n
    for v, p in pairs:  # pairs are ordered by v, parents are smaller
        depth[v] = depth[p] + 1

    n_extra = int(params.extra_edge_fraction * (n - 1))
    attempts = 0
    added = 0
    while added < n_extra and attempts < 50 * n_extra + 100:
        attempts += 1
        u = int(rng.integers(1, n))
        w = int(rng.integers(0, n))
        # forward: strictly closer to DA, no self/parallel edges
        if w == u or depth[w] >= depth[u] or (u, w) in pair_set:
            continue
        pair_set.add((u, w))
        pairs.append((u, w))
        added += 1

    pairs.sort()
    # true hop distances over the full edge set (reverse BFS from DA)
    inc: list[list[int]] = [[] for _ in range(n)]
    for u, w in pairs:
        inc[w].append(u)
    dist = [math.inf] * n
    dist[0] = 0.0
    queue = [0]
    while queue:
        nxt: list[int] = []
        for v in queue:
            for u in inc[v]:
                if dist[u] == math.inf:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        queue = nxt
    hops = dist

    rates = [
        params.high_failure_rate
        if rng.random() < params.high_rate_fraction
        else params.low_failure_rate
        for _ in pairs
    ]

    edge_hops = _edge_hops(pairs, hops)
    max_hop = max(edge_hops) if edge_hops else 0.0
    blockable = [
        bool(rng.random() < (h / max_hop)) if max_hop > 0 else False
        for h in edge_hops
    ]

    # entry pool: vertices furthest from DA by hops (ties: smaller id)
    pool = sorted(range(1, n), key=lambda v: (-hops[v], v))[: params.pool_size]
    picked = rng.choice(len(pool), size=params.n_entries, replace=False)
    entries = frozenset(pool[int(i)] for i in picked)

    edges = tuple(
        Edge(u, w, rates[i], blockable[i]) for i, (u, w) in enumerate(pairs)
    )
    return AttackGraph(
        n=n,
        edges=edges,
        entries=entries,
        labels=tuple(str(v) for v in range(n)),
    )


def redraw_defense_surface(
    g: AttackGraph, n_entries: int, entry_pool_size: int, seed: int
) -> AttackGraph:
    """Re-draw entries and blockable flags on an existing topology.

    Follows the experimental protocol: entries drawn from the
    ``entry_pool_size`` vertices furthest from DA, blockable flags drawn
    with probability Hop(e)/MaxHop.
    """
    if not (1 <= n_entries <= entry_pool_size <= g.n - 1):
        raise InputError("need 1 <= n_entries <= entry_pool_size <= n - 1")
    rng = _rng(seed)
    hops = g.hops_to_da()
    reachable = [v for v in range(g.n) if v != g.da and hops[v] != math.inf]
    pool = sorted(reachable, key=lambda v: (-hops[v], v))[:entry_pool_size]
    if len(pool) < n_entries:
        raise InputError("not enough DA-reachable vertices for the entry pool")
    picked = rng.choice(len(pool), size=n_entries, replace=False)
    entries = frozenset(pool[int(i)] for i in picked)

    ordered = sorted(g.edges, key=lambda e: e.eid)
    edge_hops = [hops[e.dst] for e in ordered]
    finite = [h for h in edge_hops if h != math.inf]
    max_hop = max(finite) if finite else 0.0
    edges = []
    for e, h in zip(ordered, edge_hops):
        p = (h / max_hop) if (max_hop > 0 and h != math.inf) else 0.0
        edges.append(Edge(e.src, e.dst, e.failure_rate, bool(rng.random() < p)))
    return AttackGraph(
        n=g.n, edges=tuple(edges), entries=entries, labels=g.labels, da=g.da
    )
