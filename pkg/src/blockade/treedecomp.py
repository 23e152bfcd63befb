"""Tree decompositions via vertex elimination, conversion to nice form
rooted at {DA}, and validity checking.

The nice form has four node kinds (leaf/introduce/forget/join); every
graph edge is assigned to exactly one forget node, the place where the
blocking decision for that edge is made.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError
from .graph import AttackGraph, EdgeId

MIN_DEGREE = "min_degree"
MIN_FILL_IN = "min_fill_in"

LEAF = "leaf"
INTRODUCE = "introduce"
FORGET = "forget"
JOIN = "join"


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset[int], ...]
    tree_edges: tuple[tuple[int, int], ...]
    home_bag: dict[int, int] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1


@dataclass(frozen=True)
class NiceNode:
    bag: tuple[int, ...]
    kind: str
    children: tuple[int, ...]
    vertex: int | None = None  # introduced or forgotten vertex


@dataclass(frozen=True)
class NiceTreeDecomposition:
    nodes: tuple[NiceNode, ...]
    root: int
    forget_edge_assignment: dict[EdgeId, int] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return max(len(nd.bag) for nd in self.nodes) - 1

    @property
    def kind_counts(self) -> dict[str, int]:
        counts = {LEAF: 0, INTRODUCE: 0, FORGET: 0, JOIN: 0}
        for nd in self.nodes:
            counts[nd.kind] += 1
        return counts

    def postorder(self) -> list[int]:
        """Children-before-parent ordering starting from the root."""
        order: list[int] = []
        stack = [self.root]
        while stack:
            idx = stack.pop()
            order.append(idx)
            stack.extend(self.nodes[idx].children)
        order.reverse()
        return order


@dataclass(frozen=True)
class TDDiagnostics:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _undirected_adjacency(g: AttackGraph) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(g.n)]
    for e in g.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)
    return adj


def eliminate(g: AttackGraph, heuristic: str = MIN_DEGREE) -> TreeDecomposition:
    """Vertex-elimination tree decomposition of the underlying undirected
    graph. Each eliminated vertex v yields the bag {v} | N(v) (fill-in
    clique added among N(v)); the bag connects to the bag of the first
    eliminated vertex among its other members. Ties in the heuristic break
    toward the smallest vertex id.
    """
    if g.n == 0:
        raise InputError("cannot decompose an empty graph")
    if heuristic not in (MIN_DEGREE, MIN_FILL_IN):
        raise InputError(f"unknown heuristic {heuristic!r}")

    adj = _undirected_adjacency(g)
    remaining = set(range(g.n))
    bags: list[frozenset[int]] = []
    order: list[int] = []
    home: dict[int, int] = {}

    def fill_count(v: int) -> int:
        nbrs = sorted(adj[v])
        missing = 0
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1 :]:
                if b not in adj[a]:
                    missing += 1
        return missing

    while remaining:
        if heuristic == MIN_DEGREE:
            v = min(remaining, key=lambda u: (len(adj[u]), u))
        else:
            v = min(remaining, key=lambda u: (fill_count(u), u))
        nbrs = sorted(adj[v])
        home[v] = len(bags)
        bags.append(frozenset([v] + nbrs))
        order.append(v)
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
        for a in nbrs:
            adj[a].discard(v)
        adj[v] = set()
        remaining.discard(v)

    elim_pos = {v: i for i, v in enumerate(order)}
    tree_edges: list[tuple[int, int]] = []
    roots: list[int] = []
    for i, v in enumerate(order):
        others = bags[i] - {v}
        if others:
            j = min(others, key=lambda u: elim_pos[u])
            tree_edges.append((i, home[j]))
        else:
            roots.append(i)
    # a disconnected graph yields an elimination forest; chain the roots
    for a, b in zip(roots, roots[1:]):
        tree_edges.append((a, b))

    return TreeDecomposition(
        bags=tuple(bags), tree_edges=tuple(tree_edges), home_bag=home
    )


def best_decomposition(g: AttackGraph) -> TreeDecomposition:
    """Run both elimination heuristics and keep the smaller width
    (min-degree wins ties)."""
    by_degree = eliminate(g, MIN_DEGREE)
    by_fill = eliminate(g, MIN_FILL_IN)
    return by_fill if by_fill.width < by_degree.width else by_degree


def to_nice(td: TreeDecomposition, g: AttackGraph) -> NiceTreeDecomposition:
    """Convert to a nice decomposition rooted at the bag {DA}.

    The raw tree is rooted at DA's elimination bag when available (the bag
    formed when DA itself was eliminated), otherwise at the smallest-index
    bag containing DA; a forget chain above it reduces the root bag to
    {DA}. Every graph edge is then assigned to the unique forget node
    whose child bag contains both endpoints.
    """
    da_bags = [i for i, b in enumerate(td.bags) if g.da in b]
    if not da_bags:
        raise InputError("no bag contains the DA vertex")
    root_raw = td.home_bag.get(g.da, da_bags[0])
    if g.da not in td.bags[root_raw]:
        root_raw = da_bags[0]

    adj: dict[int, list[int]] = {i: [] for i in range(len(td.bags))}
    for a, b in td.tree_edges:
        adj[a].append(b)
        adj[b].append(a)

    children: dict[int, list[int]] = {i: [] for i in range(len(td.bags))}
    parent = {root_raw: -1}
    bfs = [root_raw]
    seen = {root_raw}
    while bfs:
        nxt: list[int] = []
        for v in bfs:
            for w in sorted(adj[v]):
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    children[v].append(w)
                    nxt.append(w)
        bfs = nxt
    if len(seen) != len(td.bags):
        raise InputError("tree decomposition is not connected")

    nodes: list[NiceNode] = []

    def add(bag: tuple[int, ...], kind: str, kids: tuple[int, ...], vertex=None) -> int:
        nodes.append(NiceNode(bag=bag, kind=kind, children=kids, vertex=vertex))
        return len(nodes) - 1

    def build_leaf(bag: frozenset[int]) -> int:
        start = min(bag)
        idx = add((start,), LEAF, ())
        cur = {start}
        for v in sorted(bag - cur):
            cur.add(v)
            idx = add(tuple(sorted(cur)), INTRODUCE, (idx,), v)
        return idx

    def transition(idx: int, src: frozenset[int], dst: frozenset[int]) -> int:
        cur = set(src)
        for v in sorted(src - dst):
            cur.remove(v)
            idx = add(tuple(sorted(cur)), FORGET, (idx,), v)
        for v in sorted(dst - src):
            cur.add(v)
            idx = add(tuple(sorted(cur)), INTRODUCE, (idx,), v)
        return idx

    # iterative post-order over the rooted raw tree
    top: dict[int, int] = {}
    stack: list[tuple[int, bool]] = [(root_raw, False)]
    while stack:
        raw, expanded = stack.pop()
        if not expanded:
            stack.append((raw, True))
            for c in children[raw]:
                stack.append((c, False))
            continue
        bag = td.bags[raw]
        kid_tops = [transition(top[c], td.bags[c], bag) for c in children[raw]]
        if not kid_tops:
            acc = build_leaf(bag)
        else:
            acc = kid_tops[0]
            for t in kid_tops[1:]:
                acc = add(tuple(sorted(bag)), JOIN, (acc, t))
        top[raw] = acc

    root = transition(top[root_raw], td.bags[root_raw], frozenset([g.da]))

    assignment: dict[EdgeId, int] = {}
    incident: dict[int, list[EdgeId]] = {}
    for e in g.edges:
        incident.setdefault(e.src, []).append(e.eid)
        incident.setdefault(e.dst, []).append(e.eid)
    for idx, nd in enumerate(nodes):
        if nd.kind != FORGET:
            continue
        child_bag = set(nodes[nd.children[0]].bag)
        x = nd.vertex
        for eid in incident.get(x, ()):
            if eid[0] in child_bag and eid[1] in child_bag:
                if eid in assignment:
                    raise InputError(
                        f"edge {eid} assigned to two forget nodes "
                        f"({assignment[eid]}, {idx}); invalid decomposition"
                    )
                assignment[eid] = idx
    missing = [e.eid for e in g.edges if e.eid not in assignment]
    if missing:
        raise InputError(f"edges not covered by any forget node: {missing}")

    return NiceTreeDecomposition(
        nodes=tuple(nodes), root=root, forget_edge_assignment=assignment
    )


def verify(
    td: TreeDecomposition | NiceTreeDecomposition, g: AttackGraph
) -> TDDiagnostics:
    """Check the three decomposition axioms, plus nice-form constraints
    when given a nice decomposition. Reports every violation found."""
    violations: list[str] = []
    if isinstance(td, NiceTreeDecomposition):
        bags = [frozenset(nd.bag) for nd in td.nodes]
        tree_edges = [
            (i, c) for i, nd in enumerate(td.nodes) for c in nd.children
        ]
        _check_nice(td, g, violations)
    else:
        bags = list(td.bags)
        tree_edges = list(td.tree_edges)

    if set().union(*bags) != set(range(g.n)):
        violations.append("union of bags does not equal the vertex set")

    for e in g.edges:
        if not any(e.src in b and e.dst in b for b in bags):
            violations.append(f"edge {e.src}->{e.dst} not covered by any bag")

    adj: dict[int, list[int]] = {i: [] for i in range(len(bags))}
    for a, b in tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    for v in range(g.n):
        holders = [i for i, b in enumerate(bags) if v in b]
        if not holders:
            continue
        seen = {holders[0]}
        queue = [holders[0]]
        holder_set = set(holders)
        while queue:
            i = queue.pop()
            for j in adj[i]:
                if j in holder_set and j not in seen:
                    seen.add(j)
                    queue.append(j)
        if seen != holder_set:
            violations.append(f"bags containing vertex {v} are not connected")

    return TDDiagnostics(violations=tuple(violations))


def _check_nice(
    ntd: NiceTreeDecomposition, g: AttackGraph, violations: list[str]
) -> None:
    root_bag = set(ntd.nodes[ntd.root].bag)
    if root_bag != {g.da}:
        violations.append(f"root bag {sorted(root_bag)} is not {{DA}}")
    for idx, nd in enumerate(ntd.nodes):
        bag = set(nd.bag)
        kids = [set(ntd.nodes[c].bag) for c in nd.children]
        if nd.kind == LEAF:
            if kids or len(bag) != 1:
                violations.append(f"node {idx}: invalid leaf")
        elif nd.kind == INTRODUCE:
            if (
                len(kids) != 1
                or nd.vertex not in bag
                or kids[0] != bag - {nd.vertex}
            ):
                violations.append(f"node {idx}: invalid introduce")
        elif nd.kind == FORGET:
            if (
                len(kids) != 1
                or nd.vertex in bag
                or kids[0] != bag | {nd.vertex}
            ):
                violations.append(f"node {idx}: invalid forget")
        elif nd.kind == JOIN:
            if len(kids) != 2 or kids[0] != bag or kids[1] != bag:
                violations.append(f"node {idx}: join children bags differ")
        else:
            violations.append(f"node {idx}: unknown kind {nd.kind!r}")

    counts: dict[EdgeId, int] = {e.eid: 0 for e in g.edges}
    for eid, idx in ntd.forget_edge_assignment.items():
        nd = ntd.nodes[idx]
        if nd.kind != FORGET:
            violations.append(f"edge {eid} assigned to non-forget node {idx}")
            continue
        child_bag = set(ntd.nodes[nd.children[0]].bag)
        if not (eid[0] in child_bag and eid[1] in child_bag):
            violations.append(
                f"edge {eid} assigned to forget node {idx} "
                "whose child bag misses an endpoint"
            )
        if eid in counts:
            counts[eid] += 1
    bad = [eid for eid, c in counts.items() if c != 1]
    if bad:
        violations.append(f"edges without exactly one forget assignment: {bad}")
