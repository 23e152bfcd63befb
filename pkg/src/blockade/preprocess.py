"""Graph normalization applied before any solver runs.

Two stages: collapsing multiple admin vertices into the single DA, and a
fixed-point pruning pass (unreachable-to-DA deletion, entry in-edge
removal, dead in-degree-0 deletion) that preserves the attacker's optimal
defended success rate for every budget.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import InputError
from .graph import AttackGraph, Edge


@dataclass(frozen=True)
class PreprocessReport:
    merged_admin_count: int
    removed_vertices: int
    removed_edges: int
    steps_applied: tuple[str, ...]
    da_reachable: bool = True


def _rebuild(g: AttackGraph, keep: set[int], edges: list[Edge]) -> AttackGraph:
    """Renumber the surviving subgraph densely, DA first."""
    order = [g.da] + sorted(
        (v for v in keep if v != g.da), key=lambda v: g.labels[v]
    )
    number = {v: i for i, v in enumerate(order)}
    return AttackGraph(
        n=len(order),
        edges=tuple(
            Edge(number[e.src], number[e.dst], e.failure_rate, e.blockable)
            for e in sorted(edges, key=lambda e: (g.labels[e.src], g.labels[e.dst]))
        ),
        entries=frozenset(number[v] for v in g.entries if v in keep),
        labels=tuple(g.labels[v] for v in order),
    )


def merge_admins(g: AttackGraph, admin_labels: set[str]) -> AttackGraph:
    """Collapse the given admin vertices into the DA vertex.

    Every edge into an admin is redirected to DA; parallel duplicates
    collapse to the copy with the minimum failure rate, OR-ing blockable
    flags among the minimum-rate copies only (blocking must never pretend
    to stop an attacker who had an unblockable best copy). All DA
    out-edges are deleted.
    """
    if not admin_labels:
        raise InputError("admin_labels must be nonempty")
    admins = {g.vertex_of_label(l) for l in admin_labels}
    admins.add(g.da)
    hit = admins & g.entries
    if hit:
        raise InputError(
            f"admin set contains entry vertices: {sorted(g.labels[v] for v in hit)}"
        )

    grouped: dict[tuple[int, int], list[Edge]] = {}
    for e in g.edges:
        src = g.da if e.src in admins else e.src
        dst = g.da if e.dst in admins else e.dst
        if src == g.da or dst == src:
            continue  # DA out-edges and collapsed self-loops vanish
        grouped.setdefault((src, dst), []).append(e)

    edges: list[Edge] = []
    for (src, dst), copies in grouped.items():
        min_rate = min(e.failure_rate for e in copies)
        blockable = any(
            e.blockable for e in copies if e.failure_rate == min_rate
        )
        edges.append(Edge(src, dst, min_rate, blockable))

    keep = set(range(g.n)) - (admins - {g.da})
    return _rebuild(g, keep, edges)


def prune(g: AttackGraph) -> tuple[AttackGraph, PreprocessReport]:
    """Apply the three deletion rules to a fixed point, in order:
    1. delete vertices that cannot reach DA,
    2. delete incoming edges of entry vertices,
    3. delete non-entry vertices with in-degree 0.
    """
    alive: set[int] = set(range(g.n))
    edges: set[Edge] = set(g.edges)
    steps: list[str] = []

    changed = True
    while changed:
        changed = False

        # 1. reverse reachability to DA
        inc: dict[int, list[int]] = {v: [] for v in alive}
        for e in edges:
            inc[e.dst].append(e.src)
        seen = {g.da}
        queue = [g.da]
        while queue:
            v = queue.pop()
            for u in inc[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        dead = alive - seen
        if dead:
            alive -= dead
            edges = {e for e in edges if e.src in alive and e.dst in alive}
            steps.append(f"drop_unreachable:{len(dead)}")
            changed = True

        # 2. entry in-edges
        entry_in = {e for e in edges if e.dst in g.entries}
        if entry_in:
            edges -= entry_in
            steps.append(f"drop_entry_in_edges:{len(entry_in)}")
            changed = True

        # 3. non-entry in-degree-0 vertices (cascading)
        while True:
            indeg = {v: 0 for v in alive}
            for e in edges:
                indeg[e.dst] += 1
            dead = {
                v
                for v in alive
                if indeg[v] == 0 and v not in g.entries and v != g.da
            }
            if not dead:
                break
            alive -= dead
            edges = {e for e in edges if e.src in alive and e.dst in alive}
            steps.append(f"drop_degree_zero:{len(dead)}")
            changed = True

    live_entries = g.entries & alive
    da_reachable = bool(live_entries) and _da_reachable(
        alive, edges, live_entries, g.da
    )
    if not da_reachable:
        warnings.warn(
            "DA is unreachable from every entry; attacker success rate is 0",
            stacklevel=2,
        )

    out = _rebuild(g, alive, list(edges))
    report = PreprocessReport(
        merged_admin_count=0,
        removed_vertices=g.n - out.n,
        removed_edges=len(g.edges) - len(out.edges),
        steps_applied=tuple(steps),
        da_reachable=da_reachable,
    )
    return out, report


def _da_reachable(alive, edges, entries, da) -> bool:
    adj: dict[int, list[int]] = {v: [] for v in alive}
    for e in edges:
        adj[e.src].append(e.dst)
    seen = set(entries)
    queue = list(entries)
    while queue:
        v = queue.pop()
        if v == da:
            return True
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return da in seen
