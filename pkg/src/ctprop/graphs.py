"""Graph machinery: moral graphs, connectivity, and clique separator decomposition.

The decomposition pipeline never adds edges to the graph it splits: a minimal
elimination ordering (LEX-M) supplies candidate separators, each candidate is
kept only if it is complete in the *original* graph, actually disconnects it,
and is minimal in the usual two-full-components sense. Splitting at the kept
separators peels the graph into atoms that contain no complete separator.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import InvalidSeparatorError

Vertex = int
Edge = tuple[Vertex, Vertex]


def _norm_edge(a: Vertex, b: Vertex) -> Edge:
    return (a, b) if a < b else (b, a)


class DiGraph:
    """Acyclic directed graph over integer vertex ids."""

    __slots__ = ("vertices", "arcs", "_parents", "_children")

    def __init__(self, vertices: Iterable[Vertex], arcs: Iterable[Edge]):
        self.vertices = frozenset(vertices)
        self.arcs = frozenset((int(p), int(c)) for p, c in arcs)
        for p, c in self.arcs:
            if p not in self.vertices or c not in self.vertices:
                raise ValueError(f"arc ({p},{c}) has endpoint outside the vertex set")
            if p == c:
                raise ValueError(f"self-arc on {p}")
        self._parents: dict[Vertex, frozenset[Vertex]] = {}
        self._children: dict[Vertex, frozenset[Vertex]] = {}
        par: dict[Vertex, set[Vertex]] = {v: set() for v in self.vertices}
        chi: dict[Vertex, set[Vertex]] = {v: set() for v in self.vertices}
        for p, c in self.arcs:
            par[c].add(p)
            chi[p].add(c)
        for v in self.vertices:
            self._parents[v] = frozenset(par[v])
            self._children[v] = frozenset(chi[v])
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        indeg = {v: len(self._parents[v]) for v in self.vertices}
        queue = [v for v, d in indeg.items() if d == 0]
        seen = 0
        while queue:
            v = queue.pop()
            seen += 1
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if seen != len(self.vertices):
            raise ValueError("directed graph contains a cycle")

    def parents(self, v: Vertex) -> frozenset[Vertex]:
        return self._parents[v]

    def children(self, v: Vertex) -> frozenset[Vertex]:
        return self._children[v]

    def roots(self) -> frozenset[Vertex]:
        return frozenset(v for v in self.vertices if not self._parents[v])

    def leaves(self) -> frozenset[Vertex]:
        return frozenset(v for v in self.vertices if not self._children[v])

    def parent_map(self) -> dict[Vertex, frozenset[Vertex]]:
        return dict(self._parents)


class UGraph:
    """Undirected graph over integer vertex ids; no self-loops."""

    __slots__ = ("vertices", "edges", "_adj")

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Edge]):
        self.vertices = frozenset(vertices)
        norm = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge ({a},{b}) has endpoint outside the vertex set")
            norm.add(_norm_edge(int(a), int(b)))
        self.edges = frozenset(norm)
        adj: dict[Vertex, set[Vertex]] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        self._adj = {v: frozenset(ns) for v, ns in adj.items()}

    def neighbors(self, v: Vertex) -> frozenset[Vertex]:
        return self._adj[v]

    def has_edge(self, a: Vertex, b: Vertex) -> bool:
        return _norm_edge(a, b) in self.edges

    def subgraph(self, keep: Iterable[Vertex]) -> "UGraph":
        keep = frozenset(keep)
        return UGraph(keep, (e for e in self.edges if e[0] in keep and e[1] in keep))


def moralize(g: DiGraph) -> UGraph:
    """Undirected graph with every arc dropped to an edge and all co-parents married."""
    edges: set[Edge] = {_norm_edge(p, c) for p, c in g.arcs}
    for v in g.vertices:
        ps = sorted(g.parents(v))
        for i, p in enumerate(ps):
            for q in ps[i + 1:]:
                edges.add(_norm_edge(p, q))
    return UGraph(g.vertices, edges)


def connected_components(g: UGraph, removed: Iterable[Vertex] = ()) -> list[frozenset[Vertex]]:
    """Maximal connected vertex sets of g minus `removed`, ordered by smallest member."""
    removed = frozenset(removed)
    todo = set(g.vertices) - removed
    comps = []
    while todo:
        start = min(todo)
        comp = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for u in g.neighbors(v):
                if u in todo and u not in comp:
                    comp.add(u)
                    frontier.append(u)
        todo -= comp
        comps.append(frozenset(comp))
    comps.sort(key=min)
    return comps


def is_connected(g: UGraph) -> bool:
    return len(connected_components(g)) <= 1


def is_complete(g: UGraph, s: Iterable[Vertex]) -> bool:
    """True iff every pair of vertices in s is an edge (empty and singletons pass)."""
    s = sorted(set(s))
    for i, a in enumerate(s):
        for b in s[i + 1:]:
            if not g.has_edge(a, b):
                return False
    return True


def is_separator(g: UGraph, s: Iterable[Vertex]) -> bool:
    """True iff deleting s leaves more than one connected component."""
    return len(connected_components(g, removed=s)) > 1


def full_components(g: UGraph, s: Iterable[Vertex]) -> list[frozenset[Vertex]]:
    """Components of g - s whose neighborhood covers all of s."""
    s = frozenset(s)
    out = []
    for comp in connected_components(g, removed=s):
        reach = set()
        for v in comp:
            reach |= g.neighbors(v) & s
        if reach == s:
            out.append(comp)
    return out


def is_minimal_separator(g: UGraph, s: Iterable[Vertex]) -> bool:
    """True iff s separates some pair of vertices minimally, i.e. at least two
    components of g - s see every vertex of s."""
    return len(full_components(g, s)) >= 2


@dataclass(frozen=True)
class Decomposition:
    """A complete separator together with the two overlapping parts it induces."""

    separator: frozenset[Vertex]
    v1: frozenset[Vertex]
    v2: frozenset[Vertex]

    @classmethod
    def checked(cls, g: UGraph, separator: Iterable[Vertex],
                v1: Iterable[Vertex], v2: Iterable[Vertex]) -> "Decomposition":
        """Validate the split against g: complete separator, proper covering parts,
        and no edge crossing between the two sides outside the separator."""
        s = frozenset(separator)
        v1 = frozenset(v1)
        v2 = frozenset(v2)
        if v1 | v2 != g.vertices or v1 & v2 != s:
            raise InvalidSeparatorError("parts must cover the graph and overlap exactly on the separator")
        if v1 == g.vertices or v2 == g.vertices:
            raise InvalidSeparatorError("both parts must be proper subsets")
        if not is_complete(g, s):
            raise InvalidSeparatorError(f"separator {sorted(s)} is not complete")
        for a, b in g.edges:
            if (a in v1 - s and b in v2 - s) or (b in v1 - s and a in v2 - s):
                raise InvalidSeparatorError(
                    f"edge ({a},{b}) crosses the separator {sorted(s)}")
        return cls(s, v1, v2)


def decompose_at(g: UGraph, s: Iterable[Vertex]) -> Decomposition:
    """Split g at a complete separator: one part is the separator plus the
    component of g - s containing the smallest vertex id, the other is the rest."""
    s = frozenset(s)
    if not is_complete(g, s):
        raise InvalidSeparatorError(f"{sorted(s)} is not complete")
    comps = connected_components(g, removed=s)
    if len(comps) < 2:
        raise InvalidSeparatorError(f"{sorted(s)} does not disconnect the graph")
    first = comps[0]  # ordered by smallest member
    v1 = s | first
    v2 = g.vertices - first
    return Decomposition.checked(g, s, v1, v2)


def minimal_elimination_order(g: UGraph) -> tuple[dict[Vertex, int], set[Edge]]:
    """LEX-M: an elimination ordering whose fill is inclusion-minimal.

    Returns (position, fill) where position maps each vertex to 1..n
    (vertices are conceptually eliminated in increasing position) and fill
    is the set of added edges; g plus fill is chordal.

    Ties in label comparison break toward the smallest vertex id, which makes
    the whole decomposition pipeline deterministic.
    """
    label: dict[Vertex, int] = {v: 0 for v in g.vertices}
    position: dict[Vertex, int] = {}
    fill: set[Edge] = set()
    unnumbered = set(g.vertices)
    for pos in range(len(g.vertices), 0, -1):
        v = min(unnumbered, key=lambda u: (-label[u], u))
        position[v] = pos
        unnumbered.discard(v)
        # Minimax search: best[u] = min over v-u paths through unnumbered
        # interior vertices of the largest interior label. u is reached when
        # best[u] < label[u]; direct neighbors have no interior (best -1).
        best: dict[Vertex, int] = {}
        heap: list[tuple[int, Vertex]] = []
        for u in g.neighbors(v):
            if u in unnumbered:
                best[u] = -1
                heapq.heappush(heap, (-1, u))
        while heap:
            b, u = heapq.heappop(heap)
            if b > best.get(u, 1 << 60):
                continue
            through = max(b, label[u])
            for w in g.neighbors(u):
                if w in unnumbered and through < best.get(w, 1 << 60):
                    best[w] = through
                    heapq.heappush(heap, (through, w))
        reached = [u for u, b in best.items() if b < label[u]]
        for u in reached:
            label[u] += 1
            if not g.has_edge(u, v):
                fill.add(_norm_edge(u, v))
    return position, fill


@dataclass(frozen=True)
class Peel:
    """One decomposition step: `atom` split off the running graph at `separator`."""

    separator: frozenset[Vertex]
    atom: frozenset[Vertex]


@dataclass(frozen=True)
class CsdResult:
    """Outcome of decomposing a connected graph at its clique minimal separators."""

    peels: tuple[Peel, ...]
    residual: frozenset[Vertex]

    @property
    def atoms(self) -> list[frozenset[Vertex]]:
        return [p.atom for p in self.peels] + [self.residual]

    @property
    def separators(self) -> list[frozenset[Vertex]]:
        """Distinct separators in discovery order."""
        out: list[frozenset[Vertex]] = []
        for p in self.peels:
            if p.separator not in out:
                out.append(p.separator)
        return out


def clique_separator_decomposition(g: UGraph) -> CsdResult:
    """Peel a connected graph into atoms at minimal complete separators.

    Scans vertices in a LEX-M minimal elimination order; the higher-ordered
    fill-neighborhood of each vertex is a candidate separator. A candidate is
    used only if it is complete in the original graph, still splits the
    running graph, and is verified minimal (two full components in the
    original graph) — so no step ever relies on a fill edge. Repeated
    splitting yields atoms that contain no complete separator of g.
    """
    n = len(g.vertices)
    if n == 0:
        return CsdResult((), frozenset())
    if not is_connected(g):
        raise ValueError("graph must be connected; split into components first")
    position, fill = minimal_elimination_order(g)
    filled_adj: dict[Vertex, set[Vertex]] = {v: set(g.neighbors(v)) for v in g.vertices}
    for a, b in fill:
        filled_adj[a].add(b)
        filled_adj[b].add(a)
    by_position = sorted(g.vertices, key=lambda v: position[v])
    remaining = set(g.vertices)
    peels: list[Peel] = []
    for v in by_position:
        if v not in remaining:
            continue
        sep = frozenset(u for u in filled_adj[v] if position[u] > position[v])
        if not sep or not sep <= remaining:
            continue
        if not is_complete(g, sep):
            continue
        if not is_minimal_separator(g, sep):
            continue
        sub = g.subgraph(remaining)
        comps = connected_components(sub, removed=sep)
        if len(comps) < 2:
            continue
        mine = next((c for c in comps if v in c), None)
        if mine is None or len(mine) + len(sep) == len(remaining):
            continue
        peels.append(Peel(sep, frozenset(mine | sep)))
        remaining -= mine
    return CsdResult(tuple(peels), frozenset(remaining))


def redundant_peels(g: UGraph, result: CsdResult,
                    observed_leaves: Iterable[Vertex]) -> list[bool]:
    """Flag the peels whose split only severs observed leaves from their parents.

    A peel is redundant when either side of the split (the peeled atom's
    interior, or everything else that remained at that point) consists
    entirely of observed leaves. Splitting there buys nothing: conditioning
    at the observed leaf's parent set — which is complete by marriage —
    handles it directly, and grafting an answer back onto the same separator
    would loop forever.
    """
    observed = frozenset(observed_leaves)

    def all_observed(side: frozenset[Vertex]) -> bool:
        return bool(side) and side <= observed

    flags = []
    remaining = set(g.vertices)
    for peel in result.peels:
        interior = peel.atom - peel.separator
        complement = frozenset(remaining) - peel.atom
        flags.append(all_observed(interior) or all_observed(complement))
        remaining -= interior
    return flags


def nontrivial_separators(
    g: UGraph,
    observed_leaves: Iterable[Vertex] = (),
    parents: Mapping[Vertex, frozenset[Vertex]] | None = None,
) -> list[frozenset[Vertex]]:
    """Separators of the peels still worth splitting at, deduplicated in
    discovery order. `parents` is unused but kept for signature stability
    (observed leaves already determine redundancy)."""
    result = clique_separator_decomposition(g)
    flags = redundant_peels(g, result, observed_leaves)
    out: list[frozenset[Vertex]] = []
    for peel, redundant in zip(result.peels, flags):
        if not redundant and peel.separator not in out:
            out.append(peel.separator)
    return out


def to_dot(g: UGraph | DiGraph, highlight: Iterable[Iterable[Vertex]] = (),
           names: Mapping[Vertex, str] | None = None) -> str:
    """DOT text for debugging; optional vertex groups are colored."""
    names = names or {}
    colors = ["lightblue", "lightyellow", "lightpink", "lightgreen", "lavender"]
    label = lambda v: names.get(v, str(v))
    lines = []
    directed = isinstance(g, DiGraph)
    lines.append("digraph g {" if directed else "graph g {")
    group_of: dict[Vertex, int] = {}
    for i, grp in enumerate(highlight):
        for v in grp:
            group_of[v] = i
    for v in sorted(g.vertices):
        attrs = f' [label="{label(v)}"'
        if v in group_of:
            attrs += f', style=filled, fillcolor="{colors[group_of[v] % len(colors)]}"'
        attrs += "]"
        lines.append(f"  n{v}{attrs};")
    if directed:
        for p, c in sorted(g.arcs):
            lines.append(f"  n{p} -> n{c};")
    else:
        for a, b in sorted(g.edges):
            lines.append(f"  n{a} -- n{b};")
    lines.append("}")
    return "\n".join(lines)
