"""Simple undirected graphs with 1-based vertex ids, DIMACS I/O and structural queries."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

log = logging.getLogger(__name__)


class DimacsError(ValueError):
    """Malformed DIMACS ``.col`` input."""


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``1..n``.

    ``adjacency[v]`` is the neighbour set of ``v``; index 0 is an unused
    empty placeholder so vertex ids index the tuple directly.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    adjacency: tuple[frozenset[int], ...] = field(repr=False, compare=False)
    name: str | None = field(default=None, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], name: str | None = None) -> "Graph":
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        es: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 1..{n}")
            es.add(_norm(u, v))
        adj: list[set[int]] = [set() for _ in range(n + 1)]
        for u, v in es:
            adj[u].add(v)
            adj[v].add(u)
        return cls(n, frozenset(es), tuple(frozenset(a) for a in adj), name)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency[1:]), default=0)

    def induced(self, keep: Iterable[int]) -> tuple["Graph", dict[int, int]]:
        """Subgraph induced by ``keep``, relabelled ``1..k`` in ascending order.

        Returns the subgraph and the map from new ids to the original ids.
        """
        kept = sorted(set(keep))
        new_id = {v: i for i, v in enumerate(kept, start=1)}
        sub_edges = [(new_id[u], new_id[v]) for u, v in self.edges if u in new_id and v in new_id]
        sub = Graph.from_edges(len(kept), sub_edges, self.name)
        return sub, {i: v for v, i in new_id.items()}


def parse_dimacs(text: str, name: str | None = None) -> Graph:
    n = m_header = None
    raw: list[tuple[int, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tok = line.split()
        if not tok:
            continue
        kind = tok[0]
        if kind == "c":
            continue
        if kind == "p":
            if n is not None:
                raise DimacsError(f"line {lineno}: second problem line")
            if len(tok) != 4 or tok[1] not in ("edge", "col"):
                raise DimacsError(f"line {lineno}: expected 'p edge <n> <m>', got {line.strip()!r}")
            try:
                n, m_header = int(tok[2]), int(tok[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer size in problem line") from None
            if n < 0 or m_header < 0:
                raise DimacsError(f"line {lineno}: negative size in problem line")
        elif kind == "e":
            if n is None:
                raise DimacsError(f"line {lineno}: edge before problem line")
            if len(tok) != 3:
                raise DimacsError(f"line {lineno}: expected 'e <u> <v>'")
            try:
                u, v = int(tok[1]), int(tok[2])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer endpoint") from None
            if u == v:
                raise DimacsError(f"line {lineno}: self-loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"line {lineno}: endpoint outside 1..{n}")
            raw.append((u, v))
        else:
            raise DimacsError(f"line {lineno}: unknown record type {kind!r}")
    if n is None:
        raise DimacsError("missing problem line 'p edge <n> <m>'")
    g = Graph.from_edges(n, raw, name)
    if g.m != m_header:
        log.warning("DIMACS header announces %d edges, found %d distinct", m_header, g.m)
    return g


def read_dimacs(path) -> Graph:
    from pathlib import Path

    p = Path(path)
    return parse_dimacs(p.read_text(encoding="ascii"), name=p.stem)


def to_dimacs(g: Graph) -> str:
    lines = []
    if g.name:
        lines.append(f"c {g.name}")
    lines.append(f"p edge {g.n} {g.m}")
    lines.extend(f"e {u} {v}" for u, v in g.sorted_edges())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ComponentMap:
    # (subgraph, subgraph id -> original id)
    components: tuple[tuple[Graph, dict[int, int]], ...]

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def connected_components(g: Graph) -> ComponentMap:
    seen = [False] * (g.n + 1)
    parts = []
    for s in g.vertices:
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], [s]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
                    comp.append(w)
        parts.append(g.induced(comp))
    return ComponentMap(tuple(parts))


def density(g: Graph) -> Fraction:
    if g.n < 2:
        raise ValueError("density is undefined for fewer than two vertices")
    return Fraction(2 * g.m, g.n * (g.n - 1))


def is_clique(g: Graph, vs: Iterable[int]) -> bool:
    vs = list(vs)
    return all(g.has_edge(a, b) for i, a in enumerate(vs) for b in vs[i + 1:])


def shortest_odd_cycle_through(g: Graph, q: int) -> list[int] | None:
    """Shortest odd closed walk ``q, v1, ..., v2k`` (back to ``q``), or None.

    BFS over (vertex, parity) states. Vertices may repeat when ``q`` only
    reaches an odd cycle through a path; the dual-bound arguments for the
    partial-ordering models hold for closed walks as well.
    """
    start = (q, 0)
    parent: dict[tuple[int, int], tuple[int, int] | None] = {start: None}
    frontier = [start]
    target = (q, 1)
    while frontier and target not in parent:
        nxt = []
        for v, par in frontier:
            for w in sorted(g.adjacency[v]):
                st = (w, par ^ 1)
                if st not in parent:
                    parent[st] = (v, par)
                    nxt.append(st)
        frontier = nxt
    if target not in parent:
        return None
    walk = []
    st: tuple[int, int] | None = target
    while st is not None:
        walk.append(st[0])
        st = parent[st]
    walk.reverse()
    return walk[:-1]


def bipartite(g: Graph) -> bool:
    side = [-1] * (g.n + 1)
    for s in g.vertices:
        if side[s] >= 0:
            continue
        side[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if side[w] < 0:
                    side[w] = side[u] ^ 1
                    stack.append(w)
                elif side[w] == side[u]:
                    return False
    return True
