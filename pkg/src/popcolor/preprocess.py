"""Reductions applied before any model is built.

Dominated-vertex removal, the DSATUR upper bound, greedy cliques for the
lower bound and precoloring, and lifting colorings of the reduced graph
back to the input graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence

from .graph import Graph, is_clique

Coloring = Dict[int, int]


@dataclass(frozen=True)
class DominanceTrace:
    """Removals in the order they happened, in original vertex ids.

    ``residual`` is relabelled to ``1..k``; ``residual_map`` takes its ids
    back to the original graph.
    """

    removals: tuple[tuple[int, int], ...]
    residual: Graph
    residual_map: dict[int, int]

    def to_original(self, coloring: Coloring) -> Coloring:
        return {self.residual_map[v]: c for v, c in coloring.items()}


@dataclass(frozen=True)
class PrecolorPlan:
    clique: tuple[int, ...]
    q: int
    fixed: dict[int, int]
    H: int

    @property
    def clique_lb(self) -> int:
        return len(self.clique)

    def score(self, g: Graph) -> int:
        return clique_score(g, self.clique, self.H)


def remove_dominated(g: Graph) -> DominanceTrace:
    adj = {v: set(g.adjacency[v]) for v in g.vertices}
    removals: list[tuple[int, int]] = []
    changed = True
    while changed:
        changed = False
        for u in sorted(adj, key=lambda v: (len(adj[v]), v)):
            if u not in adj:
                continue
            dom = _dominator(adj, u)
            if dom is None:
                continue
            removals.append((u, dom))
            for w in adj.pop(u):
                adj[w].discard(u)
            changed = True
    residual, rmap = g.induced(adj)
    return DominanceTrace(tuple(removals), residual, rmap)


def _dominator(adj: dict[int, set[int]], u: int) -> int | None:
    nu = adj[u]
    if nu:
        # a dominator must be adjacent to every neighbour of u
        it = iter(nu)
        cands = set(adj[next(it)])
        for w in it:
            cands &= adj[w]
            if not cands:
                return None
        cands.discard(u)
    else:
        cands = set(adj) - {u}
    if not cands:
        return None
    return min(cands, key=lambda v: (-len(adj[v]), v))


def lift_coloring(trace: DominanceTrace, partial: Coloring) -> Coloring:
    """Extend a coloring of the residual graph (original ids) to the input graph."""
    missing = [v for v in trace.residual_map.values() if v not in partial]
    if missing:
        raise ValueError(f"coloring does not cover residual vertices {sorted(missing)}")
    out = dict(partial)
    for u, v in reversed(trace.removals):
        out[u] = out[v]
    return out


def dsatur_upper_bound(g: Graph) -> tuple[int, Coloring]:
    """DSATUR greedy coloring; ties by degree, then smallest id."""
    color: Coloring = {}
    seen: dict[int, set[int]] = {v: set() for v in g.vertices}
    uncolored = set(g.vertices)
    while uncolored:
        v = min(uncolored, key=lambda u: (-len(seen[u]), -g.degree(u), u))
        c = 1
        while c in seen[v]:
            c += 1
        color[v] = c
        uncolored.discard(v)
        for w in g.adjacency[v]:
            seen[w].add(c)
    return max(color.values(), default=0), color


def grow_clique(g: Graph, seed: int) -> frozenset[int]:
    """Greedy maximal clique from ``seed``.

    Each step adds the candidate with the most neighbours among the
    remaining candidates (then highest degree, then smallest id).
    """
    clique = {seed}
    cands = set(g.adjacency[seed])
    while cands:
        w = min(cands, key=lambda u: (-len(g.adjacency[u] & cands), -g.degree(u), u))
        clique.add(w)
        cands &= g.adjacency[w]
    return frozenset(clique)


def clique_candidates(g: Graph) -> list[frozenset[int]]:
    """Greedy cliques seeded at the ceil(log2 n) highest-degree vertices, deduplicated."""
    if g.n == 0:
        return []
    k = max(1, math.ceil(math.log2(g.n))) if g.n > 1 else 1
    seeds = sorted(g.vertices, key=lambda v: (-g.degree(v), v))[:k]
    out: list[frozenset[int]] = []
    for s in seeds:
        c = grow_clique(g, s)
        if c not in out:
            out.append(c)
    return out


def greedy_clique(g: Graph) -> frozenset[int]:
    if g.n < 1:
        raise ValueError("graph has no vertices")
    return max(clique_candidates(g), key=len)


def cut_size(g: Graph, vs: Iterable[int]) -> int:
    s = set(vs)
    return sum(1 for u, v in g.edges if (u in s) != (v in s))


def clique_score(g: Graph, clique: Iterable[int], H: int) -> int:
    clique = list(clique)
    return len(clique) * H + cut_size(g, clique)


def select_precolor_clique(g: Graph, candidates: Sequence[Iterable[int]], H: int) -> PrecolorPlan:
    """Pick the candidate maximizing |Q|*H + |delta(Q)|; first candidate wins ties."""
    if not candidates:
        raise ValueError("no candidate cliques")
    best = None
    best_score = None
    for cand in candidates:
        q_set = sorted(cand)
        if not is_clique(g, q_set):
            raise ValueError(f"candidate {q_set} is not a clique")
        if len(q_set) > H:
            raise ValueError(f"clique of size {len(q_set)} exceeds H={H}")
        s = clique_score(g, q_set, H)
        if best_score is None or s > best_score:
            best, best_score = q_set, s
    order = sorted(best, key=lambda v: (-g.degree(v), v))
    q = order[0]
    fixed = {v: c for c, v in enumerate(order[1:], start=1)}
    return PrecolorPlan(tuple(best), q, fixed, H)


@dataclass
class PreprocessReport:
    """Outcome of reduction, bounding and clique selection on one connected graph.

    ``plan`` and ``witness_residual`` use residual ids; ``coloring`` is the
    lifted DSATUR witness on the input graph.
    """

    trace: DominanceTrace
    plan: PrecolorPlan
    H: int
    lb: int
    early_exit: bool
    witness_residual: Coloring
    coloring: Coloring = field(default_factory=dict)

    def to_dict(self) -> dict:
        rmap = self.trace.residual_map
        return {
            "removed": [[u, v] for u, v in self.trace.removals],
            "residual_vertices": [rmap[v] for v in sorted(rmap)],
            "clique": sorted(rmap[v] for v in self.plan.clique),
            "q": rmap[self.plan.q],
            "fixed": {str(rmap[v]): c for v, c in sorted(self.plan.fixed.items())},
            "H": self.H,
            "lb": self.lb,
            "early_exit": self.early_exit,
            "coloring": {str(v): c for v, c in sorted(self.coloring.items())},
        }


def preprocess_pipeline(g: Graph) -> PreprocessReport:
    if g.n == 0:
        raise ValueError("graph has no vertices")
    trace = remove_dominated(g)
    res = trace.residual
    H, witness = dsatur_upper_bound(res)
    plan = select_precolor_clique(res, clique_candidates(res), H)
    lb = plan.clique_lb
    lifted = lift_coloring(trace, trace.to_original(witness))
    return PreprocessReport(trace, plan, H, lb, lb == H, witness, lifted)
