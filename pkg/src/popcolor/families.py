"""Small named graphs used by the relaxation checks, the CLI ``verify`` verb and tests."""

from __future__ import annotations

import random

from .graph import Graph, connected_components


def complete(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)], f"K{n}")


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i % n + 1) for i in range(1, n + 1)], f"C{n}")


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(1, n)], f"P{n}")


def star(leaves: int) -> Graph:
    # center is vertex 1
    return Graph.from_edges(leaves + 1, [(1, i) for i in range(2, leaves + 2)], f"K1,{leaves}")


def petersen() -> Graph:
    outer = [(i, i % 5 + 1) for i in range(1, 6)]
    spokes = [(i, i + 5) for i in range(1, 6)]
    inner = [(6 + i, 6 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner, "petersen")


def mycielski(g: Graph) -> Graph:
    """Mycielskian of ``g``: vertices ``v``, shadows ``n+v`` and apex ``2n+1``."""
    n = g.n
    es = list(g.edges)
    for u, v in g.edges:
        es.append((u, n + v))
        es.append((v, n + u))
    es.extend((n + v, 2 * n + 1) for v in g.vertices)
    return Graph.from_edges(2 * n + 1, es)


def myciel(k: int) -> Graph:
    """DIMACS ``myciel<k>``: ``k-1`` Mycielski steps from a single edge (myciel3 has 11 vertices)."""
    g = complete(2)
    for _ in range(k - 1):
        g = mycielski(g)
    return Graph.from_edges(g.n, g.edges, f"myciel{k}")


def queen(n: int) -> Graph:
    """DIMACS ``queen<n>_<n>``: cells of an n x n board, adjacent when a queen attacks."""
    cells = [(r, c) for r in range(n) for c in range(n)]
    es = []
    for a, (r1, c1) in enumerate(cells):
        for b in range(a + 1, len(cells)):
            r2, c2 = cells[b]
            if r1 == r2 or c1 == c2 or abs(r1 - r2) == abs(c1 - c2):
                es.append((a + 1, b + 1))
    return Graph.from_edges(n * n, es, f"queen{n}_{n}")


def gnp(n: int, p: float, rng: random.Random) -> Graph:
    es = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if rng.random() < p]
    return Graph.from_edges(n, es, f"gnp{n}")


def random_connected(n: int, p: float, rng: random.Random, max_tries: int = 1000) -> Graph:
    """Rejection-sample G(n, p) until connected."""
    for _ in range(max_tries):
        g = gnp(n, p, rng)
        if len(connected_components(g)) == 1:
            return g
    raise RuntimeError(f"no connected G({n}, {p}) after {max_tries} draws")
