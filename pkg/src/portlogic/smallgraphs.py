"""Exhaustive enumeration of small graphs and their port numberings.

Desk-scale sweeps drive most of the toolkit's verification: run a machine on
every graph up to a node bound, under every numbering when that is feasible
and under a seeded sample otherwise.  The number of numberings of a graph is
the product of deg(v)!^2 over its nodes, so exhaustion is capped and sampling
takes over beyond the cap.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial
from typing import Iterator

from .graphs import (
    Graph,
    GraphError,
    PortNumbering,
    consistent_port_numbering,
    random_port_numbering,
)

__all__ = [
    "all_graphs",
    "are_isomorphic",
    "all_port_numberings",
    "count_port_numberings",
    "numberings",
]

ISO_NODE_CAP = 8


def are_isomorphic(g1: Graph, g2: Graph) -> bool:
    """Brute-force isomorphism test, capped at 8 nodes per graph."""
    if g1.n > ISO_NODE_CAP or g2.n > ISO_NODE_CAP:
        raise GraphError(f"isomorphism search capped at {ISO_NODE_CAP} nodes")
    if g1.n != g2.n or sorted(g1.degrees()) != sorted(g2.degrees()):
        return False

    def profile(g: Graph, v: int) -> tuple:
        return (g.degree(v), tuple(sorted(g.degree(u) for u in g.adjacency[v])))

    candidates = {
        v: [w for w in range(g2.n) if profile(g2, w) == profile(g1, v)]
        for v in range(g1.n)
    }
    order = sorted(range(g1.n), key=lambda v: len(candidates[v]))
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(idx: int) -> bool:
        if idx == len(order):
            return True
        v = order[idx]
        for w in candidates[v]:
            if w in used:
                continue
            ok = True
            for u, x in mapping.items():
                if g1.has_edge(v, u) != g2.has_edge(w, x):
                    ok = False
                    break
            if ok:
                mapping[v] = w
                used.add(w)
                if extend(idx + 1):
                    return True
                del mapping[v]
                used.discard(w)
        return False

    return extend(0)


def _graphs_on(n: int, max_degree: int | None) -> list[Graph]:
    pairs = list(itertools.combinations(range(n), 2))
    found: dict[tuple, list[Graph]] = {}
    out: list[Graph] = []
    for mask in range(1 << len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        degs = [0] * n
        for u, v in edges:
            degs[u] += 1
            degs[v] += 1
        if max_degree is not None and max(degs, default=0) > max_degree:
            continue
        g = Graph.from_edges(n, edges)
        key = (
            tuple(sorted(degs)),
            tuple(sorted(tuple(sorted(g.degree(u) for u in g.adjacency[v])) for v in range(n))),
        )
        bucket = found.setdefault(key, [])
        if any(are_isomorphic(g, h) for h in bucket):
            continue
        bucket.append(g)
        out.append(g)
    return out


@lru_cache(maxsize=None)
def all_graphs(
    max_nodes: int, max_degree: int | None = None, connected: bool = False
) -> tuple[Graph, ...]:
    """All non-isomorphic graphs with 1..max_nodes nodes (cached)."""
    result: list[Graph] = []
    for n in range(1, max_nodes + 1):
        for g in _graphs_on(n, max_degree):
            if connected and not g.is_connected():
                continue
            result.append(g)
    return tuple(result)


def count_port_numberings(g: Graph) -> int:
    total = 1
    for v in range(g.n):
        total *= factorial(g.degree(v)) ** 2
    return total


def all_port_numberings(g: Graph) -> Iterator[PortNumbering]:
    """Every valid numbering: outgoing orders x incoming orders, per node."""
    out_choices = [list(itertools.permutations(g.adjacency[v])) for v in range(g.n)]
    in_choices = [list(itertools.permutations(range(1, g.degree(v) + 1))) for v in range(g.n)]
    for outs in itertools.product(*out_choices):
        for ins in itertools.product(*in_choices):
            in_index = [
                {u: ins[v][k] for k, u in enumerate(g.adjacency[v])}
                for v in range(g.n)
            ]
            mapping = {}
            for v in range(g.n):
                for i, u in enumerate(outs[v], start=1):
                    mapping[(v, i)] = (u, in_index[u][v])
            yield PortNumbering(mapping)


def numberings(
    g: Graph,
    cap: int = 256,
    samples: int = 24,
    seed: int = 0,
    include_consistent: bool = False,
) -> list[PortNumbering]:
    """All numberings when there are at most ``cap``, else a seeded sample."""
    if count_port_numberings(g) <= cap:
        out = list(all_port_numberings(g))
    else:
        out = [random_port_numbering(g, seed * 7919 + k) for k in range(samples)]
    if include_consistent:
        out.append(consistent_port_numbering(g, seed))
    return out
