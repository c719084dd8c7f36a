"""Graphs, port numberings and the symmetric-numbering construction.

Nodes are 0-based integers; port indices are 1-based, node ``v`` owning ports
``1..deg(v)``.  A port numbering is a bijection ``p`` on the port set whose
induced arc set equals the arc set of the graph; it is *consistent* when it is
an involution (each channel carries the same port index at both endpoints).

The module also houses the constructive machinery behind fully symmetric
numberings of regular graphs: the bipartite double cover, its decomposition
into disjoint perfect matchings, and a brute-force perfect-matching oracle
used to certify the shipped 3-regular graph that has none.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Graph",
    "PortNumbering",
    "PortedGraph",
    "Matching",
    "PortValidation",
    "GraphError",
    "GraphFormatError",
    "PortNumberingError",
    "MatchingError",
    "SearchBoundError",
    "validate_port_numbering",
    "is_consistent",
    "random_port_numbering",
    "consistent_port_numbering",
    "bipartite_double_cover",
    "bipartition",
    "one_factorization",
    "symmetric_port_numbering",
    "has_one_factor",
    "star",
    "cycle",
    "path",
    "complete",
    "complete_bipartite",
    "no_one_factor_cubic",
    "disjoint_union",
    "parse_graph",
    "format_graph",
    "parse_ported",
    "format_ported",
    "load_graph",
    "load_ported",
]


class GraphError(ValueError):
    """Invalid graph construction or operation precondition."""


class GraphFormatError(GraphError):
    """Malformed ``.g`` / ``.pn`` text."""


class PortNumberingError(GraphError):
    """A port numbering failed validation against its graph."""


class MatchingError(GraphError):
    """1-factorization precondition violated (not bipartite regular)."""


class SearchBoundError(GraphError):
    """Brute-force search requested above its configured node cap."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph: node count plus sorted adjacency lists."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 0 or len(self.adjacency) != self.n:
            raise GraphError("adjacency length must equal node count")
        for v, nbrs in enumerate(self.adjacency):
            if tuple(sorted(set(nbrs))) != nbrs:
                raise GraphError(f"adjacency of node {v} must be sorted and duplicate-free")
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise GraphError(f"neighbor {u} of node {v} out of range")
                if u == v:
                    raise GraphError(f"loop at node {v}")
                if v not in self.adjacency[u]:
                    raise GraphError(f"asymmetric adjacency between {v} and {u}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise GraphError(f"loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) out of range")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (v, u) for v in range(self.n) for u in self.adjacency[v] if v < u
        )

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def arcs(self) -> frozenset[tuple[int, int]]:
        return frozenset((v, u) for v in range(self.n) for u in self.adjacency[v])

    def ports(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (v, i) for v in range(self.n) for i in range(1, self.degree(v) + 1)
        )

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in self.adjacency[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.n

    def regularity(self) -> int | None:
        """The common degree if the graph is regular, else None."""
        degs = set(self.degrees())
        if len(degs) == 1:
            return degs.pop()
        return None


@dataclass(frozen=True)
class Matching:
    """A set of pairwise node-disjoint edges, normalised as (u, v) with u < v."""

    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        seen: set[int] = set()
        for u, v in self.edges:
            if u >= v:
                raise GraphError("matching edges must be normalised (u < v)")
            if u in seen or v in seen:
                raise GraphError("matching edges must be node-disjoint")
            seen.add(u)
            seen.add(v)

    def nodes(self) -> frozenset[int]:
        return frozenset(x for e in self.edges for x in e)

    def is_perfect(self, g: Graph) -> bool:
        return len(self.nodes()) == g.n

    def is_disjoint_from(self, other: "Matching") -> bool:
        return not (self.edges & other.edges)


class PortNumbering:
    """A bijection on the port set, stored as a plain mapping.

    Immutable after construction; equality and hashing are structural.
    """

    __slots__ = ("_map", "_inverse")

    def __init__(self, mapping: Mapping[tuple[int, int], tuple[int, int]]):
        fwd = dict(mapping)
        inv: dict[tuple[int, int], tuple[int, int]] = {}
        for src, dst in fwd.items():
            if dst in inv:
                raise PortNumberingError(f"two ports map to {dst}")
            inv[dst] = src
        object.__setattr__(self, "_map", fwd)
        object.__setattr__(self, "_inverse", inv)

    def __setattr__(self, name, value):
        raise AttributeError("PortNumbering is immutable")

    def target(self, v: int, i: int) -> tuple[int, int]:
        """p((v, i))."""
        return self._map[(v, i)]

    def source(self, v: int, i: int) -> tuple[int, int]:
        """p^{-1}((v, i)): the port whose messages arrive at (v, i)."""
        return self._inverse[(v, i)]

    def items(self) -> tuple[tuple[tuple[int, int], tuple[int, int]], ...]:
        return tuple(sorted(self._map.items()))

    def domain(self) -> frozenset[tuple[int, int]]:
        return frozenset(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, PortNumbering) and self._map == other._map

    def __hash__(self) -> int:
        return hash(self.items())

    def __repr__(self) -> str:
        return f"PortNumbering({len(self._map)} ports)"


@dataclass(frozen=True)
class PortValidation:
    """Outcome of validating a numbering; names the first violated condition."""

    ok: bool
    violation: str | None = None
    detail: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_port_numbering(g: Graph, p: PortNumbering) -> PortValidation:
    """Check that p is a total bijection on P(g) inducing exactly g's arcs."""
    ports = set(g.ports())
    dom = set(p.domain())
    if dom != ports:
        missing = ports - dom
        extra = dom - ports
        if missing:
            return PortValidation(False, "domain", f"port {sorted(missing)[0]} has no image")
        return PortValidation(False, "domain", f"port {sorted(extra)[0]} does not belong to the graph")
    targets = [p.target(v, i) for (v, i) in sorted(ports)]
    if set(targets) != ports:
        bad = sorted(set(targets) - ports)
        if bad:
            return PortValidation(False, "range", f"image {bad[0]} is not a port of the graph")
        return PortValidation(False, "bijection", "two ports share an image")
    induced = set()
    for (v, i) in ports:
        u, _ = p.target(v, i)
        induced.add((v, u))
    if induced != set(g.arcs()):
        wrong = sorted(induced - set(g.arcs())) + sorted(set(g.arcs()) - induced)
        return PortValidation(False, "arcs", f"induced arc set differs at {wrong[0]}")
    return PortValidation(True)


def is_consistent(p: PortNumbering) -> bool:
    """True iff p is an involution: p(p((v, i))) = (v, i) for every port."""
    return all(p.target(*dst) == src for src, dst in p.items())


@dataclass(frozen=True)
class PortedGraph:
    """A graph together with a numbering that validates against it."""

    graph: Graph
    numbering: PortNumbering

    def __post_init__(self):
        check = validate_port_numbering(self.graph, self.numbering)
        if not check:
            raise PortNumberingError(f"{check.violation}: {check.detail}")

    def max_degree(self) -> int:
        return self.graph.max_degree()


def random_port_numbering(g: Graph, seed: int) -> PortNumbering:
    """Uniformly sampled valid numbering, deterministic per seed.

    Sampling decomposes a numbering into an outgoing order (which neighbour
    each port sends to) and an incoming order (which arriving arc lands on
    which port), drawn independently per node, which ranges exactly over all
    valid numberings.  Uses Python's Mersenne Twister, which is stable across
    platforms.
    """
    rng = random.Random(seed)
    out_order: list[list[int]] = []
    in_index: list[dict[int, int]] = []
    for v in range(g.n):
        nbrs = list(g.adjacency[v])
        order = nbrs[:]
        rng.shuffle(order)
        out_order.append(order)
        incoming = nbrs[:]
        rng.shuffle(incoming)
        in_index.append({u: j + 1 for j, u in enumerate(incoming)})
    mapping = {}
    for v in range(g.n):
        for i, u in enumerate(out_order[v], start=1):
            mapping[(v, i)] = (u, in_index[u][v])
    return PortNumbering(mapping)


def consistent_port_numbering(g: Graph, seed: int = 0) -> PortNumbering:
    """Involutive numbering: each node numbers its incident edges 1..deg."""
    rng = random.Random(seed)
    port_of: dict[tuple[int, int], int] = {}
    for v in range(g.n):
        nbrs = list(g.adjacency[v])
        rng.shuffle(nbrs)
        for i, u in enumerate(nbrs, start=1):
            port_of[(v, u)] = i
    mapping = {}
    for v in range(g.n):
        for u in g.adjacency[v]:
            mapping[(v, port_of[(v, u)])] = (u, port_of[(u, v)])
    return PortNumbering(mapping)


def bipartition(g: Graph) -> tuple[frozenset[int], frozenset[int]] | None:
    """2-colouring of g, or None if some component is odd-cyclic."""
    color: dict[int, int] = {}
    for start in range(g.n):
        if start in color:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            v = stack.pop()
            for u in g.adjacency[v]:
                if u not in color:
                    color[u] = 1 - color[v]
                    stack.append(u)
                elif color[u] == color[v]:
                    return None
    left = frozenset(v for v, c in color.items() if c == 0)
    return left, frozenset(range(g.n)) - left


def bipartite_double_cover(g: Graph) -> Graph:
    """Graph on two copies of V: edge {u@side1, v@side2} iff {u, v} is an edge.

    Nodes 0..n-1 are the side-1 copies, nodes n..2n-1 the side-2 copies.
    The cover of a k-regular graph is k-regular and bipartite.
    """
    edges = []
    for u, v in g.edges():
        edges.append((u, g.n + v))
        edges.append((v, g.n + u))
    return Graph.from_edges(2 * g.n, edges)


def _augment(adj: dict[int, set[int]], u: int, match: dict[int, int], seen: set[int]) -> bool:
    for v in adj[u]:
        if v in seen:
            continue
        seen.add(v)
        if v not in match or _augment(adj, match[v], match, seen):
            match[v] = u
            match[u] = v
            return True
    return False


def one_factorization(g: Graph) -> list[Matching]:
    """Split a k-regular bipartite graph into k disjoint perfect matchings.

    Repeated augmenting-path maximum matching; removing a perfect matching
    from a regular bipartite graph leaves it regular, so each round succeeds.
    """
    k = g.regularity()
    if k is None:
        raise MatchingError("graph is not regular")
    parts = bipartition(g)
    if parts is None:
        raise MatchingError("graph is not bipartite")
    left = sorted(parts[0])
    adj = {v: set(g.adjacency[v]) for v in range(g.n)}
    factors: list[Matching] = []
    for _ in range(k):
        match: dict[int, int] = {}
        for u in left:
            _augment(adj, u, match, set())
        edges = frozenset((min(u, v), max(u, v)) for u, v in match.items())
        factor = Matching(edges)
        if not factor.is_perfect(g):
            raise MatchingError("residual graph has no perfect matching")
        factors.append(factor)
        for u, v in edges:
            adj[u].discard(v)
            adj[v].discard(u)
    return factors


def symmetric_port_numbering(g: Graph) -> PortNumbering:
    """Numbering of a regular graph whose induced model is fully symmetric.

    Factor the bipartite double cover into matchings E_1..E_k and point port i
    of node v at the unique u with {u@side1, v@side2} in E_i, reusing index i
    on the receiving side.  Only the diagonal relations of the induced model
    are then nonempty, which makes all nodes mutually bisimilar.
    """
    k = g.regularity()
    if k is None:
        raise MatchingError("graph is not regular")
    if k == 0:
        return PortNumbering({})
    factors = one_factorization(bipartite_double_cover(g))
    mapping = {}
    for i, factor in enumerate(factors, start=1):
        partner = {}
        for a, b in factor.edges:
            u, shifted = (a, b) if b >= g.n else (b, a)
            partner[shifted - g.n] = u
        for v in range(g.n):
            mapping[(v, i)] = (partner[v], i)
    return PortNumbering(mapping)


def has_one_factor(g: Graph, node_cap: int = 24) -> bool:
    """Brute-force perfect-matching existence (desk-scale oracle).

    Exhaustive backtracking on general graphs, capped at ``node_cap`` nodes.
    """
    if g.n > node_cap:
        raise SearchBoundError(f"{g.n} nodes exceeds the brute-force cap {node_cap}")
    if g.n % 2 == 1:
        return False

    def search(unmatched: frozenset[int]) -> bool:
        if not unmatched:
            return True
        v = min(unmatched)
        rest = unmatched - {v}
        for u in g.adjacency[v]:
            if u in rest and search(rest - {u}):
                return True
        return False

    return search(frozenset(range(g.n)))


def star(k: int) -> Graph:
    """Star with centre 0 and leaves 1..k."""
    if k < 1:
        raise GraphError("star needs at least one leaf")
    return Graph.from_edges(k + 1, [(0, i) for i in range(1, k + 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs at least three nodes")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    if n < 1:
        raise GraphError("path needs at least one node")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def no_one_factor_cubic() -> Graph:
    """Connected 3-regular 16-node graph without a perfect matching.

    Centre node 0 joined to three 5-node gadgets.  Each gadget has odd order
    and meets the rest of the graph in a single edge, so a perfect matching
    would have to match the centre into all three gadgets at once.  The
    adjacency is fixed here; the certificate (3-regular, connected, no
    1-factor by the brute-force oracle) is re-checked in the test suite.
    """
    edges = [(0, 1), (0, 6), (0, 11)]
    for base in (1, 6, 11):
        a, b, c, d, e = range(base, base + 5)
        edges += [(a, b), (a, c), (b, d), (b, e), (c, d), (c, e), (d, e)]
    return Graph.from_edges(16, edges)


def disjoint_union(g1: Graph, g2: Graph) -> tuple[Graph, int]:
    """Union with g2's nodes shifted; returns (graph, offset of g2)."""
    shifted = [(u + g1.n, v + g1.n) for u, v in g2.edges()]
    return Graph.from_edges(g1.n + g2.n, list(g1.edges()) + shifted), g1.n


# ---------------------------------------------------------------------------
# Text formats: ".g" (graph only) and ".pn" (graph + numbering)
# ---------------------------------------------------------------------------


def _clean_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_graph(text: str) -> Graph:
    """Parse the ".g" format: ``nodes <n>`` then ``e <u> <v>`` lines."""
    n = None
    edges = []
    for lineno, fields in _clean_lines(text):
        if fields[0] == "nodes" and len(fields) == 2:
            if n is not None:
                raise GraphFormatError(f"line {lineno}: duplicate nodes line")
            n = int(fields[1])
        elif fields[0] == "e" and len(fields) == 3:
            if n is None:
                raise GraphFormatError(f"line {lineno}: edge before nodes line")
            edges.append((int(fields[1]), int(fields[2])))
        else:
            raise GraphFormatError(f"line {lineno}: unrecognised line {' '.join(fields)!r}")
    if n is None:
        raise GraphFormatError("missing nodes line")
    try:
        return Graph.from_edges(n, edges)
    except GraphError as exc:
        raise GraphFormatError(str(exc)) from exc


def format_graph(g: Graph) -> str:
    lines = [f"nodes {g.n}"]
    lines += [f"e {u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def parse_ported(text: str) -> PortedGraph:
    """Parse the ".pn" format: ``nodes <n>`` then ``p <u> <i> <v> <j>`` lines.

    Each ``p`` line states p((u, i)) = (v, j); the implied graph is recovered
    from the arcs and the numbering is then validated in full.
    """
    n = None
    entries: dict[tuple[int, int], tuple[int, int]] = {}
    for lineno, fields in _clean_lines(text):
        if fields[0] == "nodes" and len(fields) == 2:
            if n is not None:
                raise GraphFormatError(f"line {lineno}: duplicate nodes line")
            n = int(fields[1])
        elif fields[0] == "p" and len(fields) == 5:
            if n is None:
                raise GraphFormatError(f"line {lineno}: port line before nodes line")
            u, i, v, j = (int(x) for x in fields[1:])
            if (u, i) in entries:
                raise GraphFormatError(f"line {lineno}: port ({u},{i}) mapped twice")
            entries[(u, i)] = (v, j)
        else:
            raise GraphFormatError(f"line {lineno}: unrecognised line {' '.join(fields)!r}")
    if n is None:
        raise GraphFormatError("missing nodes line")
    edges = {(min(u, v), max(u, v)) for (u, _), (v, _) in entries.items()}
    try:
        graph = Graph.from_edges(n, sorted(edges))
        return PortedGraph(graph, PortNumbering(entries))
    except GraphError as exc:
        raise PortNumberingError(str(exc)) from exc


def format_ported(pg: PortedGraph) -> str:
    lines = [f"nodes {pg.graph.n}"]
    for (u, i), (v, j) in pg.numbering.items():
        lines.append(f"p {u} {i} {v} {j}")
    return "\n".join(lines) + "\n"


def load_graph(filename) -> Graph:
    with open(filename, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def load_ported(filename) -> PortedGraph:
    with open(filename, "r", encoding="utf-8") as fh:
        return parse_ported(fh.read())
