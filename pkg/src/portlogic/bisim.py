"""Coarsest (graded) bisimulation by signature refinement, plus verifiers.

Refinement starts from the valuation profile and repeatedly splits blocks by
the signature a world shows to the current partition: for each relation index
the set of successor blocks (plain), or the successor count into each block
(graded).  Models here have at most a few hundred worlds, so the naive
refinement wins on simplicity and auditability over Paige-Tarjan.

``verify_bisimulation`` checks an explicitly given relation directly against
the back-and-forth conditions.  Graded verification is restricted to
relations that are restrictions of an equivalence on the disjoint union:
for those, the counting conditions reduce to per-block successor-count
equality, which is what gets checked.  General graded relations would need
bipartite matching arguments and are out of scope.

``impossibility_check`` packages the bisimulation route to unsolvability: if
all nodes of X are mutually bisimilar in the model variant a machine class
can see, and every valid solution assigns X two different values, the
problem is unsolvable in that class.  The audit enumerates all candidate
solutions, so it is strictly a desk-scale certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .graphs import Graph, PortNumbering, PortedGraph
from .logic import KripkeModel, kripke_model

__all__ = [
    "Partition",
    "coarsest_bisimulation",
    "coarsest_graded_bisimulation",
    "VerifyResult",
    "verify_bisimulation",
    "NonEquivalenceError",
    "Refutation",
    "Inconclusive",
    "impossibility_check",
    "EnumerationBudgetError",
    "CLASS_VARIANTS",
]

CLASS_VARIANTS = {"vv": "++", "vb": "+-", "sb": "--"}


class NonEquivalenceError(ValueError):
    """Graded verification needs (a restriction of) an equivalence."""


class EnumerationBudgetError(RuntimeError):
    """Solution enumeration would exceed the configured budget."""


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks covering 0..n-1, in canonical order."""

    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_assignment(cls, assignment: Mapping[int, object]) -> "Partition":
        grouped: dict[object, list[int]] = {}
        for world in sorted(assignment):
            grouped.setdefault(assignment[world], []).append(world)
        blocks = sorted((tuple(ws) for ws in grouped.values()), key=lambda b: b[0])
        return cls(tuple(blocks))

    def block_index(self, world: int) -> int:
        for k, block in enumerate(self.blocks):
            if world in block:
                return k
        raise KeyError(world)

    def assignment(self) -> dict[int, int]:
        return {w: k for k, block in enumerate(self.blocks) for w in block}

    def same_block(self, v: int, w: int) -> bool:
        return self.block_index(v) == self.block_index(w)

    def refines(self, other: "Partition") -> bool:
        coarse = other.assignment()
        return all(
            len({coarse[w] for w in block}) == 1 for block in self.blocks
        )

    def as_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (v, w) for block in self.blocks for v in block for w in block
        )

    def merge(self, a: int, b: int) -> "Partition":
        """Partition with blocks a and b merged (for maximality checks)."""
        if a == b:
            return self
        keep = [list(block) for block in self.blocks]
        merged = sorted(keep[a] + keep[b])
        rest = [block for k, block in enumerate(keep) if k not in (a, b)]
        blocks = sorted([tuple(merged)] + [tuple(b) for b in rest], key=lambda x: x[0])
        return Partition(tuple(blocks))

    def to_json(self) -> list[list[int]]:
        return [list(block) for block in self.blocks]


def _refine(model: KripkeModel, graded: bool) -> Partition:
    alphas = sorted(model.relations, key=str)
    assign = {v: model.valuation_profile(v) for v in range(model.size)}

    def normalise(raw: Mapping[int, object]) -> dict[int, int]:
        ids: dict[object, int] = {}
        out = {}
        for v in range(model.size):
            out[v] = ids.setdefault(raw[v], len(ids))
        return out

    current = normalise(assign)
    while True:
        raw: dict[int, object] = {}
        for v in range(model.size):
            parts = []
            for alpha in alphas:
                succ_blocks = [current[w] for w in model.successors(alpha, v)]
                if graded:
                    counts: dict[int, int] = {}
                    for b in succ_blocks:
                        counts[b] = counts.get(b, 0) + 1
                    parts.append(tuple(sorted(counts.items())))
                else:
                    parts.append(frozenset(succ_blocks))
            raw[v] = (current[v], tuple(parts))
        refined = normalise(raw)
        if len(set(refined.values())) == len(set(current.values())):
            return Partition.from_assignment(current)
        current = refined


def coarsest_bisimulation(model: KripkeModel) -> Partition:
    """Fixpoint partition: two worlds share a block iff they are bisimilar."""
    return _refine(model, graded=False)


def coarsest_graded_bisimulation(model: KripkeModel) -> Partition:
    """Counting variant; always refines the plain partition."""
    return _refine(model, graded=True)


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    clause: str | None = None
    detail: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def _union_setup(model: KripkeModel, other: KripkeModel | None, relation):
    if other is None:
        return model, [(v, w) for v, w in relation]
    union, offset = model.disjoint_union(other)
    return union, [(v, w + offset) for v, w in relation]


def verify_bisimulation(
    model: KripkeModel,
    other: KripkeModel | None,
    relation: Iterable[tuple[int, int]],
    graded: bool = False,
) -> VerifyResult:
    """Check an explicit relation against the bisimulation conditions.

    ``relation`` pairs worlds of ``model`` with worlds of ``other`` (or of
    ``model`` itself when ``other`` is None).  Plain verification checks the
    valuation clause and both zig-zag clauses pairwise and reports the first
    violating triple.  Graded verification requires the relation to be the
    cross part of an equivalence on the disjoint union; it then checks
    per-block successor-count equality for the equivalence generated by the
    relation (worlds it does not mention count as singleton blocks), which
    for equivalences is the same condition as the counting zig-zag clauses.
    """
    pairs = list(relation)
    if not pairs:
        return VerifyResult(False, "empty", ())
    union, lifted = _union_setup(model, other, pairs)
    alphas = sorted(union.relations, key=str)

    if not graded:
        zset = set(lifted)
        for v, w in sorted(zset):
            if union.valuation_profile(v) != union.valuation_profile(w):
                return VerifyResult(False, "B1", (v, w))
            for alpha in alphas:
                for s in union.successors(alpha, v):
                    if not any(
                        (s, t) in zset for t in union.successors(alpha, w)
                    ):
                        return VerifyResult(False, "B2", (v, w, alpha, s))
                for t in union.successors(alpha, w):
                    if not any(
                        (s, t) in zset for s in union.successors(alpha, v)
                    ):
                        return VerifyResult(False, "B3", (v, w, alpha, t))
        return VerifyResult(True)

    # Graded: build the equivalence generated by the relation and insist the
    # given relation is exactly its cross-model part.
    parent = list(range(union.size))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def join(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for v, w in lifted:
        join(v, w)
    touched = {x for pair in lifted for x in pair}
    if other is not None:
        offset = model.size
        derived = {
            (v, w - offset)
            for v in range(model.size)
            for w in range(offset, union.size)
            if find(v) == find(w)
        }
        if derived != set(pairs):
            raise NonEquivalenceError(
                "relation is not the cross part of an equivalence on the union"
            )
    else:
        derived = {
            (v, w) for v in touched for w in touched if find(v) == find(w)
        }
        closed = (
            set(pairs)
            | {(w, v) for v, w in pairs}
            | {(v, v) for v in touched}
        )
        if derived != closed:
            raise NonEquivalenceError("relation is not an equivalence on its worlds")

    block_of = {v: find(v) for v in range(union.size)}
    classes: dict[int, list[int]] = {}
    for v in sorted(touched):
        classes.setdefault(find(v), []).append(v)
    for members in classes.values():
        first = members[0]
        if any(
            union.valuation_profile(v) != union.valuation_profile(first)
            for v in members[1:]
        ):
            bad = next(
                v for v in members[1:]
                if union.valuation_profile(v) != union.valuation_profile(first)
            )
            return VerifyResult(False, "B1", (first, bad))
        for alpha in alphas:
            reference = None
            for v in members:
                counts: dict[int, int] = {}
                for w in union.successors(alpha, v):
                    b = block_of[w]
                    counts[b] = counts.get(b, 0) + 1
                signature = tuple(sorted(counts.items()))
                if reference is None:
                    reference = (v, signature)
                elif signature != reference[1]:
                    return VerifyResult(False, "B2*/B3*", (reference[0], v, alpha))
    return VerifyResult(True)


@dataclass(frozen=True)
class Refutation:
    """Machine-checkable witness that a problem is outside a machine class."""

    problem: str
    machine_class: str
    variant: str
    x_nodes: tuple[int, ...]
    partition: Partition
    audited_solutions: int
    model: KripkeModel

    def to_json(self) -> dict:
        return {
            "refuted_class": self.machine_class,
            "variant": self.variant,
            "problem": self.problem,
            "x_nodes": list(self.x_nodes),
            "partition": self.partition.to_json(),
            "audited_solutions": self.audited_solutions,
        }


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    witness: dict | None = None

    def to_json(self) -> dict:
        doc = {"inconclusive": self.reason}
        if self.witness is not None:
            doc["witness"] = {str(k): v for k, v in self.witness.items()}
        return doc


def impossibility_check(
    g: Graph,
    x_nodes: Iterable[int],
    problem,
    machine_class: str,
    p: PortNumbering,
    budget: int = 1 << 20,
):
    """Bisimulation refutation for ``problem`` in ``machine_class`` on (g, p).

    Builds the Kripke variant the class can observe, tests the X nodes
    mutually bisimilar via refinement, and audits by exhaustive enumeration
    that every valid solution assigns X at least two values.  Returns a
    ``Refutation`` certificate or an ``Inconclusive`` with the failing
    hypothesis.
    """
    if machine_class not in CLASS_VARIANTS:
        raise ValueError(f"machine class must be one of {sorted(CLASS_VARIANTS)}")
    xs = tuple(sorted(set(x_nodes)))
    if not xs or any(not 0 <= v < g.n for v in xs):
        raise ValueError("X must be a nonempty set of graph nodes")
    variant = CLASS_VARIANTS[machine_class]
    model = kripke_model(PortedGraph(g, p), variant)
    partition = coarsest_bisimulation(model)
    if len({partition.block_index(v) for v in xs}) != 1:
        return Inconclusive("nodes of X are not mutually bisimilar")
    outputs = list(problem.outputs)
    total = len(outputs) ** g.n
    if total > budget:
        raise EnumerationBudgetError(
            f"{total} candidate solutions exceed the budget {budget}"
        )
    audited = 0
    for values in itertools.product(outputs, repeat=g.n):
        solution = dict(enumerate(values))
        if not problem.verifier(g, solution):
            continue
        audited += 1
        if len({solution[v] for v in xs}) == 1:
            return Inconclusive(
                "a valid solution is constant on X", {v: solution[v] for v in xs}
            )
    return Refutation(
        problem=problem.name,
        machine_class=machine_class,
        variant=variant,
        x_nodes=xs,
        partition=partition,
        audited_solutions=audited,
        model=model,
    )
