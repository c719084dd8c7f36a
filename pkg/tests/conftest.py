"""Shared test helpers: seeded generators, oracles, exhaustive sweeps."""

from __future__ import annotations

import itertools
import random

from hypothesis import settings

from portlogic.encoding import canon, digest
from portlogic.graphs import Graph, PortNumbering, PortedGraph
from portlogic.logic import (
    And,
    Dia,
    KripkeModel,
    Not,
    Prop,
    Signature,
    alphas_for,
    conj,
    dia,
    kripke_model,
    neg,
    prop,
)
from portlogic.machines import ClassTag, MULTISET, VECTOR, BROADCAST, SimpleMachine
from portlogic.smallgraphs import numberings

settings.register_profile("suite", max_examples=60, deadline=None)
settings.load_profile("suite")


# ---------------------------------------------------------------------------
# Deterministic random formulas
# ---------------------------------------------------------------------------


def random_formula(rng: random.Random, sig: Signature, max_depth: int = 3, budget: int = 8):
    """Random formula valid for ``sig`` with modal depth at most ``max_depth``."""

    def gen(depth_left: int, nodes_left: int):
        choices = ["prop"]
        if nodes_left > 1:
            choices += ["not", "and"]
        if depth_left > 0 and nodes_left > 1:
            choices += ["dia", "dia"]
        kind = rng.choice(choices)
        if kind == "prop":
            return prop(rng.randint(1, sig.delta)), 1
        if kind == "not":
            sub, used = gen(depth_left, nodes_left - 1)
            return neg(sub), used + 1
        if kind == "and":
            left, used_l = gen(depth_left, nodes_left - 2)
            right, used_r = gen(depth_left, nodes_left - 1 - used_l)
            return conj(left, right), used_l + used_r + 1
        alpha = rng.choice(alphas_for(sig.variant, sig.delta))
        grade = 1
        if sig.allows_grading and rng.random() < 0.35:
            grade = rng.randint(1, sig.delta)
        sub, used = gen(depth_left - 1, nodes_left - 1)
        return dia(alpha, sub, grade), used + 1

    return gen(max_depth, budget)[0]


# ---------------------------------------------------------------------------
# Deterministic random multiset machines
# ---------------------------------------------------------------------------


def _mix(*parts) -> int:
    return int.from_bytes(digest(tuple(parts)), "big")


def random_multiset_machine(delta: int, seed: int, broadcast: bool = False):
    """Seeded finite machine whose transitions depend on the inbox multiset.

    Runs a fixed number of rounds (1..3 per seed) and then stops with a
    binary output; emit may be port-dependent unless broadcast is set.
    """
    rounds = 1 + _mix(seed, "rounds") % 3
    states = 2 + _mix(seed, "states") % 3
    letters = 2 + _mix(seed, "letters") % 2

    def init(degree):
        return ("r", 0, _mix(seed, "z0", degree) % states)

    def emit(state, port):
        _, t, s = state
        slot = 1 if broadcast else port
        return _mix(seed, "mu", t, s, slot) % letters

    def transition(state, inbox):
        _, t, s = state
        bag = tuple(
            sorted(((m, inbox.count(m)) for m in set(inbox)), key=lambda kv: canon(kv[0]))
        )
        if t + 1 == rounds:
            return _mix(seed, "out", s, bag) % 2
        return ("r", t + 1, _mix(seed, "delta", t, s, bag) % states)

    tag = ClassTag(MULTISET, BROADCAST if broadcast else VECTOR)
    return SimpleMachine(
        delta,
        tag,
        init,
        emit,
        transition,
        is_output=lambda s: isinstance(s, int),
        outputs=frozenset({0, 1}),
        name=f"random_multiset[{seed}]",
    )


# ---------------------------------------------------------------------------
# Independent modal-logic oracle (naive per-world recursion)
# ---------------------------------------------------------------------------


def naive_holds(model: KripkeModel, world: int, formula) -> bool:
    if isinstance(formula, Prop):
        return world in model.valuation.get(formula.index, frozenset())
    if isinstance(formula, And):
        return naive_holds(model, world, formula.left) and naive_holds(
            model, world, formula.right
        )
    if isinstance(formula, Not):
        return not naive_holds(model, world, formula.sub)
    if isinstance(formula, Dia):
        count = 0
        for a, b in model.relations.get(formula.alpha, ()):
            if a == world and naive_holds(model, b, formula.sub):
                count += 1
        return count >= formula.grade
    raise TypeError(formula)


# ---------------------------------------------------------------------------
# Numbering sweeps
# ---------------------------------------------------------------------------


def sweep(g: Graph, cap: int = 256, samples: int = 20, seed: int = 0):
    """Exhaustive numberings when feasible, a seeded sample otherwise."""
    return numberings(g, cap=cap, samples=samples, seed=seed)


def incoming_renumberings(g: Graph):
    """All numberings sharing one fixed outgoing assignment."""
    outs = [g.adjacency[v] for v in range(g.n)]
    pools = [
        list(itertools.permutations(range(1, g.degree(v) + 1))) for v in range(g.n)
    ]
    for ins in itertools.product(*pools):
        in_index = [
            {u: ins[v][k] for k, u in enumerate(g.adjacency[v])} for v in range(g.n)
        ]
        mapping = {}
        for v in range(g.n):
            for i, u in enumerate(outs[v], start=1):
                mapping[(v, i)] = (u, in_index[u][v])
        yield PortNumbering(mapping)


def outgoing_renumberings(g: Graph):
    """All numberings sharing one fixed incoming assignment."""
    in_index = [
        {u: k for k, u in enumerate(g.adjacency[v], start=1)} for v in range(g.n)
    ]
    pools = [list(itertools.permutations(g.adjacency[v])) for v in range(g.n)]
    for outs in itertools.product(*pools):
        mapping = {}
        for v in range(g.n):
            for i, u in enumerate(outs[v], start=1):
                mapping[(v, i)] = (u, in_index[u][v])
        yield PortNumbering(mapping)


def all_consistent_numberings(g: Graph):
    """Every involutive numbering: product of per-node incident-edge orders."""
    pools = [list(itertools.permutations(g.adjacency[v])) for v in range(g.n)]
    for orders in itertools.product(*pools):
        port_of = {}
        for v in range(g.n):
            for i, u in enumerate(orders[v], start=1):
                port_of[(v, u)] = i
        mapping = {}
        for v in range(g.n):
            for u in g.adjacency[v]:
                mapping[(v, port_of[(v, u)])] = (u, port_of[(u, v)])
        yield PortNumbering(mapping)


_model_cache: dict = {}


def cached_model(pg: PortedGraph, variant: str, delta: int) -> KripkeModel:
    key = (pg.graph.adjacency, pg.numbering.items(), variant, delta)
    model = _model_cache.get(key)
    if model is None:
        model = kripke_model(pg, variant, delta)
        _model_cache[key] = model
    return model
