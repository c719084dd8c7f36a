"""Compilation between modal formulas and local algorithms.

Forward direction: a formula over one of the four signature variants becomes
a machine whose states are truth assignments over the subformula closure,
three-valued with U for "not yet determined".  A subformula of modal depth d
becomes determined exactly after round d, messages carry the assignment
restricted to the subformulas the receiving side's diamonds need (tagged with
the outgoing port for the variants that see it), and the machine stops at
round md+1 with the root's truth value as output.

Reverse direction: a finite-horizon binary-output machine becomes a formula
built from three families per round: state formulas ("the node is in state z
after round t"), send formulas ("the node sends message m in round t"), and
receive formulas (diamonds over send formulas).  State formulas are canonical
DNF over the previous level: one term per (state, inbox) pair, the inbox
pinned positionwise for vector variants and by exact per-message counts for
multiset variants, with the null-message positions expressed negatively so
padding and explicit nulls coincide.

The reverse direction is evaluated against a fixed suite of ported-graph
models.  Formulas are deduplicated semantically (truth table over the suite,
keyed together with modal depth so depth bookkeeping survives), and DNF terms
that are unsatisfiable on the whole suite are dropped; the resulting formula
agrees with the machine on every model of the suite, which is the scale this
toolkit certifies.  State and message enumeration is budgeted, and exceeding
a budget is an explicit refusal rather than a wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graphs import PortedGraph, consistent_port_numbering, random_port_numbering
from .logic import (
    STAR,
    And,
    Dia,
    Formula,
    Not,
    Prop,
    Signature,
    conj,
    conj_all,
    dia,
    disj_all,
    false_,
    kripke_model,
    neg,
    prop,
    subformulas,
    validate_signature,
)
from .machines import (
    BROADCAST,
    MULTISET,
    SET,
    VECTOR,
    ClassTag,
    Machine,
)
from .smallgraphs import all_graphs

__all__ = [
    "Closure",
    "closure",
    "CompiledMachine",
    "compile_formula",
    "decompile",
    "decompile_details",
    "DecompileResult",
    "ModelSuite",
    "default_decompile_suite",
    "CompileError",
    "DecompileError",
    "DecompileBudgetError",
]

U = 2


class CompileError(ValueError):
    pass


class DecompileError(ValueError):
    pass


class DecompileBudgetError(DecompileError):
    """State/message/term enumeration exceeded its budget."""


# ---------------------------------------------------------------------------
# Subformula closure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Closure:
    """Subformulas in dependency order plus the per-variant message domains.

    ``by_port[j]`` collects diamond targets whose index fixes outgoing port
    j; ``incoming_only`` those of diamonds fixing only the incoming port;
    ``unindexed`` those of fully starred diamonds.
    """

    formulas: tuple[Formula, ...]
    by_port: tuple[tuple[Formula, ...], ...]
    incoming_only: tuple[Formula, ...]
    unindexed: tuple[Formula, ...]


def closure(formula: Formula, delta: int | None = None) -> Closure:
    """Subformula closure with children before parents, sorted by depth."""
    order = sorted(subformulas(formula), key=lambda f: f.md)
    index = {id(f): k for k, f in enumerate(order)}
    if delta is None:
        delta = max(
            [f.alpha[1] for f in order if isinstance(f, Dia) and isinstance(f.alpha[1], int)]
            + [f.alpha[0] for f in order if isinstance(f, Dia) and isinstance(f.alpha[0], int)]
            + [1],
        )
    per_port: list[set[int]] = [set() for _ in range(delta + 1)]
    incoming: set[int] = set()
    unindexed: set[int] = set()
    for f in order:
        if not isinstance(f, Dia):
            continue
        a, b = f.alpha
        if isinstance(b, int):
            per_port[b].add(index[id(f.sub)])
        elif isinstance(a, int):
            incoming.add(index[id(f.sub)])
        else:
            unindexed.add(index[id(f.sub)])
    def pick(idxs):
        return tuple(order[k] for k in sorted(idxs))

    return Closure(
        formulas=tuple(order),
        by_port=tuple(pick(s) for s in per_port),
        incoming_only=pick(incoming),
        unindexed=pick(unindexed),
    )


# ---------------------------------------------------------------------------
# Formula -> machine
# ---------------------------------------------------------------------------


class CompiledMachine(Machine):
    """Truth-assignment machine evaluating one formula on ported graphs.

    States are trit tuples over the closure (0, 1, or U); stopping states are
    the plain ints 0 and 1.  Messages are the trit restriction to the
    receiving-relevant subformulas, tagged with the outgoing port for the
    variants whose diamonds see it, and the null message acts as the all-zero
    restriction tagged with port 1.
    """

    def __init__(self, formula: Formula, sig: Signature):
        problems = validate_signature(formula, sig)
        if problems:
            raise CompileError("; ".join(problems))
        self.formula = formula
        self.sig = sig
        self.delta_max = sig.delta
        self.closure = closure(formula, sig.delta)
        order = self.closure.formulas
        self._index = {id(f): k for k, f in enumerate(order)}
        self._root = self._index[id(formula)]
        if sig.variant in ("++", "-+"):
            self._domains = [
                tuple(self._index[id(f)] for f in targets)
                for targets in self.closure.by_port
            ]
        elif sig.variant == "+-":
            self._shared = tuple(self._index[id(f)] for f in self.closure.incoming_only)
        else:
            self._shared = tuple(self._index[id(f)] for f in self.closure.unindexed)
        self._nodes = []
        for f in order:
            if isinstance(f, Prop):
                self._nodes.append(("q", f.index))
            elif isinstance(f, And):
                self._nodes.append(("&", self._index[id(f.left)], self._index[id(f.right)]))
            elif isinstance(f, Not):
                self._nodes.append(("!", self._index[id(f.sub)]))
            else:
                sub = self._index[id(f.sub)]
                if sig.variant in ("++", "-+"):
                    pos = self._domains[f.alpha[1]].index(sub)
                else:
                    pos = self._shared.index(sub)
                self._nodes.append(("<>", f.alpha, f.grade, sub, pos))
        graded = any(isinstance(f, Dia) and f.grade > 1 for f in order)
        if sig.variant == "++":
            tag = ClassTag(VECTOR, VECTOR)
        elif sig.variant == "-+":
            tag = ClassTag(MULTISET if graded else SET, VECTOR)
        elif sig.variant == "+-":
            tag = ClassTag(VECTOR, BROADCAST)
        else:
            tag = ClassTag(MULTISET if graded else SET, BROADCAST)
        self.tag = tag
        self.outputs = frozenset({0, 1})
        self.name = f"compiled[{sig.variant}]"

    def init_state(self, degree: int):
        g = [U] * len(self._nodes)
        for k, node in enumerate(self._nodes):
            kind = node[0]
            if kind == "q":
                g[k] = 1 if node[1] == degree else 0
            elif kind == "&":
                a, b = g[node[1]], g[node[2]]
                g[k] = U if U in (a, b) else (1 if a == 1 and b == 1 else 0)
            elif kind == "!":
                a = g[node[1]]
                g[k] = U if a == U else 1 - a
        return tuple(g)

    def emit(self, state, port: int):
        if self.sig.variant in ("++", "-+"):
            dom = self._domains[port]
            return ("f", port, tuple(state[k] for k in dom))
        return ("f", tuple(state[k] for k in self._shared))

    def transition(self, state, inbox: tuple):
        if state[self._root] != U:
            return state[self._root]
        g = list(state)
        null = self.null_message
        variant = self.sig.variant
        for k, node in enumerate(self._nodes):
            if g[k] != U:
                continue
            kind = node[0]
            if kind == "&":
                a, b = g[node[1]], g[node[2]]
                g[k] = U if U in (a, b) else (1 if a == 1 and b == 1 else 0)
            elif kind == "!":
                a = g[node[1]]
                g[k] = U if a == U else 1 - a
            else:
                _, alpha, grade, sub, pos = node
                if state[sub] == U:
                    continue
                if variant == "++":
                    i, j = alpha
                    m = inbox[i - 1]
                    hit = m != null and m[1] == j and m[2][pos] == 1
                    g[k] = 1 if hit else 0
                elif variant == "-+":
                    j = alpha[1]
                    hits = sum(
                        1
                        for m in inbox
                        if m != null and m[1] == j and m[2][pos] == 1
                    )
                    g[k] = 1 if hits >= grade else 0
                elif variant == "+-":
                    m = inbox[alpha[0] - 1]
                    g[k] = 1 if m != null and m[1][pos] == 1 else 0
                else:
                    hits = sum(
                        1 for m in inbox if m != null and m[1][pos] == 1
                    )
                    g[k] = 1 if hits >= grade else 0
        return tuple(g)

    def is_output(self, state) -> bool:
        return isinstance(state, int)


def compile_formula(formula: Formula, sig: Signature) -> CompiledMachine:
    """Machine that outputs the formula's truth value in exactly md+1 rounds."""
    return CompiledMachine(formula, sig)


# ---------------------------------------------------------------------------
# Machine -> formula
# ---------------------------------------------------------------------------


class ModelSuite:
    """A family of ported-graph models with shared truth-table machinery.

    Worlds of all models are packed into one bit position space, so a truth
    table is a single int and Boolean combination of tables is int
    arithmetic.  Diamond application walks precomputed successor masks.
    """

    def __init__(self, ported: Sequence[PortedGraph], variant: str, delta: int):
        self.variant = variant
        self.delta = delta
        self.ported = list(ported)
        self.models = [kripke_model(pg, variant, delta) for pg in self.ported]
        self.offsets = []
        total = 0
        for model in self.models:
            self.offsets.append(total)
            total += model.size
        self.total_worlds = total
        self.full_mask = (1 << total) - 1 if total else 0
        self._degree_masks: dict[int, int] = {}
        for pg, offset in zip(self.ported, self.offsets):
            for v in range(pg.graph.n):
                d = pg.graph.degree(v)
                self._degree_masks[d] = self._degree_masks.get(d, 0) | (
                    1 << (offset + v)
                )
        self._succ_masks: dict[tuple, list[int]] = {}

    def degree_mask(self, degree: int) -> int:
        return self._degree_masks.get(degree, 0)

    def prop_mask(self, index: int) -> int:
        return self.degree_mask(index)

    def _successor_masks(self, alpha: tuple) -> list[int]:
        masks = self._succ_masks.get(alpha)
        if masks is None:
            masks = [0] * self.total_worlds
            for model, offset in zip(self.models, self.offsets):
                for v in range(model.size):
                    acc = 0
                    for w in model.successors(alpha, v):
                        acc |= 1 << (offset + w)
                    masks[offset + v] = acc
            self._succ_masks[alpha] = masks
        return masks

    def diamond_mask(self, alpha: tuple, grade: int, sub_mask: int) -> int:
        masks = self._successor_masks(alpha)
        out = 0
        if grade == 1:
            for pos in range(self.total_worlds):
                if masks[pos] & sub_mask:
                    out |= 1 << pos
        else:
            for pos in range(self.total_worlds):
                if (masks[pos] & sub_mask).bit_count() >= grade:
                    out |= 1 << pos
        return out

    def table(self, formula: Formula) -> int:
        """Truth table of an arbitrary formula over all suite worlds."""
        memo: dict[int, int] = {}
        for node in subformulas(formula):
            if isinstance(node, Prop):
                mask = self.prop_mask(node.index)
            elif isinstance(node, And):
                mask = memo[id(node.left)] & memo[id(node.right)]
            elif isinstance(node, Not):
                mask = self.full_mask & ~memo[id(node.sub)]
            else:
                mask = self.diamond_mask(node.alpha, node.grade, memo[id(node.sub)])
            memo[id(node)] = mask
        return memo[id(formula)]


def default_decompile_suite(
    delta: int, node_bound: int = 5, numberings_per_graph: int = 3, seed: int = 0
) -> list[PortedGraph]:
    """Enumeration suite: all graphs up to the bound, sampled numberings."""
    out = []
    for gi, g in enumerate(all_graphs(node_bound, max_degree=delta)):
        for k in range(numberings_per_graph):
            out.append(PortedGraph(g, random_port_numbering(g, seed + 101 * gi + k)))
        out.append(PortedGraph(g, consistent_port_numbering(g, seed + gi)))
    return out


@dataclass
class DecompileResult:
    formula: Formula
    table: int
    suite: ModelSuite
    level_states: list[dict]
    horizon: int


class _Interner:
    """Semantic deduplication: one formula per (modal depth, truth table)."""

    def __init__(self):
        self._by_key: dict[tuple[int, int], tuple[Formula, int]] = {}

    def intern(self, formula: Formula, table: int) -> tuple[Formula, int]:
        key = (formula.md, table)
        hit = self._by_key.get(key)
        if hit is None:
            hit = (formula, table)
            self._by_key[key] = hit
        return hit


def _state_key(machine: Machine, state) -> tuple:
    return (machine.is_output(state), machine.encode_state(state))


class _Decompiler:
    def __init__(
        self,
        machine: Machine,
        delta: int,
        horizon: int,
        variant: str,
        suite: ModelSuite,
        max_states: int,
        max_messages: int,
        max_visits: int,
    ):
        self.machine = machine
        self.delta = delta
        self.horizon = horizon
        self.variant = variant
        self.suite = suite
        self.max_states = max_states
        self.max_messages = max_messages
        self.max_visits = max_visits
        self.visits = 0
        self.interner = _Interner()
        self.level_states: list[dict] = []

    def _charge(self, amount: int = 1):
        self.visits += amount
        if self.visits > self.max_visits:
            raise DecompileBudgetError(
                f"transition enumeration exceeded {self.max_visits} visits"
            )

    def _initial_level(self) -> dict:
        machine = self.machine
        level: dict = {}
        for d in range(self.delta + 1):
            state = machine.init_state(d)
            key = _state_key(machine, state)
            if d == 0:
                degree_formula = conj_all([neg(prop(i)) for i in range(1, self.delta + 1)])
            else:
                degree_formula = prop(d)
            table = self.suite.degree_mask(d)
            entry = level.get(key)
            if entry is None:
                level[key] = {"state": state, "parts": [degree_formula], "table": table}
            else:
                entry["parts"].append(degree_formula)
                entry["table"] |= table
        out: dict = {}
        for key, entry in level.items():
            formula, table = self.interner.intern(
                disj_all(entry["parts"]), entry["table"]
            )
            out[key] = {"state": entry["state"], "formula": formula, "table": table}
        return out

    def _emit(self, state, port: int):
        return self.machine.emit_absorbing(state, port)

    def _messages(self, live: list[dict]) -> dict[bytes, dict]:
        """Distinct non-null messages sent from live states, with senders."""
        machine = self.machine
        ports = range(1, self.delta + 1)
        null_code = machine.encode_message(machine.null_message)
        pool: dict[bytes, dict] = {}
        for entry in live:
            for j in ports:
                m = self._emit(entry["state"], j)
                code = machine.encode_message(m)
                if code == null_code:
                    continue
                slot = pool.setdefault(code, {"message": m, "senders": {}})
                slot["senders"].setdefault(j, []).append(entry)
        if len(pool) > self.max_messages:
            raise DecompileBudgetError(
                f"{len(pool)} distinct messages exceed the budget {self.max_messages}"
            )
        return pool

    def _theta(self, senders: list[dict]) -> tuple[Formula, int]:
        table = 0
        for entry in senders:
            table |= entry["table"]
        return self.interner.intern(disj_all([e["formula"] for e in senders]), table)

    def _chi(self, alpha: tuple, grade: int, theta: tuple[Formula, int]) -> tuple[Formula, int]:
        formula, table = theta
        mask = self.suite.diamond_mask(alpha, grade, table)
        return self.interner.intern(dia(alpha, formula, grade), mask)

    def _level_step(self, previous: dict, t: int) -> dict:
        machine = self.machine
        live = [e for e in previous.values() if e["table"]]
        pool = self._messages(live)
        if self.variant in ("++", "-+"):
            pins = self._port_tagged_pins(pool)
        else:
            pins = self._broadcast_pins(pool)
        accumulator: dict = {}
        for entry in live:
            self._enumerate(entry, pins, pool, accumulator)
        out: dict = {}
        for key, slot in accumulator.items():
            formula, table = self.interner.intern(
                disj_all(slot["parts"]), slot["table"]
            )
            out[key] = {"state": slot["state"], "formula": formula, "table": table}
        if len(out) > self.max_states:
            raise DecompileBudgetError(
                f"{len(out)} states at round {t} exceed the budget {self.max_states}"
            )
        return out

    # -- pin construction -------------------------------------------------

    def _port_tagged_pins(self, pool: dict):
        """Receive formulas for the variants whose messages carry a port tag.

        For "++": pin[i][code] holds position i's content; for "-+": exact
        per-(message, port) counts assembled from graded diamonds.
        """
        if self.variant == "++":
            pins = []
            for i in range(1, self.delta + 1):
                row: dict[bytes | None, tuple[Formula, int]] = {}
                negatives: list[tuple[Formula, int]] = []
                for code, slot in pool.items():
                    options = []
                    for j in range(1, self.delta + 1):
                        senders = slot["senders"].get(j)
                        if not senders:
                            continue
                        theta = self._theta(senders)
                        options.append(self._chi((i, j), 1, theta))
                    if options:
                        formula = disj_all([f for f, _ in options])
                        table = 0
                        for _, mask in options:
                            table |= mask
                        row[code] = self.interner.intern(formula, table)
                        negatives.append(row[code])
                    else:
                        row[code] = (false_(), 0)
                        negatives.append(row[code])
                null_formula = conj_all([neg(f) for f, _ in negatives])
                null_table = self.suite.full_mask
                for _, mask in negatives:
                    null_table &= self.suite.full_mask & ~mask
                row[None] = self.interner.intern(null_formula, null_table)
                pins.append(row)
            return pins
        counters: dict[tuple[bytes, int], list[tuple[Formula, int]]] = {}
        for code, slot in pool.items():
            for j in range(1, self.delta + 1):
                senders = slot["senders"].get(j)
                if not senders:
                    continue
                theta = self._theta(senders)
                grades = [self._chi((STAR, j), k, theta) for k in range(1, self.delta + 1)]
                counters[(code, j)] = grades
        return counters

    def _broadcast_pins(self, pool: dict):
        if self.variant == "+-":
            pins = []
            for i in range(1, self.delta + 1):
                row: dict[bytes | None, tuple[Formula, int]] = {}
                entries = []
                for code, slot in pool.items():
                    senders = [e for lst in slot["senders"].values() for e in lst]
                    unique = {id(e["formula"]): e for e in senders}
                    theta = self._theta(list(unique.values()))
                    row[code] = self._chi((i, STAR), 1, theta)
                    entries.append(row[code])
                null_formula = conj_all([neg(f) for f, _ in entries])
                null_table = self.suite.full_mask
                for _, mask in entries:
                    null_table &= self.suite.full_mask & ~mask
                row[None] = self.interner.intern(null_formula, null_table)
                pins.append(row)
            return pins
        counters: dict[bytes, list[tuple[Formula, int]]] = {}
        for code, slot in pool.items():
            senders = [e for lst in slot["senders"].values() for e in lst]
            unique = {id(e["formula"]): e for e in senders}
            theta = self._theta(list(unique.values()))
            counters[code] = [
                self._chi((STAR, STAR), k, theta) for k in range(1, self.delta + 1)
            ]
        return counters

    # -- transition enumeration -------------------------------------------

    def _enumerate(self, entry: dict, pins, pool: dict, accumulator: dict):
        if self.variant in ("++", "+-"):
            self._enumerate_vector(entry, pins, pool, accumulator)
        else:
            self._enumerate_counts(entry, pins, pool, accumulator)

    def _record(self, state, parts: list[Formula], table: int, accumulator: dict):
        machine = self.machine
        term = conj_all(parts)
        key = _state_key(machine, state)
        slot = accumulator.get(key)
        if slot is None:
            accumulator[key] = {"state": state, "parts": [term], "table": table}
        else:
            slot["parts"].append(term)
            slot["table"] |= table

    def _enumerate_vector(self, entry: dict, pins, pool: dict, accumulator: dict):
        machine = self.machine
        codes = [None] + sorted(pool)
        chosen: list[bytes | None] = []

        def recurse(position: int, table: int, parts: list[Formula]):
            self._charge()
            if position == self.delta:
                inbox = tuple(
                    pool[c]["message"] if c is not None else machine.null_message
                    for c in chosen
                )
                state = machine.transition_absorbing(entry["state"], inbox)
                self._record(state, parts, table, accumulator)
                return
            row = pins[position]
            for code in codes:
                pin_formula, pin_table = row[code]
                narrowed = table & pin_table
                if not narrowed:
                    continue
                chosen.append(code)
                recurse(position + 1, narrowed, parts + [pin_formula])
                chosen.pop()

        recurse(0, entry["table"], [entry["formula"]])

    def _count_formula(self, grades: list[tuple[Formula, int]], count: int):
        """Exactly ``count`` occurrences, from the graded at-least diamonds."""
        if count == 0:
            formula = neg(grades[0][0])
            table = self.suite.full_mask & ~grades[0][1]
        elif count == self.delta:
            formula, table = grades[count - 1]
        else:
            lo_f, lo_t = grades[count - 1]
            hi_f, hi_t = grades[count]
            formula = conj(lo_f, neg(hi_f))
            table = lo_t & self.suite.full_mask & ~hi_t
        return self.interner.intern(formula, table)

    def _enumerate_counts(self, entry: dict, counters: dict, pool: dict, accumulator: dict):
        machine = self.machine
        slots = sorted(counters)
        chosen: list[int] = []

        def recurse(idx: int, used: int, table: int, parts: list[Formula]):
            self._charge()
            if idx == len(slots):
                messages = []
                for slot, count in zip(slots, chosen):
                    code = slot if isinstance(slot, bytes) else slot[0]
                    messages.extend([pool[code]["message"]] * count)
                messages.extend(
                    [machine.null_message] * (self.delta - len(messages))
                )
                messages.sort(key=machine.encode_message)
                state = machine.transition_absorbing(entry["state"], tuple(messages))
                self._record(state, parts, table, accumulator)
                return
            grades = counters[slots[idx]]
            for count in range(0, self.delta - used + 1):
                formula, mask = self._count_formula(grades, count)
                narrowed = table & mask
                if not narrowed:
                    continue
                chosen.append(count)
                recurse(idx + 1, used + count, narrowed, parts + [formula])
                chosen.pop()

        recurse(0, 0, entry["table"], [entry["formula"]])

    # -- driver ------------------------------------------------------------

    def build(self) -> DecompileResult:
        level = self._initial_level()
        self.level_states.append(level)
        for t in range(1, self.horizon + 1):
            level = self._level_step(level, t)
            self.level_states.append(level)
        machine = self.machine
        positive: list[tuple[Formula, int]] = []
        for entry in level.values():
            if not entry["table"]:
                continue
            state = entry["state"]
            if not machine.is_output(state):
                raise DecompileError(
                    f"machine still running after {self.horizon} rounds on the suite"
                )
            value = machine.output_value(state)
            if value not in (0, 1):
                raise DecompileError("decompilation needs a binary-output machine")
            if value == 1:
                positive.append((entry["formula"], entry["table"]))
        if positive:
            formula = disj_all([f for f, _ in positive])
            table = 0
            for _, mask in positive:
                table |= mask
        else:
            formula, table = false_(), 0
        return DecompileResult(
            formula=formula,
            table=table,
            suite=self.suite,
            level_states=self.level_states,
            horizon=self.horizon,
        )


def _check_variant_fit(machine: Machine, variant: str):
    if variant in ("-+", "--") and machine.tag.inbox == VECTOR:
        raise DecompileError(
            "count-based decompilation needs a multiset- or set-invariant machine"
        )
    if variant in ("+-", "--") and machine.tag.outbox != BROADCAST:
        raise DecompileError("variants hiding the outgoing port need a broadcast machine")


def decompile_details(
    machine: Machine,
    delta: int,
    horizon: int,
    variant: str,
    suite: ModelSuite | Sequence[PortedGraph] | None = None,
    node_bound: int = 5,
    max_states: int = 512,
    max_messages: int = 256,
    max_visits: int = 2_000_000,
) -> DecompileResult:
    """Reverse compilation with full diagnostics (families and tables)."""
    if delta > machine.delta_max:
        raise DecompileError("delta exceeds the machine's declared bound")
    _check_variant_fit(machine, variant)
    if suite is None:
        suite = ModelSuite(default_decompile_suite(delta, node_bound), variant, delta)
    elif not isinstance(suite, ModelSuite):
        suite = ModelSuite(suite, variant, delta)
    if suite.variant != variant or suite.delta != delta:
        raise DecompileError("suite was built for a different signature")
    worker = _Decompiler(
        machine, delta, horizon, variant, suite, max_states, max_messages, max_visits
    )
    return worker.build()


def decompile(
    machine: Machine,
    delta: int,
    horizon: int,
    variant: str,
    suite: ModelSuite | Sequence[PortedGraph] | None = None,
    **kwargs,
) -> Formula:
    """Formula agreeing with the machine's output on the model suite.

    The formula's modal depth equals the horizon whenever the machine's
    behaviour at the horizon actually depends on the last exchange.
    """
    return decompile_details(machine, delta, horizon, variant, suite, **kwargs).formula
