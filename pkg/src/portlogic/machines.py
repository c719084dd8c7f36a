"""Distributed state machines and their round-synchronous executor.

A machine supplies init/emit/transition as code together with canonical
encoders for its states and messages; the executor only ever materialises
states that are actually reached, so infinite state or message spaces are
fine.  Each machine carries a class tag declaring its inbox discipline
(vector / multiset / set) and outbox discipline (vector / broadcast).

Execution follows the synchronous recursion: the message arriving at port
(u, i) in round t+1 is emit(x_t(v), j) where (v, j) is the port wired to
(u, i); the inbox is always padded to length delta with the null message, so
set views may legitimately contain the null message.  Nodes whose state is a
stopping state are absorbing: they emit the null message and never change
state again (enforced here, not left to machine authors).

For multiset- and set-tagged machines the executor canonicalises the inbox
into a fixed realisation of the declared view (sorted by message encoding,
with set views deduplicated) before calling transition, so executions are
deterministic and respect the discipline.  Whether a machine's *transition
function* genuinely has the declared invariance is checked separately by
randomised probing (``check_class_conformance``), which feeds raw permuted
and reduplicated inboxes to the transition function directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .encoding import canon
from .graphs import Graph, PortedGraph, star, cycle, path, complete
from . import smallgraphs

__all__ = [
    "NO_MESSAGE",
    "VECTOR",
    "MULTISET",
    "SET",
    "BROADCAST",
    "ClassTag",
    "Machine",
    "SimpleMachine",
    "ExecutionError",
    "DegreeError",
    "inbox_view",
    "canonical_inbox",
    "run",
    "Trace",
    "RunResult",
    "trace_to_json",
    "check_class_conformance",
    "ConformanceReport",
]

NO_MESSAGE = "m0"

VECTOR = "vector"
MULTISET = "multiset"
SET = "set"
BROADCAST = "broadcast"

_INBOX_KINDS = (VECTOR, MULTISET, SET)
_OUTBOX_KINDS = (VECTOR, BROADCAST)


class ExecutionError(RuntimeError):
    """Executor-level failure (not a timeout; timeouts are results)."""


class DegreeError(ExecutionError):
    """Graph maximum degree exceeds the machine's declared delta."""


@dataclass(frozen=True)
class ClassTag:
    """Inbox/outbox discipline of a machine.

    The six combinations map onto the machine classes: inbox
    vector/multiset/set crossed with outbox vector/broadcast, coded
    VV, MV, SV, VB, MB, SB.
    """

    inbox: str
    outbox: str

    def __post_init__(self):
        if self.inbox not in _INBOX_KINDS:
            raise ValueError(f"unknown inbox discipline {self.inbox!r}")
        if self.outbox not in _OUTBOX_KINDS:
            raise ValueError(f"unknown outbox discipline {self.outbox!r}")

    @property
    def code(self) -> str:
        first = {VECTOR: "V", MULTISET: "M", SET: "S"}[self.inbox]
        second = {VECTOR: "V", BROADCAST: "B"}[self.outbox]
        return first + second


class Machine:
    """Base class for distributed state machines.

    Subclasses define ``delta_max``, ``tag``, ``init_state``, ``emit``,
    ``transition`` and ``is_output``.  States and messages must be hashable
    and canonically encodable (the defaults below use the structural
    encoder).  ``output_value`` maps a stopping state to the reported output;
    wrappers override it to unwrap their own markers.
    """

    delta_max: int
    tag: ClassTag
    null_message = NO_MESSAGE
    outputs: frozenset | None = None
    name: str = ""

    def init_state(self, degree: int):
        raise NotImplementedError

    def emit(self, state, port: int):
        raise NotImplementedError

    def transition(self, state, inbox: tuple):
        raise NotImplementedError

    def is_output(self, state) -> bool:
        raise NotImplementedError

    def output_value(self, state):
        return state

    def encode_state(self, state) -> bytes:
        return canon(state)

    def encode_message(self, message) -> bytes:
        return canon(message)

    # Absorption wrappers: a stopped node sends nothing and never moves.

    def emit_absorbing(self, state, port: int):
        if self.is_output(state):
            return self.null_message
        return self.emit(state, port)

    def transition_absorbing(self, state, inbox: tuple):
        if self.is_output(state):
            return state
        return self.transition(state, inbox)


class SimpleMachine(Machine):
    """Machine assembled from callables; convenient for tests and demos."""

    def __init__(
        self,
        delta_max: int,
        tag: ClassTag,
        init: Callable[[int], object],
        emit: Callable[[object, int], object],
        transition: Callable[[object, tuple], object],
        is_output: Callable[[object], bool],
        outputs: frozenset | None = None,
        name: str = "",
    ):
        self.delta_max = delta_max
        self.tag = tag
        self._init = init
        self._emit = emit
        self._transition = transition
        self._is_output = is_output
        self.outputs = outputs
        self.name = name

    def init_state(self, degree: int):
        return self._init(degree)

    def emit(self, state, port: int):
        return self._emit(state, port)

    def transition(self, state, inbox: tuple):
        return self._transition(state, inbox)

    def is_output(self, state) -> bool:
        return self._is_output(state)


def inbox_view(tag, inbox: tuple, encode: Callable[[object], bytes] = canon):
    """The view a machine class sees of a padded inbox.

    Vector view is the inbox itself; the multiset view maps messages to
    multiplicities (returned as encoding-sorted (message, count) pairs); the
    set view keeps only distinct messages.  Null-message padding is part of
    the inbox, so it shows up in multiset and set views.
    """
    kind = tag.inbox if isinstance(tag, ClassTag) else tag
    if kind == VECTOR:
        return tuple(inbox)
    if kind == MULTISET:
        counts: dict[bytes, list] = {}
        for m in inbox:
            slot = counts.setdefault(encode(m), [m, 0])
            slot[1] += 1
        return tuple((m, c) for _, (m, c) in sorted(counts.items()))
    if kind == SET:
        seen: dict[bytes, object] = {}
        for m in inbox:
            seen.setdefault(encode(m), m)
        return tuple(m for _, m in sorted(seen.items()))
    raise ValueError(f"unknown inbox discipline {kind!r}")


def canonical_inbox(machine: Machine, inbox: tuple) -> tuple:
    """Fixed-length realisation of the machine's view of the inbox.

    Multiset: the inbox sorted by message encoding.  Set: distinct messages
    sorted, padded back to full length by repeating the last one (this keeps
    the set of entries unchanged).  Vector: untouched.
    """
    kind = machine.tag.inbox
    if kind == VECTOR:
        return inbox
    if kind == MULTISET:
        return tuple(sorted(inbox, key=machine.encode_message))
    distinct = inbox_view(SET, inbox, machine.encode_message)
    return distinct + (distinct[-1],) * (len(inbox) - len(distinct))


@dataclass
class Trace:
    """Per-round snapshots; index 0 is the initial state vector."""

    states: list[tuple]
    messages: list[tuple] | None = None

    def __len__(self) -> int:
        return len(self.states)


@dataclass
class RunResult:
    stopped: bool
    rounds: int
    outputs: dict[int, object] | None
    trace: Trace

    @property
    def timed_out(self) -> bool:
        return not self.stopped


def run(
    machine: Machine,
    ported: PortedGraph,
    max_rounds: int,
    record_messages: bool = False,
) -> RunResult:
    """Execute ``machine`` on ``ported`` until all nodes stop or time runs out.

    Returns the outputs and the stopping round on success; a timeout is a
    first-class result (``stopped=False``, outputs ``None``), not an error.
    """
    g = ported.graph
    if g.max_degree() > machine.delta_max:
        raise DegreeError(
            f"graph degree {g.max_degree()} exceeds machine delta {machine.delta_max}"
        )
    p = ported.numbering
    delta = machine.delta_max
    null = machine.null_message
    incoming = [
        [p.source(u, i) for i in range(1, g.degree(u) + 1)] for u in range(g.n)
    ]
    states = [machine.init_state(g.degree(v)) for v in range(g.n)]
    stopped = [machine.is_output(s) for s in states]
    trace = Trace(states=[tuple(states)], messages=[] if record_messages else None)
    rounds = 0
    for t in range(1, max_rounds + 1):
        if all(stopped):
            break
        inboxes = []
        for u in range(g.n):
            inbox = [
                machine.emit_absorbing(states[v], j) for (v, j) in incoming[u]
            ]
            inbox += [null] * (delta - len(inbox))
            inboxes.append(tuple(inbox))
        if record_messages:
            trace.messages.append(tuple(inboxes))
        new_states = []
        for u in range(g.n):
            if stopped[u]:
                new_states.append(states[u])
            else:
                new_states.append(
                    machine.transition(states[u], canonical_inbox(machine, inboxes[u]))
                )
        states = new_states
        stopped = [machine.is_output(s) for s in states]
        trace.states.append(tuple(states))
        rounds = t
        if all(stopped):
            break
    if not all(stopped):
        return RunResult(False, max_rounds, None, trace)
    outputs = {v: machine.output_value(states[v]) for v in range(g.n)}
    return RunResult(True, rounds, outputs, trace)


def trace_to_json(machine: Machine, result: RunResult) -> dict:
    """Trace export: per-round hex state encodings, optional message table."""
    doc = {
        "stopped": result.stopped,
        "rounds": result.rounds,
        "states": [
            [machine.encode_state(s).hex() for s in snapshot]
            for snapshot in result.trace.states
        ],
    }
    if result.trace.messages is not None:
        doc["messages"] = [
            [[machine.encode_message(m).hex() for m in inbox] for inbox in round_msgs]
            for round_msgs in result.trace.messages
        ]
    return doc


# ---------------------------------------------------------------------------
# Class-conformance probing
# ---------------------------------------------------------------------------


@dataclass
class ConformanceViolation:
    kind: str
    state: object
    detail: dict


@dataclass
class ConformanceReport:
    ok: bool
    probes: int
    violations: list[ConformanceViolation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _default_probe_pool(delta: int) -> list[Graph]:
    pool = [path(2), path(3), path(4), star(min(delta, 3)) if delta >= 1 else path(2)]
    if delta >= 2:
        pool += [cycle(4), cycle(5), star(2)]
    if delta >= 3:
        pool += [complete(4), star(3)]
    return [g for g in pool if g.max_degree() <= delta]


def check_class_conformance(
    machine: Machine,
    samples: int = 300,
    seed: int = 0,
    graphs_pool: Iterable[Graph] | None = None,
    max_rounds: int = 16,
) -> ConformanceReport:
    """Randomised probe of the machine's declared inbox/outbox discipline.

    Observations are gathered by running the machine on a pool of small
    ported graphs; probes then permute (multiset) or reduplicate (set) the
    observed raw inboxes and compare transition results, and check
    port-independence of emit for broadcast machines.  Reports every
    counterexample found.
    """
    import random as _random

    rng = _random.Random(seed)
    pool = list(graphs_pool) if graphs_pool is not None else _default_probe_pool(machine.delta_max)
    observations: list[tuple[object, tuple]] = []
    live_states: dict[bytes, object] = {}
    for gi, g in enumerate(pool):
        for k in range(3):
            pg = PortedGraph(g, smallgraphs.numberings(g, cap=1, samples=1, seed=seed + 31 * gi + k)[0])
            result = run(machine, pg, max_rounds, record_messages=True)
            for t, round_msgs in enumerate(result.trace.messages):
                snapshot = result.trace.states[t]
                for u, inbox in enumerate(round_msgs):
                    state = snapshot[u]
                    if not machine.is_output(state):
                        observations.append((state, inbox))
                        live_states.setdefault(machine.encode_state(state), state)

    report = ConformanceReport(ok=True, probes=0)
    if machine.tag.outbox == BROADCAST:
        for state in live_states.values():
            report.probes += 1
            msgs = [machine.emit(state, i) for i in range(1, machine.delta_max + 1)]
            codes = {machine.encode_message(m) for m in msgs}
            if len(codes) > 1:
                report.ok = False
                report.violations.append(
                    ConformanceViolation("broadcast", state, {"messages": msgs})
                )

    if machine.tag.inbox in (MULTISET, SET) and observations:
        for _ in range(samples):
            state, inbox = observations[rng.randrange(len(observations))]
            base = machine.transition(state, inbox)
            variants = []
            shuffled = list(inbox)
            rng.shuffle(shuffled)
            variants.append(tuple(shuffled))
            if machine.tag.inbox == SET:
                distinct = list(inbox_view(SET, inbox, machine.encode_message))
                extra = len(inbox) - len(distinct)
                redistributed = distinct + [
                    distinct[rng.randrange(len(distinct))] for _ in range(extra)
                ]
                rng.shuffle(redistributed)
                variants.append(tuple(redistributed))
            report.probes += 1
            for alt in variants:
                other = machine.transition(state, alt)
                if machine.encode_state(base) != machine.encode_state(other):
                    report.ok = False
                    report.violations.append(
                        ConformanceViolation(
                            machine.tag.inbox,
                            state,
                            {"inbox": inbox, "variant": alt, "results": (base, other)},
                        )
                    )
    return report
