"""Modal formulas, their concrete syntax, and Kripke models of ported graphs.

Formulas range over degree propositions q1..qD and diamonds indexed by port
pairs.  An index pair may fix the incoming port, the outgoing port, both, or
neither; the four shapes give four signature variants, written with the codes
"++", "-+", "+-", "--".  A diamond may carry a grade k >= 1 (count at least k
successors); grade 1 is the plain diamond, and grades above 1 are only legal
in the two variants whose relations can have several successors per world
("-+" and "--").

Concrete grammar (whitespace insignificant)::

    formula := or
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "!" unary | dia unary | atom
    dia     := "<" idx "," idx (";" nat)? ">"
    idx     := nat | "*"
    atom    := "q" nat | "T" | "F" | "(" formula ")"

Disjunction, T and F are sugar eliminated at parse time; F is the fixed
contradiction (q1 & !q1) and T its negation.  Nodes are hash-consed, so
structurally equal formulas are the same object and big shared structures
(such as decompiled formulas) stay compact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graphs import PortedGraph

__all__ = [
    "Formula",
    "Prop",
    "And",
    "Not",
    "Dia",
    "prop",
    "conj",
    "neg",
    "dia",
    "disj",
    "true_",
    "false_",
    "conj_all",
    "disj_all",
    "modal_depth",
    "parse",
    "format_formula",
    "FormulaSyntaxError",
    "Signature",
    "SignatureMismatchError",
    "validate_signature",
    "VARIANTS",
    "alphas_for",
    "KripkeModel",
    "kripke_model",
    "eval_formula",
    "model_to_json",
]

STAR = "*"
VARIANTS = ("++", "-+", "+-", "--")


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SignatureMismatchError(ValueError):
    pass


class Formula:
    """Base class; instances are interned, so == is identity."""

    __slots__ = ("md", "size")

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return f"Formula({format_formula(self)})"


class Prop(Formula):
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index
        self.md = 0
        self.size = 1


class And(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self.md = max(left.md, right.md)
        self.size = left.size + right.size + 1


class Not(Formula):
    __slots__ = ("sub",)

    def __init__(self, sub: Formula):
        self.sub = sub
        self.md = sub.md
        self.size = sub.size + 1


class Dia(Formula):
    __slots__ = ("alpha", "grade", "sub")

    def __init__(self, alpha: tuple, grade: int, sub: Formula):
        self.alpha = alpha
        self.grade = grade
        self.sub = sub
        self.md = sub.md + 1
        self.size = sub.size + 1


_interned: dict[tuple, Formula] = {}


def _intern(key: tuple, build) -> Formula:
    node = _interned.get(key)
    if node is None:
        node = build()
        _interned[key] = node
    return node


def prop(index: int) -> Formula:
    if index < 1:
        raise ValueError("proposition indices start at 1")
    return _intern(("q", index), lambda: Prop(index))


def conj(left: Formula, right: Formula) -> Formula:
    return _intern(("&", id(left), id(right)), lambda: And(left, right))


def neg(sub: Formula) -> Formula:
    return _intern(("!", id(sub)), lambda: Not(sub))


def dia(alpha: tuple, sub: Formula, grade: int = 1) -> Formula:
    if grade < 1:
        raise ValueError("grades start at 1")
    if len(alpha) != 2 or not all(x == STAR or isinstance(x, int) for x in alpha):
        raise ValueError(f"bad modality index {alpha!r}")
    return _intern(("<>", tuple(alpha), grade, id(sub)), lambda: Dia(tuple(alpha), grade, sub))


def disj(left: Formula, right: Formula) -> Formula:
    return neg(conj(neg(left), neg(right)))


def false_() -> Formula:
    return conj(prop(1), neg(prop(1)))


def true_() -> Formula:
    return neg(false_())


def _fold_balanced(items: list[Formula], combine) -> Formula:
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return combine(_fold_balanced(items[:mid], combine), _fold_balanced(items[mid:], combine))


def conj_all(items: Iterable[Formula]) -> Formula:
    items = list(items)
    if not items:
        return true_()
    return _fold_balanced(items, conj)


def disj_all(items: Iterable[Formula]) -> Formula:
    items = list(items)
    if not items:
        return false_()
    return _fold_balanced(items, disj)


def modal_depth(formula: Formula) -> int:
    """Largest number of nested modalities (grades do not add depth)."""
    return formula.md


def subformulas(formula: Formula) -> list[Formula]:
    """Distinct subformulas in children-first order (iterative postorder)."""
    out: list[Formula] = []
    seen: set[int] = set()
    stack: list[tuple[Formula, bool]] = [(formula, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            out.append(node)
            continue
        stack.append((node, True))
        if isinstance(node, And):
            stack.append((node.right, False))
            stack.append((node.left, False))
        elif isinstance(node, Not):
            stack.append((node.sub, False))
        elif isinstance(node, Dia):
            stack.append((node.sub, False))
    return out


# ---------------------------------------------------------------------------
# Parsing and printing
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise FormulaSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, char: str):
        if self.peek() != char:
            self.error(f"expected {char!r}")
        self.pos += 1

    def nat(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            self.error("expected a number")
        return int(self.text[start : self.pos])

    def formula(self) -> Formula:
        node = self.and_()
        while self.peek() == "|":
            self.take("|")
            node = disj(node, self.and_())
        return node

    def and_(self) -> Formula:
        node = self.unary()
        while self.peek() == "&":
            self.take("&")
            node = conj(node, self.unary())
        return node

    def unary(self) -> Formula:
        ch = self.peek()
        if ch == "!":
            self.take("!")
            return neg(self.unary())
        if ch == "<":
            alpha, grade = self.dia()
            return dia(alpha, self.unary(), grade)
        return self.atom()

    def dia(self) -> tuple[tuple, int]:
        self.take("<")
        a = self.idx()
        self.take(",")
        b = self.idx()
        grade = 1
        if self.peek() == ";":
            self.take(";")
            grade = self.nat()
            if grade < 1:
                self.error("grade must be at least 1")
        self.take(">")
        return (a, b), grade

    def idx(self):
        if self.peek() == "*":
            self.take("*")
            return STAR
        return self.nat()

    def atom(self) -> Formula:
        ch = self.peek()
        if ch == "q":
            self.take("q")
            index = self.nat()
            if index < 1:
                self.error("proposition index must be at least 1")
            return prop(index)
        if ch == "T":
            self.take("T")
            return true_()
        if ch == "F":
            self.take("F")
            return false_()
        if ch == "(":
            self.take("(")
            node = self.formula()
            self.take(")")
            return node
        self.error("expected an atom")


def parse(text: str) -> Formula:
    parser = _Parser(text)
    node = parser.formula()
    parser.skip_ws()
    if parser.pos != len(text):
        parser.error("trailing input")
    return node


def format_formula(formula: Formula) -> str:
    """Render a formula; parse(format_formula(f)) is structurally f."""
    memo: dict[int, str] = {}

    def render(node: Formula) -> str:
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, Prop):
            text = f"q{node.index}"
        elif isinstance(node, And):
            text = f"({render(node.left)} & {render(node.right)})"
        elif isinstance(node, Not):
            text = "!" + render(node.sub)
        else:
            a, b = node.alpha
            grade = f";{node.grade}" if node.grade > 1 else ""
            text = f"<{a},{b}{grade}>" + render(node.sub)
        memo[id(node)] = text
        return text

    return render(formula)


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    """Degree bound plus the index-pair shape legal for a variant."""

    delta: int
    variant: str

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.delta < 1:
            raise ValueError("delta must be at least 1")

    @property
    def allows_grading(self) -> bool:
        # Fixing the incoming port pins down at most one successor, so graded
        # diamonds only make sense when the incoming index is unconstrained.
        return self.variant in ("-+", "--")


def alphas_for(variant: str, delta: int) -> list[tuple]:
    rng = range(1, delta + 1)
    if variant == "++":
        return [(i, j) for i in rng for j in rng]
    if variant == "-+":
        return [(STAR, j) for j in rng]
    if variant == "+-":
        return [(i, STAR) for i in rng]
    return [(STAR, STAR)]


def validate_signature(formula: Formula, sig: Signature) -> list[str]:
    """All signature violations of ``formula`` (empty list means ok)."""
    problems: list[str] = []
    legal = set(alphas_for(sig.variant, sig.delta))
    for node in subformulas(formula):
        if isinstance(node, Prop) and node.index > sig.delta:
            problems.append(f"proposition q{node.index} exceeds delta {sig.delta}")
        elif isinstance(node, Dia):
            if node.alpha not in legal:
                problems.append(
                    f"modality index {node.alpha} not legal for variant {sig.variant}"
                    f" with delta {sig.delta}"
                )
            if node.grade > 1 and not sig.allows_grading:
                problems.append(
                    f"grade {node.grade} requires a graded variant (-+ or --)"
                )
    return problems


# ---------------------------------------------------------------------------
# Kripke models of ported graphs
# ---------------------------------------------------------------------------


class KripkeModel:
    """Worlds with indexed accessibility relations and a degree valuation.

    ``relations`` maps each signature index to a sorted tuple of (v, w)
    pairs, w being an alpha-successor of v.  Immutable by convention.
    """

    def __init__(self, size: int, delta: int, variant: str, relations: dict, valuation: dict):
        self.size = size
        self.delta = delta
        self.variant = variant
        self.relations = {alpha: tuple(sorted(pairs)) for alpha, pairs in relations.items()}
        self.valuation = {i: frozenset(ws) for i, ws in valuation.items()}
        self._succ: dict[tuple, tuple] = {}
        for alpha, pairs in self.relations.items():
            lists: list[list[int]] = [[] for _ in range(size)]
            for v, w in pairs:
                lists[v].append(w)
            self._succ[alpha] = tuple(tuple(ws) for ws in lists)

    def successors(self, alpha: tuple, world: int) -> tuple[int, ...]:
        return self._succ[alpha][world]

    def sat_prop(self, index: int) -> frozenset[int]:
        return self.valuation.get(index, frozenset())

    def signature(self) -> Signature:
        return Signature(self.delta, self.variant)

    def valuation_profile(self, world: int) -> frozenset[int]:
        return frozenset(i for i, ws in self.valuation.items() if world in ws)

    def disjoint_union(self, other: "KripkeModel") -> tuple["KripkeModel", int]:
        if (self.delta, self.variant) != (other.delta, other.variant):
            raise SignatureMismatchError("models must share delta and variant")
        offset = self.size
        relations = {
            alpha: list(self.relations.get(alpha, ()))
            + [(v + offset, w + offset) for v, w in other.relations.get(alpha, ())]
            for alpha in set(self.relations) | set(other.relations)
        }
        valuation = {
            i: set(self.valuation.get(i, frozenset()))
            | {w + offset for w in other.valuation.get(i, frozenset())}
            for i in set(self.valuation) | set(other.valuation)
        }
        return KripkeModel(self.size + other.size, self.delta, self.variant, relations, valuation), offset


def kripke_model(pg: PortedGraph, variant: str, delta: int | None = None) -> KripkeModel:
    """Model of (G, p): worlds are nodes, relations encode the numbering.

    The base relation for (i, j) holds (u, v) when v's port j feeds u's
    port i; variants with a star take unions over the hidden index.  The
    valuation marks node degrees.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    g = pg.graph
    if delta is None:
        delta = max(1, g.max_degree())
    if g.max_degree() > delta:
        raise SignatureMismatchError("graph degree exceeds requested delta")
    base: dict[tuple, set] = {}
    for (v, j), (u, i) in pg.numbering.items():
        base.setdefault((i, j), set()).add((u, v))
    relations: dict[tuple, set] = {alpha: set() for alpha in alphas_for(variant, delta)}
    for (i, j), pairs in base.items():
        if variant == "++":
            key = (i, j)
        elif variant == "-+":
            key = (STAR, j)
        elif variant == "+-":
            key = (i, STAR)
        else:
            key = (STAR, STAR)
        relations[key] |= pairs
    valuation = {
        i: frozenset(v for v in range(g.n) if g.degree(v) == i)
        for i in range(1, delta + 1)
    }
    return KripkeModel(g.n, delta, variant, relations, valuation)


def eval_formula(model: KripkeModel, formula: Formula, check: bool = True) -> frozenset[int]:
    """Worlds satisfying ``formula``, computed bottom-up over the DAG."""
    if check:
        problems = validate_signature(formula, model.signature())
        if problems:
            raise SignatureMismatchError("; ".join(problems))
    memo: dict[int, frozenset[int]] = {}
    for node in subformulas(formula):
        if isinstance(node, Prop):
            result = model.sat_prop(node.index)
        elif isinstance(node, And):
            result = memo[id(node.left)] & memo[id(node.right)]
        elif isinstance(node, Not):
            result = frozenset(range(model.size)) - memo[id(node.sub)]
        else:
            target = memo[id(node.sub)]
            if node.grade == 1:
                result = frozenset(
                    v
                    for v in range(model.size)
                    if any(w in target for w in model.successors(node.alpha, v))
                )
            else:
                result = frozenset(
                    v
                    for v in range(model.size)
                    if sum(1 for w in model.successors(node.alpha, v) if w in target)
                    >= node.grade
                )
        memo[id(node)] = result
    return memo[id(formula)]


def model_to_json(model: KripkeModel) -> dict:
    return {
        "worlds": model.size,
        "delta": model.delta,
        "variant": model.variant,
        "relations": {
            f"({alpha[0]},{alpha[1]})": [list(pair) for pair in pairs]
            for alpha, pairs in sorted(model.relations.items(), key=lambda kv: str(kv[0]))
        },
        "valuation": {
            f"q{i}": sorted(ws) for i, ws in sorted(model.valuation.items())
        },
    }
