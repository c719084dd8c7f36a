"""Formula syntax, signatures, Kripke models, and the evaluator."""

import json
import random

import pytest
from hypothesis import given, strategies as st

from conftest import cached_model, naive_holds, random_formula, sweep
from portlogic.graphs import (
    PortNumbering,
    PortedGraph,
    consistent_port_numbering,
    cycle,
    path,
    star,
)
from portlogic.logic import (
    VARIANTS,
    And,
    Dia,
    FormulaSyntaxError,
    KripkeModel,
    Not,
    Signature,
    SignatureMismatchError,
    STAR,
    conj,
    disj,
    eval_formula,
    false_,
    format_formula,
    kripke_model,
    modal_depth,
    model_to_json,
    parse,
    prop,
    true_,
    validate_signature,
)


def test_parse_atoms_and_diamonds():
    assert parse("q1") is prop(1)
    f = parse("<*,*;3> q1")
    assert isinstance(f, Dia) and f.alpha == (STAR, STAR) and f.grade == 3
    assert f.sub is prop(1)
    g = parse("!(q1 & <2,1> q2)")
    assert isinstance(g, Not) and isinstance(g.sub, And)
    inner = g.sub.right
    assert isinstance(inner, Dia) and inner.alpha == (2, 1) and inner.grade == 1


def test_parse_sugar():
    assert parse("F") is false_()
    assert parse("T") is true_()
    assert parse("q1 | q2") is disj(prop(1), prop(2))
    assert parse("q1 & q2 & q3") is conj(conj(prop(1), prop(2)), prop(3))


def test_parse_errors_carry_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse("q1 & ")
    assert info.value.position == 5
    with pytest.raises(FormulaSyntaxError):
        parse("<1 2>q1")
    with pytest.raises(FormulaSyntaxError):
        parse("q1 q2")
    with pytest.raises(FormulaSyntaxError):
        parse("<1,1;0>q1")


def test_modal_depth():
    assert modal_depth(parse("q1")) == 0
    assert modal_depth(parse("<*,*>q1")) == 1
    assert modal_depth(parse("<1,1><2,2>q1 & q2")) == 2
    assert modal_depth(parse("<*,*;4>q1")) == 1  # grades do not add depth


@given(st.integers(min_value=0, max_value=10_000))
def test_print_parse_roundtrip(seed):
    rng = random.Random(seed)
    variant = rng.choice(["++", "-+", "+-", "--"])
    sig = Signature(rng.randint(1, 3), variant)
    f = random_formula(rng, sig)
    assert parse(format_formula(f)) is f


def test_signature_validation():
    sig = Signature(2, "-+")
    assert validate_signature(parse("<1,2>q1"), sig)  # first index must be *
    assert not validate_signature(parse("<*,2>q1"), sig)
    assert validate_signature(parse("q5"), Signature(3, "--"))
    assert validate_signature(parse("<*,*;2>q1"), Signature(3, "+-"))  # graded needs -+/--
    assert not validate_signature(parse("<*,*;2>q1"), Signature(3, "--"))
    with pytest.raises(ValueError):
        Signature(3, "+*")


def test_kripke_model_star_variant_is_edge_relation():
    for g in (star(3), cycle(4), path(4)):
        pg = PortedGraph(g, consistent_port_numbering(g, 1))
        model = kripke_model(pg, "--")
        pairs = set(model.relations[(STAR, STAR)])
        assert pairs == set(g.arcs())
        assert len(pairs) == 2 * g.edge_count()


def test_kripke_model_single_edge_by_hand():
    g = path(2)
    p = PortNumbering({(0, 1): (1, 1), (1, 1): (0, 1)})
    model = kripke_model(PortedGraph(g, p), "++", 1)
    assert set(model.relations[(1, 1)]) == {(0, 1), (1, 0)}


def test_valuation_marks_degrees():
    g = star(2)
    model = kripke_model(PortedGraph(g, consistent_port_numbering(g, 0)), "--")
    assert model.valuation[2] == frozenset({0})
    assert model.valuation[1] == frozenset({1, 2})
    # every node of positive degree is counted exactly once
    assert sum(len(ws) for ws in model.valuation.values()) == g.n


def test_eval_examples():
    c4 = cycle(4)
    model = kripke_model(PortedGraph(c4, consistent_port_numbering(c4, 0)), "--")
    assert eval_formula(model, parse("q2")) == frozenset(range(4))
    s3 = star(3)
    m3 = kripke_model(PortedGraph(s3, consistent_port_numbering(s3, 0)), "--", 3)
    assert eval_formula(m3, parse("<*,*>q1")) == frozenset({0})
    assert eval_formula(m3, parse("<*,*;3>q1")) == frozenset({0})
    s2 = star(2)
    m2 = kripke_model(PortedGraph(s2, consistent_port_numbering(s2, 0)), "--", 3)
    assert eval_formula(m2, parse("<*,*;3>q1")) == frozenset()


def test_eval_rejects_signature_mismatch():
    g = star(2)
    model = kripke_model(PortedGraph(g, consistent_port_numbering(g, 0)), "--")
    with pytest.raises(SignatureMismatchError):
        eval_formula(model, parse("<1,1>q1"))
    with pytest.raises(SignatureMismatchError):
        eval_formula(model, parse("q5"))


@pytest.mark.parametrize("variant", ["++", "-+", "+-", "--"])
def test_eval_agrees_with_naive_recursion(variant):
    rng = random.Random(17 + VARIANTS.index(variant))
    graphs = [path(2), path(4), star(3), cycle(4), cycle(5)]
    for trial in range(25):
        g = graphs[trial % len(graphs)]
        delta = max(g.max_degree(), rng.randint(1, 3))
        sig = Signature(delta, variant)
        f = random_formula(rng, sig)
        p = sweep(g, cap=1, samples=1, seed=trial)[0]
        model = cached_model(PortedGraph(g, p), variant, delta)
        got = eval_formula(model, f)
        for v in range(model.size):
            assert (v in got) == naive_holds(model, v, f)


def test_eval_supports_hand_built_models():
    # models need not come from graphs; eval only needs relations + valuation
    model = KripkeModel(
        3,
        2,
        "--",
        {(STAR, STAR): [(0, 1), (0, 2), (1, 2)]},
        {1: {1, 2}, 2: {0}},
    )
    assert eval_formula(model, parse("<*,*;2>q1")) == frozenset({0})
    assert eval_formula(model, parse("<*,*>q2")) == frozenset()


def test_diamond_monotone_in_relation():
    rng = random.Random(0)
    base_pairs = [(0, 1), (1, 2), (3, 0)]
    model = KripkeModel(4, 1, "--", {(STAR, STAR): base_pairs}, {1: {0, 1, 2, 3}})
    f = parse("<*,*>q1")
    small = eval_formula(model, f)
    for extra in [(0, 2), (2, 3), (1, 0)]:
        grown = KripkeModel(
            4, 1, "--", {(STAR, STAR): base_pairs + [extra]}, {1: {0, 1, 2, 3}}
        )
        assert small <= eval_formula(grown, f)


def test_model_json_dump():
    g = star(2)
    model = kripke_model(PortedGraph(g, consistent_port_numbering(g, 0)), "-+")
    doc = model_to_json(model)
    assert doc["worlds"] == 3
    assert "(*,1)" in doc["relations"] and "(*,2)" in doc["relations"]
    assert doc["valuation"]["q2"] == [0]
    json.dumps(doc)


def test_disjoint_union_offsets():
    g1 = star(2)
    g2 = cycle(3)
    m1 = kripke_model(PortedGraph(g1, consistent_port_numbering(g1, 0)), "--", 2)
    m2 = kripke_model(PortedGraph(g2, consistent_port_numbering(g2, 0)), "--", 2)
    union, offset = m1.disjoint_union(m2)
    assert union.size == 6 and offset == 3
    assert eval_formula(union, parse("q2")) == frozenset({0, 3, 4, 5})
