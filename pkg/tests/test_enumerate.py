import itertools
from collections import Counter

import pytest

from protoforge import expr as E
from protoforge.enumerate import (CachedEnumerator, Completion, Grammar, enumerate_joint,
                                  enumerate_naive, expand_partial, make_stream)
from protoforge.normal import normalize
from protoforge.values import BOOL, DomainType, SetType, universe

from conftest import nodes
from pf_testkit import BENCH

NODE = DomainType("Node")
SET = SetType(NODE)
x, y = E.Var("x", BOOL), E.Var("y", BOOL)
vy, n = E.Var("vote_yes", SET), E.Arg("n", NODE)


def bool_grammar():
    B = E.Placeholder("B", BOOL)
    return Grammar("b", {"B": BOOL}, "B", {"B": [x, y, E.Not(B), E.And(B, B)]})


def set_grammar():
    P = E.Placeholder("E", SET)
    return Grammar("s", {"E": SET}, "E", {"E": [E.EmptySet(NODE), E.Singleton(n), vy,
                                                 E.Union(P, P), E.Inter(P, P), E.Diff(P, P)]})


def xy_union_grammar():
    P = E.Placeholder("E", SET)
    a, b = E.Var("x", SET), E.Var("y", SET)
    return Grammar("u", {"E": SET}, "E", {"E": [a, b, E.Union(P, P)]})


def semantics(e):
    """Value table of e over every assignment to x, y, vote_yes and n (2 nodes)."""
    inst = nodes(2)
    f = E.compile_expr(e)
    sets = universe(SET, inst)
    out = []
    for xv, yv, v, m in itertools.product((False, True), (False, True), sets, inst.elements("Node")):
        env = dict(inst.env())
        env.update(x=xv, y=yv, vote_yes=v, n=m)
        out.append(f(env))
    return tuple(out)


# ----------------------------------------------------------------- naive

def test_naive_emits_terminals_first():
    a, b = itertools.islice(enumerate_naive(xy_union_grammar()), 2)
    assert (E.to_text(a), E.to_text(b)) == ("x", "y")


def test_naive_expansion_considers_nine_substitutions():
    g = xy_union_grammar()
    P = E.Placeholder("E", SET)
    d = E.Union(P, E.Union(E.Var("x", SET), P))
    assert len(expand_partial(d, g)) == 9


def test_single_terminal_grammar():
    g = Grammar("one", {"B": BOOL}, "B", {"B": [E.TRUE]})
    assert list(enumerate_naive(g)) == [E.TRUE]
    assert list(CachedEnumerator(g)) == [E.TRUE]


def test_grammar_rejects_ill_typed_productions():
    with pytest.raises(ValueError):
        Grammar("bad", {"B": BOOL}, "B", {"B": [vy]})
    with pytest.raises(ValueError):
        Grammar("bad", {"B": BOOL}, "C", {"B": [x]})


# ---------------------------------------------------------------- cached

def test_union_of_two_variables_has_one_new_class_at_size_3():
    out = list(CachedEnumerator(xy_union_grammar(), max_size=3))
    assert [E.to_text(e) for e in out] == ["x", "y", "(x \\cup y)"]


def test_boolean_grammar_saturates_at_sixteen_classes():
    en = CachedEnumerator(bool_grammar())
    out = list(en)
    assert len(out) == 16 and en.exhausted
    assert len({semantics(e) for e in out}) == 16


def test_unreduced_boolean_growth_is_exponential():
    out = list(CachedEnumerator(bool_grammar(), reduce=False, max_size=8))
    count = Counter(e.size for e in out)
    for s in range(5, 9):
        assert count[s] >= 1.5 * count[s - 1]


def test_reduction_ratio_on_set_grammar():
    on = list(CachedEnumerator(set_grammar(), reduce=True, max_size=9))
    off = list(CachedEnumerator(set_grammar(), reduce=False, max_size=9))
    assert len(on) * 10 <= len(off)


def test_shortcircuit_halves_pairs_and_keeps_classes():
    a = CachedEnumerator(set_grammar(), reduce=True, shortcircuit=True, max_size=9)
    b = CachedEnumerator(set_grammar(), reduce=True, shortcircuit=False, max_size=9)
    ea, eb = list(a), list(b)
    assert {normalize(e) for e in ea} == {normalize(e) for e in eb}
    assert b.stats.pair_iterations >= 1.8 * a.stats.pair_iterations


@pytest.mark.parametrize("make", [bool_grammar, set_grammar])
def test_class_completeness(make):
    reduced = list(CachedEnumerator(make(), reduce=True, max_size=7))
    best = {}
    for e in reduced:
        best.setdefault(semantics(e), e.size)
    for e in CachedEnumerator(make(), reduce=False, max_size=7):
        sem = semantics(e)
        assert sem in best and best[sem] <= e.size, E.to_text(e)


@pytest.mark.parametrize("make", [bool_grammar, set_grammar])
def test_reduced_stream_has_distinct_normal_forms(make):
    out = list(CachedEnumerator(make(), max_size=9))
    assert len({normalize(e) for e in out}) == len(out)
    assert len({semantics(e) for e in out}) == len(out)


@pytest.mark.parametrize("strategy, reduce, sc", [
    ("naive", True, True), ("cached", False, False), ("cached", False, True), ("cached", True, True)])
@pytest.mark.parametrize("make", [bool_grammar, set_grammar])
def test_sizes_are_monotone(make, strategy, reduce, sc):
    sizes = [e.size for e in itertools.islice(make_stream(make(), strategy, reduce, sc, 6), 3000)]
    assert sizes == sorted(sizes)
    assert all(e.type == make().start_type for e in make_stream(make(), strategy, reduce, sc, 4))


def test_unreduced_cached_matches_naive_language():
    a = sorted(E.to_text(e) for e in make_stream(set_grammar(), "naive", max_size=5))
    b = sorted(E.to_text(e) for e in make_stream(set_grammar(), "cached", False, False, 5))
    assert set(a) == set(b)


def test_enumeration_is_deterministic():
    a = [E.to_text(e) for e in CachedEnumerator(set_grammar(), max_size=9)]
    b = [E.to_text(e) for e in CachedEnumerator(set_grammar(), max_size=9)]
    assert a == b


def test_unknown_strategy():
    with pytest.raises(ValueError):
        make_stream(bool_grammar(), "random")


# ----------------------------------------------------------------- joint

def two_terminals(name):
    return Grammar(name, {"B": BOOL}, "B", {"B": [x, y, E.Not(E.Placeholder("B", BOOL))]})


def test_joint_starts_with_all_size_two_pairs():
    gs = {"g": two_terminals("g"), "h": two_terminals("h")}
    first = list(itertools.islice(enumerate_joint(["g", "h"], gs), 4))
    assert all(c.size == 2 for c in first)
    assert {(E.to_text(c["g"]), E.to_text(c["h"])) for c in first} == {
        ("x", "x"), ("x", "y"), ("y", "x"), ("y", "y")}


def test_joint_with_one_hole_is_the_cached_stream():
    g = set_grammar()
    joint = [c["h"] for c in enumerate_joint(["h"], {"h": g}, max_combined_size=7)]
    assert joint == list(CachedEnumerator(g, max_size=7))


def test_joint_without_holes_yields_the_empty_completion():
    assert list(enumerate_joint([], {})) == [Completion()]


def test_joint_of_finite_languages_terminates():
    gs = {"g": bool_grammar(), "h": bool_grammar()}
    out = list(enumerate_joint(["g", "h"], gs))
    assert len(out) == 16 * 16
    assert len({(normalize(c["g"]), normalize(c["h"])) for c in out}) == 256


@pytest.mark.parametrize("spec", sorted(BENCH.glob("*.pspec")), ids=lambda p: p.stem)
def test_joint_sizes_nondecreasing_on_corpus(spec):
    from protoforge.config import load_config
    from protoforge.sketch import parse_sketch
    sk = parse_sketch(spec.read_text())
    lc = load_config(spec.with_suffix(".cfg"), sk)
    sizes = [c.size for c in itertools.islice(enumerate_joint(sk.holes, lc.grammars), 500)]
    assert sizes and sizes == sorted(sizes)
