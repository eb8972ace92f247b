import itertools

import pytest
from hypothesis import given, strategies as st

from protoforge.errors import UnboundedType
from protoforge.values import (BOOL, INT, DomainType, Elem, FuncType, FuncV, InstanceBinding, SetType,
                               State, format_value, type_check, universe, value_key)

NODE = DomainType("Node")
INST = InstanceBinding.make({"Node": ["n1", "n2", "n3"]})
N1, N2, N3 = INST.elements("Node")


def test_type_check_examples():
    assert type_check(True, BOOL, INST)
    small = InstanceBinding.make({"Node": ["n1", "n2"]})
    assert type_check(frozenset({small.elements("Node")[0]}), SetType(NODE), small)
    assert not type_check(3, NODE, INST)
    assert not type_check(True, INT, INST)        # bools are not ints here
    assert type_check(-4, INT, INST)


def test_universe_examples():
    assert universe(NODE, INST) == [N1, N2, N3]
    assert universe(BOOL, INST) == [False, True]
    small = InstanceBinding.make({"Node": ["n1", "n2"]})
    a, b = small.elements("Node")
    assert universe(SetType(NODE), small) == [frozenset(), frozenset({a}), frozenset({b}), frozenset({a, b})]


def test_universe_int_needs_bounds():
    with pytest.raises(UnboundedType):
        universe(INT, INST)
    assert universe(INT, INST, (-1, 2)) == [-1, 0, 1, 2]


def _count(t, inst, bounds=(0, 2)):
    """Independent counting oracle for universe sizes."""
    if t == BOOL:
        return 2
    if t == INT:
        return bounds[1] - bounds[0] + 1
    if isinstance(t, DomainType):
        return inst.domain_size(t.name)
    if isinstance(t, SetType):
        return 2 ** _count(t.elem, inst, bounds)
    return _count(t.val, inst, bounds) ** _count(t.key, inst, bounds)


@pytest.mark.parametrize("t", [
    BOOL, NODE, SetType(NODE), SetType(BOOL), FuncType(NODE, BOOL), FuncType(BOOL, SetType(NODE)),
    FuncType(NODE, SetType(NODE)), SetType(SetType(BOOL)), FuncType(INT, BOOL),
])
def test_universe_sizes_match_counting_oracle(t):
    inst = InstanceBinding.make({"Node": ["n1", "n2"]})
    u = universe(t, inst, (0, 2))
    assert len(u) == _count(t, inst)
    assert len(set(u)) == len(u)
    assert all(type_check(v, t, inst, ) for v in u)
    assert u == universe(t, inst, (0, 2))        # deterministic order


def test_instance_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        InstanceBinding.make({"Node": ["n1", "n1"]})


def test_elements_are_opaque_and_compare_by_identity():
    assert N1 == Elem("Node", "n1")
    assert N1 != Elem("Other", "n1")
    assert format_value(frozenset({N2, N1})) == "{n1, n2}"


def test_funcv_update_is_pure():
    f = FuncV({N1: frozenset(), N2: frozenset()})
    g = f.update(N1, frozenset({N2}))
    assert f[N1] == frozenset() and g[N1] == frozenset({N2})
    assert g != f and hash(g) == hash(FuncV({N2: frozenset(), N1: frozenset({N2})}))


def test_state_equality_and_hash():
    s = State(("x", "y"), (True, frozenset()))
    t = State.from_dict(("x", "y"), {"y": frozenset(), "x": True})
    assert s == t and hash(s) == hash(t)
    assert dict(s.items()) == {"x": True, "y": frozenset()}


elems = st.sampled_from([N1, N2, N3])
# values of one type at a time: well-typed expressions never compare across types
typed_values = st.sampled_from([
    st.booleans(), st.integers(-3, 3), elems, st.frozensets(elems, max_size=3),
    st.frozensets(st.frozensets(elems, max_size=2), max_size=3),
]).flatmap(lambda s: st.tuples(s, s, s))


@given(st.lists(elems, max_size=4), st.randoms())
def test_set_equality_is_order_insensitive(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert frozenset(xs) == frozenset(ys)
    assert format_value(frozenset(xs)) == format_value(frozenset(ys))


@given(typed_values)
def test_structural_equality_is_an_equivalence(abc):
    a, b, c = abc
    assert a == a
    assert (a == b) == (b == a)
    if a == b and b == c:
        assert a == c
    if a == b:
        assert value_key(a) == value_key(b)


def test_value_key_is_total_on_universe():
    inst = InstanceBinding.make({"Node": ["n1", "n2"]})
    u = universe(SetType(NODE), inst) + universe(NODE, inst) + [False, True, 0, 1]
    keys = [value_key(v) for v in u]
    assert len(set(keys)) == len(u)
    for a, b in itertools.combinations(u, 2):
        assert (value_key(a) == value_key(b)) == (a == b and type(a) is type(b))
