"""How much equivalence reduction and short-circuiting save.

    python demos/enumeration_reduction.py
"""
from collections import Counter

from protoforge import expr as E
from protoforge.enumerate import CachedEnumerator, Grammar
from protoforge.values import BOOL, DomainType, SetType

x, y = E.Var("x", BOOL), E.Var("y", BOOL)
B = E.Placeholder("B", BOOL)
bools = Grammar("bools", {"B": BOOL}, "B", {"B": [x, y, E.Not(B), E.And(B, B)]})

en = CachedEnumerator(bools)
classes = list(en)
print(f"B ::= x | y | ~B | B /\\ B with reduction: {len(classes)} expressions, exhausted={en.exhausted}")
for e in classes:
    print(f"  size {e.size}: {E.to_text(e)}")
raw = Counter(e.size for e in CachedEnumerator(bools, reduce=False, max_size=10))
print("without reduction, expressions per size:", [raw[s] for s in range(1, 11)])

node = DomainType("Node")
S = SetType(node)
P = E.Placeholder("E", S)
sets = Grammar("sets", {"E": S}, "E", {"E": [E.EmptySet(node), E.Singleton(E.Arg("n", node)),
                                            E.Var("vote_yes", S), E.Union(P, P), E.Inter(P, P),
                                            E.Diff(P, P)]})
print("\nset grammar up to size 9:")
for reduce, sc in ((False, False), (False, True), (True, False), (True, True)):
    en = CachedEnumerator(sets, reduce=reduce, shortcircuit=sc, max_size=9)
    n = sum(1 for _ in en)
    print(f"  reduce={reduce!s:5} shortcircuit={sc!s:5}: emitted {n:6}, "
          f"built {en.stats.built:6}, commutative pairs {en.stats.pair_iterations}")
