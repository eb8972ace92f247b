"""Canonical normal forms used to deduplicate enumerated expressions.

``normalize(e)`` returns a string key.  Two expressions with the same key
are semantically equal in every state of every instance; the converse holds
for Boolean combinations of atoms and for set algebra over base sets.

Bool and set expressions are lowered to a propositional formula over opaque
atoms and keyed by their truth table restricted to the atoms they actually
depend on.  A set expression denotes the membership predicate of a generic
element, so ``A \\cup B`` becomes ``A or B`` and a Domain parameter is the
constant true.  A set (in)equality or inclusion becomes an emptiness atom
keyed by the normal form of the symmetric difference (resp. ``A \\ B``).
Integer terms are linear forms.  Everything else is keyed structurally over
the normal forms of its children.
"""
from __future__ import annotations

from math import gcd

from . import expr as E
from .values import BoolType, DomainType, IntType, SetType

MAX_ATOMS = 16

# lowered propositional formulas: ("c", bool) | ("a", key) | ("not", f) | ("and", f, g) | ("or", f, g)
TRUE_F = ("c", True)
FALSE_F = ("c", False)


def normalize(e: E.Expr) -> str:
    if e._nf is None:
        e._nf = _normalize(e)
    return e._nf


def _normalize(e):
    t = e.type
    if isinstance(t, BoolType):
        return "B" + _table_key(_lower_bool(e))
    if isinstance(t, SetType):
        return "S" + _table_key(_lower_set(e))
    if isinstance(t, IntType):
        return "I" + _lin_key(_linear(e))
    return _struct(e)


# ------------------------------------------------------------- structure

def _leaf_key(e):
    if e.op == E.VAR:
        return "v:" + e.val
    if e.op == E.ARG:
        return "a:" + e.val
    if e.op == E.PARAM:
        return "p:" + e.val
    return None


def _struct(e):
    k = _leaf_key(e)
    if k is not None:
        return k
    if e.op == E.BOOLLIT:
        return "T" if e.val else "F"
    if e.op == E.INTLIT:
        return str(e.val)
    if e.op == E.EMPTY:
        return "{}"
    kids = [normalize(a) for a in e.args]
    if e.op in E.COMMUTATIVE:
        kids.sort()
    val = "" if e.val is None else repr(e.val)
    return f"{e.op}{val}(" + ",".join(kids) + ")"


# -------------------------------------------------------------- lowering

def _not(f):
    if f[0] == "c":
        return ("c", not f[1])
    if f[0] == "not":
        return f[1]
    return ("not", f)


def _and(f, g):
    if f == FALSE_F or g == FALSE_F:
        return FALSE_F
    if f == TRUE_F:
        return g
    if g == TRUE_F:
        return f
    return ("and", f, g)


def _or(f, g):
    if f == TRUE_F or g == TRUE_F:
        return TRUE_F
    if f == FALSE_F:
        return g
    if g == FALSE_F:
        return f
    return ("or", f, g)


def _iff(f, g):
    return _or(_and(f, g), _and(_not(f), _not(g)))


def _lower_bool(e):
    op = e.op
    if op == E.BOOLLIT:
        return ("c", e.val)
    k = _leaf_key(e)
    if k is not None:
        return ("a", k)
    if op == E.NOT:
        return _not(_lower_bool(e.args[0]))
    if op == E.AND:
        return _and(_lower_bool(e.args[0]), _lower_bool(e.args[1]))
    if op == E.OR:
        return _or(_lower_bool(e.args[0]), _lower_bool(e.args[1]))
    if op == E.IMPLIES:
        return _or(_not(_lower_bool(e.args[0])), _lower_bool(e.args[1]))
    if op == E.ITE:
        c = _lower_bool(e.args[0])
        return _or(_and(c, _lower_bool(e.args[1])), _and(_not(c), _lower_bool(e.args[2])))
    if op in (E.EQ, E.NEQ):
        f = _lower_eq(e.args[0], e.args[1])
        return f if op == E.EQ else _not(f)
    if op == E.SUBSET:
        a, b = e.args
        return _empty_atom(_and(_lower_set(a), _not(_lower_set(b))))
    if op == E.MEMBER:
        return _member(normalize(e.args[0]), _lower_set(e.args[1]))
    if op in (E.LT, E.LE):
        a, b = e.args
        d = _lin_sub(_linear(b), _linear(a))
        # a < b  <=>  b - a >= 1 ;  a <= b  <=>  b - a >= 0
        return _geq(d, 1 if op == E.LT else 0)
    return ("a", "x:" + _struct(e))


def _lower_eq(a, b):
    t = a.type
    if isinstance(t, BoolType):
        return _iff(_lower_bool(a), _lower_bool(b))
    if isinstance(t, SetType):
        fa, fb = _lower_set(a), _lower_set(b)
        return _empty_atom(_or(_and(fa, _not(fb)), _and(fb, _not(fa))))
    if isinstance(t, IntType):
        return _lin_zero(_lin_sub(_linear(a), _linear(b)))
    ka, kb = normalize(a), normalize(b)
    if ka == kb:
        return TRUE_F
    ka, kb = sorted((ka, kb))
    if isinstance(t, DomainType):
        return ("a", f"e:{ka}={kb}")
    return ("a", f"eq:{ka}={kb}")


def _empty_atom(f):
    """Atom for 'the set denoted by f is empty'."""
    atoms = _atoms(f)
    if len(atoms) > MAX_ATOMS:
        return ("a", "z:" + repr(f))
    tab, ess = _table(f, atoms)
    if tab == 0:
        return TRUE_F
    return ("a", "z:" + _key_of(tab, ess))


def _lower_set(e):
    op = e.op
    if op == E.EMPTY:
        return FALSE_F
    if op == E.PARAM and isinstance(e.type.elem, DomainType) and e.type.elem.name == e.val:
        return TRUE_F
    k = _leaf_key(e)
    if k is not None:
        return ("a", k)
    if op == E.SINGLE:
        return ("a", "sg:" + normalize(e.args[0]))
    if op == E.SETLIT:
        f = FALSE_F
        for x in e.args:
            f = _or(f, ("a", "sg:" + normalize(x)))
        return f
    if op == E.UNION:
        return _or(_lower_set(e.args[0]), _lower_set(e.args[1]))
    if op == E.INTER:
        return _and(_lower_set(e.args[0]), _lower_set(e.args[1]))
    if op == E.DIFF:
        return _and(_lower_set(e.args[0]), _not(_lower_set(e.args[1])))
    return ("a", "x:" + _struct(e))


def _member(xkey, f):
    """Membership of the element with key ``xkey`` in the set formula f."""
    tag = f[0]
    if tag == "c":
        return f
    if tag == "not":
        return _not(_member(xkey, f[1]))
    if tag == "and":
        return _and(_member(xkey, f[1]), _member(xkey, f[2]))
    if tag == "or":
        return _or(_member(xkey, f[1]), _member(xkey, f[2]))
    atom = f[1]
    if atom.startswith("sg:"):
        y = atom[3:]
        if y == xkey:
            return TRUE_F
        a, b = sorted((xkey, y))
        return ("a", f"e:{a}={b}")
    return ("a", f"in({xkey},{atom})")


# ---------------------------------------------------------- truth tables

def _atoms(f, out=None):
    if out is None:
        out = set()
    if f[0] == "a":
        out.add(f[1])
    elif f[0] != "c":
        for g in f[1:]:
            _atoms(g, out)
    return out


def _columns(n):
    full = (1 << (1 << n)) - 1
    cols = []
    for i in range(n):
        w = 1 << i
        cols.append(full // ((1 << w) + 1) << w)
    return full, cols


def _eval_table(f, colmap, full):
    tag = f[0]
    if tag == "c":
        return full if f[1] else 0
    if tag == "a":
        return colmap.get(f[1], 0)
    if tag == "not":
        return full & ~_eval_table(f[1], colmap, full)
    a = _eval_table(f[1], colmap, full)
    b = _eval_table(f[2], colmap, full)
    return a & b if tag == "and" else a | b


def _table(f, atoms):
    """(table, essential atoms) with the table over the essential atoms only."""
    atoms = sorted(atoms)
    full, cols = _columns(len(atoms))
    tab = _eval_table(f, dict(zip(atoms, cols)), full)
    ess = []
    for i, a in enumerate(atoms):
        w = 1 << i
        if ((tab & cols[i]) >> w) != (tab & ~cols[i] & full):
            ess.append(a)
    if len(ess) != len(atoms):
        full, cols = _columns(len(ess))
        tab = _eval_table(f, dict(zip(ess, cols)), full)
    return tab, ess


def _key_of(tab, ess):
    return "[" + ",".join(ess) + "]#" + format(tab, "x")


def _table_key(f):
    atoms = _atoms(f)
    if len(atoms) > MAX_ATOMS:
        return "~" + repr(f)
    return _key_of(*_table(f, atoms))


# ---------------------------------------------------------------- integers

def _linear(e):
    """(coefficients as {atom: int}, constant)."""
    op = e.op
    if op == E.INTLIT:
        return {}, e.val
    k = _leaf_key(e)
    if k is not None:
        return {k: 1}, 0
    if op == E.ADD:
        (ca, ka), (cb, kb) = _linear(e.args[0]), _linear(e.args[1])
        return _lin_add(ca, cb, 1), ka + kb
    if op == E.SUB:
        return _lin_sub(_linear(e.args[0]), _linear(e.args[1]))
    return {"x:" + _struct(e): 1}, 0


def _lin_add(ca, cb, sign):
    out = dict(ca)
    for k, v in cb.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v}


def _lin_sub(a, b):
    return _lin_add(a[0], b[0], -1), a[1] - b[1]


def _lin_key(lin):
    coefs, const = lin
    return "L[" + ",".join(f"{v}*{k}" for k, v in sorted(coefs.items())) + f"]{const:+d}"


def _lin_zero(lin):
    coefs, const = lin
    if not coefs:
        return ("c", const == 0)
    g = 0
    for v in coefs.values():
        g = gcd(g, v)
    if const % g:
        return FALSE_F
    first = coefs[min(coefs)]
    s = g if first > 0 else -g
    return ("a", "i=:" + _lin_key(({k: v // s for k, v in coefs.items()}, const // s)))


def _geq(lin, k):
    """Atom for  lin >= k  (lin's own constant folded in)."""
    coefs, const = lin
    bound = k - const
    if not coefs:
        return ("c", bound <= 0)
    g = 0
    for v in coefs.values():
        g = gcd(g, v)
    bound = -((-bound) // g)    # ceil(bound / g)
    return ("a", "i>=:" + _lin_key(({a: v // g for a, v in coefs.items()}, 0)) + f">={bound}")
