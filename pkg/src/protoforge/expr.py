"""Typed expression trees shared by protocols, grammars and completions.

An :class:`Expr` is an immutable node ``(op, args, val, type)``.  Leaves keep
their payload in ``val`` (a name, a literal, or for quantifiers the pair
``(bound_name, domain)``).  Every node carries its inferred type; the helper
constructors below are the only place typing rules live.

Evaluation compiles a tree once into nested closures over an environment
dict that maps names (parameters, state variables, action arguments, bound
variables) to values.
"""
from __future__ import annotations

from .errors import ArityMismatch, DSLTypeError, EvalError, MissingHole
from .values import (BOOL, INT, BoolType, FuncType, IntType,
                     SetType, format_value, value_key)

# leaf ops
VAR, PARAM, ARG, BOOLLIT, INTLIT, EMPTY, NT = "var", "param", "arg", "bool", "int", "empty", "nt"
# composite ops
SINGLE, SETLIT = "single", "setlit"
NOT, AND, OR, IMPLIES = "not", "and", "or", "implies"
EQ, NEQ, LT, LE = "eq", "neq", "lt", "le"
ADD, SUB = "add", "sub"
UNION, INTER, DIFF = "union", "inter", "diff"
MEMBER, SUBSET = "in", "subseteq"
APPLY, UPDATE = "apply", "update"
FORALL, EXISTS = "forall", "exists"
ITE, HOLE = "ite", "hole"

LEAVES = frozenset({VAR, PARAM, ARG, BOOLLIT, INTLIT, EMPTY, NT})
COMMUTATIVE = frozenset({AND, OR, UNION, INTER, EQ, NEQ, ADD})
IDEMPOTENT = frozenset({AND, OR, UNION, INTER})

INFIX = {
    AND: "/\\", OR: "\\/", IMPLIES: "=>", EQ: "=", NEQ: "/=", LT: "<", LE: "<=",
    ADD: "+", SUB: "-", UNION: "\\cup", INTER: "\\cap", DIFF: "\\",
    MEMBER: "\\in", SUBSET: "\\subseteq",
}


class Expr:
    __slots__ = ("op", "args", "val", "type", "_hash", "_size", "_text", "_fn", "_nf")

    def __init__(self, op, args=(), val=None, type=None):
        self.op = op
        self.args = tuple(args)
        self.val = val
        self.type = type
        self._hash = None
        self._size = None
        self._text = None
        self._fn = None
        self._nf = None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (hash(self) == hash(other) and self.op == other.op and self.val == other.val
                and self.type == other.type and self.args == other.args)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.op, self.val, self.args))
        return self._hash

    def __repr__(self):
        return f"Expr({to_text(self)})"

    def __str__(self):
        return to_text(self)

    @property
    def size(self) -> int:
        if self._size is None:
            self._size = _size(self)
        return self._size

    def walk(self):
        yield self
        for a in self.args:
            yield from a.walk()


def _size(e: Expr) -> int:
    if e.op in (FORALL, EXISTS):
        return 2 + e.args[0].size
    return 1 + sum(a.size for a in e.args)


def size(e: Expr) -> int:
    """Node count; a quantifier counts its own node plus its domain leaf."""
    return e.size


# ------------------------------------------------------------ constructors

def _expect(cond, msg):
    if not cond:
        raise DSLTypeError(msg)


def Var(name, t):
    return Expr(VAR, (), name, t)


def Param(name, t):
    return Expr(PARAM, (), name, t)


def Arg(name, t):
    return Expr(ARG, (), name, t)


def Placeholder(nt_name, t):
    return Expr(NT, (), nt_name, t)


def BoolLit(b: bool):
    return Expr(BOOLLIT, (), bool(b), BOOL)


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def IntLit(n: int):
    return Expr(INTLIT, (), int(n), INT)


def EmptySet(elem_type):
    return Expr(EMPTY, (), None, SetType(elem_type))


def Singleton(e):
    return Expr(SINGLE, (e,), None, SetType(e.type))


def SetLit(items):
    items = tuple(items)
    _expect(items, "set literal needs at least one element")
    t = items[0].type
    _expect(all(i.type == t for i in items), "set literal elements differ in type")
    return Expr(SETLIT, items, None, SetType(t))


def _bool_args(*es):
    for e in es:
        _expect(isinstance(e.type, BoolType), f"expected Bool, got {e.type} in {to_text(e)}")


def Not(a):
    _bool_args(a)
    return Expr(NOT, (a,), None, BOOL)


def And(a, b):
    _bool_args(a, b)
    return Expr(AND, (a, b), None, BOOL)


def Or(a, b):
    _bool_args(a, b)
    return Expr(OR, (a, b), None, BOOL)


def Implies(a, b):
    _bool_args(a, b)
    return Expr(IMPLIES, (a, b), None, BOOL)


def Eq(a, b):
    _expect(a.type == b.type, f"= compares {a.type} with {b.type}")
    return Expr(EQ, (a, b), None, BOOL)


def Neq(a, b):
    _expect(a.type == b.type, f"/= compares {a.type} with {b.type}")
    return Expr(NEQ, (a, b), None, BOOL)


def _int_args(a, b, op):
    _expect(isinstance(a.type, IntType) and isinstance(b.type, IntType),
            f"{op} needs Int operands, got {a.type} and {b.type}")


def Lt(a, b):
    _int_args(a, b, "<")
    return Expr(LT, (a, b), None, BOOL)


def Le(a, b):
    _int_args(a, b, "<=")
    return Expr(LE, (a, b), None, BOOL)


def Add(a, b):
    _int_args(a, b, "+")
    return Expr(ADD, (a, b), None, INT)


def Sub(a, b):
    _int_args(a, b, "-")
    return Expr(SUB, (a, b), None, INT)


def _set_op(op, a, b):
    _expect(isinstance(a.type, SetType) and a.type == b.type,
            f"{INFIX[op]} needs two sets of one type, got {a.type} and {b.type}")
    return Expr(op, (a, b), None, a.type)


def Union(a, b):
    return _set_op(UNION, a, b)


def Inter(a, b):
    return _set_op(INTER, a, b)


def Diff(a, b):
    return _set_op(DIFF, a, b)


def Member(x, s):
    _expect(isinstance(s.type, SetType) and s.type.elem == x.type,
            f"\\in: {x.type} is not the element type of {s.type}")
    return Expr(MEMBER, (x, s), None, BOOL)


def Subset(a, b):
    _expect(isinstance(a.type, SetType) and a.type == b.type,
            f"\\subseteq needs two sets of one type, got {a.type} and {b.type}")
    return Expr(SUBSET, (a, b), None, BOOL)


def Apply(f, k):
    _expect(isinstance(f.type, FuncType), f"cannot index a {f.type}")
    _expect(f.type.key == k.type, f"index of type {k.type}, function expects {f.type.key}")
    return Expr(APPLY, (f, k), None, f.type.val)


def FuncUpdate(f, k, v):
    _expect(isinstance(f.type, FuncType), f"cannot update a {f.type}")
    _expect(f.type.key == k.type and f.type.val == v.type, "ill-typed function update")
    return Expr(UPDATE, (f, k, v), None, f.type)


def Forall(var, domain, body):
    _bool_args(body)
    return Expr(FORALL, (body,), (var, domain), BOOL)


def Exists(var, domain, body):
    _bool_args(body)
    return Expr(EXISTS, (body,), (var, domain), BOOL)


def Ite(c, a, b):
    _bool_args(c)
    _expect(a.type == b.type, f"if-branches differ: {a.type} vs {b.type}")
    return Expr(ITE, (c, a, b), None, a.type)


def HoleCall(name, args, out_type):
    return Expr(HOLE, tuple(args), name, out_type)


_BUILDERS = {
    NOT: Not, AND: And, OR: Or, IMPLIES: Implies, EQ: Eq, NEQ: Neq, LT: Lt, LE: Le,
    ADD: Add, SUB: Sub, UNION: Union, INTER: Inter, DIFF: Diff, MEMBER: Member,
    SUBSET: Subset, APPLY: Apply, UPDATE: FuncUpdate, ITE: Ite,
}


def rebuild(e: Expr, args) -> Expr:
    """Same node with new children; result is re-typed where types can change."""
    args = tuple(args)
    if args == e.args:
        return e
    if e.op in _BUILDERS:
        return _BUILDERS[e.op](*args)
    if e.op == SINGLE:
        return Singleton(args[0])
    if e.op == SETLIT:
        return SetLit(args)
    if e.op == FORALL:
        return Forall(e.val[0], e.val[1], args[0])
    if e.op == EXISTS:
        return Exists(e.val[0], e.val[1], args[0])
    return Expr(e.op, args, e.val, e.type)


# ------------------------------------------------------------- inspection

def holes_in(e: Expr) -> list:
    return [n for n in e.walk() if n.op == HOLE]


def free_names(e: Expr, bound=frozenset()) -> set:
    """Names of state variables and arguments referenced but not bound."""
    out = set()
    if e.op in (VAR, ARG) and e.val not in bound:
        out.add(e.val)
    elif e.op in (FORALL, EXISTS):
        return free_names(e.args[0], bound | {e.val[0]})
    for a in e.args:
        out |= free_names(a, bound)
    return out


def var_refs(e: Expr) -> set:
    return {n.val for n in e.walk() if n.op == VAR}


# ---------------------------------------------------------- substitution

def substitute_holes(e: Expr, completion, holes: dict | None = None) -> Expr:
    """Replace every hole call by its completion body.

    ``holes`` maps hole name to its declared formal argument names; when
    given, the call's actual arguments are bound to the formals.  Formals and
    actuals coincide for holes parsed from the DSL, so the common case is a
    plain graft.
    """
    if e.op == HOLE:
        if e.val not in completion:
            raise MissingHole(f"no expression for hole {e.val}")
        body = completion[e.val]
        if holes is not None:
            formals = holes[e.val]
            if len(formals) != len(e.args):
                raise ArityMismatch(f"hole {e.val} takes {len(formals)} arguments, got {len(e.args)}")
            mapping = {f: a for f, a in zip(formals, e.args) if not (a.op in (VAR, PARAM, ARG) and a.val == f)}
            if mapping:
                body = rename(body, mapping)
        return body
    if not e.args:
        return e
    return rebuild(e, [substitute_holes(a, completion, holes) for a in e.args])


def rename(e: Expr, mapping: dict, bound=frozenset()) -> Expr:
    """Replace free VAR/ARG/PARAM leaves named in ``mapping`` by expressions."""
    if e.op in (VAR, ARG, PARAM) and e.val in mapping and e.val not in bound:
        return mapping[e.val]
    if e.op in (FORALL, EXISTS):
        return rebuild(e, [rename(e.args[0], mapping, bound | {e.val[0]})])
    if not e.args:
        return e
    return rebuild(e, [rename(a, mapping, bound) for a in e.args])


def replace_placeholders(template: Expr, children) -> Expr:
    """Fill NT placeholders of a grammar template left to right."""
    it = iter(children)

    def go(t):
        if t.op == NT:
            return next(it)
        if not t.args:
            return t
        return Expr(t.op, tuple(go(a) for a in t.args), t.val, t.type)

    return go(template)


def placeholders(e: Expr) -> list:
    return [n for n in e.walk() if n.op == NT]


# ------------------------------------------------------------- evaluation

def compile_expr(e: Expr):
    """Closure ``env -> value``; memoized on the node."""
    if e._fn is None:
        e._fn = _compile(e)
    return e._fn


def evaluate(e: Expr, env: dict):
    return compile_expr(e)(env)


def eval_expr(e: Expr, state, inst, args=None):
    """Evaluate at a state of an instance with the given argument binding."""
    env = dict(inst.env())
    env.update(state.items() if hasattr(state, "items") else state)
    if args:
        env.update(args)
    return evaluate(e, env)


def _lookup(name):
    def f(env):
        try:
            return env[name]
        except KeyError:
            raise EvalError(f"unbound name {name}") from None
    return f


def _compile(e: Expr):
    op = e.op
    if op in (VAR, PARAM, ARG):
        return _lookup(e.val)
    if op in (BOOLLIT, INTLIT):
        v = e.val
        return lambda env: v
    if op == EMPTY:
        empty = frozenset()
        return lambda env: empty
    if op == HOLE:
        raise EvalError(f"cannot evaluate hole {e.val}")
    if op == NT:
        raise EvalError(f"cannot evaluate grammar placeholder {e.val}")
    fs = [compile_expr(a) for a in e.args]
    if op == NOT:
        a, = fs
        return lambda env: not a(env)
    if op == AND:
        a, b = fs
        return lambda env: a(env) and b(env)
    if op == OR:
        a, b = fs
        return lambda env: a(env) or b(env)
    if op == IMPLIES:
        a, b = fs
        return lambda env: (not a(env)) or b(env)
    if op == ITE:
        c, a, b = fs
        return lambda env: a(env) if c(env) else b(env)
    if op == SINGLE:
        a, = fs
        return lambda env: frozenset((a(env),))
    if op == SETLIT:
        return lambda env: frozenset(f(env) for f in fs)
    if op in (FORALL, EXISTS):
        name, dom = e.val
        body, = fs
        want = op == EXISTS

        def quant(env):
            try:
                elems = env[dom]
            except KeyError:
                raise EvalError(f"unbound domain {dom}") from None
            saved = env.get(name, _MISSING)
            try:
                for x in elems:
                    env[name] = x
                    if bool(body(env)) == want:
                        return want
                return not want
            finally:
                if saved is _MISSING:
                    env.pop(name, None)
                else:
                    env[name] = saved
        return quant
    if op == APPLY:
        f, k = fs

        def apply(env):
            fn = f(env)
            key = k(env)
            try:
                return fn[key]
            except KeyError:
                raise EvalError(f"key {format_value(key)} outside function domain in {to_text(e)}") from None
        return apply
    if op == UPDATE:
        f, k, v = fs

        def update(env):
            fn = f(env)
            key = k(env)
            if key not in fn:
                raise EvalError(f"key {format_value(key)} outside function domain in {to_text(e)}")
            return fn.update(key, v(env))
        return update
    a, b = fs
    if op == EQ:
        return lambda env: a(env) == b(env)
    if op == NEQ:
        return lambda env: a(env) != b(env)
    if op == LT:
        return lambda env: a(env) < b(env)
    if op == LE:
        return lambda env: a(env) <= b(env)
    if op == ADD:
        return lambda env: a(env) + b(env)
    if op == SUB:
        return lambda env: a(env) - b(env)
    if op == UNION:
        return lambda env: a(env) | b(env)
    if op == INTER:
        return lambda env: a(env) & b(env)
    if op == DIFF:
        return lambda env: a(env) - b(env)
    if op == MEMBER:
        return lambda env: a(env) in b(env)
    if op == SUBSET:
        return lambda env: a(env) <= b(env)
    raise EvalError(f"unknown operator {op}")


_MISSING = object()


# ---------------------------------------------------------- serialization

def inferable(e: Expr) -> bool:
    """Whether a parser can infer this node's type without outside context."""
    op = e.op
    if op == EMPTY:
        return False
    if op in (UNION, INTER, DIFF):
        return inferable(e.args[0]) or inferable(e.args[1])
    if op in (SINGLE, SETLIT):
        return any(inferable(a) for a in e.args)
    if op == ITE:
        return inferable(e.args[1]) or inferable(e.args[2])
    return True


def to_text(e: Expr, anchored: bool = False) -> str:
    """Canonical fully parenthesized text; parses back to an equal tree.

    ``anchored`` says the surrounding context fixes this node's type, so an
    empty set may print as a bare ``{}``.
    """
    if not anchored and e._text is not None:
        return e._text
    s = _text(e, anchored)
    if not anchored:
        e._text = s
    return s


def _pair(a: Expr, b: Expr, anchored: bool):
    la = anchored or inferable(b)
    ra = anchored or inferable(a) or not la
    return to_text(a, la), to_text(b, ra)


def _text(e: Expr, anchored: bool) -> str:
    op = e.op
    if op in (VAR, PARAM, ARG):
        return e.val
    if op == NT:
        return e.val
    if op == BOOLLIT:
        return "TRUE" if e.val else "FALSE"
    if op == INTLIT:
        return str(e.val)
    if op == EMPTY:
        return "{}" if anchored else "{:" + str(e.type.elem) + "}"
    if op == HOLE:
        return "?" + e.val + "(" + ", ".join(to_text(a) for a in e.args) + ")"
    if op == NOT:
        return "~" + _atomic(e.args[0])
    if op == SINGLE:
        inner_anchor = anchored
        return "{" + to_text(e.args[0], inner_anchor) + "}"
    if op == SETLIT:
        anchor = anchored or any(inferable(a) for a in e.args)
        return "{" + ", ".join(to_text(a, anchor) for a in e.args) + "}"
    if op == APPLY:
        return _atomic(e.args[0]) + "[" + to_text(e.args[1]) + "]"
    if op == UPDATE:
        return ("(" + to_text(e.args[0]) + " with [" + to_text(e.args[1], True) + " := "
                + to_text(e.args[2], True) + "])")
    if op in (FORALL, EXISTS):
        q = "\\A" if op == FORALL else "\\E"
        name, dom = e.val
        return f"({q} {name} \\in {dom} : {to_text(e.args[0])})"
    if op == ITE:
        a, b = _pair(e.args[1], e.args[2], anchored)
        return f"(if {to_text(e.args[0])} then {a} else {b})"
    if op == MEMBER:
        x, s = e.args
        xs = to_text(x, inferable(s))
        ss = to_text(s, True)
        return f"({xs} \\in {ss})"
    if op in (UNION, INTER, DIFF, EQ, NEQ, SUBSET):
        a, b = _pair(e.args[0], e.args[1], anchored if op in (UNION, INTER, DIFF) else False)
        if op in (EQ, NEQ):
            # '~' binds looser than '=', so a negated operand needs its own parens
            a, b = (f"({t})" if x.op == NOT else t for t, x in ((a, e.args[0]), (b, e.args[1])))
        return f"({a} {INFIX[op]} {b})"
    a, b = e.args
    return f"({to_text(a)} {INFIX[op]} {to_text(b)})"


def _atomic(e: Expr) -> str:
    s = to_text(e)
    if e.op in (VAR, PARAM, ARG, BOOLLIT, INTLIT, NT) or s.startswith("(") or s.startswith("{"):
        return s
    if s.startswith("~") or e.op in (APPLY, HOLE):
        return s
    return "(" + s + ")"


def format_binding(values: dict) -> str:
    return ", ".join(f"{k}={format_value(v)}" for k, v in values.items())


def value_sort(vals):
    return sorted(vals, key=value_key)
