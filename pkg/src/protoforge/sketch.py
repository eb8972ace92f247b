"""Protocols and protocol sketches: data model, DSL parser and printer.

A sketch file looks like::

    const Node : Domain
    var vote_yes : Set(Node)
    var go_commit : Set(Node)
    init vote_yes = {}
    init go_commit = {}

    fair action VoteYes(n : Node) {
      update vote_yes := ?h(vote_yes, n)
    }
    fair action GoCommit {
      require vote_yes = Node
      update go_commit := Node
    }
    invariant Safe : go_commit /= {} => vote_yes = Node
    liveness Done : TRUE ~> go_commit = Node
    option deadlock_check : false

A hole ``?h(a, ...)`` may only be a whole ``require`` line (a pre-hole) or
the whole right-hand side of an ``update`` (a post-hole).  Variables with no
``update`` line keep their value.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from . import expr as E
from .errors import (DSLTypeError, HoleMisuse, MissingHole, ParseError, UnresolvedName,
                     ValidationError)
from .syntax import Parser, Scope, elaborate, tokenize
from .values import BOOL, DomainType, SetType

DOMAIN = "Domain"


@dataclass(frozen=True)
class Hole:
    name: str
    args: tuple            # ((name, TypeExpr), ...)
    output_type: object
    kind: str              # "pre" | "post"
    action: str
    var: str | None = None     # updated variable, for post-holes
    arg_exprs: tuple = field(default=(), compare=False, repr=False)
    grammar: str | None = None

    @property
    def arg_names(self):
        return tuple(a for a, _ in self.args)


@dataclass(frozen=True)
class Action:
    name: str
    args: tuple            # ((name, domain), ...)
    pre: tuple             # (Expr, ...)
    post: tuple            # ((var, Expr), ...)
    fair: bool = False

    def pre_holes(self):
        return [p.val for p in self.pre if p.op == E.HOLE]

    def post_holes(self):
        return [rhs.val for _, rhs in self.post if rhs.op == E.HOLE]

    def holes(self):
        return self.pre_holes() + self.post_holes()


@dataclass(frozen=True)
class Invariant:
    name: str
    pred: object


@dataclass(frozen=True)
class LeadsTo:
    name: str
    p: object
    q: object


@dataclass(frozen=True)
class Sketch:
    params: tuple              # ((name, DOMAIN | TypeExpr), ...)
    vars: tuple                # ((name, TypeExpr), ...)
    init: tuple                # (Expr, ...)
    actions: tuple             # (Action, ...)
    properties: tuple = ()     # (Invariant | LeadsTo, ...)
    check_deadlock: bool = False
    holes: tuple = ()          # (Hole, ...)

    @property
    def var_names(self):
        return tuple(n for n, _ in self.vars)

    @property
    def domains(self):
        return tuple(n for n, k in self.params if k == DOMAIN)

    @property
    def invariants(self):
        return [p for p in self.properties if isinstance(p, Invariant)]

    @property
    def temporal(self):
        return [p for p in self.properties if isinstance(p, LeadsTo)]

    def var_type(self, name):
        return dict(self.vars)[name]

    def hole(self, name) -> Hole:
        for h in self.holes:
            if h.name == name:
                return h
        raise MissingHole(f"no hole named {name}")

    def action(self, name) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def scope(self, action: Action | None = None) -> Scope:
        names = {}
        for n, k in self.params:
            names[n] = E.Param(n, SetType(DomainType(n)) if k == DOMAIN else k)
        for n, t in self.vars:
            names[n] = E.Var(n, t)
        if action is not None:
            for n, d in action.args:
                names[n] = E.Arg(n, DomainType(d))
        return Scope(names, frozenset(self.domains))

    def is_complete(self) -> bool:
        return not self.holes


Protocol = Sketch


# ----------------------------------------------------------------- parsing

def parse_sketch(text: str) -> Sketch:
    return _SketchParser(text).parse()


class _SketchParser:
    def __init__(self, text):
        self.p = Parser(tokenize(text))
        self.params = []
        self.vars = []
        self.init = []
        self.actions = []
        self.props = []
        self.holes = []
        self.deadlock = False
        self.names = {}      # top-level name -> (line, col) of its declaration

    def declare(self, tok, what):
        if tok.text in self.names:
            raise ValidationError(f"{tok.line}:{tok.col}: {what} {tok.text!r} is already declared")
        self.names[tok.text] = (tok.line, tok.col)

    def scope(self, action_args=()):
        sk = Sketch(tuple(self.params), tuple(self.vars), (), ())
        base = sk.scope()
        for n, d in action_args:
            base = base.bind(n, E.Arg(n, DomainType(d)))
        return base

    def parse(self) -> Sketch:
        p = self.p
        while p.tok.kind != "eof":
            t = p.tok
            if p.at("const"):
                self.parse_const()
            elif p.at("var"):
                self.parse_var()
            elif p.at("init"):
                p.advance()
                raw = p.parse_expr()
                self.init.append(self.closed_bool(raw, "init"))
            elif p.at("fair", "action"):
                self.parse_action()
            elif p.at("invariant"):
                p.advance()
                name = p.ident()
                self.declare(name, "property")
                p.expect(":")
                self.props.append(Invariant(name.text, self.closed_bool(p.parse_expr(), "an invariant")))
            elif p.at("liveness"):
                p.advance()
                name = p.ident()
                self.declare(name, "property")
                p.expect(":")
                lhs = self.closed_bool(p.parse_expr(), "a liveness property")
                p.expect("~>")
                rhs = self.closed_bool(p.parse_expr(), "a liveness property")
                self.props.append(LeadsTo(name.text, lhs, rhs))
            elif p.at("option"):
                p.advance()
                key = p.ident()
                p.expect(":")
                val = p.advance()
                if key.text != "deadlock_check":
                    raise ParseError(f"unknown option {key.text!r}", key.line, key.col)
                if val.text.lower() not in ("true", "false"):
                    raise ParseError("deadlock_check takes true or false", val.line, val.col)
                self.deadlock = val.text.lower() == "true"
            else:
                p.error(f"unexpected {t.text!r} at top level")
        if not self.actions:
            raise ValidationError("a protocol needs at least one action")
        return Sketch(tuple(self.params), tuple(self.vars), tuple(self.init),
                      tuple(self.actions), tuple(self.props), self.deadlock, tuple(self.holes))

    def parse_const(self):
        p = self.p
        p.advance()
        name = p.ident()
        self.declare(name, "name")
        p.expect(":")
        if p.at("Domain"):
            p.advance()
            self.params.append((name.text, DOMAIN))
        else:
            t = p.parse_type()
            self.check_type(t, name)
            self.params.append((name.text, t))

    def parse_var(self):
        p = self.p
        p.advance()
        name = p.ident()
        self.declare(name, "name")
        p.expect(":")
        t = p.parse_type()
        self.check_type(t, name)
        self.vars.append((name.text, t))

    def check_type(self, t, tok):
        from .values import FuncType
        if isinstance(t, DomainType):
            if t.name not in dict(self.params) or dict(self.params)[t.name] != DOMAIN:
                raise UnresolvedName(f"{t.name!r} is not a declared Domain", tok.line, tok.col)
        elif isinstance(t, SetType):
            self.check_type(t.elem, tok)
        elif isinstance(t, FuncType):
            from .values import is_enumerable_key
            if not is_enumerable_key(t.key):
                raise DSLTypeError(f"function keys must be Bool, Int or a Domain, not {t.key}",
                                   tok.line, tok.col)
            self.check_type(t.key, tok)
            self.check_type(t.val, tok)

    def closed_bool(self, raw, where):
        if raw[0] == "hole":
            raise HoleMisuse(f"holes may not appear in {where}", *raw[1])
        return elaborate(raw, self.scope(), BOOL)

    def parse_action(self):
        p = self.p
        fair = False
        if p.at("fair"):
            p.advance()
            fair = True
        p.expect("action")
        name = p.ident()
        self.declare(name, "action")
        args = []
        if p.at("("):
            p.advance()
            while not p.at(")"):
                a = p.ident()
                p.expect(":")
                d = p.ident()
                if dict(self.params).get(d.text) != DOMAIN:
                    raise ValidationError(f"{d.line}:{d.col}: argument {a.text} must range over a Domain parameter")
                if a.text in self.names or a.text in dict(args):
                    raise ValidationError(f"{a.line}:{a.col}: argument name {a.text!r} clashes")
                args.append((a.text, d.text))
                if not p.at(")"):
                    p.expect(",")
            p.expect(")")
        scope = self.scope(args)
        p.expect("{")
        pre, post = [], []
        while not p.at("}"):
            if p.at("require"):
                p.advance()
                raw = p.parse_expr()
                if raw[0] == "hole":
                    pre.append(self.make_hole(raw, scope, BOOL, "pre", name.text, None))
                else:
                    pre.append(elaborate(raw, scope, BOOL))
            elif p.at("update"):
                p.advance()
                v = p.ident()
                vt = dict(self.vars).get(v.text)
                if vt is None:
                    raise UnresolvedName(f"{v.text!r} is not a state variable", v.line, v.col)
                if v.text in dict(post):
                    raise ValidationError(f"{v.line}:{v.col}: {v.text} is updated twice in {name.text}")
                p.expect(":=")
                raw = p.parse_expr()
                if raw[0] == "hole":
                    post.append((v.text, self.make_hole(raw, scope, vt, "post", name.text, v.text)))
                else:
                    post.append((v.text, elaborate(raw, scope, vt)))
            else:
                p.error(f"expected require, update or '}}', found {p.tok.text!r}")
        p.expect("}")
        self.actions.append(Action(name.text, tuple(args), tuple(pre), tuple(post), fair))

    def make_hole(self, raw, scope, out_type, kind, action, var):
        _, pos, hname, arg_toks = raw
        if any(h.name == hname for h in self.holes):
            raise HoleMisuse(f"hole ?{hname} appears more than once", *pos)
        if hname in self.names:
            raise HoleMisuse(f"hole name {hname!r} clashes with a declaration", *pos)
        args, exprs = [], []
        for t in arg_toks:
            if t.text not in scope.names:
                raise UnresolvedName(f"unknown hole argument {t.text!r}", t.line, t.col)
            if t.text in dict(args):
                raise HoleMisuse(f"hole ?{hname} lists {t.text} twice", t.line, t.col)
            leaf = scope.names[t.text]
            args.append((t.text, leaf.type))
            exprs.append(leaf)
        self.holes.append(Hole(hname, tuple(args), out_type, kind, action, var, tuple(exprs)))
        return E.HoleCall(hname, exprs, out_type)


# -------------------------------------------------------------- completion

def check_completion_expr(sk: Sketch, hole: Hole, body) -> None:
    """Raise if ``body`` cannot fill ``hole``."""
    if body.type != hole.output_type:
        raise DSLTypeError(f"?{hole.name} expects {hole.output_type}, got {body.type} ({E.to_text(body)})")
    if any(n.op in (E.HOLE, E.NT) for n in body.walk()):
        raise ValidationError(f"completion for ?{hole.name} is not a closed expression")
    extra = E.free_names(body) - set(hole.arg_names)
    if extra:
        raise ValidationError(f"completion for ?{hole.name} uses {sorted(extra)} outside its arguments")


def apply_completion(sk: Sketch, completion, check: bool = True) -> Sketch:
    """Hole-free protocol obtained by grafting each hole's expression in place."""
    if not sk.holes:
        return sk
    for h in sk.holes:
        if h.name not in completion:
            raise MissingHole(f"no expression for hole {h.name}")
        if check:
            check_completion_expr(sk, h, completion[h.name])
    unknown = set(completion) - {h.name for h in sk.holes}
    if unknown:
        raise ValidationError(f"completion names unknown holes {sorted(unknown)}")
    actions = []
    for a in sk.actions:
        if not a.holes():
            actions.append(a)
            continue
        pre = tuple(E.substitute_holes(e, completion) for e in a.pre)
        post = tuple((v, E.substitute_holes(e, completion)) for v, e in a.post)
        actions.append(dataclasses.replace(a, pre=pre, post=post))
    return dataclasses.replace(sk, actions=tuple(actions), holes=())


# ------------------------------------------------------------ serialization

def serialize_protocol(sk: Sketch) -> str:
    """DSL text for a protocol or sketch; ``parse_sketch`` reads it back."""
    lines = []
    for n, k in sk.params:
        lines.append(f"const {n} : {k}")
    for n, t in sk.vars:
        lines.append(f"var {n} : {t}")
    for e in sk.init:
        lines.append(f"init {E.to_text(e)}")
    for a in sk.actions:
        lines.append("")
        head = ("fair " if a.fair else "") + "action " + a.name
        if a.args:
            head += "(" + ", ".join(f"{n} : {d}" for n, d in a.args) + ")"
        lines.append(head + " {")
        for e in a.pre:
            lines.append(f"  require {E.to_text(e)}")
        for v, e in a.post:
            lines.append(f"  update {v} := {E.to_text(e, True)}")
        lines.append("}")
    if sk.properties:
        lines.append("")
    for prop in sk.properties:
        if isinstance(prop, Invariant):
            lines.append(f"invariant {prop.name} : {E.to_text(prop.pred)}")
        else:
            lines.append(f"liveness {prop.name} : {E.to_text(prop.p)} ~> {E.to_text(prop.q)}")
    lines.append(f"option deadlock_check : {'true' if sk.check_deadlock else 'false'}")
    return "\n".join(lines) + "\n"


def completion_text(completion) -> str:
    """One line per hole, ``name := expr``."""
    return "\n".join(f"{h} := {E.to_text(e)}" for h, e in sorted(completion.items())) + "\n"
