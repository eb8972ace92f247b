"""Tokenizer, expression parser and type elaboration for the protocol DSL.

Parsing happens in two steps.  :class:`Parser` turns tokens into a small raw
tree of tuples; :func:`elaborate` resolves names against a :class:`Scope` and
builds typed :class:`~protoforge.expr.Expr` nodes.  Elaboration is
bidirectional so that ``{}`` can take its element type from context.

Operator precedence, loosest first::

    \\A x \\in D : e   \\E ...   if c then a else b
    =>                  (right associative)
    \\/
    /\\
    ~
    =  /=  <  <=  \\in  \\subseteq
    \\cup  \\cap  \\  +  -   (left associative)
    f[k]   f with [k := v]
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import expr as E
from .errors import DSLTypeError, HoleMisuse, ParseError, UnresolvedName
from .values import BOOL, INT, DomainType, FuncType, SetType

KEYWORDS = {
    "const", "var", "init", "action", "fair", "invariant", "liveness", "option",
    "require", "update", "TRUE", "FALSE", "if", "then", "else", "with", "Domain",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>::=|:=|~>|/\\|\\/|\\A|\\E|\\cup|\\cap|\\union|\\intersect|\\subseteq|\\in|\\|=>|/=|<=|[<=+\-~()\[\]{},:?|$@#;])
""", re.VERBOSE)

_SYNONYMS = {"\\union": "\\cup", "\\intersect": "\\cap"}


@dataclass
class Token:
    kind: str      # 'id', 'num', 'sym', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, _SYNONYMS.get(tok, tok), line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class Parser:
    """Recursive-descent parser over a token list producing raw trees.

    Raw nodes are tuples whose second element is a ``(line, col)`` position.
    """

    COMPARE = {"=": E.EQ, "/=": E.NEQ, "<": E.LT, "<=": E.LE, "\\in": E.MEMBER,
               "\\subseteq": E.SUBSET}
    ADDITIVE = {"\\cup": E.UNION, "\\cap": E.INTER, "\\": E.DIFF, "+": E.ADD, "-": E.SUB}

    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @classmethod
    def of(cls, text: str):
        return cls(tokenize(text))

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("sym", "id") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "id" or t.text in KEYWORDS:
            self.error(f"expected a name, found {t.text or 'end of input'!r}")
        return self.advance()

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def pos(self):
        return (self.tok.line, self.tok.col)

    # -- types
    def parse_type(self):
        t = self.ident() if not self.at("Domain") else self.advance()
        if t.text == "Bool":
            return BOOL
        if t.text == "Int":
            return INT
        if t.text == "Set":
            self.expect("(")
            elem = self.parse_type()
            self.expect(")")
            return SetType(elem)
        if t.text == "Func":
            self.expect("(")
            k = self.parse_type()
            self.expect(",")
            v = self.parse_type()
            self.expect(")")
            return FuncType(k, v)
        return DomainType(t.text)

    # -- expressions
    def parse_expr(self):
        return self.parse_implies()

    def parse_implies(self):
        left = self.parse_or()
        if self.at("=>"):
            p = self.pos()
            self.advance()
            right = self.parse_implies()
            return ("bin", p, E.IMPLIES, left, right)
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.at("\\/"):
            p = self.pos()
            self.advance()
            left = ("bin", p, E.OR, left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at("/\\"):
            p = self.pos()
            self.advance()
            left = ("bin", p, E.AND, left, self.parse_not())
        return left

    def parse_not(self):
        if self.at("~"):
            p = self.pos()
            self.advance()
            return ("not", p, self.parse_not())
        return self.parse_compare()

    def parse_compare(self):
        left = self.parse_additive()
        if self.tok.kind == "sym" and self.tok.text in self.COMPARE:
            p = self.pos()
            op = self.COMPARE[self.advance().text]
            right = self.parse_additive()
            return ("bin", p, op, left, right)
        return left

    def parse_additive(self):
        left = self.parse_postfix()
        while self.tok.kind == "sym" and self.tok.text in self.ADDITIVE:
            # '-' followed directly by a digit after an operand is subtraction
            p = self.pos()
            op = self.ADDITIVE[self.advance().text]
            left = ("bin", p, op, left, self.parse_postfix())
        return left

    def parse_postfix(self):
        e = self.parse_atom()
        while True:
            if self.at("["):
                p = self.pos()
                self.advance()
                k = self.parse_expr()
                self.expect("]")
                e = ("apply", p, e, k)
            elif self.at("with"):
                p = self.pos()
                self.advance()
                self.expect("[")
                k = self.parse_expr()
                self.expect(":=")
                v = self.parse_expr()
                self.expect("]")
                e = ("with", p, e, k, v)
            else:
                return e

    def parse_atom(self):
        t = self.tok
        p = self.pos()
        if t.kind == "num":
            self.advance()
            return ("int", p, int(t.text))
        if self.at("-") and self.peek().kind == "num":
            self.advance()
            return ("int", p, -int(self.advance().text))
        if self.at("TRUE"):
            self.advance()
            return ("bool", p, True)
        if self.at("FALSE"):
            self.advance()
            return ("bool", p, False)
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if self.at("{"):
            self.advance()
            if self.at("}"):
                self.advance()
                return ("empty", p, None)
            if self.at(":"):
                self.advance()
                ty = self.parse_type()
                self.expect("}")
                return ("empty", p, ty)
            items = [self.parse_expr()]
            while self.at(","):
                self.advance()
                items.append(self.parse_expr())
            self.expect("}")
            return ("set", p, items)
        if self.at("?"):
            self.advance()
            name = self.ident().text
            args = []
            self.expect("(")
            if not self.at(")"):
                args.append(self.ident())
                while self.at(","):
                    self.advance()
                    args.append(self.ident())
            self.expect(")")
            return ("hole", p, name, args)
        if self.at("\\A", "\\E"):
            q = E.FORALL if self.advance().text == "\\A" else E.EXISTS
            var = self.ident().text
            self.expect("\\in")
            dom = self.ident()
            self.expect(":")
            body = self.parse_expr()
            return ("quant", p, q, var, dom, body)
        if self.at("if"):
            self.advance()
            c = self.parse_expr()
            self.expect("then")
            a = self.parse_expr()
            self.expect("else")
            b = self.parse_expr()
            return ("ite", p, c, a, b)
        if t.kind == "id" and t.text not in KEYWORDS:
            self.advance()
            return ("name", p, t.text)
        self.error(f"unexpected {t.text or 'end of input'!r} in expression")


# ------------------------------------------------------------- elaboration

@dataclass
class Scope:
    """Name resolution context.

    ``names`` maps an identifier to a typed leaf (VAR, PARAM, ARG or NT).
    ``domains`` lists Domain parameters usable as quantifier ranges.
    """
    names: dict = field(default_factory=dict)
    domains: frozenset = frozenset()

    def bind(self, name, leaf):
        names = dict(self.names)
        names[name] = leaf
        return Scope(names, self.domains)


class _Ambiguous(Exception):
    pass


def elaborate(raw, scope: Scope, expected=None):
    """Typed Expr for a raw tree; ``expected`` is pushed into empty sets."""
    try:
        e = _elab(raw, scope, expected)
    except _Ambiguous:
        line, col = raw[1]
        raise DSLTypeError("cannot infer the element type of an empty set; write {:T}", line, col)
    if expected is not None and e.type != expected:
        line, col = raw[1]
        raise DSLTypeError(f"expected {expected}, got {e.type} in {E.to_text(e)}", line, col)
    return e


def _typed(fn, raw, *args):
    try:
        return fn(*args)
    except DSLTypeError as exc:
        if exc.line is None:
            line, col = raw[1]
            raise DSLTypeError(str(exc), line, col) from None
        raise


def _elab_pair(a_raw, b_raw, scope, expected):
    """Elaborate two operands that must share one type."""
    try:
        a = _elab(a_raw, scope, expected)
    except _Ambiguous:
        b = _elab(b_raw, scope, expected)
        return _elab(a_raw, scope, b.type), b
    return a, _elab(b_raw, scope, a.type if expected is None else expected)


def _elab(raw, scope: Scope, expected):
    kind, pos = raw[0], raw[1]
    if kind == "int":
        return E.IntLit(raw[2])
    if kind == "bool":
        return E.BoolLit(raw[2])
    if kind == "name":
        name = raw[2]
        if name not in scope.names:
            raise UnresolvedName(f"unknown name {name!r}", *pos)
        return scope.names[name]
    if kind == "empty":
        if raw[2] is not None:
            return E.EmptySet(raw[2])
        if expected is None:
            raise _Ambiguous()
        if not isinstance(expected, SetType):
            raise DSLTypeError(f"empty set where {expected} is expected", *pos)
        return E.EmptySet(expected.elem)
    if kind == "set":
        items = raw[2]
        want = expected.elem if isinstance(expected, SetType) else None
        if want is None:
            first = None
            for it in items:
                try:
                    first = _elab(it, scope, None)
                    break
                except _Ambiguous:
                    continue
            if first is None:
                raise _Ambiguous()
            want = first.type
        elems = [_elab(it, scope, want) for it in items]
        for it, el in zip(items, elems):
            if el.type != want:
                raise DSLTypeError(f"set element of type {el.type}, expected {want}", *it[1])
        if len(elems) == 1:
            return E.Singleton(elems[0])
        return _typed(E.SetLit, raw, elems)
    if kind == "not":
        return _typed(E.Not, raw, _elab(raw[2], scope, BOOL))
    if kind == "bin":
        op, a_raw, b_raw = raw[2], raw[3], raw[4]
        if op in (E.AND, E.OR, E.IMPLIES):
            return _typed(E._BUILDERS[op], raw, _elab(a_raw, scope, BOOL), _elab(b_raw, scope, BOOL))
        if op in (E.LT, E.LE, E.ADD, E.SUB):
            return _typed(E._BUILDERS[op], raw, _elab(a_raw, scope, INT), _elab(b_raw, scope, INT))
        if op in (E.UNION, E.INTER, E.DIFF):
            a, b = _elab_pair(a_raw, b_raw, scope, expected if isinstance(expected, SetType) else None)
            return _typed(E._BUILDERS[op], raw, a, b)
        if op in (E.EQ, E.NEQ, E.SUBSET):
            a, b = _elab_pair(a_raw, b_raw, scope, None)
            return _typed(E._BUILDERS[op], raw, a, b)
        if op == E.MEMBER:
            try:
                x = _elab(a_raw, scope, None)
            except _Ambiguous:
                s = _elab(b_raw, scope, None)
                if not isinstance(s.type, SetType):
                    raise DSLTypeError(f"\\in needs a set, got {s.type}", *b_raw[1])
                x = _elab(a_raw, scope, s.type.elem)
                return _typed(E.Member, raw, x, s)
            s = _elab(b_raw, scope, SetType(x.type))
            return _typed(E.Member, raw, x, s)
    if kind == "apply":
        f = _elab(raw[2], scope, None)
        if not isinstance(f.type, FuncType):
            raise DSLTypeError(f"cannot index a {f.type}", *pos)
        k = _elab(raw[3], scope, f.type.key)
        return _typed(E.Apply, raw, f, k)
    if kind == "with":
        f = _elab(raw[2], scope, expected if isinstance(expected, FuncType) else None)
        if not isinstance(f.type, FuncType):
            raise DSLTypeError(f"cannot update a {f.type}", *pos)
        k = _elab(raw[3], scope, f.type.key)
        v = _elab(raw[4], scope, f.type.val)
        return _typed(E.FuncUpdate, raw, f, k, v)
    if kind == "quant":
        q, var, dom_tok, body_raw = raw[2], raw[3], raw[4], raw[5]
        if dom_tok.text not in scope.domains:
            raise UnresolvedName(f"{dom_tok.text!r} is not a Domain parameter", dom_tok.line, dom_tok.col)
        inner = scope.bind(var, E.Arg(var, DomainType(dom_tok.text)))
        body = _elab(body_raw, inner, BOOL)
        return _typed(E.Forall if q == E.FORALL else E.Exists, raw, var, dom_tok.text, body)
    if kind == "ite":
        c = _elab(raw[2], scope, BOOL)
        a, b = _elab_pair(raw[3], raw[4], scope, expected)
        return _typed(E.Ite, raw, c, a, b)
    if kind == "hole":
        raise HoleMisuse(f"hole ?{raw[2]} may only be a whole guard or a whole update right-hand side", *pos)
    raise ParseError(f"unsupported syntax {kind}", *pos)


def parse_expression(text: str, scope: Scope, expected=None):
    """Parse and elaborate a standalone expression string."""
    p = Parser.of(text)
    raw = p.parse_expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after expression")
    return elaborate(raw, scope, expected)


def parse_type_text(text: str):
    p = Parser.of(text)
    t = p.parse_type()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after type")
    return t
