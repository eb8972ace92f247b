"""Synthesis configuration files.

Example::

    [instance]
    Node = {n1, n2, n3}

    [extra_instance]            -- may be repeated
    Node = {n1, n2, n3, n4}

    [holes]
    h = sets                    -- hole name = grammar name

    [grammar sets]
    E : Set(Node) ::= {} | $singletons | $args
        | @set_ops(E)

    [options]
    timeout = 300
    max_size = 12

    [ground_truth]
    h = vote_yes \\cup {n}

A grammar section is a template, instantiated once per hole that uses it.
Productions may name the hole's arguments, the protocol parameters and the
grammar's nonterminals.  The first nonterminal is the start symbol.  Macros
expand against the hole's arguments:

    $args            every argument whose type is the nonterminal's type
    $singletons      {a} for every argument a with Set(type of a) = that type
    $in(S)           a \\in S for every argument a whose type is S's element type
    @set_ops(S)      S \\cup S | S \\cap S | S \\ S
    @bool_ops(B)     ~B | B /\\ B | B \\/ B
    @set_cmp(S)      S = S | S /= S | S \\subseteq S
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import expr as E
from .enumerate import Grammar
from .errors import ConfigError, ParseError
from .sketch import DOMAIN, Sketch
from .syntax import Parser, Scope, Token, elaborate, parse_expression, parse_type_text, tokenize
from .values import BoolType, InstanceBinding, IntType, SetType

OPTION_TYPES = {
    "reduce": bool, "shortcircuit": bool, "strategy": str, "timeout": float,
    "state_cap": int, "max_size": int, "int_min": int, "int_max": int, "extra_check": bool,
}


@dataclass
class GrammarTemplate:
    name: str
    rules: list = field(default_factory=list)    # (nt, type text, [alternative texts], line)


@dataclass
class LoadedConfig:
    instance: InstanceBinding
    extra_instances: list
    hole_grammars: dict             # hole -> grammar template name
    grammars: dict                  # hole -> Grammar (instantiated)
    options: dict
    ground_truth: dict              # hole -> Expr
    templates: dict = field(default_factory=dict, repr=False)

    @property
    def int_bounds(self):
        if "int_min" in self.options or "int_max" in self.options:
            return (self.options.get("int_min", 0), self.options.get("int_max", 0))
        return None


# ----------------------------------------------------------------- reading

def _strip_comment(line):
    for mark in ("--", "#"):
        i = line.find(mark)
        if i >= 0:
            line = line[:i]
    return line.rstrip()


def _sections(text):
    """[(header, header line, [(line no, text)])]"""
    out = []
    cur = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = (s[1:-1].strip(), no, [])
            out.append(cur)
            continue
        if cur is None:
            raise ConfigError("content before the first [section]", no, 1)
        if s.startswith("|") and cur[2]:
            prev_no, prev = cur[2][-1]
            cur[2][-1] = (prev_no, prev + " " + s)
        else:
            cur[2].append((no, s))
    return out


def _keyval(no, s):
    if "=" not in s:
        raise ConfigError(f"expected 'key = value', got {s!r}", no, 1)
    k, v = s.split("=", 1)
    return k.strip(), v.strip()


def _parse_bool(v, no):
    lv = v.lower()
    if lv in ("true", "yes", "on", "1"):
        return True
    if lv in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected true or false, got {v!r}", no, 1)


def _instance(lines, sk: Sketch):
    domains, consts = {}, {}
    params = dict(sk.params)
    for no, s in lines:
        k, v = _keyval(no, s)
        if k not in params:
            raise ConfigError(f"{k!r} is not a parameter of the protocol", no, 1)
        kind = params[k]
        if kind == DOMAIN:
            if not (v.startswith("{") and v.endswith("}")):
                raise ConfigError(f"domain {k} needs a set of element ids like {{n1, n2}}", no, 1)
            ids = [x.strip() for x in v[1:-1].split(",") if x.strip()]
            if not ids:
                raise ConfigError(f"domain {k} is empty", no, 1)
            if len(set(ids)) != len(ids):
                raise ConfigError(f"duplicate element ids in {k}", no, 1)
            domains[k] = ids
        elif isinstance(kind, IntType):
            try:
                consts[k] = int(v)
            except ValueError:
                raise ConfigError(f"{k} needs an integer", no, 1) from None
        elif isinstance(kind, BoolType):
            consts[k] = _parse_bool(v, no)
        else:
            raise ConfigError(f"constants of type {kind} cannot be bound in a config", no, 1)
    missing = [n for n in params if n not in domains and n not in consts]
    if missing:
        raise ConfigError(f"parameters left unbound: {', '.join(missing)}")
    ordered = {n: domains[n] for n in sk.domains}
    return InstanceBinding.make(ordered, consts)


def _split_alternatives(text, no):
    toks = tokenize(text)[:-1]
    alts, cur, depth = [], [], 0
    for t in toks:
        if t.kind == "sym" and t.text in "([{":
            depth += 1
        elif t.kind == "sym" and t.text in ")]}":
            depth -= 1
        if t.kind == "sym" and t.text == "|" and depth == 0:
            alts.append(cur)
            cur = []
        else:
            cur.append(t)
    alts.append(cur)
    for a in alts:
        if not a:
            raise ConfigError("empty alternative in grammar rule", no, 1)
    return alts


def _template(name, lines):
    tpl = GrammarTemplate(name)
    for no, s in lines:
        if "::=" not in s:
            raise ConfigError(f"expected 'NT : Type ::= ...', got {s!r}", no, 1)
        lhs, rhs = s.split("::=", 1)
        if ":" not in lhs:
            raise ConfigError("nonterminal needs a type, as in 'E : Set(Node) ::= ...'", no, 1)
        nt, ty = lhs.split(":", 1)
        tpl.rules.append((nt.strip(), ty.strip(), rhs.strip(), no))
    if not tpl.rules:
        raise ConfigError(f"grammar {name} has no rules")
    return tpl


# ----------------------------------------------------------- instantiation

def _hole_scope(sk: Sketch, hole, nts: dict) -> Scope:
    names = {}
    for n, k in sk.params:
        from .values import DomainType
        names[n] = E.Param(n, SetType(DomainType(n)) if k == DOMAIN else k)
    for (n, _), leaf in zip(hole.args, hole.arg_exprs):
        names[n] = leaf
    for nt, t in nts.items():
        names[nt] = E.Placeholder(nt, t)
    return Scope(names, frozenset(sk.domains))


def _expand_macro(toks, hole, nts, nt_type, no):
    """Template Exprs for a macro alternative, or None if not a macro."""
    head = toks[0]
    if head.text not in ("$", "@"):
        return None
    if len(toks) < 2:
        raise ConfigError("dangling macro marker", no, head.col)
    name = toks[1].text
    arg = None
    if len(toks) > 2:
        if len(toks) != 5 or toks[2].text != "(" or toks[4].text != ")":
            raise ConfigError(f"malformed macro {head.text}{name}(...)", no, head.col)
        arg = toks[3].text
        if arg not in nts:
            raise ConfigError(f"macro argument {arg} is not a nonterminal", no, toks[3].col)
    args = list(zip(hole.arg_names, hole.arg_exprs))
    if head.text == "$" and name == "args":
        return [leaf for _, leaf in args if leaf.type == nt_type]
    if head.text == "$" and name == "singletons":
        return [E.Singleton(leaf) for _, leaf in args if SetType(leaf.type) == nt_type]
    if head.text == "$" and name == "in":
        s = E.Placeholder(arg, nts[arg])
        if not isinstance(s.type, SetType):
            raise ConfigError(f"$in needs a set nonterminal, {arg} is {s.type}", no, head.col)
        return [E.Member(leaf, s) for _, leaf in args if leaf.type == s.type.elem]
    if head.text == "@" and arg is not None:
        p = E.Placeholder(arg, nts[arg])
        try:
            if name == "set_ops":
                return [E.Union(p, p), E.Inter(p, p), E.Diff(p, p)]
            if name == "bool_ops":
                return [E.Not(p), E.And(p, p), E.Or(p, p)]
            if name == "set_cmp":
                return [E.Eq(p, p), E.Neq(p, p), E.Subset(p, p)]
        except Exception as exc:
            raise ConfigError(f"{head.text}{name}({arg}): {exc}", no, head.col) from None
    raise ConfigError(f"unknown macro {head.text}{name}", no, head.col)


def instantiate(tpl: GrammarTemplate, sk: Sketch, hole) -> Grammar:
    """Concrete grammar for ``hole`` from a template."""
    nts = {}
    for nt, ty, _, no in tpl.rules:
        try:
            t = parse_type_text(ty)
        except ParseError as exc:
            raise ConfigError(f"bad type {ty!r}: {exc}", no, 1) from None
        if nt in nts and nts[nt] != t:
            raise ConfigError(f"nonterminal {nt} declared with two types", no, 1)
        nts[nt] = t
    scope = _hole_scope(sk, hole, nts)
    prods = {nt: [] for nt in nts}
    for nt, _, rhs, no in tpl.rules:
        want = nts[nt]
        for toks in _split_alternatives(rhs, no):
            macro = _expand_macro(toks, hole, nts, want, no)
            if macro is not None:
                for m in macro:
                    if m.type != want:
                        raise ConfigError(f"macro gives {m.type} for {nt} : {want}", no, 1)
                prods[nt].extend(macro)
                continue
            p = Parser(toks + [Token("eof", "", no, 0)])
            try:
                raw = p.parse_expr()
                if p.tok.kind != "eof":
                    p.error(f"unexpected {p.tok.text!r}")
                prods[nt].append(elaborate(raw, scope, want))
            except ParseError as exc:
                raise ConfigError(f"grammar {tpl.name}, hole {hole.name}: {exc}", no, 1) from None
    # drop duplicate productions, keep order
    for nt in prods:
        seen, uniq = set(), []
        for t in prods[nt]:
            if t not in seen:
                seen.add(t)
                uniq.append(t)
        prods[nt] = uniq
    start = tpl.rules[0][0]
    g = Grammar(f"{tpl.name}[{hole.name}]", nts, start, prods)
    if g.start_type != hole.output_type:
        raise ConfigError(f"grammar {tpl.name} starts at {g.start_type}, hole {hole.name} needs {hole.output_type}")
    return g


# --------------------------------------------------------------------- API

def load_config(source, sk: Sketch) -> LoadedConfig:
    """Parse a config file (path or text) against a parsed sketch.

    For a hole-free protocol the [holes] and [ground_truth] sections are
    ignored, so a sketch's config also serves its completed protocol.
    Extra instances are kept even when ``extra_check`` is off; the option is
    applied by :func:`synthesis_config`.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and not source.lstrip().startswith("[")):
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"config file {path} does not exist")
        text = path.read_text()
    else:
        text = source
    instance = None
    extras, holes, templates, options, truth_raw = [], {}, {}, {}, {}
    for header, hno, lines in _sections(text):
        words = header.split()
        kind = words[0]
        if kind == "instance":
            if instance is not None:
                raise ConfigError("[instance] given twice", hno, 1)
            instance = _instance(lines, sk)
        elif kind == "extra_instance":
            extras.append(_instance(lines, sk))
        elif kind == "holes":
            for no, s in lines:
                k, v = _keyval(no, s)
                holes[k] = (v, no)
        elif kind == "grammar":
            if len(words) != 2:
                raise ConfigError("grammar sections are written [grammar NAME]", hno, 1)
            if words[1] in templates:
                raise ConfigError(f"grammar {words[1]} defined twice", hno, 1)
            templates[words[1]] = _template(words[1], lines)
        elif kind == "options":
            for no, s in lines:
                k, v = _keyval(no, s)
                if k not in OPTION_TYPES:
                    raise ConfigError(f"unknown option {k!r}", no, 1)
                ty = OPTION_TYPES[k]
                try:
                    options[k] = _parse_bool(v, no) if ty is bool else ty(v)
                except ValueError:
                    raise ConfigError(f"option {k} needs a {ty.__name__}", no, 1) from None
        elif kind == "ground_truth":
            for no, s in lines:
                k, v = _keyval(no, s)
                truth_raw[k] = (v, no)
        else:
            raise ConfigError(f"unknown section [{header}]", hno, 1)
    if instance is None:
        raise ConfigError("missing [instance] section")
    if options.get("strategy", "cached") not in ("cached", "naive"):
        raise ConfigError("strategy must be cached or naive")
    sketch_holes = {h.name: h for h in sk.holes}
    if not sketch_holes:
        # a completed protocol checked against the config of its sketch
        holes, truth_raw = {}, {}
    for name, (_, no) in list(holes.items()) + list(truth_raw.items()):
        if name not in sketch_holes:
            raise ConfigError(f"hole {name} is not in the sketch", no, 1)
    for name in sketch_holes:
        if name not in holes:
            raise ConfigError(f"hole {name} has no grammar in [holes]")
    grammars = {}
    for name, (gname, no) in holes.items():
        if gname not in templates:
            raise ConfigError(f"unknown grammar {gname!r}", no, 1)
        grammars[name] = instantiate(templates[gname], sk, sketch_holes[name])
    truth = {}
    for name, (v, no) in truth_raw.items():
        h = sketch_holes[name]
        try:
            truth[name] = parse_expression(v, _hole_scope(sk, h, {}), h.output_type)
        except ParseError as exc:
            raise ConfigError(f"ground truth for {name}: {exc}", no, 1) from None
    return LoadedConfig(instance, extras, {k: v for k, (v, _) in holes.items()}, grammars,
                        options, truth, templates)


def synthesis_config(loaded: LoadedConfig, **overrides):
    """A :class:`~protoforge.cegis.SynthesisConfig` from a loaded file."""
    from .cegis import SynthesisConfig
    opts = loaded.options
    kw = dict(
        instance=loaded.instance,
        grammars=loaded.grammars,
        extra_instances=tuple(loaded.extra_instances) if opts.get("extra_check", True) else (),
        reduce=opts.get("reduce", True),
        shortcircuit=opts.get("shortcircuit", True),
        strategy=opts.get("strategy", "cached"),
        timeout=opts.get("timeout", 3600.0),
        state_cap=opts.get("state_cap", 1_000_000),
        max_combined_size=opts.get("max_size"),
        int_bounds=loaded.int_bounds,
    )
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SynthesisConfig(**kw)
