"""Pruning constraints built from counterexamples, and the candidate check.

Holes are treated as uninterpreted functions.  A :class:`Term` records one
input/output pair ``h(s*) = y`` observed while the current candidate produced
a counterexample.  A :class:`PruningConstraint` is a disjunction of negated
terms: a completion satisfies it when at least one of its holes computes a
different output on the recorded input.  Completions violating a constraint
provably exhibit the same counterexample, so they need not be model checked.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import expr as E
from .checker import DEADLOCK, LIVENESS, SAFETY, STUTTERING, Counterexample, TransitionLabel
from .sketch import Sketch
from .values import format_value


@dataclass(frozen=True)
class Term:
    hole: str
    inputs: tuple          # ((arg name, value), ...) in the hole's argument order
    output: object
    instance: object = field(default=None, compare=True, repr=False)

    def env(self) -> dict:
        env = self.__dict__.get("_env")
        if env is None:
            env = dict(self.instance.env()) if self.instance is not None else {}
            env.update(self.inputs)
            object.__setattr__(self, "_env", env)
        return env

    def __str__(self):
        args = ",".join(f"{n}={format_value(v)}" for n, v in self.inputs)
        return f"{self.hole}({args}) != {format_value(self.output)}"


@dataclass
class PruningConstraint:
    terms: tuple
    origin: str = ""    # counterexample kind, plus a run id when known

    @property
    def is_empty(self):
        return not self.terms

    def __str__(self):
        if not self.terms:
            return "FALSE"
        return " \\/ ".join(str(t) for t in self.terms)


# ----------------------------------------------------------------- probes

def _probe(hole, state, label: TransitionLabel | None, inst) -> tuple:
    """s* : the values of ``hole``'s arguments at ``state`` under ``label``."""
    binding = label.binding if label is not None else {}
    out = []
    for (name, _), leaf in zip(hole.args, hole.arg_exprs):
        if leaf.op == E.VAR:
            out.append((name, state[name]))
        elif leaf.op == E.ARG:
            out.append((name, binding[name]))
        else:
            out.append((name, inst.env()[name]))
    return tuple(out)


def _term(sk, completion, hole_name, state, label, inst, output=None):
    h = sk.hole(hole_name)
    inputs = _probe(h, state, label, inst)
    t = Term(hole_name, inputs, None, inst)
    y = E.evaluate(completion[hole_name], t.env()) if output is None else output
    return Term(hole_name, inputs, y, inst)


def _instances(action, inst):
    doms = [inst.elements(d) for _, d in action.args]
    for combo in itertools.product(*doms):
        yield TransitionLabel(action.name, tuple((n, v) for (n, _), v in zip(action.args, combo)))


def _guard_env(state, label, inst):
    env = dict(inst.env())
    env.update(state.items())
    env.update(label.args)
    return env


def _hole_free_pre_holds(action, state, label, inst) -> bool:
    env = _guard_env(state, label, inst)
    return all(E.evaluate(p, env) for p in action.pre if p.op != E.HOLE)


def _rho_terms(sk, completion, state, inst, actions, skip_labels=frozenset()):
    """(h, s*, False) for every pre-hole that is false at ``state`` on an
    action instance whose hole-free guards hold there."""
    out = []
    for a in actions:
        pre_holes = a.pre_holes()
        if not pre_holes:
            continue
        for lab in _instances(a, inst):
            if lab in skip_labels or not _hole_free_pre_holds(a, state, lab, inst):
                continue
            for h in pre_holes:
                t = _term(sk, completion, h, state, lab, inst)
                if not t.output:
                    out.append(t)
    return out


def _dedupe(terms):
    seen, out = set(), []
    for t in terms:
        key = (t.hole, t.inputs, t.output, t.instance)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return tuple(out)


# --------------------------------------------------------------- encoders

def safety_terms(r: Counterexample, sk: Sketch, completion, inst) -> list:
    """tau-terms: every hole of every action along the run, at its source state."""
    out = []
    for s, lab, _ in r.transitions():
        a = sk.action(lab.action)
        for h in a.holes():
            out.append(_term(sk, completion, h, s, lab, inst))
    return out


def encode_safety(r, sk, completion, inst) -> PruningConstraint:
    return PruningConstraint(_dedupe(safety_terms(r, sk, completion, inst)), SAFETY)


def encode_deadlock(r, sk, completion, inst) -> PruningConstraint:
    terms = safety_terms(r, sk, completion, inst)
    terms += _rho_terms(sk, completion, r.states[-1], inst, sk.actions)
    return PruningConstraint(_dedupe(terms), DEADLOCK)


def encode_liveness(r, sk, completion, inst) -> PruningConstraint:
    terms = safety_terms(r, sk, completion, inst)
    fair = [a for a in sk.actions if a.fair]
    taken = frozenset(r.labels[r.loop_index:])
    for j in range(r.loop_index, r.k):
        terms += _rho_terms(sk, completion, r.states[j], inst, fair, taken)
    return PruningConstraint(_dedupe(terms), LIVENESS)


def _enabled_under(sk, completion, a, state, lab, inst) -> bool:
    if not _hole_free_pre_holds(a, state, lab, inst):
        return False
    return all(bool(_term(sk, completion, h, state, lab, inst).output) for h in a.pre_holes())


def encode_stuttering(r, sk, completion, inst) -> PruningConstraint:
    terms = safety_terms(r, sk, completion, inst)
    last = r.states[-1]
    fair = [a for a in sk.actions if a.fair]
    # fair instances enabled at s_k self-loop; pin their post-hole outputs
    for a in fair:
        for lab in _instances(a, inst):
            if a.post_holes() and _enabled_under(sk, completion, a, last, lab, inst):
                terms += [_term(sk, completion, h, last, lab, inst) for h in a.post_holes()]
    # fair instances disabled at s_k only through a pre-hole must stay disabled
    terms += _rho_terms(sk, completion, last, inst, fair)
    return PruningConstraint(_dedupe(terms), STUTTERING)


ENCODERS = {SAFETY: encode_safety, DEADLOCK: encode_deadlock,
            LIVENESS: encode_liveness, STUTTERING: encode_stuttering}


def encode(r: Counterexample, sk, completion, inst) -> PruningConstraint:
    return ENCODERS[r.kind](r, sk, completion, inst)


# -------------------------------------------------------------------- PCC

def violates(completion, constraint: PruningConstraint, memo=None) -> bool:
    """True when every term agrees with ``completion`` (the constraint prunes it)."""
    for t in constraint.terms:
        if _value(completion[t.hole], t, memo) != t.output:
            return False
    return True


def _value(e, t: Term, memo):
    if memo is None:
        return E.evaluate(e, t.env())
    key = (e, id(t))
    v = memo.get(key, _MISS)
    if v is _MISS:
        v = memo[key] = E.evaluate(e, t.env())
    return v


_MISS = object()


def pcc_check(completion, cs) -> PruningConstraint | None:
    """None when ``completion`` satisfies every constraint, else the first
    violated one."""
    constraints = cs.constraints if isinstance(cs, ConstraintSet) else cs
    for c in constraints:
        if violates(completion, c):
            return c
    return None


class ConstraintSet:
    """Conjunction of pruning constraints with a move-to-front check order
    and a memo of hole evaluations."""

    MEMO_LIMIT = 2_000_000

    def __init__(self):
        self.constraints = []
        self._order = []
        self._memo = {}

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def add(self, c: PruningConstraint):
        self.constraints.append(c)
        self._order.insert(0, c)

    def check(self, completion) -> PruningConstraint | None:
        if len(self._memo) > self.MEMO_LIMIT:
            self._memo.clear()
        for i, c in enumerate(self._order):
            if violates(completion, c, self._memo):
                if i:
                    del self._order[i]
                    self._order.insert(0, c)
                return c
        return None

    def dump(self) -> str:
        return "".join(str(c) + "\n" for c in self.constraints)
