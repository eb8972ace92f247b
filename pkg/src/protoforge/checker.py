"""Explicit-state model checking of one protocol instance.

Exploration is breadth first from the initial states.  Invariants are
checked when a state is first discovered, so a safety counterexample is a
shortest path to a bad state.  Liveness properties ``P ~> Q`` are checked on
the stored reachable graph under strong fairness of every ``fair`` action
instance.

Check order inside :func:`verify` is safety, deadlock, stuttering, then fair
cycles; the first failure wins.
"""
from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field

from . import expr as E
from .errors import EvalError, StateSpaceLimitExceeded
from .sketch import Invariant, LeadsTo, Sketch
from .values import State, format_value, universe

DEFAULT_STATE_CAP = 1_000_000

SAFETY, DEADLOCK, LIVENESS, STUTTERING = "safety", "deadlock", "liveness", "stuttering"


@dataclass(frozen=True)
class TransitionLabel:
    action: str
    args: tuple = ()      # ((name, value), ...)

    @property
    def binding(self) -> dict:
        return dict(self.args)

    def __str__(self):
        if not self.args:
            return self.action
        return f"{self.action}({', '.join(format_value(v) for _, v in self.args)})"


@dataclass(frozen=True)
class Counterexample:
    kind: str
    prop: str | None
    states: tuple                 # (State, ...)  s_0 .. s_k
    labels: tuple                 # (TransitionLabel, ...)  l_1 .. l_k
    loop_index: int | None = None

    @property
    def k(self):
        return len(self.states) - 1

    @property
    def fingerprint(self):
        return (self.kind, self.prop, self.states, self.labels, self.loop_index)

    def transitions(self):
        """(s_{i-1}, label_i, s_i) triples."""
        return [(self.states[i], self.labels[i], self.states[i + 1]) for i in range(len(self.labels))]

    def __str__(self):
        return format_counterexample(self)


@dataclass
class CheckReport:
    verdict: str                  # "pass" | "fail"
    counterexample: Counterexample | None = None
    states_explored: int = 0
    check_time: float = 0.0
    graph: "Graph | None" = field(default=None, repr=False)

    @property
    def passed(self):
        return self.verdict == "pass"


# ------------------------------------------------------------ compilation

class Compiled:
    """A protocol instance prepared for fast successor computation."""

    def __init__(self, p: Sketch, inst, int_bounds=None):
        if p.holes:
            raise ValueError("cannot model check a sketch with holes; apply a completion first")
        self.protocol = p
        self.inst = inst
        self.int_bounds = int_bounds
        self.names = p.var_names
        self.base = dict(inst.env())
        pos = {n: i for i, n in enumerate(self.names)}
        self.actions = []   # (action, instances, pre closures, [(var index, closure)])
        for a in p.actions:
            doms = [inst.elements(d) for _, d in a.args]
            insts = []
            for combo in itertools.product(*doms):
                args = tuple((n, v) for (n, _), v in zip(a.args, combo))
                insts.append(TransitionLabel(a.name, args))
            pres = [E.compile_expr(e) for e in a.pre]
            posts = [(pos[v], E.compile_expr(e)) for v, e in a.post]
            self.actions.append((a, insts, pres, posts))
        self.fair_actions = {a.name for a in p.actions if a.fair}

    def env(self, s: State) -> dict:
        env = dict(self.base)
        env.update(zip(self.names, s.values))
        return env

    def successors(self, s: State) -> list:
        env = self.env(s)
        out = []
        for a, insts, pres, posts in self.actions:
            for lab in insts:
                for n, v in lab.args:
                    env[n] = v
                try:
                    if all(f(env) for f in pres):
                        vals = list(s.values)
                        for i, f in posts:
                            vals[i] = f(env)
                        out.append((lab, State(self.names, tuple(vals))))
                except EvalError as exc:
                    raise EvalError(f"{lab} at {s}: {exc}") from None
        return out

    def holds(self, e, s: State) -> bool:
        return bool(E.evaluate(e, self.env(s)))

    def initial_states(self) -> list:
        p = self.protocol
        conj = []
        for e in p.init:
            conj.extend(_conjuncts(e))
        fixed = {}
        for c in conj:
            if c.op != E.EQ:
                continue
            for lhs, rhs in (c.args, c.args[::-1]):
                if lhs.op == E.VAR and lhs.val not in fixed and not E.var_refs(rhs):
                    fixed[lhs.val] = E.evaluate(rhs, dict(self.base))
                    break
        choices = []
        for n, t in p.vars:
            if n in fixed:
                choices.append([fixed[n]])
            else:
                choices.append(universe(t, self.inst, self.int_bounds))
        fs = [E.compile_expr(e) for e in p.init]
        out, seen = [], set()
        for combo in itertools.product(*choices):
            s = State(self.names, combo)
            if s in seen:
                continue
            env = self.env(s)
            if all(f(env) for f in fs):
                seen.add(s)
                out.append(s)
        return out


def _conjuncts(e):
    if e.op == E.AND:
        return _conjuncts(e.args[0]) + _conjuncts(e.args[1])
    return [e]


def successors(p: Sketch, inst, s: State, int_bounds=None) -> list:
    return Compiled(p, inst, int_bounds).successors(s)


# ------------------------------------------------------------------ graph

class Graph:
    """Reachable state graph kept for temporal checks."""

    def __init__(self, compiled: Compiled):
        self.compiled = compiled
        self.states = []
        self.index = {}
        self.init = []
        self.edges = []       # per state: [(TransitionLabel, target index)]
        self.parent = []      # per state: (pred index, label) or None
        self.complete = False

    def add(self, s, parent):
        i = len(self.states)
        self.states.append(s)
        self.index[s] = i
        self.edges.append(None)
        self.parent.append(parent)
        return i

    def path_to(self, i):
        states, labels = [], []
        while i is not None:
            states.append(self.states[i])
            par = self.parent[i]
            if par is None:
                break
            i, lab = par
            labels.append(lab)
        return tuple(reversed(states)), tuple(reversed(labels))

    def enabled(self, i):
        return {lab for lab, _ in self.edges[i]}


def explore(p: Sketch, inst, invariants=None, deadlock_check=None, state_cap=DEFAULT_STATE_CAP,
            int_bounds=None, compiled=None):
    """BFS; returns (graph, safety-or-deadlock Counterexample or None)."""
    comp = compiled or Compiled(p, inst, int_bounds)
    if invariants is None:
        invariants = p.invariants
    if deadlock_check is None:
        deadlock_check = p.check_deadlock
    invs = [(inv.name, E.compile_expr(inv.pred)) for inv in invariants]
    g = Graph(comp)

    def bad(s):
        env = comp.env(s)
        for name, f in invs:
            if not f(env):
                return name
        return None

    for s in comp.initial_states():
        i = g.add(s, None)
        g.init.append(i)
        name = bad(s)
        if name is not None:
            return g, Counterexample(SAFETY, name, (s,), ())
    first_dead = None
    queue = deque(g.init)
    while queue:
        i = queue.popleft()
        succ = comp.successors(g.states[i])
        edges = []
        for lab, t in succ:
            j = g.index.get(t)
            if j is None:
                if len(g.states) >= state_cap:
                    raise StateSpaceLimitExceeded(f"more than {state_cap} reachable states")
                j = g.add(t, (i, lab))
                name = bad(t)
                if name is not None:
                    g.edges[i] = edges
                    states, labels = g.path_to(j)
                    return g, Counterexample(SAFETY, name, states, labels)
                queue.append(j)
            edges.append((lab, j))
        g.edges[i] = edges
        if not edges and first_dead is None:
            first_dead = i
    g.complete = True
    if deadlock_check and first_dead is not None:
        states, labels = g.path_to(first_dead)
        return g, Counterexample(DEADLOCK, None, states, labels)
    return g, None


def check_safety_and_deadlock(p: Sketch, inst, invariants=None, deadlock_check=None,
                              state_cap=DEFAULT_STATE_CAP, int_bounds=None) -> CheckReport:
    t0 = time.perf_counter()
    g, cex = explore(p, inst, invariants, deadlock_check, state_cap, int_bounds)
    return CheckReport("fail" if cex else "pass", cex, len(g.states), time.perf_counter() - t0, g)


# --------------------------------------------------------------- liveness

def _pending(g: Graph, prop: LeadsTo):
    comp = g.compiled
    pf, qf = E.compile_expr(prop.p), E.compile_expr(prop.q)
    n = len(g.states)
    notq = [False] * n
    root = [False] * n
    for i, s in enumerate(g.states):
        env = comp.env(s)
        notq[i] = not qf(env)
        root[i] = notq[i] and bool(pf(env))
    pend = [False] * n
    stack = [i for i in range(n) if root[i]]
    for i in stack:
        pend[i] = True
    while stack:
        i = stack.pop()
        for _, j in g.edges[i]:
            if notq[j] and not pend[j]:
                pend[j] = True
                stack.append(j)
    return root, notq, pend


def _prefix_search(g: Graph, root, notq, is_goal):
    """Shortest run s_0 .. s_p .. s_j where s_p is a root, s_p..s_j stay in
    ~Q, and ``is_goal(j)``.  Returns (states, labels) or None."""
    parent = {}
    queue = deque()
    for i in g.init:
        for ph in ((0, 1) if root[i] else (0,)):
            node = (i, ph)
            if node not in parent:
                parent[node] = None
                queue.append(node)
    while queue:
        node = queue.popleft()
        i, ph = node
        if ph == 1 and is_goal(i):
            states, labels = [], []
            while node is not None:
                states.append(g.states[node[0]])
                par = parent[node]
                if par is None:
                    break
                node, lab = par
                labels.append(lab)
            return tuple(reversed(states)), tuple(reversed(labels))
        for lab, j in g.edges[i]:
            nexts = []
            if ph == 0:
                nexts.append((j, 0))
                if root[j]:
                    nexts.append((j, 1))
            elif notq[j]:
                nexts.append((j, 1))
            for nx in nexts:
                if nx not in parent:
                    parent[nx] = (node, lab)
                    queue.append(nx)
    return None


def tarjan_scc(nodes, succ):
    """Strongly connected components of the subgraph on ``nodes``.

    ``succ(u)`` yields neighbours (restricted to ``nodes`` by the caller).
    Components come back ordered by their smallest member.
    """
    index, low, on_stack = {}, {}, set()
    stack, out = [], []
    counter = 0
    for start in sorted(nodes):
        if start in index:
            continue
        work = [(start, iter(succ(start)))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    out.sort(key=lambda c: c[0])
    return out


def find_fair_scc(g: Graph, nodes, fair_actions):
    """A strongly connected set of states, with at least one internal edge,
    in which every fair label enabled somewhere is also taken inside.
    Returns (states, required labels) or None."""
    nodes = set(nodes)
    work = [nodes]
    while work:
        cur = work.pop(0)
        comps = tarjan_scc(cur, lambda u: [j for _, j in g.edges[u] if j in cur])
        found = []
        for comp in comps:
            cset = set(comp)
            taken = {lab for u in comp for lab, j in g.edges[u] if j in cset}
            if not taken:
                continue
            enabled = {lab for u in comp for lab, _ in g.edges[u] if lab.action in fair_actions}
            bad = enabled - taken
            if not bad:
                return cset, sorted(enabled, key=_label_key)
            keep = {u for u in comp if not (g.enabled(u) & bad)}
            if keep:
                found.append(keep)
        work = found + work
    return None


def _label_key(lab):
    from .values import value_key
    return (lab.action, tuple((n, value_key(v)) for n, v in lab.args))


def _walk_in(g, cset, src, goal):
    """Shortest path inside cset from src to a state satisfying goal(u, lab, v)
    on its final edge.  Returns list of (label, target)."""
    parent = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for lab, v in g.edges[u]:
            if v not in cset:
                continue
            if goal(u, lab, v):
                steps = [(lab, v)]
                while parent[u] is not None:
                    pu, plab = parent[u]
                    steps.append((plab, u))
                    u = pu
                return list(reversed(steps))
            if v not in parent:
                parent[v] = (u, lab)
                queue.append(v)
    return None


def _fair_cycle(g, cset, entry, required):
    steps = []
    cur = entry
    for lab in required:
        part = _walk_in(g, cset, cur, lambda u, l, v, lab=lab: l == lab)
        steps.extend(part)
        cur = steps[-1][1]
    if not steps or cur != entry:
        back = _walk_in(g, cset, cur, lambda u, l, v: v == entry)
        steps.extend(back)
    return steps


def check_liveness(p: Sketch, inst, prop: LeadsTo, graph: Graph | None = None,
                   state_cap=DEFAULT_STATE_CAP, int_bounds=None) -> CheckReport:
    """Search for a fair cycle inside the pending region of ``prop``."""
    t0 = time.perf_counter()
    g = graph or _full_graph(p, inst, state_cap, int_bounds)
    root, notq, pend = _pending(g, prop)
    nodes = [i for i, x in enumerate(pend) if x]
    hit = find_fair_scc(g, nodes, g.compiled.fair_actions)
    if hit is None:
        return CheckReport("pass", None, len(g.states), time.perf_counter() - t0, g)
    cset, required = hit
    states, labels = _prefix_search(g, root, notq, lambda i: i in cset)
    loop_index = len(states) - 1
    entry = g.index[states[-1]]
    steps = _fair_cycle(g, cset, entry, required)
    states = states + tuple(g.states[v] for _, v in steps)
    labels = labels + tuple(lab for lab, _ in steps)
    cex = Counterexample(LIVENESS, prop.name, states, labels, loop_index)
    return CheckReport("fail", cex, len(g.states), time.perf_counter() - t0, g)


def check_stuttering(p: Sketch, inst, prop: LeadsTo, graph: Graph | None = None,
                     state_cap=DEFAULT_STATE_CAP, int_bounds=None) -> CheckReport:
    """Search for a pending state with no fair, enabled, state-changing step."""
    t0 = time.perf_counter()
    g = graph or _full_graph(p, inst, state_cap, int_bounds)
    root, notq, pend = _pending(g, prop)
    fair = g.compiled.fair_actions

    def stuck(i):
        return not any(lab.action in fair and j != i for lab, j in g.edges[i])

    if not any(pend[i] and stuck(i) for i in range(len(g.states))):
        return CheckReport("pass", None, len(g.states), time.perf_counter() - t0, g)
    states, labels = _prefix_search(g, root, notq, stuck)
    cex = Counterexample(STUTTERING, prop.name, states, labels, len(states) - 1)
    return CheckReport("fail", cex, len(g.states), time.perf_counter() - t0, g)


def _full_graph(p, inst, state_cap, int_bounds):
    g, _ = explore(p, inst, invariants=[], deadlock_check=False, state_cap=state_cap,
                   int_bounds=int_bounds)
    return g


def verify(p: Sketch, inst, properties=None, state_cap=DEFAULT_STATE_CAP, int_bounds=None,
           deadlock_check=None) -> CheckReport:
    """Full check of a hole-free protocol; the first failure is reported."""
    t0 = time.perf_counter()
    if properties is None:
        properties = p.properties
    invs = [q for q in properties if isinstance(q, Invariant)]
    temporal = [q for q in properties if isinstance(q, LeadsTo)]
    g, cex = explore(p, inst, invs, deadlock_check, state_cap, int_bounds)
    if cex is None:
        for check in (check_stuttering, check_liveness):
            for prop in temporal:
                rep = check(p, inst, prop, graph=g)
                if not rep.passed:
                    cex = rep.counterexample
                    break
            if cex is not None:
                break
    return CheckReport("fail" if cex else "pass", cex, len(g.states), time.perf_counter() - t0, g)


# ---------------------------------------------------------------- replay

def replays(p: Sketch, inst, cex: Counterexample, int_bounds=None) -> bool:
    """Whether ``cex`` is a run of ``p``: s_0 initial, each labeled step valid."""
    comp = Compiled(p, inst, int_bounds)
    s0 = cex.states[0]
    if not all(comp.holds(e, s0) for e in p.init):
        return False
    for s, lab, t in cex.transitions():
        if (lab, t) not in comp.successors(s):
            return False
    if cex.loop_index is not None and cex.states[-1] != cex.states[cex.loop_index]:
        return False
    return True


def format_counterexample(cex: Counterexample) -> str:
    head = cex.kind.capitalize() + " violation" + (f" of {cex.prop}" if cex.prop else "")
    lines = [head]
    for i, s in enumerate(cex.states):
        marker = "LOOP> " if i == cex.loop_index else "      "
        lines.append(f"{marker}{i}: {s!r}")
        if i < len(cex.labels):
            lines.append(f"        --[ {cex.labels[i]} ]-->")
    if cex.kind == STUTTERING:
        lines.append("        (stutters forever)")
    return "\n".join(lines)
