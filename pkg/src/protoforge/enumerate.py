"""Typed tree grammars and bottom-up enumeration of their languages.

Three strategies are provided:

* :func:`enumerate_naive` keeps a priority queue of partial expressions and
  expands every placeholder of the cheapest one at each step.
* :class:`CachedEnumerator` with ``reduce=False`` builds all expressions of
  size n from cached expressions of smaller sizes.
* ``reduce=True`` additionally drops any expression whose normal form was
  already seen for the same nonterminal; ``shortcircuit=True`` only builds
  one argument order for commutative operators.

All streams emit expressions in nondecreasing size.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from . import expr as E
from .normal import normalize


@dataclass
class Grammar:
    name: str
    nonterminals: dict          # NT name -> TypeExpr
    start: str
    productions: dict           # NT name -> [template Expr]

    def __post_init__(self):
        if self.start not in self.nonterminals:
            raise ValueError(f"start symbol {self.start} is not a nonterminal")
        for nt, prods in self.productions.items():
            want = self.nonterminals[nt]
            for t in prods:
                if t.type != want:
                    raise ValueError(f"production {E.to_text(t)} has type {t.type}, {nt} is {want}")
                for ph in E.placeholders(t):
                    if ph.val not in self.nonterminals or self.nonterminals[ph.val] != ph.type:
                        raise ValueError(f"placeholder {ph.val} in {E.to_text(t)} is ill-typed")

    @property
    def start_type(self):
        return self.nonterminals[self.start]


# ----------------------------------------------------------------- naive

def expand_partial(d: E.Expr, g: Grammar) -> list:
    """All expressions obtained by replacing every placeholder of ``d`` by
    one of its productions."""
    holes = E.placeholders(d)
    if not holes:
        return []
    choices = [g.productions.get(h.val, []) for h in holes]
    return [E.replace_placeholders(d, combo) for combo in itertools.product(*choices)]


def enumerate_naive(g: Grammar, max_size: int | None = None):
    """Priority-queue enumeration over partial expressions; may repeat."""
    heap = []
    counter = itertools.count()
    for t in g.productions.get(g.start, []):
        heapq.heappush(heap, (t.size, next(counter), t))
    while heap:
        size, _, d = heapq.heappop(heap)
        if max_size is not None and size > max_size:
            return
        if not E.placeholders(d):
            yield d
            continue
        for nd in expand_partial(d, g):
            heapq.heappush(heap, (nd.size, next(counter), nd))


# ---------------------------------------------------------------- cached

@dataclass
class EnumStats:
    built: int = 0
    emitted: int = 0
    duplicates: int = 0
    pair_iterations: int = 0       # (e1, e2) pairs composed by commutative productions
    sizes_done: int = 0


@dataclass
class _Prod:
    template: E.Expr
    children: tuple     # NT names, left to right
    overhead: int
    commutative: bool


def _compositions(total, k, nonempty_sizes):
    """Tuples of k sizes summing to ``total`` drawn from the given per-child
    admissible size sets, lexicographic."""
    if k == 0:
        if total == 0:
            yield ()
        return
    first = nonempty_sizes[0]
    for s in sorted(first):
        if s > total:
            break
        for rest in _compositions(total - s, k - 1, nonempty_sizes[1:]):
            yield (s,) + rest


class CachedEnumerator:
    """Size-indexed cache enumeration of a grammar's start symbol."""

    def __init__(self, g: Grammar, reduce: bool = True, shortcircuit: bool = True,
                 max_size: int | None = None):
        self.g = g
        self.reduce = reduce
        self.shortcircuit = shortcircuit
        self.max_size = max_size
        self.stats = EnumStats()
        self.cache = {nt: {} for nt in g.nonterminals}
        self.seen = {nt: set() for nt in g.nonterminals}
        self.prods = {}
        for nt in g.nonterminals:
            ps = []
            for t in g.productions.get(nt, []):
                kids = tuple(p.val for p in E.placeholders(t))
                comm = (t.op in E.COMMUTATIVE and len(t.args) == 2 and len(kids) == 2
                        and all(a.op == E.NT for a in t.args) and kids[0] == kids[1])
                ps.append(_Prod(t, kids, t.size - len(kids), comm))
            self.prods[nt] = ps
        self.bound_c = max((p.overhead for ps in self.prods.values() for p in ps), default=0)
        self.exhausted = False
        self._largest = 0           # largest size holding any entry
        self._sizes = {nt: set() for nt in g.nonterminals}   # nonempty sizes per NT
        self._order_key = {}
        self._eager = self._start_feeds_others()

    def _start_feeds_others(self):
        """Whether some other nonterminal chain-derives the start symbol."""
        for nt, ps in self.prods.items():
            if nt == self.g.start:
                continue
            for p in ps:
                if p.overhead == 0 and p.children == (self.g.start,):
                    return True
        return False

    def entries(self, nt, n):
        return self.cache[nt].get(n, [])

    def _key(self, e):
        k = self._order_key.get(e)
        if k is None:
            k = self._order_key[e] = (e.size, E.to_text(e))
        return k

    def _admit(self, nt, n, e, chain_seen=None):
        self.stats.built += 1
        if self.reduce:
            nf = normalize(e)
            if nf in self.seen[nt]:
                self.stats.duplicates += 1
                return False
            self.seen[nt].add(nf)
        elif chain_seen is not None:
            if e in chain_seen:
                return False
            chain_seen.add(e)
        self.cache[nt].setdefault(n, []).append(e)
        self._sizes[nt].add(n)
        self._largest = max(self._largest, n)
        return True

    def _build(self, nt, n):
        """Expressions of size n from non-chain productions of nt."""
        for p in self.prods[nt]:
            k = len(p.children)
            if k == 0:
                if p.template.size == n:
                    yield p.template
                continue
            if p.overhead == 0:
                continue
            admissible = [self._sizes[c] for c in p.children]
            for sizes in _compositions(n - p.overhead, k, admissible):
                lists = [self.cache[c].get(s, []) for c, s in zip(p.children, sizes)]
                if p.commutative and self.shortcircuit:
                    if sizes[0] > sizes[1]:
                        continue
                    for a in lists[0]:
                        ka = self._key(a)
                        for b in lists[1]:
                            if sizes[0] == sizes[1] and self._key(b) < ka:
                                continue
                            if self.reduce and a is b and p.template.op in E.IDEMPOTENT:
                                continue
                            self.stats.pair_iterations += 1
                            yield E.replace_placeholders(p.template, (a, b))
                    continue
                for combo in itertools.product(*lists):
                    if p.commutative:
                        if self.reduce and combo[0] is combo[1] and p.template.op in E.IDEMPOTENT:
                            continue
                        self.stats.pair_iterations += 1
                    yield E.replace_placeholders(p.template, combo)

    def _chain_fixpoint(self, n, emit):
        """Apply chain productions X ::= Y at size n until nothing changes."""
        cursors = {}
        chain_seen = {nt: set(self.cache[nt].get(n, [])) for nt in self.g.nonterminals} \
            if not self.reduce else {nt: None for nt in self.g.nonterminals}
        changed = True
        while changed:
            changed = False
            for nt, ps in self.prods.items():
                for idx, p in enumerate(ps):
                    if p.overhead != 0 or len(p.children) != 1:
                        continue
                    src = self.cache[p.children[0]].get(n, [])
                    start = cursors.get((nt, idx), 0)
                    cursors[(nt, idx)] = len(src)
                    for e in src[start:]:
                        if self._admit(nt, n, e, chain_seen[nt]):
                            changed = True
                            if nt == self.g.start:
                                emit.append(e)

    def _level(self, n):
        """Fill size n for every nonterminal; yield new start entries lazily."""
        start = self.g.start
        others = [nt for nt in self.g.nonterminals if nt != start]
        order = others + [start]
        for nt in order:
            lazy = nt == start and not self._eager
            for e in self._build(nt, n):
                if self._admit(nt, n, e) and nt == start:
                    if lazy:
                        yield e
                    else:
                        self._pending.append(e)
        chained = []
        self._chain_fixpoint(n, chained)
        if not self._eager:
            yield from chained
        else:
            yield from self._pending
            yield from chained
        self._pending = []

    def __iter__(self):
        n = 0
        self._pending = []
        while True:
            n += 1
            if self.max_size is not None and n > self.max_size:
                return
            for e in self._level(n):
                self.stats.emitted += 1
                yield e
            self.stats.sizes_done = n
            bound = max((p.overhead + len(p.children) * self._largest
                         for ps in self.prods.values() for p in ps), default=0)
            if n >= bound:
                self.exhausted = True
                return


def enumerate_cached(g: Grammar, reduce: bool = True, shortcircuit: bool = True,
                     max_size: int | None = None):
    return iter(CachedEnumerator(g, reduce, shortcircuit, max_size))


def make_stream(g: Grammar, strategy="cached", reduce=True, shortcircuit=True, max_size=None):
    if strategy == "naive":
        return enumerate_naive(g, max_size)
    if strategy != "cached":
        raise ValueError(f"unknown strategy {strategy!r}")
    return enumerate_cached(g, reduce, shortcircuit, max_size)


# ----------------------------------------------------------------- joint

class Completion(dict):
    """Hole name -> expression, with the combined size of the bodies."""

    @property
    def size(self):
        return sum(e.size for e in self.values())

    def __repr__(self):
        return "{" + ", ".join(f"{h} := {E.to_text(e)}" for h, e in self.items()) + "}"


class _Levels:
    """Groups a nondecreasing stream into per-size lists, on demand."""

    def __init__(self, stream):
        self.it = iter(stream)
        self.levels = {}
        self.done_upto = 0
        self.buffer = None
        self.finished = False
        self.largest = 0
        self.total = 0

    def level(self, n):
        while not self.finished and self.done_upto < n:
            if self.buffer is None:
                try:
                    self.buffer = next(self.it)
                except StopIteration:
                    self.finished = True
                    break
            e = self.buffer
            if e.size > self.done_upto + 1:
                self.done_upto += 1
                continue
            self.levels.setdefault(e.size, []).append(e)
            self.largest = max(self.largest, e.size)
            self.total += 1
            self.buffer = None
        return self.levels.get(n, [])


def enumerate_joint(holes, grammars: dict, reduce=True, shortcircuit=True,
                    max_combined_size=None, strategy="cached"):
    """Completions in nondecreasing combined size.

    Within one combined size the per-hole sizes run through compositions in
    lexicographic order, then the cached expressions in cache order.
    """
    holes = list(holes)
    names = [h.name if hasattr(h, "name") else h for h in holes]
    if not names:
        yield Completion()
        return
    streams = [make_stream(grammars[n], strategy, reduce, shortcircuit) for n in names]
    if len(names) == 1:
        for e in streams[0]:
            if max_combined_size is not None and e.size > max_combined_size:
                return
            yield Completion({names[0]: e})
        return
    levels = [_Levels(s) for s in streams]
    h = len(names)
    K = h
    while max_combined_size is None or K <= max_combined_size:
        for sizes in _plain_compositions(K, h):
            lists = [lv.level(s) for lv, s in zip(levels, sizes)]
            if not all(lists):
                continue
            for combo in itertools.product(*lists):
                yield Completion(zip(names, combo))
        if all(lv.finished for lv in levels):
            if any(lv.total == 0 for lv in levels) or K >= sum(lv.largest for lv in levels):
                return
        K += 1


def _plain_compositions(total, k):
    if k == 1:
        yield (total,)
        return
    for s in range(1, total - k + 2):
        for rest in _plain_compositions(total - s, k - 1):
            yield (s,) + rest
