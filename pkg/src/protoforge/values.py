"""Runtime values, types, instance bindings and protocol states.

Values use native Python objects wherever one fits:

    Bool            -> bool
    Int             -> int
    OfDomain(D)     -> Elem(domain, name)
    Set(T)          -> frozenset
    Func(K, V)      -> FuncV (immutable, total over the key universe)

Structural equality of these objects is the equality of the expression
language.  Since a well-typed program never compares a Bool with an Int,
the ``True == 1`` quirk of Python does not leak into semantics.
"""
from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterable

from .errors import UnboundedType


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class BoolType:
    def __str__(self):
        return "Bool"


@dataclass(frozen=True)
class IntType:
    def __str__(self):
        return "Int"


@dataclass(frozen=True)
class DomainType:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class SetType:
    elem: "TypeExpr"

    def __str__(self):
        return f"Set({self.elem})"


@dataclass(frozen=True)
class FuncType:
    key: "TypeExpr"
    val: "TypeExpr"

    def __str__(self):
        return f"Func({self.key}, {self.val})"


TypeExpr = BoolType | IntType | DomainType | SetType | FuncType

BOOL = BoolType()
INT = IntType()


def is_enumerable_key(t) -> bool:
    return isinstance(t, (BoolType, IntType, DomainType))


# --------------------------------------------------------------- values

@dataclass(frozen=True, order=True)
class Elem:
    """An opaque element of a Domain parameter.  Only equality is meaningful."""
    domain: str
    name: str

    def __repr__(self):
        return self.name

    __str__ = __repr__


class FuncV(Mapping):
    """Finite total function, stored extensionally."""

    __slots__ = ("_map", "_hash")

    def __init__(self, entries):
        self._map = dict(entries)
        self._hash = None

    def __getitem__(self, key):
        return self._map[key]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        if isinstance(other, FuncV):
            return self._map == other._map
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def update(self, key, val) -> "FuncV":
        m = dict(self._map)
        m[key] = val
        return FuncV(m)

    def __repr__(self):
        items = sorted(self._map.items(), key=lambda kv: value_key(kv[0]))
        return "(" + ", ".join(f"{format_value(k)} :> {format_value(v)}" for k, v in items) + ")"


def value_key(v):
    """Total order over values, used for canonical printing and sorting."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (1, v)
    if isinstance(v, Elem):
        return (2, v.domain, v.name)
    if isinstance(v, frozenset):
        return (3, len(v), tuple(sorted(value_key(x) for x in v)))
    if isinstance(v, FuncV):
        return (4, tuple(sorted((value_key(k), value_key(x)) for k, x in v.items())))
    raise TypeError(f"not a protocol value: {v!r}")


def format_value(v) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, frozenset):
        return "{" + ", ".join(format_value(x) for x in sorted(v, key=value_key)) + "}"
    return repr(v)


# ------------------------------------------------------------- instances

@dataclass(frozen=True)
class InstanceBinding:
    """Values for the parameters of one protocol instance.

    ``domains`` maps each Domain parameter to its element ids in declaration
    order; ``consts`` maps every other parameter to its value.
    """
    domains: tuple = ()   # ((name, (id, ...)), ...)
    consts: tuple = ()    # ((name, value), ...)
    _env: dict = field(default=None, compare=False, hash=False, repr=False)

    @classmethod
    def make(cls, domains: dict | None = None, consts: dict | None = None):
        domains = domains or {}
        consts = consts or {}
        for d, ids in domains.items():
            if len(set(ids)) != len(ids):
                raise ValueError(f"duplicate element ids in domain {d}")
        return cls(tuple((d, tuple(ids)) for d, ids in domains.items()),
                   tuple(consts.items()))

    def elements(self, domain: str) -> tuple:
        for d, ids in self.domains:
            if d == domain:
                return tuple(Elem(d, i) for i in ids)
        raise KeyError(f"domain {domain} is not bound")

    def domain_size(self, domain: str) -> int:
        return len(self.elements(domain))

    @property
    def domain_names(self):
        return [d for d, _ in self.domains]

    def env(self) -> dict:
        """Parameter name -> value; a Domain parameter denotes its element set."""
        if self._env is None:
            env = {d: frozenset(Elem(d, i) for i in ids) for d, ids in self.domains}
            env.update(self.consts)
            object.__setattr__(self, "_env", env)
        return self._env

    def describe(self) -> str:
        parts = [f"{d}={{{', '.join(ids)}}}" for d, ids in self.domains]
        parts += [f"{k}={format_value(v)}" for k, v in self.consts]
        return ", ".join(parts)


def type_check(v, t, inst: InstanceBinding) -> bool:
    if isinstance(t, BoolType):
        return isinstance(v, bool)
    if isinstance(t, IntType):
        return isinstance(v, int) and not isinstance(v, bool)
    if isinstance(t, DomainType):
        return isinstance(v, Elem) and v.domain == t.name and v in inst.elements(t.name)
    if isinstance(t, SetType):
        return isinstance(v, frozenset) and all(type_check(x, t.elem, inst) for x in v)
    if isinstance(t, FuncType):
        if not isinstance(v, FuncV):
            return False
        keys = universe(t.key, inst, None) if not isinstance(t.key, IntType) else None
        if keys is not None and set(v) != set(keys):
            return False
        return all(type_check(k, t.key, inst) and type_check(x, t.val, inst)
                   for k, x in v.items())
    return False


def universe(t, inst: InstanceBinding, int_bounds: tuple[int, int] | None = None) -> list:
    """All inhabitants of ``t`` in a fixed order (false<true, declaration order,
    ascending integers; sets by growing size)."""
    if isinstance(t, BoolType):
        return [False, True]
    if isinstance(t, IntType):
        if int_bounds is None:
            raise UnboundedType("Int universe requires explicit bounds")
        lo, hi = int_bounds
        return list(range(lo, hi + 1))
    if isinstance(t, DomainType):
        return list(inst.elements(t.name))
    if isinstance(t, SetType):
        base = universe(t.elem, inst, int_bounds)
        return [frozenset(c) for r in range(len(base) + 1)
                for c in itertools.combinations(base, r)]
    if isinstance(t, FuncType):
        keys = universe(t.key, inst, int_bounds)
        vals = universe(t.val, inst, int_bounds)
        return [FuncV(zip(keys, combo)) for combo in itertools.product(vals, repeat=len(keys))]
    raise TypeError(f"unknown type {t!r}")


# ----------------------------------------------------------------- states

class State(Mapping):
    """Immutable assignment of values to state variables."""

    __slots__ = ("names", "values", "_hash")

    def __init__(self, names: tuple, values: tuple):
        self.names = tuple(names)
        self.values = tuple(values)
        if len(self.names) != len(self.values):
            raise ValueError("state arity mismatch")
        self._hash = None

    @classmethod
    def from_dict(cls, names: Iterable[str], assignment: Mapping):
        names = tuple(names)
        return cls(names, tuple(assignment[n] for n in names))

    def __getitem__(self, name):
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        if isinstance(other, State):
            return self.names == other.names and self.values == other.values
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.values)
        return self._hash

    def __repr__(self):
        return "[" + ", ".join(f"{n} = {format_value(v)}" for n, v in zip(self.names, self.values)) + "]"
