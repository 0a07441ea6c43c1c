"""Generalized (disjunctive) assignments and their refinement lattice.

A :class:`GAssignment` stores one value-set bitmask per network variable.
Variables that are "unassigned" carry their full domain, so the stored form
is canonical: leaving a variable out and assigning it ``D_v`` compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EmptyMeet, SpanMismatch, UnknownValue
from .model import Network, mask_key, members


@dataclass(frozen=True)
class GAssignment:
    sets: tuple[int, ...]
    full: tuple[int, ...] = field(compare=False, repr=False)

    @classmethod
    def top(cls, net: Network) -> "GAssignment":
        """The empty G-assignment (every variable free)."""
        full = net.full
        return cls(full, full)

    @classmethod
    def of(cls, net: Network, entries: Mapping[str, object] | None = None) -> "GAssignment":
        """Build from ``{name: value | concept | [values]}``."""
        a = cls.top(net)
        for name, spec in (entries or {}).items():
            var = net.var(name)
            a = a.with_set(var.id, var.mask(spec))
        return a

    @classmethod
    def complete(cls, net: Network, values: Mapping[int, int]) -> "GAssignment":
        """All-singleton G-assignment from ``{var id: value index}``."""
        sets = list(net.full)
        for v, i in values.items():
            sets[v] = 1 << i
        return cls(tuple(sets), net.full)

    def __getitem__(self, v: int) -> int:
        return self.sets[v]

    def __len__(self) -> int:
        return len(self.sets)

    def with_set(self, v: int, mask: int) -> "GAssignment":
        if not mask or mask & ~self.full[v]:
            raise UnknownValue(f"invalid value set {mask:#b} for variable {v}")
        sets = list(self.sets)
        sets[v] = mask
        return GAssignment(tuple(sets), self.full)

    def is_full(self, v: int) -> bool:
        return self.sets[v] == self.full[v]

    def entries(self) -> dict[int, int]:
        """Properly assigned variables only (the compact form)."""
        return {v: m for v, m in enumerate(self.sets) if m != self.full[v]}

    def size(self, v: int) -> int:
        return bin(self.sets[v]).count("1")


def proper_span(a: GAssignment) -> frozenset:
    return frozenset(v for v, (m, f) in enumerate(zip(a.sets, a.full)) if m != f)


def refines(b: GAssignment, a: GAssignment) -> bool:
    """True iff ``b`` is at least as refined as ``a`` (``b ⊆ a``)."""
    return all(mb & ~ma == 0 for mb, ma in zip(b.sets, a.sets))


def strictly_refines(b: GAssignment, a: GAssignment) -> bool:
    return refines(b, a) and b.sets != a.sets


def includes(f: Mapping[int, int], a: GAssignment) -> bool:
    """Whether the complete assignment ``f`` (var id -> value index) lies in ``a``."""
    for v in proper_span(a):
        if v not in f:
            raise SpanMismatch(f"complete assignment gives no value to variable {v}")
        if not a.sets[v] >> f[v] & 1:
            return False
    return True


def meet(a: GAssignment, b: GAssignment) -> GAssignment:
    """Greatest common refinement; raises :class:`EmptyMeet` on an empty intersection."""
    sets = []
    for v, (ma, mb) in enumerate(zip(a.sets, b.sets)):
        m = ma & mb
        if not m:
            raise EmptyMeet(f"value sets for variable {v} are disjoint")
        sets.append(m)
    return GAssignment(tuple(sets), a.full)


def compact(a: GAssignment) -> GAssignment:
    """Drop full-domain entries. The canonical form already has none to drop."""
    return GAssignment(tuple(a.sets), a.full)


def restrict(a: GAssignment, s: Iterable[int]) -> GAssignment:
    keep = set(s)
    return GAssignment(tuple(m if v in keep else f for v, (m, f) in enumerate(zip(a.sets, a.full))), a.full)


def complete_assignments(a: GAssignment, span: Iterable[int]):
    """Yield every complete assignment over ``span`` included in ``a``, as dicts."""
    span = list(span)
    choices = [members(a.sets[v]) for v in span]

    def rec(i, acc):
        if i == len(span):
            yield dict(acc)
            return
        for val in choices[i]:
            acc[span[i]] = val
            yield from rec(i + 1, acc)
        del acc[span[i]]

    if not span:
        yield {}
        return
    yield from rec(0, {})


def render_lines(net: Network, a: GAssignment, first: Iterable[int] = ()) -> list[str]:
    """``name=val|val`` lines; ``first`` variables lead (in index order), the rest by name."""
    ents = a.entries()
    lead = sorted((v for v in set(first) if v in ents), key=lambda v: net.index[v])
    rest = sorted((v for v in ents if v not in lead), key=lambda v: net.variables[v].name)
    return [f"{net.variables[v].name}={net.variables[v].label(ents[v])}" for v in lead + rest]


def render(net: Network, a: GAssignment, first: Iterable[int] = ()) -> str:
    return "\n".join(render_lines(net, a, first))


def sort_key(a: GAssignment) -> tuple:
    return tuple(mask_key(m) for m in a.sets)
