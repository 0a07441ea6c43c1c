"""GIB hypercubes: value-set assignments to a node and its parents under which
the node's conditional does not depend on how the parents are refined.

``maximal_gib_hypercubes`` is the search's next-state generator.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .assign import GAssignment, proper_span
from .errors import BadSpan, ImpermissibleSet
from .model import Network, mask_key
from .semantics import DEFAULT_EPS, Bounds, local_bounds


@dataclass(frozen=True)
class GIBHypercube:
    base: int
    target: int
    parent_sets: tuple[int, ...]
    bounds: Bounds

    @property
    def value(self) -> float:
        """Common conditional of the target given the parent sets (upper bound when δ > 0)."""
        return self.bounds.hi

    def assignment(self, net: Network) -> GAssignment:
        a = GAssignment.top(net).with_set(self.base, self.target)
        for p, m in zip(net.variables[self.base].parents, self.parent_sets):
            a = a.with_set(p, m)
        return a

    def refines(self, other: "GIBHypercube") -> bool:
        if self.target & ~other.target:
            return False
        return all(m & ~o == 0 for m, o in zip(self.parent_sets, other.parent_sets))

    def sort_key(self) -> tuple:
        return (mask_key(self.target),) + tuple(mask_key(m) for m in self.parent_sets)


def _passes(b: Bounds, delta: float, eps: float, root: bool) -> bool:
    if root:
        return True
    if delta > 0:
        return b.lo >= (1.0 - delta) * b.hi
    return b.hi - b.lo <= eps * b.hi


def _bounds(net: Network, v: int, target: int, parent_sets: tuple[int, ...]) -> Bounds:
    a = GAssignment.top(net).with_set(v, target)
    for p, m in zip(net.variables[v].parents, parent_sets):
        a = a.with_set(p, m)
    return local_bounds(net, v, a)


def is_gib_hypercube(net: Network, v: int, h: GAssignment, delta: float = 0.0,
                     eps: float = DEFAULT_EPS) -> bool:
    """Check a candidate G-hypercube based on ``v`` (given as a G-assignment)."""
    var = net.var(v)
    allowed = {v, *var.parents}
    stray = proper_span(h) - allowed
    if stray:
        names = sorted(net.variables[u].name for u in stray)
        raise BadSpan(f"hypercube based on {var.name} assigns {names}")
    for u in sorted(allowed):
        if h.sets[u] not in net.permissible_sets(u):
            raise ImpermissibleSet(f"{net.variables[u].name}: {h.sets[u]:#b} is not permissible")
    b = local_bounds(net, v, h)
    return _passes(b, delta, eps, not var.parents or h.is_full(v))


def permissible_subsets(net: Network, u: int, mask: int) -> list[int]:
    return [m for m in net.permissible_sets(u) if m & ~mask == 0]


def _maximal_inside(fam: list[int], mask: int, strict: bool) -> list[int]:
    inside = [m for m in fam if m & ~mask == 0 and (m != mask or not strict)]
    return [m for m in inside if not any(o != m and m & ~o == 0 for o in inside)]


def maximal_antichain(cubes: list[GIBHypercube]) -> list[GIBHypercube]:
    """Drop every hypercube that strictly refines another one."""
    uniq = {(h.target, h.parent_sets): h for h in cubes}.values()
    keep = [h for h in uniq
            if not any(o is not h and h.refines(o) for o in uniq)]
    return sorted(keep, key=GIBHypercube.sort_key)


def _descend(net: Network, v: int, target: int, start: tuple[tuple[int, ...], ...],
             delta: float, eps: float) -> list[GIBHypercube]:
    """Breadth-first walk down the parent-set product lattice from the top candidates.

    A passing candidate is collected and not refined further: any refinement
    of a passing candidate (with the same target) passes too.
    """
    parents = net.variables[v].parents
    fams = [list(net.permissible_sets(p)) for p in parents]
    root = not parents or target == net.variables[v].full
    found = []
    seen = set()
    queue = deque()
    for cand in start:
        if cand not in seen:
            seen.add(cand)
            queue.append(cand)
    while queue:
        cand = queue.popleft()
        b = _bounds(net, v, target, cand)
        if _passes(b, delta, eps, root):
            found.append(GIBHypercube(v, target, cand, b))
            continue
        for i, m in enumerate(cand):
            for child in _maximal_inside(fams[i], m, strict=True):
                nxt = cand[:i] + (child,) + cand[i + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return found


def maximal_gib_hypercubes(net: Network, v: int, constraint: GAssignment, delta: float = 0.0,
                           refine_target: bool = False, eps: float = DEFAULT_EPS) -> list[GIBHypercube]:
    """All maximal GIB hypercubes based on ``v`` that refine ``constraint``.

    With ``refine_target`` false the target set is pinned to ``constraint[v]``;
    otherwise every permissible subset of it is tried and maximality is taken
    over target and parent sets jointly.
    """
    var = net.var(v)
    tops = [_maximal_inside(list(net.permissible_sets(p)), constraint.sets[p], strict=False)
            for p in var.parents]
    start = [()]
    for options in tops:
        start = [c + (m,) for c in start for m in options]
    if refine_target:
        targets = permissible_subsets(net, v, constraint.sets[v])
        if constraint.sets[v] not in targets:
            targets.append(constraint.sets[v])
    else:
        targets = [constraint.sets[v]]
    cubes = []
    for t in targets:
        cubes.extend(_descend(net, v, t, tuple(start), delta, eps))
    return maximal_antichain(cubes)
