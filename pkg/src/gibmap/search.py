"""Best-first search for GIB-MAP explanations.

States are partial G-assignments. The agenda is a max-heap on the product of
local conditionals over expanded nodes, which never underestimates the
probability of any GIB assignment reachable from the state. Nodes are
expanded in increasing index order, so a node's parents are always still
open when it is expanded and its own set is never touched again afterwards.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Mapping

from .assign import GAssignment, meet, proper_span, render
from .errors import AgendaExhausted, EmptyMeet, NotSelected, TooLarge
from .hypercube import maximal_gib_hypercubes
from .model import Network
from .semantics import (
    DEFAULT_EPS,
    Bounds,
    delta_gib_holds,
    delta_prob_bounds,
    gib_holds_local,
    joint_prob_exact,
    local_bounds,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchState:
    assignment: GAssignment
    expanded: frozenset = frozenset()
    last_expanded: int = 0
    score: float = 1.0


@dataclass(frozen=True)
class Explanation:
    assignment: GAssignment
    probability: float
    evidence: tuple[int, ...] = ()
    bounds: Bounds | None = None
    experimental: bool = False

    def lines(self, net: Network) -> list[str]:
        text = render(net, self.assignment, self.evidence)
        return text.split("\n") if text else []

    def to_dict(self, net: Network) -> dict:
        d = {
            "p": float(f"{self.probability:.12g}"),
            "assignment": {net.variables[v].name: net.variables[v].label(m)
                           for v, m in sorted(self.assignment.entries().items(),
                                              key=lambda kv: _render_rank(net, kv[0], self.evidence))},
        }
        if self.bounds is not None:
            d["p_bounds"] = [float(f"{self.bounds.lo:.12g}"), float(f"{self.bounds.hi:.12g}")]
            d["experimental"] = True
        return d


def _render_rank(net: Network, v: int, evidence) -> tuple:
    if v in evidence:
        return (0, net.index[v], "")
    return (1, 0, net.variables[v].name)


def parse_evidence(net: Network, evidence: Mapping[str, str]) -> dict[int, int]:
    out = {}
    for name, value in evidence.items():
        var = net.var(name)
        out[var.id] = var.value_index(value)
    return out


def initial_state(net: Network, evidence: Mapping[str, str]) -> SearchState:
    ev = parse_evidence(net, evidence)
    if not ev:
        log.warning("empty evidence: the only explanation is the empty assignment")
    return SearchState(GAssignment.complete(net, ev))


def select_node(net: Network, s: SearchState) -> int | None:
    open_ = [v for v in proper_span(s.assignment) if v not in s.expanded]
    if not open_:
        return None
    return min(open_, key=lambda v: net.index[v])


def expand(net: Network, s: SearchState, v: int, delta: float = 0.0, *, eps: float = DEFAULT_EPS,
           refine_target: bool = True, evidence: frozenset | set = frozenset()) -> list[SearchState]:
    """Successor states of ``s`` obtained by expanding node ``v``.

    Evidence nodes always keep their observed value; other nodes may have
    their own set narrowed together with their parents when
    ``refine_target`` is set.
    """
    if v != select_node(net, s):
        raise NotSelected(f"{net.variables[v].name} is not the next node to expand")
    a = s.assignment
    holds = delta_gib_holds(net, a, v, delta) if delta > 0 else gib_holds_local(net, a, v, eps)
    expanded = s.expanded | {v}
    if holds:
        factor = local_bounds(net, v, a).hi
        return [SearchState(a, expanded, net.index[v], s.score * factor)]
    cubes = maximal_gib_hypercubes(net, v, a, delta, refine_target and v not in evidence, eps)
    children = []
    for h in cubes:
        try:
            b = meet(a, h.assignment(net))
        except EmptyMeet:
            continue
        children.append(SearchState(b, expanded, net.index[v], s.score * h.value))
    return children


@dataclass
class _Agenda:
    net: Network
    heap: list = field(default_factory=list)
    seen: set = field(default_factory=set)
    counter: itertools.count = field(default_factory=itertools.count)

    def push(self, s: SearchState) -> bool:
        key = (s.assignment, s.expanded)
        if key in self.seen:
            return False
        self.seen.add(key)
        n_open = len(proper_span(s.assignment) - s.expanded)
        heapq.heappush(self.heap, (-s.score, n_open, render(self.net, s.assignment), next(self.counter), s))
        return True

    def pop(self) -> SearchState:
        return heapq.heappop(self.heap)[-1]

    def __len__(self) -> int:
        return len(self.heap)


def gib_map_search(net: Network, evidence: Mapping[str, str], delta: float = 0.0, k: int = 1, *,
                   eps: float = DEFAULT_EPS, refine_target: bool = True,
                   trace: list | None = None) -> list[Explanation]:
    """The ``k`` most probable GIB assignments carrying the evidence, best first.

    States with score zero are dropped, so an impossible observation
    raises :class:`AgendaExhausted` instead of returning a zero explanation.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    ev_ids = frozenset(parse_evidence(net, evidence))
    agenda = _Agenda(net)
    agenda.push(initial_state(net, evidence))
    out: list[Explanation] = []
    emitted = set()
    while agenda and len(out) < k:
        s = agenda.pop()
        if trace is not None:
            trace.append({"event": "pop", "score": s.score, "assignment": render(net, s.assignment)})
        v = select_node(net, s)
        if v is None:
            if s.assignment in emitted:
                continue
            emitted.add(s.assignment)
            out.append(_explanation(net, s, ev_ids, delta))
            if trace is not None:
                trace.append({"event": "emit", "score": s.score, "assignment": render(net, s.assignment)})
            continue
        children = expand(net, s, v, delta, eps=eps, refine_target=refine_target, evidence=ev_ids)
        for c in children:
            if c.score > 0.0 and agenda.push(c) and trace is not None:
                trace.append({"event": "expand", "node": net.variables[v].name, "score": c.score,
                              "assignment": render(net, c.assignment)})
    if not out:
        raise AgendaExhausted("no explanation with positive probability exists for this evidence")
    return out


def _explanation(net: Network, s: SearchState, ev_ids: frozenset, delta: float) -> Explanation:
    if delta == 0.0:
        return Explanation(s.assignment, s.score, tuple(sorted(ev_ids)))
    bounds = delta_prob_bounds(net, s.assignment, delta)
    try:
        p = joint_prob_exact(net, s.assignment)
    except TooLarge:
        p = bounds.hi
    return Explanation(s.assignment, p, tuple(sorted(ev_ids)), bounds, experimental=True)
