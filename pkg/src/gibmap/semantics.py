"""Probability computations over G-assignments.

Two families live here:

* local, CPT-row computations (``local_bounds``, ``gib_holds_local``,
  ``gib_probability``...) that the search relies on, and
* exact computations over the full joint table (``joint_prob_exact``,
  ``gib_holds_global``...) that serve as ground truth for them.

The exact side never looks at CPT rows except to build the joint table.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .assign import GAssignment, meet, proper_span
from .errors import EmptyMeet, NotDeltaGib, NotGib, SpanMismatch, TooLarge, UndefinedConditional
from .model import Network, members

DEFAULT_EPS = 1e-9
GLOBAL_RTOL = 1e-12
TABLE_CAP = 10**7
REFINEMENT_CAP = 200_000


@dataclass(frozen=True)
class Bounds:
    lo: float
    hi: float

    def __iter__(self):
        return iter((self.lo, self.hi))


def _close(x: float, y: float, rtol: float) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y))


# ---------------------------------------------------------------------------
# local (CPT-row) side


def cond_value_set_prob(net: Network, v: int, mask: int, d: Mapping[int, int] | Sequence[int]) -> float:
    """P(v ∈ mask | parents = d), summing the CPT row entries of the members."""
    var = net.var(v)
    if isinstance(d, Mapping):
        missing = [p for p in var.parents if p not in d]
        if missing:
            raise SpanMismatch(f"no value for parent(s) {missing} of {var.name}")
        d = [d[p] for p in var.parents]
    elif len(d) != len(var.parents):
        raise SpanMismatch(f"{var.name} has {len(var.parents)} parents, got {len(d)} values")
    row = net.cpts[v].row(d)
    return math.fsum(row[i] for i in members(mask))


def _included_rows(net: Network, v: int, a: GAssignment):
    cpt = net.cpts[v]
    parents = net.variables[v].parents
    for combo in product(*(members(a.sets[p]) for p in parents)):
        yield cpt.row(combo)


def local_bounds(net: Network, v: int, a: GAssignment, stats: Counter | None = None) -> Bounds:
    """Min and max of P(a(v) | D) over complete parent assignments D included in ``a``."""
    net.var(v)
    idx = members(a.sets[v])
    lo, hi = math.inf, -math.inf
    n = 0
    for row in _included_rows(net, v, a):
        x = math.fsum(row[i] for i in idx)
        lo = min(lo, x)
        hi = max(hi, x)
        n += 1
    if stats is not None:
        stats["rows"] += n
    return Bounds(lo, hi)


def gib_holds_local(net: Network, a: GAssignment, v: int, eps: float = DEFAULT_EPS,
                    stats: Counter | None = None) -> bool:
    """GIB test at ``v`` from the parent rows alone (max - min <= eps * max)."""
    var = net.var(v)
    if a.is_full(v):
        return True
    if not var.parents:
        return True
    b = local_bounds(net, v, a, stats)
    return b.hi - b.lo <= eps * b.hi


def is_gib(net: Network, a: GAssignment, eps: float = DEFAULT_EPS, stats: Counter | None = None) -> bool:
    return all(gib_holds_local(net, a, v, eps, stats) for v in sorted(proper_span(a)))


def delta_gib_holds(net: Network, a: GAssignment, v: int, delta: float,
                    stats: Counter | None = None) -> bool:
    """δ-relaxed test: min >= (1 - delta) * max over included parent rows."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if a.is_full(v) or not net.var(v).parents:
        return True
    b = local_bounds(net, v, a, stats)
    return b.lo >= (1.0 - delta) * b.hi


def gib_probability(net: Network, a: GAssignment, eps: float = DEFAULT_EPS) -> float:
    """Probability of a GIB assignment as the product of its local conditionals."""
    p = 1.0
    for v in sorted(proper_span(a), key=lambda v: net.index[v]):
        b = local_bounds(net, v, a)
        if net.variables[v].parents and b.hi - b.lo > eps * b.hi:
            name = net.variables[v].name
            raise NotGib(f"GIB condition fails at {name}: bounds [{b.lo!r}, {b.hi!r}]")
        p *= b.hi
    return p


def delta_prob_bounds(net: Network, a: GAssignment, delta: float) -> Bounds:
    lo = hi = 1.0
    for v in sorted(proper_span(a), key=lambda v: net.index[v]):
        if not delta_gib_holds(net, a, v, delta):
            raise NotDeltaGib(f"delta-GIB condition fails at {net.variables[v].name}")
        b = local_bounds(net, v, a)
        lo *= b.lo
        hi *= b.hi
    return Bounds(lo, hi)


# ---------------------------------------------------------------------------
# exact (joint-table) side


def joint_table(net: Network, cap: int = TABLE_CAP) -> np.ndarray:
    """Full joint distribution, one axis per variable in id order.

    Entries are chain-rule products taken in variable-id order.
    """
    shape = tuple(len(v.domain) for v in net.variables)
    size = math.prod(shape)
    if size > cap:
        raise TooLarge(f"joint table would have {size} entries (cap {cap})")
    cached = net.cache.get("joint")
    if cached is not None:
        return cached
    table = np.ones(shape)
    for var, cpt in zip(net.variables, net.cpts):
        ids = list(var.parents) + [var.id]
        rows = np.array(cpt.rows, dtype=float).reshape(tuple(len(net.variables[i].domain) for i in ids))
        order = sorted(range(len(ids)), key=lambda k: ids[k])
        factor = rows.transpose(order)
        bshape = [1] * len(shape)
        for i in ids:
            bshape[i] = shape[i]
        table = table * factor.reshape(bshape)
    table.setflags(write=False)
    net.cache["joint"] = table
    return table


def joint_prob_exact(net: Network, a: GAssignment, cap: int = TABLE_CAP) -> float:
    """P(a) by summing every complete assignment included in ``a``."""
    table = joint_table(net, cap)
    if all(m == f for m, f in zip(a.sets, a.full)):
        return float(table.sum())
    return float(table[np.ix_(*(members(m) for m in a.sets))].sum())


def cond_prob_exact(net: Network, target: GAssignment, given: GAssignment, cap: int = TABLE_CAP) -> float:
    den = joint_prob_exact(net, given, cap)
    if den == 0.0:
        raise UndefinedConditional("conditioning event has probability zero")
    try:
        num = joint_prob_exact(net, meet(target, given), cap)
    except EmptyMeet:
        num = 0.0
    return num / den


def _ancestor_marginal(net: Network, v: int, cap: int) -> tuple[np.ndarray, list[int]]:
    key = ("anc-marginal", v)
    hit = net.cache.get(key)
    if hit is not None:
        return hit
    table = joint_table(net, cap)
    keep = sorted(net.ancestors(v) | {v})
    drop = tuple(i for i in range(len(net)) if i not in keep)
    marg = table.sum(axis=drop) if drop else table
    net.cache[key] = (marg, keep)
    return marg, keep


def _subset_indicator(k: int) -> np.ndarray:
    rows = np.arange(1, 1 << k)
    return ((rows[:, None] >> np.arange(k)[None, :]) & 1).astype(float)


@dataclass(frozen=True)
class RefinementScan:
    """Conditionals P(a(v) | B) over refinements B of ``a`` on the ancestors of ``v``.

    ``reference`` conditions on ``a`` itself. ``values`` holds every refinement
    with positive probability; when ``exhaustive`` is false only the
    all-singleton refinements were visited (enough to decide constancy, since
    every other conditional is a weighted average of those).
    """

    reference: float
    values: np.ndarray
    exhaustive: bool

    @property
    def lo(self) -> float:
        return float(self.values.min())

    @property
    def hi(self) -> float:
        return float(self.values.max())


def refinement_scan(net: Network, a: GAssignment, v: int, cap: int = TABLE_CAP,
                    refinement_cap: int = REFINEMENT_CAP) -> RefinementScan:
    net.var(v)
    marg, keep = _ancestor_marginal(net, v, cap)
    vpos = keep.index(v)
    anc = [u for u in keep if u != v]
    sub = marg[np.ix_(*(members(a.sets[u]) if u != v else range(marg.shape[vpos]) for u in keep))]
    q = sub.take(members(a.sets[v]), axis=vpos).sum(axis=vpos)
    p = sub.sum(axis=vpos)
    total = p.sum()
    if total == 0.0:
        raise UndefinedConditional(f"ancestors of {net.variables[v].name} have probability zero under the assignment")
    reference = float(q.sum() / total)

    sizes = [a.size(u) for u in anc]
    count = math.prod((1 << k) - 1 for k in sizes)
    exhaustive = count <= refinement_cap
    if exhaustive:
        for axis, k in enumerate(sizes):
            ind = _subset_indicator(k)
            q = np.moveaxis(np.tensordot(q, ind, axes=([axis], [1])), -1, axis)
            p = np.moveaxis(np.tensordot(p, ind, axes=([axis], [1])), -1, axis)
    ok = p > 0
    values = q[ok] / p[ok]
    return RefinementScan(reference, np.atleast_1d(values), exhaustive)


def gib_holds_global(net: Network, a: GAssignment, v: int, rtol: float = GLOBAL_RTOL,
                     cap: int = TABLE_CAP) -> bool:
    """GIB test straight from the definition: P(a(v) | B) is the same for every refinement B."""
    if a.is_full(v) or not net.ancestors(v):
        return True
    scan = refinement_scan(net, a, v, cap)
    c = scan.reference
    return bool(np.all(np.abs(scan.values - c) <= rtol * np.maximum(np.abs(scan.values), abs(c))))


def delta_gib_holds_global(net: Network, a: GAssignment, v: int, delta: float,
                           cap: int = TABLE_CAP) -> bool:
    if a.is_full(v) or not net.ancestors(v):
        return True
    scan = refinement_scan(net, a, v, cap)
    return scan.lo >= (1.0 - delta) * scan.hi
