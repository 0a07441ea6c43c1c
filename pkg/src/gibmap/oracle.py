"""Brute-force ground truth for small networks.

Everything here enumerates: candidate explanations, hypercubes, refinements.
It is meant for desk-scale networks and for cross-checking the search.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from typing import Mapping

import numpy as np

from . import semantics
from .assign import GAssignment, render
from .errors import AgendaExhausted, TooLarge, UndefinedConditional
from .hypercube import GIBHypercube, maximal_antichain, maximal_gib_hypercubes, permissible_subsets
from .model import Network, members, strip_concepts, validate_network
from .search import Explanation, gib_map_search, parse_evidence
from .semantics import DEFAULT_EPS, GLOBAL_RTOL, TABLE_CAP, local_bounds

CANDIDATE_CAP = 10**6
TIE_RTOL = 1e-12


# ---------------------------------------------------------------------------
# random networks


@dataclass(frozen=True)
class RandomNetSpec:
    node_count: int = 5
    max_parents: int = 2
    domain_sizes: tuple[int, int] = (2, 3)
    concept_density: float = 0.5
    independence_plant_rate: float = 0.7
    positive: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be at least 1")
        if self.node_count > 1 and self.max_parents >= self.node_count:
            raise ValueError("max_parents must be smaller than node_count")
        lo, hi = self.domain_sizes
        if not 2 <= lo <= hi:
            raise ValueError("domain sizes must satisfy 2 <= lo <= hi")


def _random_row(rng: np.random.Generator, d: int, positive: bool) -> np.ndarray:
    row = rng.uniform(0.05, 1.0, d)
    if not positive:
        row[rng.random(d) < 0.3] = 0.0
        if row.sum() == 0.0:
            row[rng.integers(d)] = 1.0
    return row / row.sum()


def _match_mass(rng, ref: np.ndarray, subset: np.ndarray, positive: bool) -> np.ndarray:
    """Random row with the same total mass on ``subset`` as ``ref``."""
    row = _random_row(rng, len(ref), True)
    inside = ref[subset].sum()
    row[subset] *= inside / row[subset].sum()
    row[~subset] *= (1.0 - inside) / row[~subset].sum()
    return row


def _plant(rng, table: np.ndarray, radix: tuple[int, ...], concept: np.ndarray | None, positive: bool):
    """Make rows locally constant (per value or per value-set mass) over a parent-value block."""
    mode = rng.choice(["constant", "block", "mass"])
    d = table.shape[-1]
    if mode == "constant":
        table[...] = table.reshape(-1, d)[0]
        return
    axis = int(rng.integers(len(radix)))
    r = radix[axis]
    size = int(rng.integers(2, r + 1))
    block = np.sort(rng.choice(r, size=size, replace=False))
    if mode == "mass":
        if concept is None:
            k = int(rng.integers(1, d))
            concept = np.zeros(d, bool)
            concept[rng.choice(d, size=k, replace=False)] = True
    moved = np.moveaxis(table, axis, 0)  # view
    ref = moved[block[0]]
    for b in block[1:]:
        if mode == "block":
            moved[b] = ref
        else:
            flat_ref = ref.reshape(-1, d)
            new = np.stack([_match_mass(rng, x, concept, positive) for x in flat_ref])
            moved[b] = new.reshape(ref.shape)


def random_network_dict(spec: RandomNetSpec) -> dict:
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.domain_sizes
    names = [f"X{i}" for i in range(spec.node_count)]
    doms = []
    out = []
    for i in range(spec.node_count):
        d = int(rng.integers(lo, hi + 1))
        dom = [f"v{j}" for j in range(d)]
        doms.append(dom)
        k = int(rng.integers(0, min(spec.max_parents, i) + 1))
        parents = sorted(int(p) for p in rng.choice(i, size=k, replace=False)) if k else []
        concepts = []
        cmask = None
        if d >= 3 and rng.random() < spec.concept_density:
            size = int(rng.integers(2, d))
            idx = np.sort(rng.choice(d, size=size, replace=False))
            concepts.append({"name": f"c{i}", "values": [dom[j] for j in idx]})
            cmask = np.zeros(d, bool)
            cmask[idx] = True
        radix = tuple(len(doms[p]) for p in parents)
        table = np.stack([_random_row(rng, d, spec.positive) for _ in range(math.prod(radix))])
        table = table.reshape(radix + (d,))
        if parents and rng.random() < spec.independence_plant_rate:
            _plant(rng, table, radix, cmask, spec.positive)
        rows = []
        for combo in product(*(range(r) for r in radix)):
            given = {names[p]: doms[p][c] for p, c in zip(parents, combo)}
            rows.append({"given": given, "p": {dom[j]: float(x) for j, x in enumerate(table[combo])}})
        out.append({"name": names[i], "values": dom, "parents": [names[p] for p in parents],
                    "concepts": concepts, "cpt": rows})
    return {"variables": out}


def random_network(spec: RandomNetSpec) -> Network:
    return validate_network(random_network_dict(spec))


def random_assignment(rng: np.random.Generator, net: Network, p_free: float = 0.4) -> GAssignment:
    """Arbitrary (not necessarily permissible) non-empty value set per variable."""
    a = GAssignment.top(net)
    for var in net.variables:
        if rng.random() < p_free:
            continue
        m = int(rng.integers(1, var.full + 1))
        a = a.with_set(var.id, m)
    return a


# ---------------------------------------------------------------------------
# brute-force GIB-MAP


def _check_size(net: Network, choices, max_candidates: int, table_cap: int) -> None:
    count = math.prod(len(c) for c in choices)
    if count > max_candidates:
        raise TooLarge(f"{count} candidate assignments (cap {max_candidates})")
    semantics.joint_table(net, table_cap)


def _enumerate(net: Network, choices: list[list[int]], holds) -> list[GAssignment]:
    """Depth-first over ``choices`` assigning ancestors before descendants, pruning by ``holds``."""
    order = sorted(range(len(net)), key=lambda v: -net.index[v])
    full = net.full
    out = []
    sets = list(full)

    def rec(i):
        if i == len(order):
            out.append(GAssignment(tuple(sets), full))
            return
        v = order[i]
        for m in choices[v]:
            sets[v] = m
            if m == full[v] or holds(GAssignment(tuple(sets), full), v):
                rec(i + 1)
        sets[v] = full[v]

    rec(0)
    return out


def _global_checker(net: Network, rtol: float):
    memo: dict = {}

    def holds(a: GAssignment, v: int) -> bool:
        key = (v, a.sets[v]) + tuple(a.sets[u] for u in sorted(net.ancestors(v)))
        hit = memo.get(key)
        if hit is None:
            try:
                hit = semantics.gib_holds_global(net, a, v, rtol)
            except UndefinedConditional:
                hit = False
            memo[key] = hit
        return hit

    return holds


def enumerate_gib_assignments(net: Network, evidence: Mapping[str, str], rtol: float = GLOBAL_RTOL,
                              max_candidates: int = CANDIDATE_CAP,
                              table_cap: int = TABLE_CAP) -> list[GAssignment]:
    """Every permissible G-assignment carrying the evidence that is GIB at each spanned node."""
    ev = parse_evidence(net, evidence)
    choices = [[1 << ev[v]] if v in ev else list(net.permissible_sets(v)) for v in range(len(net))]
    _check_size(net, choices, max_candidates, table_cap)
    return _enumerate(net, choices, _global_checker(net, rtol))


def _best(net: Network, candidates: list[GAssignment], evidence_ids) -> Explanation:
    scored = [(semantics.joint_prob_exact(net, a), a) for a in candidates]
    top = max((p for p, _ in scored), default=0.0)
    if top <= 0.0:
        raise AgendaExhausted("no explanation with positive probability exists for this evidence")
    tied = [a for p, a in scored if p >= top * (1.0 - TIE_RTOL)]
    best = min(tied, key=lambda a: render(net, a))
    return Explanation(best, semantics.joint_prob_exact(net, best), tuple(sorted(evidence_ids)))


def gib_map_bruteforce(net: Network, evidence: Mapping[str, str], max_candidates: int = CANDIDATE_CAP,
                       table_cap: int = TABLE_CAP) -> Explanation:
    """Most probable GIB assignment carrying the evidence, by exhaustive enumeration."""
    ids = parse_evidence(net, evidence)
    cands = enumerate_gib_assignments(net, evidence, max_candidates=max_candidates, table_cap=table_cap)
    return _best(net, cands, ids)


# ---------------------------------------------------------------------------
# classical (singleton) independence-based explanations


def ib_holds(net: Network, a: GAssignment, v: int, rtol: float = GLOBAL_RTOL) -> bool:
    """v's assigned value is independent of its unassigned ancestors given the assigned ones.

    ``a`` must assign singletons (or nothing) everywhere.
    """
    if a.is_full(v):
        return True
    anc = sorted(net.ancestors(v))
    free = [u for u in anc if a.is_full(u)]
    if not free:
        return True
    table = semantics.joint_table(net)
    keep = sorted(anc + [v])
    drop = tuple(i for i in range(len(net)) if i not in keep)
    marg = table.sum(axis=drop) if drop else table
    idx = []
    for u in keep:
        if u == v or a.is_full(u):
            idx.append(range(marg.shape[keep.index(u)]))
        else:
            idx.append(members(a.sets[u]))
    sub = marg[np.ix_(*idx)]
    vpos = keep.index(v)
    p = sub.sum(axis=vpos)
    q = sub.take(members(a.sets[v]), axis=vpos).sum(axis=vpos)
    ok = p > 0
    if not ok.any():
        return False
    ratios = q[ok] / p[ok]
    return bool(np.all(np.abs(ratios - ratios[0]) <= rtol * np.maximum(np.abs(ratios), abs(ratios[0]))))


def ib_map_bruteforce(net: Network, evidence: Mapping[str, str]) -> Explanation:
    """Most probable singleton-or-unassigned explanation satisfying the IB condition everywhere."""
    ev = parse_evidence(net, evidence)
    choices = [[1 << ev[v]] if v in ev else [var.full] + [1 << i for i in range(len(var.domain))]
               for v, var in enumerate(net.variables)]
    _check_size(net, choices, CANDIDATE_CAP, TABLE_CAP)
    cands = _enumerate(net, choices, lambda a, v: ib_holds(net, a, v))
    return _best(net, cands, ev)


# ---------------------------------------------------------------------------
# brute-force hypercubes


def maximal_gib_hypercubes_bruteforce(net: Network, v: int, constraint: GAssignment, delta: float = 0.0,
                                      refine_target: bool = False,
                                      eps: float = DEFAULT_EPS) -> list[GIBHypercube]:
    """Test every permissible combination under ``constraint`` and keep the maximal GIB ones."""
    var = net.var(v)
    if refine_target:
        targets = permissible_subsets(net, v, constraint.sets[v])
        if constraint.sets[v] not in targets:
            targets.append(constraint.sets[v])
    else:
        targets = [constraint.sets[v]]
    options = [permissible_subsets(net, p, constraint.sets[p]) for p in var.parents]
    cubes = []
    for t in targets:
        for combo in product(*options):
            a = GAssignment.top(net).with_set(v, t)
            for p, m in zip(var.parents, combo):
                a = a.with_set(p, m)
            b = local_bounds(net, v, a)
            if not var.parents or t == var.full:
                ok = True
            elif delta > 0:
                ok = b.lo >= (1.0 - delta) * b.hi
            else:
                ok = b.hi - b.lo <= eps * b.hi
            if ok:
                cubes.append(GIBHypercube(v, t, tuple(combo), b))
    return maximal_antichain(cubes)


# ---------------------------------------------------------------------------
# theorem checks


CHECKS = {
    "a": "local bounds equal the extremes over refinements",
    "b": "local GIB test agrees with the definition",
    "c": "product formula equals the exact probability",
    "d": "every refinement conditional lies within the local bounds",
    "e": "search optimum equals the brute-force optimum",
}


@dataclass
class TheoremReport:
    trials: int
    seed: int
    passed: dict = field(default_factory=lambda: {k: 0 for k in CHECKS})
    failed: dict = field(default_factory=lambda: {k: 0 for k in CHECKS})
    counterexample: dict = field(default_factory=dict)
    delta_agree: int = 0
    delta_disagree: int = 0

    @property
    def ok(self) -> bool:
        return not any(self.failed.values())

    def record(self, key: str, ok: bool, detail) -> None:
        if ok:
            self.passed[key] += 1
        else:
            self.failed[key] += 1
            self.counterexample.setdefault(key, detail)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d

    def render_text(self) -> str:
        lines = [f"trials={self.trials} seed={self.seed}"]
        for k, desc in CHECKS.items():
            status = "PASS" if not self.failed[k] else "FAIL"
            lines.append(f"({k}) {status} passed={self.passed[k]} failed={self.failed[k]}  {desc}")
        lines.append(f"(f) delta local/global agree={self.delta_agree} disagree={self.delta_disagree}  (reported only)")
        for k, detail in sorted(self.counterexample.items()):
            lines.append(f"first counterexample ({k}): {detail}")
        return "\n".join(lines)


def _rel_close(x: float, y: float, rtol: float) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y), 1e-300)


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, dtype=np.uint64)[0])


def _hypercube_assignment(rng, net: Network, v: int) -> GAssignment | None:
    cubes = maximal_gib_hypercubes(net, v, GAssignment.top(net).with_set(v, int(rng.integers(1, net.variables[v].full))))
    if not cubes:
        return None
    return cubes[int(rng.integers(len(cubes)))].assignment(net)


def check_theorems(spec: RandomNetSpec, trials: int) -> TheoremReport:
    report = TheoremReport(trials, spec.seed)
    for t in range(trials):
        sub = replace(spec, positive=True, seed=trial_seed(spec.seed, t))
        net = random_network(sub)
        rng = np.random.default_rng(sub.seed)
        tag = f"trial={t} net_seed={sub.seed}"
        nonroots = [v for v in range(len(net)) if net.variables[v].parents]
        v = int(rng.choice(nonroots)) if nonroots else int(rng.integers(len(net)))

        samples = [random_assignment(rng, net)]
        hc = _hypercube_assignment(rng, net, v)
        if hc is not None:
            samples.append(hc)
        for a in samples:
            detail = f"{tag} v={net.variables[v].name} a={render(net, a)!r}"
            b = local_bounds(net, v, a)
            scan = semantics.refinement_scan(net, a, v)
            report.record("a", _rel_close(scan.lo, b.lo, 1e-9) and _rel_close(scan.hi, b.hi, 1e-9),
                          f"{detail} scan=({scan.lo!r},{scan.hi!r}) local=({b.lo!r},{b.hi!r})")
            inside = bool(np.all(scan.values >= b.lo * (1 - 1e-9)) and np.all(scan.values <= b.hi * (1 + 1e-9)))
            report.record("d", inside, detail)
            loc = semantics.gib_holds_local(net, a, v, eps=1e-12)
            glob = semantics.gib_holds_global(net, a, v)
            report.record("b", loc == glob, f"{detail} local={loc} global={glob}")
            delta = float(rng.uniform(0, 1))
            if semantics.delta_gib_holds(net, a, v, delta) == semantics.delta_gib_holds_global(net, a, v, delta):
                report.delta_agree += 1
            else:
                report.delta_disagree += 1

        ev_var = net.variables[net.order[0]]
        evidence = {ev_var.name: ev_var.domain[int(rng.integers(len(ev_var.domain)))]}
        for a in enumerate_gib_assignments(net, evidence):
            exact = semantics.joint_prob_exact(net, a)
            try:
                prod = semantics.gib_probability(net, a)
                ok = _rel_close(prod, exact, 1e-9)
            except Exception as e:  # NotGib here is itself a counterexample
                prod, ok = repr(e), False
            report.record("c", ok, f"{tag} a={render(net, a)!r} product={prod!r} exact={exact!r}")

        found = gib_map_search(net, evidence)[0]
        truth = gib_map_bruteforce(net, evidence)
        same = found.assignment == truth.assignment and abs(found.probability - truth.probability) <= 1e-12
        report.record("e", same, f"{tag} evidence={evidence} search={render(net, found.assignment)!r}"
                                 f"@{found.probability!r} brute={render(net, truth.assignment)!r}@{truth.probability!r}")
    return report


def ib_reduction_agrees(net: Network, evidence: Mapping[str, str]) -> tuple[bool, Explanation, Explanation]:
    """Search on the concept-free network against the classical IB brute force."""
    bare = strip_concepts(net)
    found = gib_map_search(bare, evidence)[0]
    truth = ib_map_bruteforce(bare, evidence)
    same = found.assignment == truth.assignment and abs(found.probability - truth.probability) <= 1e-12
    return same, found, truth

