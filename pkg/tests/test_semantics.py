from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fraction_prob
from gibmap import semantics as sem
from gibmap.assign import GAssignment, meet, proper_span, restrict
from gibmap.errors import NotDeltaGib, NotGib, SpanMismatch, TooLarge, UndefinedConditional
from gibmap.model import validate_network
from gibmap.oracle import RandomNetSpec, ib_holds, random_assignment, random_network

seeds = st.integers(0, 2**32 - 1)


def G(net, **kw):
    return GAssignment.of(net, {k.replace("_", "-"): v for k, v in kw.items()})


# ---- CPT-local conditionals


def test_cond_value_set_prob(vee, tracks):
    A, B, C = (vee.id_of(n) for n in "ABC")
    assert sem.cond_value_set_prob(vee, C, 0b01, {A: 0, B: 1}) == 0.8
    assert sem.cond_value_set_prob(vee, C, 0b11, {A: 1, B: 0}) == 1.0
    m, i = tracks.id_of("method"), tracks.id_of("intend-to-go")
    some = tracks.var("method").mask("some-method")
    assert sem.cond_value_set_prob(tracks, m, some, {i: 0}) == pytest.approx(float(Fraction(99, 100)), abs=1e-15)
    with pytest.raises(SpanMismatch):
        sem.cond_value_set_prob(vee, C, 0b01, {A: 0})


# ---- exact probabilities (expected values cross-checked with the Fraction enumerator)


def test_joint_prob_exact(chain, vee, raw):
    assert sem.joint_prob_exact(chain, G(chain, A="t", B="t")) == 0.6 * 0.7
    assert sem.joint_prob_exact(chain, G(chain, B="t")) == pytest.approx(0.7, abs=1e-15)
    assert float(fraction_prob(raw("chain"), {"B": {"t"}})) == 0.7
    assert sem.joint_prob_exact(vee, GAssignment.top(vee)) == pytest.approx(1.0, abs=1e-15)


def test_cond_prob_exact(vee, chain, raw):
    assert sem.cond_prob_exact(vee, G(vee, C="t"), G(vee, A="t")) == pytest.approx(0.8, abs=1e-15)
    assert sem.cond_prob_exact(vee, G(vee, C="t"), GAssignment.top(vee)) == pytest.approx(0.64, abs=1e-15)
    assert fraction_prob(raw("vee"), {"C": {"t"}}) == Fraction(16, 25)
    assert sem.cond_prob_exact(chain, G(chain, B="t"), G(chain, A=["t", "f"])) == pytest.approx(0.7, abs=1e-15)
    # disjoint target and condition
    assert sem.cond_prob_exact(vee, G(vee, A="f"), G(vee, A="t")) == 0.0


def test_cond_prob_zero_conditioning(tracks):
    given_ = G(tracks, intend_to_go="f", method="m1")
    with pytest.raises(UndefinedConditional):
        sem.cond_prob_exact(tracks, G(tracks, at_tracks="T"), given_)


def test_table_cap(vee):
    with pytest.raises(TooLarge):
        sem.joint_prob_exact(vee, GAssignment.top(vee), cap=4)


# ---- local bounds and the local GIB test


def test_local_bounds(vee, chain):
    C = vee.id_of("C")
    assert tuple(sem.local_bounds(vee, C, G(vee, C="t"))) == (0.3, 0.8)
    assert tuple(sem.local_bounds(vee, C, G(vee, C="t", A="t"))) == (0.8, 0.8)
    assert tuple(sem.local_bounds(chain, chain.id_of("B"), G(chain, B="t"))) == (0.7, 0.7)


@pytest.mark.parametrize("check", [sem.gib_holds_local, sem.gib_holds_global])
def test_gib_holds_examples(check, vee, chain):
    C = vee.id_of("C")
    assert check(chain, G(chain, B="t"), chain.id_of("B"))
    assert not check(vee, G(vee, C="t"), C)
    assert check(vee, G(vee, C="t", A="t"), C)
    assert check(vee, G(vee, A="t"), vee.id_of("A"))


def test_delta_examples(dep, vee):
    B = dep.id_of("B")
    a = G(dep, B="t")
    assert sem.delta_gib_holds(dep, a, B, 0.8)
    assert not sem.delta_gib_holds(dep, a, B, 0.5)
    assert sem.delta_gib_holds(dep, a, B, 1.0)
    assert sem.delta_gib_holds(dep, a, B, 0.0) == sem.gib_holds_local(dep, a, B, eps=0.0)
    with pytest.raises(ValueError):
        sem.delta_gib_holds(dep, a, B, 1.5)


def test_gib_probability(vee, tracks, chain):
    assert sem.gib_probability(vee, G(vee, C="t", A="t")) == pytest.approx(0.48, abs=1e-15)
    m = GAssignment.of(tracks, {"at-tracks": "T", "method": "some-method", "intend-to-go": "t"})
    assert sem.gib_probability(tracks, m) == pytest.approx(0.0495, abs=1e-15)
    assert sem.gib_probability(chain, G(chain, B="t")) == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(NotGib):
        sem.gib_probability(vee, G(vee, C="t"))


def test_delta_prob_bounds(dep, vee):
    a = G(vee, C="t", A="t")
    b = sem.delta_prob_bounds(vee, a, 0.0)
    assert b.lo == b.hi == sem.gib_probability(vee, a)
    assert tuple(sem.delta_prob_bounds(dep, G(dep, B="t"), 0.8)) == (0.2, 0.9)
    b = sem.delta_prob_bounds(dep, G(dep, B="t", A="t"), 0.0)
    assert b.lo == b.hi == pytest.approx(0.54, abs=1e-15)
    with pytest.raises(NotDeltaGib):
        sem.delta_prob_bounds(dep, G(dep, B="t"), 0.5)


def test_global_check_counts_every_refinement(vee):
    # two binary ancestors: 3 x 3 non-empty subset combinations
    scan = sem.refinement_scan(vee, G(vee, C="t"), vee.id_of("C"))
    assert scan.exhaustive and scan.values.size == 9
    assert scan.reference == pytest.approx(0.64, abs=1e-15)
    assert (scan.lo, scan.hi) == pytest.approx((0.3, 0.8), abs=1e-15)


def test_global_check_on_tracks_uses_singleton_refinements(tracks):
    # 2**100 - 1 subsets of method: only complete ancestor configurations are visited
    at = tracks.id_of("at-tracks")
    scan = sem.refinement_scan(tracks, G(tracks, at_tracks="T"), at)
    assert not scan.exhaustive
    assert sem.gib_holds_global(tracks, G(tracks, at_tracks="T", method="some-method"), at)
    assert not sem.gib_holds_global(tracks, G(tracks, at_tracks="T"), at)


# ---- properties on random networks


def _net(seed, **kw):
    return random_network(RandomNetSpec(node_count=kw.pop("n", 5), seed=seed, **kw))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_bounds_are_refinement_extremes(seed):
    net = _net(seed)
    rng = np.random.default_rng(seed)
    v = int(rng.integers(len(net)))
    a = random_assignment(rng, net)
    b = sem.local_bounds(net, v, a)
    scan = sem.refinement_scan(net, a, v)
    assert scan.lo == pytest.approx(b.lo, rel=1e-9)
    assert scan.hi == pytest.approx(b.hi, rel=1e-9)
    assert np.all(scan.values >= b.lo * (1 - 1e-9)) and np.all(scan.values <= b.hi * (1 + 1e-9))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_local_iff_global(seed):
    net = _net(seed)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        a = random_assignment(rng, net)
        for v in range(len(net)):
            assert sem.gib_holds_local(net, a, v, eps=1e-12) == sem.gib_holds_global(net, a, v)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_product_equals_exact(seed):
    net = _net(seed)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(40):
        a = random_assignment(rng, net, p_free=0.6)
        if sem.is_gib(net, a):
            hits += 1
            assert sem.gib_probability(net, a) == pytest.approx(sem.joint_prob_exact(net, a), rel=1e-9)
    # a complete assignment is always GIB
    f = GAssignment.complete(net, {v: 0 for v in range(len(net))})
    assert sem.is_gib(net, f)
    assert sem.gib_probability(net, f) == pytest.approx(sem.joint_prob_exact(net, f), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_chain_rule_exact(seed):
    net = _net(seed)
    rng = np.random.default_rng(seed)
    f = {v: int(rng.integers(len(net.variables[v].domain))) for v in range(len(net))}
    direct = 1.0
    for v, var in enumerate(net.variables):
        direct *= net.cpts[v].row([f[p] for p in var.parents])[f[v]]
    assert sem.joint_prob_exact(net, GAssignment.complete(net, f)) == direct


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0, 1), st.floats(0, 1))
def test_delta_monotone(seed, d1, d2):
    lo, hi = sorted((d1, d2))
    net = _net(seed)
    rng = np.random.default_rng(seed)
    a = random_assignment(rng, net)
    for v in range(len(net)):
        if sem.delta_gib_holds(net, a, v, lo):
            assert sem.delta_gib_holds(net, a, v, hi)
        assert sem.delta_gib_holds(net, a, v, 1.0)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_ib_special_case(seed):
    net = _net(seed, concept_density=0.0)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        vals = {v: int(rng.integers(len(net.variables[v].domain)))
                for v in range(len(net)) if rng.random() < 0.5}
        a = GAssignment.complete(net, vals)
        for v in vals:
            assert sem.gib_holds_local(net, a, v, eps=1e-12) == ib_holds(net, a, v)


def test_check_cost_is_local(vee):
    a = G(vee, C="t", A="t")
    stats = Counter()
    assert sem.is_gib(vee, a, stats=stats)
    expected = sum(
        np.prod([a.size(p) for p in vee.parents(v)]) for v in proper_span(a) if vee.parents(v)
    )
    assert stats["rows"] == expected == 2

    # the same assignment embedded in a larger network scans the same rows
    raw = vee.to_dict()
    for i in range(6):
        raw["variables"].append({"name": f"D{i}", "values": ["x", "y"], "parents": ["C"] if i else [],
                                 "cpt": ([{"given": {"C": c}, "p": {"x": 0.3, "y": 0.7}} for c in "tf"]
                                         if i else [{"given": {}, "p": {"x": 0.5, "y": 0.5}}])})
    big = validate_network(raw)
    stats2 = Counter()
    sem.is_gib(big, GAssignment.of(big, {"C": "t", "A": "t"}), stats=stats2)
    assert stats2["rows"] == stats["rows"]


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_check_cost_formula(seed):
    net = _net(seed)
    a = random_assignment(np.random.default_rng(seed), net)
    stats = Counter()
    for v in proper_span(a):
        sem.gib_holds_local(net, a, v, stats=stats)
    assert stats["rows"] == sum(
        int(np.prod([a.size(p) for p in net.parents(v)])) for v in proper_span(a) if net.parents(v))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_conditioning_is_convex_combination(seed):
    """P(x | B) is a weighted average of P(x | D) over complete D inside B."""
    net = _net(seed, n=4)
    rng = np.random.default_rng(seed)
    v = net.order[0]
    target = restrict(random_assignment(rng, net, p_free=0.0), {v})
    given_ = restrict(random_assignment(rng, net), net.ancestors(v))
    anc = sorted(net.ancestors(v))
    total = sem.joint_prob_exact(net, given_)
    acc = 0.0
    from gibmap.assign import complete_assignments
    for d in complete_assignments(given_, anc):
        dd = GAssignment.complete(net, d)
        w = sem.joint_prob_exact(net, dd) / total
        acc += w * sem.cond_prob_exact(net, target, dd)
    assert acc == pytest.approx(sem.cond_prob_exact(net, target, given_), rel=1e-9)
    assert meet(target, given_)  # never empty: disjoint spans
