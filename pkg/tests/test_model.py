import copy
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from gibmap.errors import (
    BadDistribution,
    CyclicGraph,
    DuplicateName,
    FormatError,
    NonLaminarConcepts,
    UnknownParent,
    UnknownVariable,
)
from gibmap.model import bundled_text, load_network, parse_network, validate_network
from gibmap.oracle import RandomNetSpec, random_network_dict


def boolvar(name, parents=(), rows=None):
    rows = rows or [({}, 0.5)]
    return {"name": name, "values": ["t", "f"], "parents": list(parents),
            "cpt": [{"given": g, "p": {"t": p, "f": 1 - p}} for g, p in rows]}


def test_chain_index(chain):
    assert [chain.variables[v].name for v in chain.order] == ["B", "A"]
    assert chain.index[chain.id_of("B")] == 1
    assert chain.index[chain.id_of("A")] == 2


def test_vee_index_ties_follow_declaration(vee):
    assert [vee.variables[v].name for v in vee.order] == ["C", "A", "B"]


def test_cycle():
    raw = {"variables": [boolvar("A", ["B"], [({"B": "t"}, 0.5), ({"B": "f"}, 0.5)]),
                         boolvar("B", ["A"], [({"A": "t"}, 0.5), ({"A": "f"}, 0.5)])]}
    with pytest.raises(CyclicGraph):
        validate_network(raw)


def test_bad_row_sum(raw):
    r = raw("chain")
    r["variables"][1]["cpt"][0]["p"] = {"t": 0.7, "f": 0.2}
    with pytest.raises(BadDistribution):
        validate_network(r)


@pytest.mark.parametrize("mutate", [
    lambda r: r["variables"][1]["cpt"].pop(),
    lambda r: r["variables"][0]["cpt"][0]["p"].update(t=1.2, f=-0.2),
    lambda r: r["variables"][0]["cpt"][0]["p"].pop("f"),
    lambda r: r["variables"][1]["cpt"][1]["given"].update(A="t"),
])
def test_bad_distribution_variants(raw, mutate):
    r = raw("chain")
    mutate(r)
    with pytest.raises(BadDistribution):
        validate_network(r)


def test_row_sum_tolerance(raw):
    r = raw("chain")
    r["variables"][0]["cpt"][0]["p"] = {"t": 0.6 + 5e-10, "f": 0.4}
    validate_network(r)
    r["variables"][0]["cpt"][0]["p"] = {"t": 0.6 + 5e-9, "f": 0.4}
    with pytest.raises(BadDistribution):
        validate_network(r)


def test_non_laminar():
    v = {"name": "X", "values": ["a", "b", "c"],
         "concepts": [{"name": "ab", "values": ["a", "b"]}, {"name": "bc", "values": ["b", "c"]}],
         "cpt": [{"given": {}, "p": {"a": 0.2, "b": 0.3, "c": 0.5}}]}
    with pytest.raises(NonLaminarConcepts):
        validate_network({"variables": [v]})


def test_duplicate_and_unknown_parent():
    with pytest.raises(DuplicateName):
        validate_network({"variables": [boolvar("A"), boolvar("A")]})
    with pytest.raises(UnknownParent):
        validate_network({"variables": [boolvar("A", ["Z"], [({"Z": "t"}, 0.5)])]})


def test_unknown_fields_rejected(raw):
    r = raw("chain")
    r["variables"][0]["colour"] = "red"
    with pytest.raises(FormatError, match="colour"):
        validate_network(r)
    r = raw("chain")
    r["extra"] = 1
    with pytest.raises(FormatError):
        validate_network(r)


def test_concept_must_be_strict_subset():
    v = {"name": "X", "values": ["a", "b"], "concepts": [{"name": "all", "values": ["a", "b"]}],
         "cpt": [{"given": {}, "p": {"a": 0.5, "b": 0.5}}]}
    with pytest.raises(FormatError):
        validate_network({"variables": [v]})


def test_parse_error_has_position():
    with pytest.raises(FormatError, match=r"net\.json:2:"):
        parse_network('{"variables":\n [,]}', "net.json")


def test_parents_and_ancestors(chain, vee, tracks):
    A, B, C = (vee.id_of(n) for n in "ABC")
    assert set(vee.parents(C)) == {A, B}
    assert chain.parents(chain.id_of("B")) == (chain.id_of("A"),)
    assert chain.parents(chain.id_of("A")) == ()
    assert chain.ancestors(chain.id_of("B")) == {chain.id_of("A")}
    assert vee.ancestors(C) == {A, B}
    names = {tracks.variables[u].name for u in tracks.ancestors(tracks.id_of("at-tracks"))}
    assert names == {"method", "kidnapped", "intend-to-go"}
    with pytest.raises(UnknownVariable):
        vee.parents(17)
    with pytest.raises(UnknownVariable):
        vee.var("nope")


def test_permissible_sets(chain, tracks):
    a = chain.id_of("A")
    assert set(chain.permissible_sets(a)) == {0b01, 0b10, 0b11}
    m = tracks.id_of("method")
    fam = tracks.permissible_sets(m)
    assert len(fam) == 102
    some = tracks.var("method").mask("some-method")
    m1 = tracks.var("method").mask("m1")
    assert some in fam and (some & m1) == m1 and m1 in fam


def test_tracks_positivity_flag(tracks, vee):
    assert not tracks.positive and tracks.warnings
    assert vee.positive and not vee.warnings


def test_load_bundled_by_name(tmp_path):
    assert len(load_network("vee.json")) == 3
    p = tmp_path / "vee.json"
    p.write_text(bundled_text("vee"))
    assert len(load_network(p)) == 3


def test_roundtrip_to_dict(tracks):
    again = validate_network(json.loads(json.dumps(tracks.to_dict())))
    assert again.index == tracks.index
    assert again.cpts == tracks.cpts


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 7))
def test_index_precedes_ancestors(seed, n):
    raw = random_network_dict(RandomNetSpec(node_count=n, max_parents=min(2, n - 1), seed=seed))
    net = validate_network(raw)
    for v in range(len(net)):
        assert all(net.index[v] < net.index[u] for u in net.ancestors(v))
        assert v not in net.ancestors(v)
        for s in net.permissible_sets(v):
            for t in net.permissible_sets(v):
                assert (s & t) == 0 or (s & t) in net.permissible_sets(v)
        cpt = net.cpts[v]
        assert len(cpt.rows) == math.prod(cpt.radix)
        assert all(abs(sum(r) - 1) <= 1e-9 for r in cpt.rows)
    # deterministic: same bytes, same network
    again = validate_network(copy.deepcopy(raw))
    assert again.index == net.index and again.cpts == net.cpts
