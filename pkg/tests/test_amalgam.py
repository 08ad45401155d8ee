import itertools

import pytest

from latrep.lattice import FIXTURES, find_embeddings, fixture, load_lattice
from latrep.amalgam import (
    AmalgamError, PartialLattice, amalgamate, check_embedding, fraisse_chain,
    glue, ideal_lattice, named_ideals, verify_amalgam)

from oracles import naive_ideals

CHAIN2 = fixture("CHAIN2")
BOUNDS = {"0": "0", "1": "1"}
# a second three-element chain whose middle is named n instead of m
CHAIN3N = load_lattice({"elements": ["0", "n", "1"],
                        "leq": [["0", "n"], ["n", "1"]]})


def test_partial_lattice_rejects_cycles():
    with pytest.raises(AmalgamError) as err:
        PartialLattice(["0", "a", "b", "1"],
                       [("0", "a"), ("a", "b"), ("b", "a"), ("a", "1"), ("b", "1")])
    assert err.value.code == "cycle"


def test_partial_lattice_needs_bounds():
    with pytest.raises(AmalgamError) as err:
        PartialLattice(["0", "a", "1"], [("0", "a")])
    assert err.value.code == "no-bounds"


def test_partial_operation_consistency():
    with pytest.raises(AmalgamError) as err:
        PartialLattice(["0", "a", "1"], [("0", "a"), ("a", "1")],
                       joins={("0", "a"): "1"})
    assert err.value.code == "bad-operation"


def test_ideal_counts_match_subset_oracle():
    cases = [PartialLattice.from_lattice(fixture(name)) for name in FIXTURES]
    cases.append(PartialLattice(
        ["0", "m", "n", "1"], [("0", "m"), ("0", "n"), ("m", "1"), ("n", "1")]))
    for p in cases:
        fast = {s for s in p.ideals()}
        slow = {frozenset(s) for s in naive_ideals(
            p.elements, set(p.pairs()), p.joins_table())}
        assert fast == slow


def test_ideal_lattice_examples():
    assert len(ideal_lattice(PartialLattice.from_lattice(CHAIN2))) == 2
    assert len(ideal_lattice(PartialLattice.from_lattice(fixture("B2")))) == 4
    anti = PartialLattice(
        ["0", "m", "n", "1"], [("0", "m"), ("0", "n"), ("m", "1"), ("n", "1")])
    assert [n for n, _ in named_ideals(anti)] == [
        "0", "{0,m}", "{0,n}", "{0,m,n}", "1"]


def test_two_chains_amalgamate_to_five():
    c, g0, g1 = amalgamate(CHAIN2, fixture("CHAIN3"), CHAIN3N, BOUNDS, dict(BOUNDS))
    assert sorted(c.elements) == ["0", "1", "{0,m,n}", "{0,m}", "{0,n}"]
    assert g0["m"] == "{0,m}" and g1["n"] == "{0,n}"
    assert c.join("{0,m}", "{0,n}") == "{0,m,n}"
    assert c.meet("{0,m}", "{0,n}") == "0"


def test_identity_amalgam_is_the_base():
    b = fixture("CHAIN3")
    ident = {e: e for e in b.elements}
    c, g0, g1 = amalgamate(b, b, b, ident, dict(ident))
    assert len(c) == 3 and g0 == g1


def test_diamond_with_m3_verifies():
    c, g0, g1 = amalgamate(CHAIN2, fixture("B2"), fixture("M3"), BOUNDS, dict(BOUNDS))
    p, _ = glue(CHAIN2, fixture("B2"), fixture("M3"), BOUNDS, dict(BOUNDS))
    assert len(c) == 13
    assert verify_amalgam(p, c) == []
    # the glue renames nothing here: the element names are disjoint already
    assert g0["a"] == "{0,a}" and g1["c"] == "{0,c}"


def test_pair_scan_agrees_with_generic_ideal_enumeration():
    for b0_name, b1_name in (("CHAIN3", "CHAIN4"), ("B2", "N5"), ("M3", "M3")):
        b0, b1 = fixture(b0_name), fixture(b1_name)
        c, _, _ = amalgamate(CHAIN2, b0, b1, BOUNDS, dict(BOUNDS))
        p, _ = glue(CHAIN2, b0, b1, BOUNDS, dict(BOUNDS))
        assert sorted(c.elements) == sorted(ideal_lattice(p).elements)


def test_catalog_pairs_with_shared_chain3():
    a = fixture("CHAIN3")
    for b0_name, b1_name in itertools.product(("CHAIN4", "B2", "M3", "N5"), repeat=2):
        b0, b1 = fixture(b0_name), fixture(b1_name)
        for f0 in find_embeddings(a, b0)[:2]:
            for f1 in find_embeddings(a, b1)[:2]:
                c, g0, g1 = amalgamate(a, b0, b1, f0, f1)
                assert all(g0[f0[x]] == g1[f1[x]] for x in a.elements)
                p, _ = glue(a, b0, b1, f0, f1)
                assert verify_amalgam(p, c) == []


def test_not_an_embedding_rejected():
    with pytest.raises(AmalgamError) as err:
        amalgamate(CHAIN2, fixture("CHAIN3"), CHAIN3N, {"0": "0", "1": "m"}, BOUNDS)
    assert err.value.code == "not-an-embedding"
    ident = {"0": "0", "m": "m", "1": "1"}
    squash = {"0": "0", "m": "1", "1": "1"}
    assert check_embedding(ident, fixture("CHAIN3"), fixture("CHAIN3")) == []
    assert ("not-injective", None) in check_embedding(
        squash, fixture("CHAIN3"), fixture("CHAIN3"))


def test_verify_amalgam_catches_wrong_lattice():
    p, _ = glue(CHAIN2, fixture("CHAIN3"), CHAIN3N, BOUNDS, dict(BOUNDS))
    wrong = fixture("CHAIN3")
    assert verify_amalgam(p, wrong)[0]["error"] == "element-mismatch"


def test_single_stage_chain_is_two_points():
    out = fraisse_chain(1)
    assert len(out["chain"]) == 1
    assert out["chain"][0].elements == ("0", "1")
    assert out["maps"] == []


def test_chain_log_is_monotone_prefix():
    short = fraisse_chain(8)
    long = fraisse_chain(14)
    assert long["log"][:len(short["log"])] == short["log"]


def test_size_four_stage_embeds_both_classes():
    out = fraisse_chain(8)
    done = max(e["stage"] for e in out["log"]
               if e["task"] == "embed" and e["catalog"][0] == 4)
    stage = out["chain"][done]
    assert find_embeddings(fixture("CHAIN4"), stage)
    assert find_embeddings(fixture("B2"), stage)


def test_chain_maps_compose_to_embedding():
    out = fraisse_chain(14)
    comp = {e: e for e in out["chain"][0].elements}
    for step in out["maps"]:
        comp = {k: step[v] for k, v in comp.items()}
    assert check_embedding(comp, out["chain"][0], out["chain"][-1]) == []


def test_chain_caps():
    with pytest.raises(AmalgamError) as err:
        fraisse_chain(0)
    assert err.value.code == "bad-stages"
    with pytest.raises(AmalgamError) as err:
        fraisse_chain(100)
    assert err.value.code == "cap-exceeded"
    with pytest.raises(AmalgamError) as err:
        fraisse_chain(14, growth_cap=20)
    assert err.value.code == "cap-exceeded"
