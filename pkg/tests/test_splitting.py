import copy
import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from latrep.lattice import fixture
from latrep.sequence import build_sequence
from latrep.splitting import (SplitCondition, SplitError, bit_stream,
                              build_splitting_tree, computation_decode,
                              diagonalize, find_split, least_nonsplit,
                              make_oracle, verify_splitting)
from latrep.trees import (ZERO, Condition, TreeContext, UniformTree,
                          check_subtree, extend_condition, identity_tree)

from oracles import naive_bits, naive_nonsplit_family, naive_splits

B2 = fixture("B2")
SEQ = build_sequence(B2, 2, order=("a", "b"))
CTX = TreeContext(SEQ)
HALF = extend_condition(CTX, identity_tree(CTX), "a")   # guard 0,a,1
FULL = extend_condition(CTX, HALF, "b")                 # guard 0,a,b,1

PROJ_A = make_oracle(SEQ, "proj:a")
PROJ_B = make_oracle(SEQ, "proj:b")
XOR = make_oracle(SEQ, "xor:a,b")


def splitting_tree(depth):
    return build_splitting_tree(HALF, PROJ_A, (), "a", depth)


# ---------------------------------------------------------------- oracles

def test_projection_oracle_reads_newest_symbol():
    # a-values over the stage-1 family are 0,1,2,3,6,6
    assert [PROJ_A(1, (v,)) for v in SEQ.theta_ids(1)] == [0, 1, 0, 1, 0, 0]
    assert PROJ_A(0, ()) == 0
    sigma = (1, 4, 9)
    assert bit_stream(PROJ_A, sigma) == naive_bits(PROJ_A, sigma)
    assert bit_stream(PROJ_A, sigma) == [1, 0, 1]


def test_oracle_checks_coordinate_against_length():
    with pytest.raises(AssertionError):
        PROJ_A(2, (0,))


def test_xor_oracle_adds_the_two_projections():
    for v in SEQ.theta_ids(2):
        want = (SEQ.value(v, "a") + SEQ.value(v, "b")) % 2
        assert XOR(1, (v,)) == want
    assert XOR.invariant == "1"


def test_xor_factors_through_the_join():
    '''Strings with equal joins coordinatewise get equal bits, exhaustively
    over depths 1 and 2.'''
    seen = {}
    for n in (1, 2):
        for sigma in FULL.tree.strings(n):
            key = tuple(SEQ.value(c, "1") for c in sigma)
            bit = XOR(n, sigma)
            assert seen.setdefault((n, key), bit) == bit


def test_table_oracle_defaults_off_table():
    q = make_oracle(SEQ, {"entries": {(0,): 1}, "default": 0,
                          "invariant": None})
    assert q(1, (0,)) == 1
    assert q(1, (1,)) == 0
    assert q(3, (0, 4, 9)) == 0
    assert q.document() == {"kind": "table", "label": "table[1]",
                            "invariant": None}


def test_make_oracle_rejections():
    with pytest.raises(SplitError) as err:
        make_oracle(SEQ, "proj:zz")
    assert err.value.code == "unknown-element"
    with pytest.raises(SplitError) as err:
        make_oracle(SEQ, "xor:a,zz")
    assert err.value.code == "unknown-element"
    with pytest.raises(SplitError) as err:
        make_oracle(SEQ, "hash:a")
    assert err.value.code == "unknown-oracle-kind"


# ------------------------------------------------------------- find_split

def test_find_split_returns_length_lex_least_pair():
    assert find_split(HALF, PROJ_A, (), "0", 2) == ((0,), (1,))
    # the least pair congruent at b whose a-parities differ
    assert find_split(FULL, PROJ_A, (), "b", 2) == ((6,), (7,))


def test_find_split_none_at_the_invariant():
    assert find_split(HALF, PROJ_A, (), "a", 3) is None
    assert find_split(HALF, PROJ_A, (), "1", 3) is None
    assert find_split(FULL, XOR, (), "1", 2) is None


def test_find_split_below_a_prefix():
    hit = find_split(HALF, PROJ_A, (2, 5), "0", 2)
    assert hit == ((2, 5, 0), (2, 5, 1))
    sig, tau = hit
    assert bit_stream(PROJ_A, sig) != bit_stream(PROJ_A, tau)


def test_find_split_agrees_with_naive_search():
    for cond, oracle in ((HALF, PROJ_A), (FULL, XOR)):
        for w in cond.guard.members:
            got = find_split(cond, oracle, (), w, 2)
            want = naive_splits(cond, oracle, (), w, 2)
            assert (got is None) == (not want)
            if got is not None:
                assert got in want


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_splits_persist_under_extension(data):
    sig, tau = find_split(HALF, PROJ_A, (), "0", 1)
    n = data.draw(st.integers(min_value=1, max_value=3))
    ext = tuple(data.draw(st.sampled_from(SEQ.theta_ids(2)))
                for _ in range(n))
    assert bit_stream(PROJ_A, sig + ext) != bit_stream(PROJ_A, tau + ext)


def test_nonsplit_family_grows_below_prefixes():
    base = naive_nonsplit_family(HALF, PROJ_A, (), 2)
    assert base == {"a", "1"}
    for v in HALF.tree.alphabet(0):
        assert base <= naive_nonsplit_family(HALF, PROJ_A, (v,), 2)


# ---------------------------------------------------------- least_nonsplit

def test_least_nonsplit_constant_oracle():
    rho, sp, z = least_nonsplit(FULL, make_oracle(SEQ, "const:0"), 2)
    assert rho == ()
    assert sp == FULL.guard.members
    assert z == "0"


def test_least_nonsplit_projection():
    assert least_nonsplit(HALF, PROJ_A, 2) == ((), ("a", "1"), "a")
    # adding b to the guard changes nothing: b still splits
    assert least_nonsplit(FULL, PROJ_A, 2) == ((), ("a", "1"), "a")
    assert least_nonsplit(FULL, PROJ_B, 2) == ((), ("b", "1"), "b")


def test_least_nonsplit_xor_pins_the_join():
    assert least_nonsplit(FULL, XOR, 2) == ((), ("1",), "1")


def test_least_nonsplit_matches_naive_family():
    for cond, oracle in ((HALF, PROJ_A), (FULL, XOR)):
        _, sp, _ = least_nonsplit(cond, oracle, 2)
        assert set(sp) == naive_nonsplit_family(cond, oracle, (), 2)


def test_meet_closure_failure_is_reported_not_patched():
    '''A table oracle that tells 0 apart from everything else splits only
    modulo 0, so its no-split family is {a, b, 1}: not meet closed.'''
    q = make_oracle(SEQ, {"entries": {(0,): 1}, "default": 0,
                          "invariant": None})
    with pytest.raises(SplitError) as err:
        least_nonsplit(FULL, q, 2, prefix_depth=0)
    assert err.value.code == "meet-closure-failure"
    assert err.value.witness["pair"] == ("a", "b")
    assert err.value.witness["meet"] == "0"
    assert set(err.value.witness["family"]) == {"a", "b", "1"}


def test_prefix_search_escapes_the_closure_failure():
    '''The same table oracle is constant below the prefix (0,), so the
    prefix scan finds a committed region where everything is no-split.'''
    q = make_oracle(SEQ, {"entries": {(0,): 1}, "default": 0,
                          "invariant": None})
    rho, sp, z = least_nonsplit(FULL, q, 2, prefix_depth=1)
    assert rho == (0,)
    assert sp == FULL.guard.members
    assert z == "0"


# ------------------------------------------------------------ tree builds

def test_splitting_tree_is_verified_exhaustively():
    s = splitting_tree(3)
    assert s.z == "a" and s.rho == ()
    assert verify_splitting(s, PROJ_A) == []
    assert check_subtree(s, HALF, 3)["is_extension"]
    # the composite walks the base tree along the routing strings
    for sigma in ((0,), (3, 7), (5, 13, 2)):
        assert s.tree.node(sigma) == HALF.tree.node(s.q_string(sigma))


def test_splitting_certificates_cover_every_pair():
    s = splitting_tree(2)
    for n, level in enumerate(s.certificates):
        ids = s.routing.alphabet(n)
        assert [e["pair"] for e in level] == \
            list(itertools.combinations(ids, 2))
        for e in level:
            ap, aq = e["pair"]
            if SEQ.congruent(ap, aq, "a"):
                assert e["case"] == "agree-at-z"
            else:
                assert e["case"] in ("already-split", "shared-extension",
                                     "left-anchored", "detached",
                                     "right-anchored")


def test_constant_oracle_leaves_the_tree_bare():
    '''With z = 0 every pair agrees at z, so no splits are owed and the
    blocks stay single symbols.'''
    s = build_splitting_tree(HALF, make_oracle(SEQ, "const:0"), (), "0", 2)
    for n in range(2):
        assert s.routing.level(n) == {a: (a,)
                                      for a in s.routing.alphabet(n)}
    assert verify_splitting(s, make_oracle(SEQ, "const:0")) == []


def test_splitting_below_a_committed_prefix():
    s = build_splitting_tree(HALF, PROJ_A, (4, 7), "a", 2)
    assert s.routing.stem == (4, 7)
    assert s.tree.stem == HALF.tree.node((4, 7))
    assert verify_splitting(s, PROJ_A) == []


def test_splitting_over_a_wide_base():
    '''A base whose blocks are two symbols wide: the routing stays in the
    base's branching coordinates and the composite pushes through its
    tables.'''
    wide = Condition(
        UniformTree(SEQ, 1, (ZERO,),
                    rule=lambda l: {a: (a, ZERO)
                                    for a in SEQ.theta_ids(1 + l)}),
        HALF.guard)
    s = build_splitting_tree(wide, PROJ_A, (), "a", 2)
    assert verify_splitting(s, PROJ_A) == []
    for sigma in ((1,), (2, 4)):
        assert s.tree.node(sigma) == wide.tree.node(s.q_string(sigma))


def test_split_search_exhaustion_is_reported():
    with pytest.raises(SplitError) as err:
        build_splitting_tree(HALF, make_oracle(SEQ, "const:0"), (), "a", 1)
    assert err.value.code == "split-search-exhausted"
    assert err.value.witness == {"level": 0, "pair": (0, 1),
                                 "modulus": "0", "depth": 2}


def test_missing_interpolants_are_reported():
    '''A family stripped of its routing certificates cannot rebuild the
    three-way case.'''
    seq = build_sequence(B2, 2, order=("a", "b"))
    seq.hom_fallbacks.clear()
    seq.find_hom_map = lambda *args: None
    ctx = TreeContext(seq)
    half = extend_condition(ctx, identity_tree(ctx), "a")
    with pytest.raises(SplitError) as err:
        build_splitting_tree(half, make_oracle(seq, "proj:a"), (), "a", 2)
    assert err.value.code == "interpolant-missing"


def test_verify_splitting_flags_an_unsplit_tree():
    bare = SplitCondition(HALF.tree, HALF.guard, HALF, (), "a",
                          UniformTree(SEQ, 1, (), levels=[
                              {a: (a,) for a in SEQ.theta_ids(1)}],
                              trusted=True), [])
    fails = verify_splitting(bare, PROJ_A, 1)
    assert {"check": "split", "level": 0, "sigma": (),
            "pair": (0, 2)} in fails


# ----------------------------------------------------------------- decode

def test_decode_roundtrip():
    s = splitting_tree(5)
    for sigma in ((0, 0, 0, 0, 0), (2, 5, 0, 11, 13), (5, 8, 9, 1, 4)):
        zvals = [SEQ.value(a, "a") for a in sigma]
        bits = computation_decode(s, PROJ_A, "a", "forward", zvals)
        assert bits == bit_stream(PROJ_A, s.routing.node(sigma))
        assert computation_decode(s, PROJ_A, "a", "backward", bits) == zvals


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_decode_roundtrip_random_branches(data):
    s = splitting_tree(4)
    sigma = tuple(data.draw(st.sampled_from(s.routing.alphabet(l)))
                  for l in range(4))
    zvals = [SEQ.value(a, "a") for a in sigma]
    bits = computation_decode(s, PROJ_A, "a", "forward", zvals)
    assert computation_decode(s, PROJ_A, "a", "backward", bits) == zvals


def test_decode_forward_unknown_value():
    s = splitting_tree(2)
    with pytest.raises(SplitError) as err:
        computation_decode(s, PROJ_A, "a", "forward", [99])
    assert err.value.code == "no-surviving-class"


def test_decode_backward_prefix_mismatch():
    s = build_splitting_tree(HALF, PROJ_A, (1,), "a", 2)
    bits = bit_stream(PROJ_A, s.routing.node((0, 0)))
    bits[0] ^= 1
    with pytest.raises(SplitError) as err:
        computation_decode(s, PROJ_A, "a", "backward", bits)
    assert err.value.code == "no-surviving-class"
    assert err.value.witness == {"coordinate": 1}


def test_decode_catches_a_tampered_tree():
    '''Swapping the tail of one block onto a z-inequivalent partner whose
    bits collide forges two surviving classes; backward decode and the
    verifier both notice.'''
    s = splitting_tree(3)
    levels = [dict(s.routing.level(n)) for n in range(3)]
    # valuations 0 and 2 differ at a but share parity, so their opening
    # bits agree; grafting 0's tail onto 2 erases the later separation
    assert SEQ.value(0, "a") != SEQ.value(2, "a")
    levels[1][2] = (levels[1][2][0],) + levels[1][0][1:]
    forged = UniformTree(SEQ, 1, (), levels=levels, trusted=True)
    bad = SplitCondition(s.tree, s.guard, HALF, (), "a", forged, [])
    bits = bit_stream(PROJ_A, forged.node((0, 2)))
    with pytest.raises(SplitError) as err:
        computation_decode(bad, PROJ_A, "a", "backward", bits)
    assert err.value.code == "multiple-classes"
    assert err.value.witness == {"level": 1, "values": [0, 2]}
    assert any(f["check"] == "split" and f["pair"] == (0, 2)
               for f in verify_splitting(bad, PROJ_A, 2))


# ------------------------------------------------------------ diagonalize

def test_diagonalize_projection_certificate():
    refined, cert = diagonalize(FULL, PROJ_B, "a", "b")
    assert cert == {"pair": (6, 7), "betas": ((6, 6), (7, 7)),
                    "coordinate": 2, "bit": 1, "side": 0,
                    "x": "a", "y": "b", "projection": 9}
    assert refined.tree.stem == (0, 0, 6, 6)
    assert check_subtree(refined, FULL, 2)["is_extension"]
    # the committed branch string pins the diagonal bit, which the
    # committed symbol's a-value fails to match
    beta = cert["betas"][cert["side"]]
    assert PROJ_B(cert["coordinate"], beta) == cert["bit"] == 1
    assert SEQ.value(6, "a") == 9 != 1


def test_diagonalize_detects_false_invariance():
    liar = make_oracle(SEQ, "proj:a")
    liar.invariant = "b"
    with pytest.raises(SplitError) as err:
        diagonalize(FULL, liar, "a", "b")
    assert err.value.code == "oracle-not-y-invariant"
    assert err.value.witness["bits"] == (1, 0)
    assert err.value.witness["declared"] == "b"


def test_diagonalize_probes_the_exact_commitments():
    '''A table oracle rigged to differ exactly on the probe strings is
    caught; one that agrees there yields a sound certificate anyway.'''
    rigged = make_oracle(SEQ, {"entries": {(6, 6): 0, (7, 7): 1},
                               "default": 0, "invariant": "b"})
    with pytest.raises(SplitError) as err:
        diagonalize(FULL, rigged, "a", "b")
    assert err.value.code == "oracle-not-y-invariant"
    agreeing = make_oracle(SEQ, {"entries": {(6, 6): 1, (7, 7): 1},
                                 "default": 0, "invariant": "b"})
    refined, cert = diagonalize(FULL, agreeing, "a", "b")
    assert cert["bit"] == 1 and cert["side"] == 0
    assert agreeing(2, refined.tree.stem[2:4]) == 1


def test_diagonalize_without_a_differentiating_pair():
    '''Forcing the two b-congruent pairs of the final family apart at b
    leaves nothing that agrees at b and differs at a.'''
    seq = build_sequence(B2, 2, order=("a", "b"))
    seq.values[7]["b"] = 98
    seq.values[13]["b"] = 99
    ctx = TreeContext(seq)
    full = extend_condition(ctx, extend_condition(
        ctx, identity_tree(ctx), "a"), "b")
    with pytest.raises(SplitError) as err:
        diagonalize(full, make_oracle(seq, "proj:b"), "a", "b")
    assert err.value.code == "no-differentiation-pair"


def test_diagonalize_preconditions():
    with pytest.raises(AssertionError):
        diagonalize(FULL, PROJ_B, "a", "1")   # a is under 1
    with pytest.raises(AssertionError):
        diagonalize(HALF, PROJ_B, "a", "b")   # b is not guarded


# -------------------------------------------------------------- documents

def test_split_condition_document_is_serializable():
    s = splitting_tree(2)
    doc = s.document(2)
    assert set(doc) == {"rho", "z", "certificates", "condition"}
    assert doc["z"] == "a"
    blob = json.dumps(doc, sort_keys=True)
    assert json.loads(blob) == doc
