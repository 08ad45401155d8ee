import itertools
import json

import pytest

from latrep.lattice import Slsl, fixture
from latrep.sequence import build_sequence
from latrep.trees import (ZERO, Condition, TreeContext, TreeError,
                          UniformTree, check_subtree, decode_order_join,
                          derive, eval_tree, extend_condition, fuse,
                          identity_tree, recode, reshape, signature,
                          trees_equal)

B2 = fixture("B2")
SEQ = build_sequence(B2, 2, order=("a", "b"))
CTX = TreeContext(SEQ)


def ident_refiner(n, cond):
    return cond


def first_child(n, cond):
    inner = derive(cond.tree, (ZERO,))
    return reshape(Condition(inner, cond.guard), cond, 1)


def zero_skip(n, cond):
    '''Stem-preserving refiner for the opening round: every block gets the
    next zero block appended, so each level only keeps the paths that
    detour through 0.  Applied once -- repeating it would double block
    widths at every slot.'''
    if n > 0:
        return cond
    tree = cond.tree

    def rule(l, tree=tree):
        zero = tree.level(l + 1)[ZERO]
        return {a: tree.level(l)[a] + zero for a in tree.alphabet(l)}

    out = UniformTree(tree.seq, tree.start, tree.stem, rule=rule)
    return Condition(out, cond.guard)


def echo_tree(width):
    '''Tree whose level-l blocks repeat the chosen symbol width times.'''
    return UniformTree(
        SEQ, 0, (),
        rule=lambda l: {a: (a,) * width for a in SEQ.theta_ids(l)})


def test_identity_condition_shape():
    p = identity_tree(CTX)
    assert p.tree.start == 0
    assert p.tree.stem == ()
    assert p.guard.members == ("0", "1")
    assert eval_tree(p.tree, (1, 4)) == (1, 4)
    assert len(list(p.tree.strings(2))) == 2 * 6
    assert p.tree.node_len(3) == 3


def test_node_rejects_foreign_symbol():
    p = identity_tree(CTX)
    with pytest.raises(TreeError) as err:
        p.tree.node((1, 99))
    assert err.value.code == "out-of-alphabet"
    assert err.value.witness == {"position": 1, "symbol": 99}


def test_fixed_depth_tree_exhausts():
    tree = UniformTree(SEQ, 0, (), levels=[{0: (0,), 1: (1,)}])
    assert tree.node((1,)) == (1,)
    with pytest.raises(TreeError) as err:
        tree.node((1, 0))
    assert err.value.code == "depth-exceeded"


def test_derive_is_suffix_evaluation():
    p = identity_tree(CTX)
    sub = derive(p.tree, (0, 2))
    assert sub.start == 2
    assert sub.stem == (0, 2)
    for tau in itertools.product(SEQ.theta_ids(2), SEQ.theta_ids(3)):
        assert sub.node(tau) == p.tree.node((0, 2) + tau)


def test_transfer_identities():
    p = identity_tree(CTX)
    # transferring a node onto its own stem changes nothing
    same = derive(p.tree, (), p.tree.node(()))
    assert trees_equal(same, p.tree, 3)
    # rerooting at sigma then swapping in T(tau) equals rerooting at tau
    sigma, tau = (0, 2), (1, 4)
    moved = derive(p.tree, sigma, p.tree.node(tau))
    assert trees_equal(moved, derive(p.tree, tau), 3)


def test_transfer_rejections():
    p = identity_tree(CTX)
    with pytest.raises(TreeError) as err:
        derive(p.tree, (0,), (0, 2))
    assert err.value.code == "transfer-too-long"
    with pytest.raises(TreeError) as err:
        derive(p.tree, (1,), (2,))  # valuation 2 enters at stage 1, not 0
    assert err.value.code == "stage-mismatch"
    assert err.value.witness == {"position": 0, "symbol": 2}


def test_derived_tree_is_an_extension():
    p = identity_tree(CTX)
    s = Condition(derive(p.tree, (0, 3)), p.guard)
    report = check_subtree(s, p, 2)
    assert report["tau_stem"] == (0, 3)
    assert report["alignment"] == [2, 3, 4]
    assert report["blocks"][0] == {a: (a,) for a in SEQ.theta_ids(2)}
    assert report["on_tree"] and report["is_subtree"]
    assert report["is_extension"]
    assert report["congruence"] == {"0": True, "1": True}


def test_subtree_congruence_tamper_is_named():
    '''Valuations 4 and 5 agree at a; a table sending them to blocks that
    split at a must be reported with the witnessing x, sigma, alpha, beta.'''
    assert SEQ.congruent(4, 5, "a")
    guard = Slsl(B2, ("0", "a", "1"))
    base_tree = derive(identity_tree(CTX).tree, (0,))
    t = Condition(base_tree, guard)
    table = {a: (a, 0) for a in SEQ.theta_ids(1)}
    table[5] = (5, 1)
    s = Condition(UniformTree(SEQ, 1, (0,), levels=[table]), guard)
    report = check_subtree(s, t, 1)
    assert report["is_subtree"]
    assert report["congruence"] == {"0": True, "a": False, "1": True}
    assert not report["is_extension"]
    bad = [f for f in report["failures"] if f["check"] == "congruence"]
    assert bad == [{"check": "congruence", "x": "a", "level": 0,
                    "sigma": (), "alpha": 4, "beta": 5, "position": 1}]


def test_on_tree_without_branch_following():
    '''Routing a zero before the branch symbol keeps every output on the
    host tree but breaks the branching clause.'''
    p = identity_tree(CTX)
    routed = UniformTree(
        SEQ, 0, (),
        rule=lambda l: {a: (ZERO, a) for a in SEQ.theta_ids(l)})
    report = check_subtree(Condition(routed, p.guard), p, 2)
    assert report["on_tree"]
    assert not report["is_subtree"] and not report["is_extension"]
    assert all(v for v in report["congruence"].values())
    kinds = {f["check"] for f in report["failures"]}
    assert kinds == {"branch-mismatch"}


def test_off_tree_blocks_are_reported():
    host = Condition(echo_tree(2), identity_tree(CTX).guard)
    stray = UniformTree(
        SEQ, 0, (),
        rule=lambda l: {a: (a, ZERO) for a in SEQ.theta_ids(l)})
    report = check_subtree(Condition(stray, host.guard), host, 2)
    assert not report["on_tree"] and not report["is_subtree"]
    assert any(f["check"] == "block-decompose" for f in report["failures"])


def test_extension_is_transitive():
    p = identity_tree(CTX)
    mid = Condition(derive(p.tree, (1,)), Slsl(B2, ("0", "a", "1")))
    top = Condition(derive(mid.tree, (2,)), Slsl(B2, B2.elements))
    for finer, coarser in ((mid, p), (top, mid), (top, p)):
        report = check_subtree(finer, coarser, 3)
        assert report["is_extension"], (finer, coarser, report["failures"])
    assert check_subtree(top, p, 3)["alignment"] == [2, 3, 4, 5]


def test_extend_condition_noop_when_present():
    p = identity_tree(CTX)
    same = extend_condition(CTX, p, "1")
    assert same.tree.start == 0 and same.tree.stem == ()
    assert same.guard.members == ("0", "1")


def test_extend_condition_reroots_until_member():
    p = identity_tree(CTX)
    got = extend_condition(CTX, p, "a")
    assert got.guard.members == ("0", "a", "1")
    assert got.tree.start == 1 and got.tree.stem == (ZERO,)
    deeper = extend_condition(CTX, got, "b")
    assert deeper.guard.members == ("0", "a", "b", "1")
    assert deeper.tree.start == 2 and deeper.tree.stem == (ZERO, ZERO)
    # the extension refines what it extends
    assert check_subtree(deeper, got, 2)["is_extension"]
    assert check_subtree(got, p, 2)["is_extension"]


def test_extend_condition_stage_floor():
    p = identity_tree(CTX)
    got = extend_condition(CTX, p, "a", stage=3)
    assert got.tree.start == 3 and got.tree.stem == (ZERO,) * 3


def test_extend_condition_outside_context():
    small = TreeContext(SEQ, members=("0", "a", "1"))
    p = identity_tree(small)
    with pytest.raises(TreeError) as err:
        extend_condition(small, p, "b")
    assert err.value.code == "element-not-in-context"


def test_reshape_rekeys_and_keeps_paths():
    p = identity_tree(CTX)
    inner = derive(p.tree, (ZERO,))
    got = reshape(Condition(inner, p.guard), p, 2)
    assert got.tree.start == 0
    assert got.tree.stem == (0,)
    assert got.tree.level(0) == {0: (0,), 1: (1,)}
    for a in SEQ.theta_ids(0):
        assert got.tree.node((a,)) == inner.node((a,))
    assert check_subtree(got, p, 2)["is_extension"]
    # reshaping a condition onto itself changes nothing
    again = reshape(p, p, 2)
    assert trees_equal(again.tree, p.tree, 2)


def test_reshape_carries_target_guard():
    p = identity_tree(CTX)
    rich = extend_condition(CTX, p, "a")
    target = Condition(derive(p.tree, (ZERO,)), p.guard)
    got = reshape(rich, target, 2)
    assert got.guard.members == ("0", "1")


def test_reshape_demands_an_extension():
    p = identity_tree(CTX)
    finer = Condition(derive(p.tree, (1,)), p.guard)
    with pytest.raises(TreeError) as err:
        reshape(p, finer, 2)
    assert err.value.code == "not-an-extension"
    assert err.value.witness["failures"]


def test_fuse_identity_refiner_returns_input():
    p = identity_tree(CTX)
    s = fuse(p, ident_refiner, 3)
    assert s.guard.members == p.guard.members
    assert trees_equal(s.tree, p.tree, 3)


def test_fuse_first_child_routes_every_slot():
    p = identity_tree(CTX)
    trace = []
    s = fuse(p, first_child, 3, trace=trace)
    # one root entry plus one entry per child slot of each level
    assert len(trace) == 1 + 2 + 2 * 6 + 2 * 6 * 14
    assert s.tree.stem == (0,)
    assert s.tree.level(0) == {0: (0, 0, 0), 1: (1, 0, 0)}
    report = check_subtree(s, p, 3)
    assert report["is_extension"]
    assert report["alignment"] == sorted(report["alignment"])
    # every fused node continues the stem its slot's refinement approved
    for entry in trace:
        if entry["slot"] == ():
            continue
        node = s.tree.node(entry["slot"])
        stem = entry["condition"].tree.stem
        assert node[:len(stem)] == stem


def test_fuse_stem_preserving_refiner():
    p = identity_tree(CTX)
    s = fuse(p, zero_skip, 3)
    assert s.tree.stem == ()
    assert s.tree.level(0) == {0: (0, 0), 1: (1, 0)}
    assert check_subtree(s, p, 3)["is_extension"]


def test_fuse_alternating_refiners_deep():
    def parity(n, cond):
        if n % 2 == 0:
            return cond
        return first_child(n, cond)

    p = identity_tree(CTX)
    s = fuse(p, parity, 4)
    report = check_subtree(s, p, 4)
    assert report["is_extension"]
    assert len(report["alignment"]) == 5


def test_fuse_rejects_contract_violations():
    p = identity_tree(CTX)

    def wrong_stage(n, cond):
        return Condition(derive(cond.tree, (ZERO,)), cond.guard)

    with pytest.raises(TreeError) as err:
        fuse(p, wrong_stage, 2)
    assert err.value.code == "refiner-contract-violation"

    rich = extend_condition(CTX, p, "a")

    def wrong_guard(n, cond):
        return Condition(cond.tree, Slsl(B2, ("0", "1")))

    with pytest.raises(TreeError) as err:
        fuse(rich, wrong_guard, 2)
    assert err.value.code == "refiner-contract-violation"

    def off_tree(n, cond):
        tree = UniformTree(
            SEQ, cond.tree.start, cond.tree.stem,
            rule=lambda l: dict(
                zip(cond.tree.alphabet(l),
                    [cond.tree.level(l)[a]
                     for a in reversed(cond.tree.alphabet(l))])))
        return Condition(tree, cond.guard)

    with pytest.raises(TreeError) as err:
        fuse(p, off_tree, 2)
    assert err.value.code == "refiner-contract-violation"
    assert any(f["check"] == "branch-mismatch"
               for f in err.value.witness["failures"])


def test_signature_roundtrip_and_projection():
    p = identity_tree(CTX)
    s = fuse(p, first_child, 3)
    cond = Condition(s.tree, s.guard)
    sigma = (1, 4, 7)
    out = s.tree.node(sigma)
    assert signature(out, cond) == list(sigma)
    assert signature(out, cond, x="1") == [SEQ.value(a, "1") for a in sigma]
    # a dangling partial block still names the completed levels
    wide = Condition(echo_tree(2), p.guard)
    prefix = wide.tree.node((1, 0)) + (5,)
    assert signature(prefix, wide) == [1, 0]


def test_signature_off_tree():
    p = identity_tree(CTX)
    s = fuse(p, first_child, 2)
    cond = Condition(s.tree, s.guard)
    with pytest.raises(TreeError) as err:
        signature((1, 1, 1), cond)
    assert err.value.code == "prefix-not-on-tree"
    with pytest.raises(TreeError) as err:
        signature((1,), cond)  # stem starts with 0
    assert err.value.code == "prefix-not-on-tree"
    assert err.value.witness == {"position": 0}


def test_recode_same_tree_is_identity():
    p = identity_tree(CTX)
    vals = [0, 3, 1, 2]
    assert recode(p, p, "1", "down", vals) == vals


def test_recode_roundtrip_through_refinement():
    p = extend_condition(CTX, identity_tree(CTX), "a")
    q = fuse(p, first_child, 3)
    sigma = (4, 7, 13)
    path = q.tree.node(sigma)
    tau = path[len(p.tree.stem):]  # p is identity-shaped: one symbol per slot
    assert p.tree.node(tau) == path
    for x in ("0", "a", "1"):
        p_vals = [SEQ.value(c, x) for c in tau]
        q_vals = [SEQ.value(c, x) for c in sigma]
        assert recode(q, p, x, "down", p_vals) == q_vals
        assert recode(q, p, x, "up", q_vals) == p_vals


def test_recode_up_detects_ambiguity():
    guard = Slsl(B2, ("0", "a", "1"))
    base_tree = derive(identity_tree(CTX).tree, (ZERO,))
    p = Condition(base_tree, guard)
    table = {a: (a, 0) for a in SEQ.theta_ids(1)}
    table[5] = (5, 1)  # 4 and 5 agree at a; their blocks now disagree
    q = Condition(UniformTree(SEQ, 1, (0,), levels=[table]), guard)
    want = SEQ.value(4, "a")
    with pytest.raises(TreeError) as err:
        recode(q, p, "a", "up", [want])
    assert err.value.code == "ambiguity"
    assert err.value.witness["level"] == 0
    assert len(err.value.witness["projections"]) == 2


def test_decode_order_same_element_is_identity():
    syms = (1, 4, 7, 13)
    vals = [SEQ.value(a, "a") for a in syms]
    assert decode_order_join(SEQ, "order", vals, "a", "a") == vals


def test_decode_order_recovers_lower_projection():
    syms = (1, 2, 9, 5)
    g_top = [SEQ.value(a, "1") for a in syms]
    for x in ("0", "a", "b"):
        want = [SEQ.value(a, x) for a in syms]
        assert decode_order_join(SEQ, "order", g_top, x, "1") == want


def test_decode_join_recovers_join_projection():
    syms = (0, 3, 11, 8)
    g_a = [SEQ.value(s, "a") for s in syms]
    g_b = [SEQ.value(s, "b") for s in syms]
    want = [SEQ.value(s, "1") for s in syms]
    assert decode_order_join(SEQ, "join", (g_a, g_b), "a", "b") == want
    assert decode_order_join(SEQ, "join", (g_a, g_b), "a", "b", z="1") == want


def test_decode_without_witness():
    with pytest.raises(TreeError) as err:
        decode_order_join(SEQ, "order", [99], "a", "1")
    assert err.value.code == "no-witness"
    assert err.value.witness == {"position": 0}


def test_decode_pads_none_before_membership():
    '''Valuations 4 and 5 agree at a and split at 1; forcing them to agree
    at the not-yet-present b makes the join column undecidable there.'''
    seq = build_sequence(B2, 2, order=("a", "b"))
    seq.values[5]["b"] = seq.values[4]["b"]
    g_a = [seq.value(1, "a"), seq.value(4, "a")]
    g_b = [seq.value(1, "b"), seq.value(4, "b")]
    got = decode_order_join(seq, "join", (g_a, g_b), "a", "b")
    assert got == [seq.value(1, "1"), None]


def test_condition_guard_must_fit_stage():
    p = identity_tree(CTX)
    with pytest.raises(AssertionError):
        Condition(p.tree, Slsl(B2, ("0", "a", "1")))


def test_context_requires_stabilized_family():
    shallow = build_sequence(B2, 1, order=("a", "b"))
    assert not shallow.stabilized()
    with pytest.raises(AssertionError):
        TreeContext(shallow)
    with pytest.raises(AssertionError):
        TreeContext(SEQ, members=("0", "a"))


def test_documents_are_serializable():
    p = identity_tree(CTX)
    s = fuse(p, first_child, 2)
    doc = s.document(2)
    assert set(doc) == {"guard", "tree"}
    assert doc["tree"]["start"] == 0
    blob = json.dumps(doc, sort_keys=True)
    assert json.loads(blob) == doc
