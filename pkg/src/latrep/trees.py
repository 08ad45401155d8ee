'''Finite-depth uniform branching trees over a staged valuation family.

A tree is stored as a branching recipe: a stem (the output prefix every
branch shares) plus one table per level sending each valuation id of the
stage start+l family to the output segment appended when that symbol is
consumed.  Segments at a level all have the same positive length and are
pairwise distinct, so extension order, incompatibility of siblings and
uniformity hold by construction, and every node output can be rebuilt on
demand from the recipe.

Contracts checked here:

  * structural: tables keyed by exactly the stage family, equal-length
    distinct entries, and every output coordinate j drawn from the stage-j
    family (families are nested, so finer trees may sit inside coarser ones);
  * subtree: each node output of the finer tree occurs verbatim as a node
    output of the coarser tree, and consuming one finer symbol consumes a
    block of coarser symbols starting with that same symbol;
  * congruence preservation: for every guarded member x, symbols agreeing
    at x must map to coarser blocks agreeing at x coordinatewise.

Refinement combinators: derive (re-root, optionally replacing the shared
prefix), reshape (re-key a finer tree over the coarser alphabets),
extend_condition (grow the guard set, re-rooting along all-zero symbols)
and fuse (thread a refinement callback over every node, level by level).
Path decoding: signature, recode and decode_order_join.

Trees grow their level tables on demand; growth is append-only but not
thread safe, so confine a tree to one thread while it is materializing.
'''

import itertools
import weakref

from .lattice import Slsl, generated_slsl

# valuation id of the all-zero row, fixed by the family bootstrap
ZERO = 0

_THETA_SETS = weakref.WeakKeyDictionary()


def _theta_set(seq, j):
    '''Memoized frozenset view of theta_ids(j); stem and transfer symbol
    validation hits this once per output coordinate.'''
    cache = _THETA_SETS.setdefault(seq, {})
    if j not in cache:
        cache[j] = frozenset(seq.theta_ids(j))
    return cache[j]


class TreeError(Exception):
    def __init__(self, code, message, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


class UniformTree:
    '''Stem plus per-level symbol tables over a RepSequence's families.

    start is the stage whose family labels level 0; level l is keyed by
    exactly theta_ids(start + l).  rule, when given, produces the table for
    the next level so the tree can materialize lazily; without it the tree
    is fixed at the depth of the tables passed in.
    '''

    def __init__(self, seq, start, stem, rule=None, levels=(), trusted=False):
        assert start >= 0
        self.seq = seq
        self.start = start
        self.stem = tuple(stem)
        self._trusted = trusted
        if not trusted:
            for j, a in enumerate(self.stem):
                assert a in _theta_set(seq, j), ("stem-symbol-stage", j, a)
        self._rule = rule
        self._chase = None
        self._levels = []
        self._rev = []
        self._lens = [len(self.stem)]
        for table in levels:
            self._adopt(table, trusted=trusted)

    @property
    def depth(self):
        return len(self._levels)

    def alphabet(self, l):
        return self.seq.theta_ids(self.start + l)

    def _adopt(self, table, trusted=False):
        l = len(self._levels)
        ids = self.alphabet(l)
        base = self._lens[-1]
        if trusted:
            self._levels.append(table)
            self._rev.append(None)
            self._lens.append(base + len(table[ids[0]]))
            return
        assert set(table) == set(ids), ("level-alphabet", l)
        entries = [tuple(table[a]) for a in ids]
        width = len(entries[0])
        assert width >= 1, ("empty-segment", l)
        assert all(len(seg) == width for seg in entries), ("ragged-level", l)
        assert len(set(entries)) == len(entries), ("colliding-segments", l)
        for seg in entries:
            for off, a in enumerate(seg):
                assert a in _theta_set(self.seq, base + off), \
                    ("segment-symbol-stage", l, base + off, a)
        self._levels.append(dict(zip(ids, entries)))
        self._rev.append(None)
        self._lens.append(base + width)

    def level(self, l):
        while l >= len(self._levels):
            m = len(self._levels)
            node, lvl = self, m
            while node._chase is not None and lvl >= len(node._levels):
                parent, shift = node._chase
                lvl += shift
                node = parent
            if node is self:
                if self._rule is None:
                    raise TreeError(
                        "depth-exceeded",
                        "level %d is beyond the materialized depth %d"
                        % (l, m), {"level": l, "depth": m})
                self._adopt(self._rule(m), trusted=self._trusted)
                continue
            table = node._levels[lvl] if lvl < len(node._levels) \
                else node.level(lvl)
            ids = self.alphabet(m)
            if len(table) != len(ids):
                table = {a: table[a] for a in ids}
            self._adopt(table, trusted=True)
        return self._levels[l]

    def rev_level(self, l):
        '''Segment -> symbol lookup for level l (segments are distinct).'''
        table = self.level(l)
        if self._rev[l] is None:
            self._rev[l] = {seg: a for a, seg in table.items()}
        return self._rev[l]

    def block_len(self, l):
        self.level(l)
        return self._lens[l + 1] - self._lens[l]

    def node_len(self, l):
        '''Output length of any node reached by l symbols.'''
        if l:
            self.level(l - 1)
        return self._lens[l]

    def node(self, sigma):
        out = list(self.stem)
        for l, a in enumerate(sigma):
            table = self.level(l)
            if a not in table:
                raise TreeError(
                    "out-of-alphabet",
                    "symbol %r is not in the level-%d family" % (a, l),
                    {"position": l, "symbol": a})
            out.extend(table[a])
        return tuple(out)

    def strings(self, n):
        '''All length-n input strings, in id order per position.'''
        return itertools.product(*[self.alphabet(j) for j in range(n)])

    def document(self, depth):
        return {"start": self.start, "stem": list(self.stem),
                "levels": [[{"symbol": a, "segment": list(seg)}
                            for a, seg in sorted(self.level(l).items())]
                           for l in range(depth)]}


def trees_equal(a, b, depth):
    if a.start != b.start or a.stem != b.stem:
        return False
    return all(a.level(l) == b.level(l) for l in range(depth))


class Condition:
    '''A tree paired with the finite meet-closed member set (the guard)
    whose congruences any refinement of the tree must keep.'''

    def __init__(self, tree, guard):
        assert isinstance(guard, Slsl)
        present = set(tree.seq.members(tree.start))
        assert set(guard.members) <= present, ("guard-beyond-stage",
                                               guard.members)
        self.tree = tree
        self.guard = guard

    def document(self, depth):
        return {"guard": list(self.guard.members),
                "tree": self.tree.document(depth)}


class TreeContext:
    '''Ambient data for building conditions: a stabilized family plus a
    sublattice of its base whose elements conditions may guard.'''

    def __init__(self, seq, members=None):
        assert seq.stabilized(), "context needs a family covering its base"
        self.seq = seq
        self.base = seq.base
        if members is None:
            members = self.base.elements
        members = tuple(sorted(set(members), key=self.base.index.__getitem__))
        have = set(members)
        assert "0" in have and self.base.top in have, "context needs bounds"
        for s in members:
            for t in members:
                assert self.base.join(s, t) in have, ("not-join-closed", s, t)
                assert self.base.meet(s, t) in have, ("not-meet-closed", s, t)
        self.members = members
        assert all(seq.value(ZERO, x) == 0 for x in self.base.elements)


def identity_tree(ctx):
    '''The degree-0 condition whose tree echoes its input symbols.'''
    seq = ctx.seq
    tree = UniformTree(seq, 0, (),
                       rule=lambda l: {a: (a,) for a in seq.theta_ids(l)},
                       trusted=True)
    bounds = ("0",) if ctx.base.top == "0" else ("0", ctx.base.top)
    return Condition(tree, Slsl(ctx.base, bounds))


def eval_tree(tree, sigma):
    return tree.node(tuple(sigma))


def derive(tree, sigma, mu=None):
    '''Re-root tree at sigma; when mu is given, splice it over the initial
    coordinates of the new stem (the transfer construction).'''
    sigma = tuple(sigma)
    stem = tree.node(sigma)
    if mu is not None:
        mu = tuple(mu)
        if len(mu) > len(stem):
            raise TreeError(
                "transfer-too-long",
                "replacement of length %d exceeds the %d-long stem"
                % (len(mu), len(stem)),
                {"mu": len(mu), "stem": len(stem)})
        for j, a in enumerate(mu):
            if a not in _theta_set(tree.seq, j):
                raise TreeError(
                    "stage-mismatch",
                    "replacement symbol %r is not in the stage-%d family"
                    % (a, j),
                    {"position": j, "symbol": a})
        stem = mu + stem[len(mu):]
    shift = len(sigma)
    out = UniformTree(tree.seq, tree.start + shift, stem, trusted=True)
    out._chase = (tree, shift)
    return out


def _decompose(tree, out, level, pos):
    '''Greedily match out[pos:] against whole blocks of tree from level.

    Returns (symbols, level2, pos2, status): "end" when the string is
    consumed exactly at a block boundary, "partial" when the tail is a
    proper prefix of at least one block entry, "mismatch" otherwise.
    '''
    symbols = []
    while pos < len(out):
        rev = tree.rev_level(level)
        width = tree.block_len(level)
        chunk = tuple(out[pos:pos + width])
        if len(chunk) < width:
            if any(seg[:len(chunk)] == chunk for seg in rev):
                return symbols, level, pos, "partial"
            return symbols, level, pos, "mismatch"
        if chunk not in rev:
            return symbols, level, pos, "mismatch"
        symbols.append(rev[chunk])
        level += 1
        pos += width
    return symbols, level, pos, "end"


def check_subtree(s, t, depth):
    '''Alignment and congruence report for conditions s against t.

    Never raises on bad trees: every defect is recorded in the report.
    alignment[n] is the t-level whose nodes host the level-n nodes of s;
    blocks[n][a] is the t-symbol block consumed by the s-symbol a.
    on_tree says every checked output of s is a node of t (containment);
    is_subtree further requires each block to open with its own symbol,
    so the branchings of s follow those of t.  Routing tails put blocks
    with mismatched openings on derived trees of t, which keeps the
    congruence columns meaningful either way.
    '''
    st, tt = s.tree, t.tree
    report = {"start": (st.start, tt.start),
              "guard_extends":
                  set(s.guard.members) >= set(t.guard.members),
              "alignment": [], "tau_stem": None, "blocks": [],
              "congruence": {}, "failures": []}
    fail = report["failures"].append
    if st.start < tt.start:
        fail({"check": "start-order", "start": (st.start, tt.start)})
    if st.stem[:len(tt.stem)] != tt.stem:
        cut = [j for j in range(min(len(st.stem), len(tt.stem)))
               if st.stem[j] != tt.stem[j]]
        fail({"check": "stem-not-on-tree",
              "position": cut[0] if cut else len(st.stem)})
    else:
        tau, lvl, pos, status = _decompose(tt, st.stem, 0, len(tt.stem))
        if status != "end":
            fail({"check": "stem-not-on-tree", "position": pos})
        else:
            report["tau_stem"] = tuple(tau)
            report["alignment"].append(lvl)
    if report["failures"]:
        report["on_tree"] = False
        report["is_subtree"] = False
        report["is_extension"] = False
        return report

    m = report["alignment"][0]
    decomposed = True
    branching = True
    for n in range(depth):
        table = st.level(n)
        blocks = {}
        ends = set()
        for a in sorted(table):
            symbols, lvl, pos, status = _decompose(tt, table[a], m, 0)
            if status != "end":
                fail({"check": "block-decompose", "level": n, "alpha": a,
                      "position": pos})
                decomposed = False
                continue
            if not symbols or symbols[0] != a:
                fail({"check": "branch-mismatch", "level": n, "alpha": a,
                      "block": tuple(symbols)})
                branching = False
            blocks[a] = tuple(symbols)
            ends.add(lvl)
        report["blocks"].append(blocks)
        if len(blocks) < len(table) or len(ends) != 1:
            decomposed = False
            break
        m = ends.pop()
        report["alignment"].append(m)

    structural = decomposed and branching
    for x in t.guard.members:
        good = True
        for n, blocks in enumerate(report["blocks"]):
            ids = sorted(blocks)
            for i, a in enumerate(ids):
                for b in ids[i + 1:]:
                    if not st.seq.congruent(a, b, x):
                        continue
                    mu, nu = blocks[a], blocks[b]
                    bad = [j for j, (u, v) in enumerate(zip(mu, nu))
                           if not st.seq.congruent(u, v, x)]
                    if bad:
                        good = False
                        fail({"check": "congruence", "x": x, "level": n,
                              "sigma": (ZERO,) * n, "alpha": a, "beta": b,
                              "position": bad[0]})
        report["congruence"][x] = good
    report["on_tree"] = decomposed
    report["is_subtree"] = structural
    report["is_extension"] = (structural and report["guard_extends"]
                              and all(report["congruence"].values()))
    return report


def extend_condition(ctx, cond, x, stage=0):
    '''Refine cond so its guard also contains x, re-rooting along all-zero
    symbols until every guarded member is present in the stage lattice.'''
    if x not in ctx.members:
        raise TreeError(
            "element-not-in-context",
            "%r is outside the context sublattice" % (x,), {"element": x})
    seq = ctx.seq
    grown = generated_slsl(ctx.base, set(cond.guard.members) | {x})
    assert set(grown.members) <= set(ctx.members)
    i = max(cond.tree.start, stage)
    while not set(grown.members) <= set(seq.members(i)):
        i += 1
    tree = derive(cond.tree, (ZERO,) * (i - cond.tree.start))
    return Condition(tree, grown)


def reshape(cond, target, depth):
    '''Re-key cond's tree over target's (smaller) level alphabets, keeping
    every output string, so the result sits at target's start stage.'''
    report = check_subtree(cond, target, depth)
    if not report["is_extension"]:
        raise TreeError(
            "not-an-extension",
            "the condition does not refine the reshape target", report)
    inner, k0 = cond.tree, target.tree.start
    tree = UniformTree(inner.seq, k0, inner.stem, trusted=True)
    tree._chase = (inner, 0)
    return Condition(tree, target.guard)


def _snap(tree, d):
    '''Flat copy with d levels filled in eagerly, so readers of those
    levels never walk the combinator chain behind tree.'''
    out = UniformTree(tree.seq, tree.start, tree.stem, trusted=True)
    out._chase = (tree, 0)
    out.level(d - 1)
    return out


def _refined(result, arg, depth):
    if (not isinstance(result, Condition)
            or result.tree.start != arg.tree.start
            or tuple(result.guard.members) != tuple(arg.guard.members)):
        raise TreeError(
            "refiner-contract-violation",
            "refiner output is not a same-stage, same-guard condition")
    report = check_subtree(result, arg, depth)
    if not report["is_extension"]:
        raise TreeError(
            "refiner-contract-violation",
            "refiner output does not refine its argument", report)
    return result


def fuse(p, refiner, depth, trace=None):
    '''Thread the refiner over every child slot, one level at a time.

    refiner(n, cond) must return a condition at cond's start stage with
    cond's guard whose tree refines cond's (checked).  Round n visits each
    slot (sigma, a) of level n in order: the running auxiliary tree is
    re-rooted onto the slot's node (derive at a, then stem transfer) and
    refined there; whatever stem growth the refiner produced is appended
    behind the branch block, to the routing tail shared by the whole
    level.  Level n of the result is the round-opening auxiliary's level-0
    table plus that tail, so branchings keep following p's and every
    branch beyond a level-n node runs inside a tree the refiner approved
    at round n.  The result keeps p's start stage and guard, and p's stem
    as refined by round 0.
    '''
    assert depth >= 1
    seq = p.tree.seq
    start, guard = p.tree.start, p.guard
    cur = _refined(refiner(0, p), p, max(1, min(2, depth)))
    if trace is not None:
        trace.append({"round": 0, "slot": (), "condition": cur})
    stem = cur.tree.stem
    aux = _snap(cur.tree, 4)
    levels = []

    def s_node(sigma):
        out = list(stem)
        for l, a in enumerate(sigma):
            out.extend(levels[l][a])
        return tuple(out)

    for n in range(depth):
        branch = dict(aux.level(0))
        eta = ()
        running = None
        chk = max(1, min(2, depth - n))
        for sigma in itertools.product(
                *[seq.theta_ids(start + j) for j in range(n)]):
            snode = s_node(sigma)
            for a in seq.theta_ids(start + n):
                mu = snode + branch[a] + eta
                if running is None:
                    arg_tree = derive(aux, (a,), mu)
                else:
                    arg_tree = derive(running, (), mu)
                arg = Condition(arg_tree, guard)
                cur = _refined(refiner(n + 1, arg), arg, chk)
                running = _snap(cur.tree, 4)
                eta = running.stem[len(mu) - len(eta):]
                if trace is not None:
                    trace.append({"round": n, "slot": sigma + (a,),
                                  "condition": cur})
        levels.append({a: branch[a] + eta
                       for a in seq.theta_ids(start + n)})
        aux = running
    tree = UniformTree(seq, start, stem, levels=levels)
    return Condition(tree, guard)


def signature(prefix, cond, x=None):
    '''Longest input string whose node output is a prefix of prefix; with
    x, the projection of those symbols to their values at x.'''
    tree = cond.tree
    prefix = tuple(prefix)
    head = prefix[:len(tree.stem)]
    if head != tree.stem[:len(head)]:
        cut = [j for j in range(len(head)) if head[j] != tree.stem[j]]
        raise TreeError(
            "prefix-not-on-tree",
            "the prefix leaves the tree inside its stem", {"position": cut[0]})
    symbols = []
    if len(prefix) > len(tree.stem):
        symbols, _lvl, pos, status = _decompose(
            tree, prefix, 0, len(tree.stem))
        if status == "mismatch":
            raise TreeError(
                "prefix-not-on-tree",
                "the prefix leaves the tree at coordinate %d" % pos,
                {"position": pos})
    if x is None:
        return list(symbols)
    return [tree.seq.value(a, x) for a in symbols]


def _node_align(tree, m, target):
    '''Least node level of tree, from m up, whose output length is target.'''
    length = tree.node_len(m)
    while length < target:
        m += 1
        length = tree.node_len(m)
    if length != target:
        raise TreeError(
            "alignment-failure",
            "no node level of the coarser tree has output length %d" % target,
            {"target": target, "overshoot": length})
    return m


def recode(q, p, x, direction, values):
    '''Translate value sequences at x between paths named on q and on p.

    down: values is a prefix of the p-symbol values of a path through q;
    returns the matching q-symbol values, one per q level, read off the
    level alignment.  up: values is a prefix of the q-symbol values;
    each q symbol carrying the given value must map to an x-identical
    p-symbol block (congruence preservation), which reconstructs the
    p-symbol values over the whole spanned block; disagreement between
    candidate blocks raises ambiguity.
    '''
    assert direction in ("down", "up")
    assert x in p.guard.members, x
    qt, pt = q.tree, p.tree
    seq = qt.seq
    if qt.stem[:len(pt.stem)] != pt.stem:
        raise TreeError(
            "alignment-failure",
            "the finer stem leaves the coarser tree", {"level": 0})
    tau, m0, pos, status = _decompose(pt, qt.stem, 0, len(pt.stem))
    if status != "end":
        raise TreeError(
            "alignment-failure",
            "the finer stem is not a node of the coarser tree",
            {"position": pos})
    if direction == "down":
        out = []
        n, m = 0, m0
        while m < len(values):
            out.append(values[m])
            m = _node_align(pt, m, qt.node_len(n + 1))
            n += 1
        return out
    out = [seq.value(a, x) for a in tau]
    m = m0
    for n, want in enumerate(values):
        table = qt.level(n)
        candidates = [a for a in table if seq.value(a, x) == want]
        if not candidates:
            raise TreeError(
                "alignment-failure",
                "no level-%d symbol of the finer tree has value %r at %s"
                % (n, want, x), {"level": n, "value": want})
        projections = {}
        for a in candidates:
            symbols, lvl, pos, status = _decompose(pt, table[a], m, 0)
            if status != "end":
                raise TreeError(
                    "alignment-failure",
                    "a level-%d block does not land on the coarser tree" % n,
                    {"level": n, "alpha": a, "position": pos})
            projections[tuple(seq.value(u, x) for u in symbols)] = lvl
        if len(projections) != 1:
            raise TreeError(
                "ambiguity",
                "level-%d symbols agreeing at %s map to blocks that disagree"
                % (n, x),
                {"level": n, "value": want,
                 "projections": sorted(projections)})
        (proj, m), = projections.items()
        out.extend(proj)
    return out


def decode_order_join(seq, mode, inputs, x, y, z=None):
    '''Recover a comparable element's value sequence from given ones.

    order: inputs is the value sequence of y and x <= y; emits x's.
    join: inputs is the pair of value sequences of x and y; emits the
    join's.  Each coordinate is decoded by searching the stage family for
    any valuation matching the inputs; whenever all matches agree the
    common value is emitted (they must agree once all elements involved
    have entered the stage lattice), otherwise the coordinate is None.
    '''
    base = seq.base
    if mode == "order":
        assert base.leq(x, y), (x, y)
        sources = [(y, list(inputs))]
        target = x
    elif mode == "join":
        gx, gy = inputs
        sources = [(x, list(gx)), (y, list(gy))]
        if z is None:
            z = base.join(x, y)
        assert base.join(x, y) == z, (x, y, z)
        target = z
    else:
        raise ValueError("mode must be order or join")
    out = []
    for m in range(min(len(v) for _, v in sources)):
        hits = [a for a in seq.theta_ids(m)
                if all(seq.value(a, e) == v[m] for e, v in sources)]
        if not hits:
            raise TreeError(
                "no-witness",
                "no stage-%d valuation matches the inputs" % m,
                {"position": m})
        found = sorted({seq.value(a, target) for a in hits})
        if len(found) == 1:
            out.append(found[0])
            continue
        present = set(seq.members(m))
        assert not {target, *(e for e, _ in sources)} <= present, (
            "decode witnesses disagree inside the stage lattice", m)
        out.append(None)
    return out
