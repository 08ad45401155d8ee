'''Total bit oracles over branching strings and split-driven refinement.

An oracle assigns one bit to every (coordinate, string) pair, the string
listing the branching symbols a condition has consumed.  Two same-length
strings that agree at an element w coordinatewise but receive different
bits somewhere are a split modulo w.  Below a suitable prefix the set of
elements admitting no split is closed under meet, so it has a least
element z; a condition can then be refined so that sibling extensions
disagreeing at z always split, which makes the oracle's bits and the
z-values of a branch recoverable from one another (computation_decode
replays both directions).  diagonalize produces the complementary witness:
below a nonorder pair, an oracle invariant at y pins a bit that disagrees
with the x-value of one of two y-congruent symbols.

Searches here are exhaustive within explicit depth bounds and report
exhaustion instead of extrapolating.  The cost of a failed split search is
the full product of congruent symbol pairs per position, so keep depths
small when the modulus identifies little.
'''

import itertools

from .trees import Condition, UniformTree, ZERO, check_subtree, derive


class SplitError(Exception):
    def __init__(self, code, message, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


class Oracle:
    '''Deterministic map (coordinate n, symbol string of length n) -> bit.

    invariant, when set, names an element w such that strings congruent at
    w coordinatewise receive equal bits.  The declaration is metadata:
    consumers that rely on it (diagonalize) check it where it matters.
    '''

    def __init__(self, seq, kind, bit, invariant=None, label=None):
        self.seq = seq
        self.kind = kind
        self._bit = bit
        self.invariant = invariant
        self.label = label if label is not None else kind

    def __call__(self, n, sigma):
        sigma = tuple(sigma)
        assert len(sigma) == n, "coordinate must equal the string length"
        b = self._bit(n, sigma)
        assert b in (0, 1), ("oracle-not-binary", self.label, n, sigma)
        return b

    def document(self):
        return {"kind": self.kind, "label": self.label,
                "invariant": self.invariant}


def make_oracle(seq, spec):
    '''Bundled oracle from a spec string or an explicit table.

    Spec strings: "const:B", "proj:W", "xor:W1,W2".  proj reads the W-value
    of the newest symbol mod 2; xor adds the two values first.  A dict
    builds a table oracle: {"entries": {string tuple: bit}, "default": bit,
    "invariant": element or None}; strings absent from the table get the
    default, so the oracle stays total.
    '''
    if isinstance(spec, dict):
        entries = {tuple(k): v for k, v in spec.get("entries", {}).items()}
        default = spec.get("default", 0)
        assert default in (0, 1), "table default must be a bit"
        assert all(v in (0, 1) for v in entries.values()), \
            "table entries must be bits"

        def table_bit(n, sigma):
            return entries.get(sigma, default)

        return Oracle(seq, "table", table_bit, spec.get("invariant"),
                      "table[%d]" % len(entries))
    kind, _, arg = spec.partition(":")
    if kind == "const":
        b = int(arg)
        assert b in (0, 1), "const oracle takes bit 0 or 1"
        return Oracle(seq, "const", lambda n, sigma: b, "0", spec)
    if kind == "proj":
        if arg not in seq.base.elements:
            raise SplitError("unknown-element",
                             "%r is not in the base lattice" % (arg,),
                             {"element": arg})

        def proj_bit(n, sigma, w=arg):
            return seq.value(sigma[n - 1], w) % 2 if n else 0

        return Oracle(seq, "proj", proj_bit, arg, spec)
    if kind == "xor":
        w1, _, w2 = arg.partition(",")
        for w in (w1, w2):
            if w not in seq.base.elements:
                raise SplitError("unknown-element",
                                 "%r is not in the base lattice" % (w,),
                                 {"element": w})

        def xor_bit(n, sigma, u=w1, v=w2):
            if not n:
                return 0
            return (seq.value(sigma[n - 1], u)
                    + seq.value(sigma[n - 1], v)) % 2

        return Oracle(seq, "xor", xor_bit, seq.base.join(w1, w2), spec)
    raise SplitError("unknown-oracle-kind",
                     "no oracle kind %r" % (kind,), {"spec": spec})


def bit_stream(oracle, sigma):
    '''Bits pinned by the prefixes of sigma, one per coordinate 1..len.'''
    sigma = tuple(sigma)
    return [oracle(n, sigma[:n]) for n in range(1, len(sigma) + 1)]


def _first_difference(oracle, sig, tau):
    assert len(sig) == len(tau)
    for n in range(1, len(sig) + 1):
        if oracle(n, sig[:n]) != oracle(n, tau[:n]):
            return n
    return None


def find_split(cond, oracle, rho, w, depth):
    '''Least same-length pair extending rho, congruent at w coordinatewise,
    with differing bit streams; None once extensions of length depth are
    exhausted.

    Extension lengths are scanned in increasing order with symbol pairs in
    id order per position, so a hit is length-lex minimal.  Only the newest
    coordinate is compared at each length: a difference at an earlier one
    would have surfaced at the shorter length already.
    '''
    tree = cond.tree
    seq = tree.seq
    assert w in seq.base.elements, "split modulus must be a base element"
    rho = tuple(rho)
    for j, a in enumerate(rho):
        assert a in tree.alphabet(j), ("prefix-symbol-stage", j, a)
    pair_cache = {}
    columns = []
    for ext in range(1, depth + 1):
        ids = tree.alphabet(len(rho) + ext - 1)
        if ids not in pair_cache:
            pair_cache[ids] = tuple(
                (a, b) for a in ids for b in ids
                if seq.value(a, w) == seq.value(b, w))
        columns.append(pair_cache[ids])
        hit = _descend(oracle, rho, rho, columns, 0)
        if hit is not None:
            return hit
    return None


def _descend(oracle, sig, tau, columns, s):
    if s == len(columns):
        n = len(sig)
        if oracle(n, sig) != oracle(n, tau):
            return sig, tau
        return None
    for a, b in columns[s]:
        hit = _descend(oracle, sig + (a,), tau + (b,), columns, s + 1)
        if hit is not None:
            return hit
    return None


def least_nonsplit(cond, oracle, depth, prefix_depth=1):
    '''Prefix whose family of no-split guard elements is maximal, that
    family (in lattice element order), and its least element.

    Prefixes are scanned in length-lex order up to prefix_depth and the
    first one whose family is not strictly contained in another wins.  The
    family is checked to be meet closed before folding it to its least
    element; a violating pair is reported instead of a wrong answer, since
    table oracles at finite depth carry no closure guarantee.
    '''
    tree = cond.tree
    seq = tree.seq
    members = cond.guard.members
    lat = seq.base
    full = None
    candidates = []
    for length in range(prefix_depth + 1):
        for rho in tree.strings(length):
            sp = frozenset(
                w for w in members
                if find_split(cond, oracle, rho, w, depth) is None)
            candidates.append((rho, sp))
            if len(sp) == len(members):
                full = rho
                break
        if full is not None:
            break
    best_rho, best = candidates[0]
    for rho, sp in candidates[1:]:
        if sp > best:
            best_rho, best = rho, sp
    for u, v in itertools.combinations(sorted(best), 2):
        m = lat.meet(u, v)
        assert m in members, "guard must be closed under meet"
        if m not in best:
            raise SplitError(
                "meet-closure-failure",
                "no-split elements %r and %r but their meet %r splits"
                % (u, v, m),
                {"rho": best_rho, "pair": (u, v), "meet": m,
                 "family": sorted(best)})
    z = None
    for u in best:
        z = u if z is None else lat.meet(z, u)
    order = {x: i for i, x in enumerate(lat.elements)}
    return best_rho, tuple(sorted(best, key=order.get)), z


def _route_maps(seq, members, ap, aq, b0, b1):
    '''Congruence-preserving ways to send ap, aq onto the anchor pair.

    Returns (maps, g0, g1) where maps[0] keeps the left anchor (ap -> b0,
    aq -> g1), maps[1] detaches both (g0, g1) and maps[2] keeps the right
    anchor (g0, b1); None when neither a direct certificate nor a stored
    fallback covers the tuple.
    '''
    kind = seq.find_hom_map(members, ap, aq, b0, b1)
    if kind is not None:
        def direct(v, _k=kind):
            return seq.apply_hom_map(_k, ap, aq, b0, b1, v)

        return (direct, direct, direct), b0, b1
    want = (ap, aq, b0, b1)
    key_set = frozenset(members)
    for key in sorted(seq.hom_fallbacks):
        if key[2:] == want and frozenset(key[1]) == key_set:
            cert = seq.hom_fallbacks[key]
            return ((cert["f"].get, cert["g"].get, cert["h"].get),
                    cert["gamma0"], cert["gamma1"])
    return None


class SplitCondition(Condition):
    '''Condition refined by build_splitting_tree plus its replay data: the
    committed prefix, the pinned element z, the routing tree whose nodes
    are the base condition's branching strings, and per-pair certificates.
    '''

    def __init__(self, tree, guard, base, rho, z, routing, certificates):
        Condition.__init__(self, tree, guard)
        self.base = base
        self.rho = tuple(rho)
        self.z = z
        self.routing = routing
        self.certificates = certificates

    def q_string(self, sigma):
        '''Base-condition branching string the node sigma commits to.'''
        return self.routing.node(sigma)

    def document(self, depth):
        return {"rho": list(self.rho), "z": self.z,
                "certificates": _listed(self.certificates[:depth]),
                "condition": Condition.document(self, depth)}


def _listed(obj):
    if isinstance(obj, (tuple, list)):
        return [_listed(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _listed(v) for k, v in obj.items()}
    return obj


def build_splitting_tree(cond, oracle, rho, z, depth, split_depth=2):
    '''Refine cond below rho so sibling extensions disagreeing at z split.

    Each level starts from bare one-symbol blocks and walks symbol pairs in
    id order.  A pair already split is left alone; otherwise a split below
    the left string modulo the largest element identifying the pair either
    extends every block identically (when the right string splits against
    the shared extension) or routes through congruence-preserving maps onto
    the split pair, taking the first of the three anchored candidates that
    splits.  Certificates record the outcome per pair.

    Raises split-search-exhausted when a needed split is deeper than
    split_depth, and interpolant-missing when the family holds no routing
    for a tuple (the staged family is too shallow for that pair).
    '''
    tree = cond.tree
    seq = tree.seq
    guard = cond.guard
    assert seq.stabilized(), "splitting needs a family covering its base"
    assert tree.start + 1 >= seq.depth, \
        "level alphabets beyond the first must be the final family"
    assert z in guard.members, "the pinned element must be guarded"
    rho = tuple(rho)
    off = len(rho)
    tables = []
    certificates = []
    parent = rho
    for n in range(depth):
        ids = tree.alphabet(off + n)
        lat = seq.stage_lattice(tree.start + off + n)
        blocks = {a: [a] for a in ids}
        level_cert = []
        for i, ap in enumerate(ids):
            for aq in ids[i + 1:]:
                entry = {"level": n, "pair": (ap, aq)}
                level_cert.append(entry)
                if seq.congruent(ap, aq, z):
                    entry["case"] = "agree-at-z"
                    continue
                nu_p = parent + tuple(blocks[ap])
                nu_q = parent + tuple(blocks[aq])
                hit = _first_difference(oracle, nu_p, nu_q)
                if hit is not None:
                    entry["case"] = "already-split"
                    entry["coordinate"] = hit
                    continue
                w = "0"
                for u in lat.elements:
                    if seq.congruent(ap, aq, u):
                        w = lat.join(w, u)
                assert not lat.leq(z, w), "z cannot sit under the pair join"
                entry["modulus"] = w
                found = find_split(cond, oracle, nu_p, w, split_depth)
                if found is None:
                    raise SplitError(
                        "split-search-exhausted",
                        "no split modulo %r below the level-%d pair within "
                        "depth %d" % (w, n, split_depth),
                        {"level": n, "pair": (ap, aq), "modulus": w,
                         "depth": split_depth})
                sig, tau = found
                ext_s = sig[len(nu_p):]
                ext_t = tau[len(nu_p):]
                if _first_difference(oracle, nu_p + ext_t,
                                     nu_q + ext_t) is not None:
                    for a in ids:
                        blocks[a].extend(ext_t)
                    entry["case"] = "shared-extension"
                    entry["extension"] = ext_t
                    continue
                routes = []
                for s in range(len(ext_s)):
                    route = _route_maps(seq, guard.members, ap, aq,
                                        ext_s[s], ext_t[s])
                    if route is None:
                        raise SplitError(
                            "interpolant-missing",
                            "no routing for the level-%d pair at extension "
                            "position %d" % (n, s),
                            {"level": n, "pair": (ap, aq),
                             "anchors": (ext_s[s], ext_t[s])})
                    routes.append(route)
                gamma0 = tuple(r[1] for r in routes)
                gamma1 = tuple(r[2] for r in routes)
                sides = (("left-anchored", ext_s, gamma1),
                         ("detached", gamma0, gamma1),
                         ("right-anchored", gamma0, ext_t))
                for which, (case, left, right) in enumerate(sides):
                    if _first_difference(oracle, nu_p + left,
                                         nu_q + right) is not None:
                        break
                else:
                    raise SplitError(
                        "routing-exhausted",
                        "none of the anchored candidates splits; the split "
                        "pair itself must have been bogus",
                        {"level": n, "pair": (ap, aq)})
                entry["case"] = case
                for a in ids:
                    images = []
                    for s, (maps, _g0, _g1) in enumerate(routes):
                        img = maps[which](a)
                        if img is None:
                            raise SplitError(
                                "interpolant-missing",
                                "routing at level %d does not cover symbol "
                                "%r" % (n, a),
                                {"level": n, "symbol": a,
                                 "anchors": (ext_s[s], ext_t[s])})
                        images.append(img)
                    blocks[a].extend(images)
        tables.append({a: tuple(blocks[a]) for a in ids})
        certificates.append(level_cert)
        parent = parent + tables[-1][ZERO]
    routing = UniformTree(seq, tree.start + off, rho, levels=tables,
                          trusted=True)
    refined = _compose(tree, routing, depth)
    out = SplitCondition(refined, guard, cond, rho, z, routing, certificates)
    report = check_subtree(out, Condition(derive(tree, rho), guard), depth)
    assert report["is_extension"], report["failures"]
    return out


def _compose(base_tree, routing, depth):
    '''Tree whose branches follow routing but output base_tree coordinates.'''
    stem = base_tree.node(routing.stem)
    tables = []
    pos = len(routing.stem)
    for n in range(depth):
        table = {}
        for a, segment in routing.level(n).items():
            out = []
            for off, b in enumerate(segment):
                out.extend(base_tree.level(pos + off)[b])
            table[a] = tuple(out)
        tables.append(table)
        pos += routing.block_len(n)
    return UniformTree(base_tree.seq, routing.start, stem, levels=tables)


def verify_splitting(scond, oracle, depth=None):
    '''Re-check the split property from the finished tables alone.

    Walks every materialized node and every sibling pair disagreeing at z,
    and confirms the two node strings receive different bit streams; also
    re-checks containment in the base condition below rho.  Returns failure
    records, empty when clean.
    '''
    depth = scond.routing.depth if depth is None else depth
    seq = scond.tree.seq
    z = scond.z
    failures = []
    report = check_subtree(
        scond, Condition(derive(scond.base.tree, scond.rho), scond.guard),
        depth)
    if not report["is_extension"]:
        failures.append({"check": "containment",
                         "failures": report["failures"]})
    for n in range(depth):
        ids = scond.routing.alphabet(n)
        for sigma in scond.routing.strings(n):
            for i, ap in enumerate(ids):
                for aq in ids[i + 1:]:
                    if seq.congruent(ap, aq, z):
                        continue
                    left = scond.routing.node(sigma + (ap,))
                    right = scond.routing.node(sigma + (aq,))
                    if _first_difference(oracle, left, right) is None:
                        failures.append({"check": "split", "level": n,
                                         "sigma": sigma, "pair": (ap, aq)})
    return failures


def computation_decode(scond, oracle, z, direction, values, depth=None):
    '''Replay the equivalence the split property sets up between bits and
    z-values.

    forward: values are z-values, one per branching level; emits the bit
    pinned at every coordinate the prefix determines, checking that all
    branches matching the z-values agree (forced-value-disagreement
    otherwise).  backward: values are bits per coordinate; decodes z-values
    level by level while full levels fit, keeping the branches whose bits
    match and checking the survivors stay one congruence class at z
    (multiple-classes otherwise, no-surviving-class when everything dies).
    '''
    assert z == scond.z, "decode runs against the pinned element"
    routing = scond.routing
    seq = routing.seq
    values = list(values)
    if direction == "forward":
        m = len(values)
        assert m <= routing.depth, "more values than branching levels"
        classes = []
        for l in range(m):
            ids = [a for a in routing.alphabet(l)
                   if seq.value(a, z) == values[l]]
            if not ids:
                raise SplitError(
                    "no-surviving-class",
                    "no level-%d symbol has z-value %r" % (l, values[l]),
                    {"level": l, "value": values[l]})
            classes.append(ids)
        total = routing.node_len(m)
        bits = [None] * total
        for sigma in itertools.product(*classes):
            stream = bit_stream(oracle, routing.node(sigma))
            for c in range(total):
                if bits[c] is None:
                    bits[c] = stream[c]
                elif bits[c] != stream[c]:
                    raise SplitError(
                        "forced-value-disagreement",
                        "branches matching the z-values disagree at "
                        "coordinate %d" % (c + 1),
                        {"coordinate": c + 1, "sigma": sigma})
        return bits
    assert direction == "backward", "direction is forward or backward"
    bits = values
    bound = depth if depth is not None else routing.depth
    prefix = bit_stream(oracle, routing.stem)
    if bits[:len(prefix)] != prefix:
        short = min(len(prefix), len(bits))
        raise SplitError(
            "no-surviving-class",
            "bits disagree with the committed prefix",
            {"coordinate": next((c + 1 for c in range(short)
                                 if prefix[c] != bits[c]), short + 1)})
    out = []
    survivors = [()]
    n = 0
    while n < bound and routing.node_len(n + 1) <= len(bits):
        n += 1
        lo = routing.node_len(n - 1)
        hi = routing.node_len(n)
        kept = []
        for sigma in survivors:
            for a in routing.alphabet(n - 1):
                cand = sigma + (a,)
                nu = routing.node(cand)
                if all(oracle(c + 1, nu[:c + 1]) == bits[c]
                       for c in range(lo, hi)):
                    kept.append(cand)
        if not kept:
            raise SplitError(
                "no-surviving-class",
                "no level-%d branch matches the bits" % (n - 1,),
                {"level": n - 1})
        zvals = {seq.value(sigma[-1], z) for sigma in kept}
        if len(zvals) > 1:
            raise SplitError(
                "multiple-classes",
                "surviving branches split into %d classes at level %d"
                % (len(zvals), n - 1),
                {"level": n - 1, "values": sorted(zvals)})
        survivors = kept
        out.append(zvals.pop())
    return out


def diagonalize(cond, oracle, x, y):
    '''Condition forcing the oracle away from the x-projection, plus the
    certificate that justifies it.

    Picks the first pair of level-0 symbols congruent at y but not at x,
    repeats each to the length of the condition's stem so both commit the
    oracle at that coordinate, and checks the two committed bits agree (the
    oracle claims to be invariant at y).  The shared bit then disagrees
    with the x-value of at least one side; that side is returned.
    '''
    tree = cond.tree
    guard = cond.guard
    seq = tree.seq
    lat = seq.base
    assert x in guard.members and y in guard.members, \
        "both elements must be guarded"
    assert not lat.leq(x, y), "need a nonorder pair"
    offset = len(tree.stem)
    assert offset >= 1, "condition must commit at least one coordinate"
    ids = tree.alphabet(0)
    pair = None
    for a0, a1 in itertools.combinations(ids, 2):
        if seq.congruent(a0, a1, y) and not seq.congruent(a0, a1, x):
            pair = (a0, a1)
            break
    if pair is None:
        raise SplitError(
            "no-differentiation-pair",
            "no level-0 symbols agree at %r and differ at %r" % (y, x),
            {"x": x, "y": y})
    betas = ((pair[0],) * offset, (pair[1],) * offset)
    v0 = oracle(offset, betas[0])
    v1 = oracle(offset, betas[1])
    if v0 != v1:
        raise SplitError(
            "oracle-not-y-invariant",
            "the two y-congruent commitments pin different bits",
            {"declared": oracle.invariant, "y": y, "bits": (v0, v1),
             "betas": betas})
    side = 0 if seq.value(pair[0], x) != v0 else 1
    assert seq.value(pair[side], x) != v0
    refined = Condition(derive(tree, betas[side]), guard)
    certificate = {"pair": pair, "betas": betas, "coordinate": offset,
                   "bit": v0, "side": side, "x": x, "y": y,
                   "projection": seq.value(pair[side], x)}
    return refined, certificate
