'''Amalgamation of finite bounded lattices by ideal completion.

Two lattices sharing a common sublattice are glued into a partial lattice
(joins and meets defined only within each side); the ideals of the glue,
ordered by containment, form a finite lattice into which both sides embed
through principal ideals.  fraisse_chain iterates the construction along a
fair schedule to approximate a universal locally finite lattice.
'''

from __future__ import annotations

import itertools

from .lattice import Lattice, _closure, enumerate_lattices, find_embeddings, fixture


class AmalgamError(Exception):
    def __init__(self, code, message, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


class PartialLattice:
    '''A finite bounded order with join/meet defined on some pairs only.

    leq is any set of pairs (the reflexive-transitive closure is taken);
    joins/meets map unordered pairs to their value where defined and must be
    consistent with the order.
    '''

    def __init__(self, elements, leq, joins=None, meets=None):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise AmalgamError("duplicate-element", "duplicate element names")
        if "0" not in self.index:
            raise AmalgamError("no-bounds", "elements must include '0'")
        self.top = "1" if len(self.elements) > 1 else "0"
        if self.top not in self.index:
            raise AmalgamError("no-bounds", "elements must include '0' and '1'")
        for x, y in leq:
            if x not in self.index or y not in self.index:
                raise AmalgamError(
                    "unknown-element", "leq names unknown element %r" % ((x, y),))
        n = len(self.elements)
        self._down = _closure(n, [(self.index[x], self.index[y]) for x, y in leq])
        for i in range(n):
            for j in range(i + 1, n):
                if (self._down[i] >> j) & 1 and (self._down[j] >> i) & 1:
                    raise AmalgamError(
                        "cycle", "order contains a cycle",
                        (self.elements[i], self.elements[j]))
        zero, one = self.index["0"], self.index[self.top]
        for i in range(n):
            if not (self._down[i] >> zero) & 1:
                raise AmalgamError("no-bounds", "'0' is not below every element")
            if not (self._down[one] >> i) & 1:
                raise AmalgamError("no-bounds", "'1' is not above every element")
        self._joins = self._store_ops(joins or {}, True)
        self._meets = self._store_ops(meets or {}, False)

    def _store_ops(self, table, is_join):
        out = {}
        word = "join" if is_join else "meet"
        for (x, y), z in table.items():
            for e in (x, y, z):
                if e not in self.index:
                    raise AmalgamError(
                        "unknown-element", "%s table names unknown element %r" % (word, e))
            key = (x, y) if self.index[x] <= self.index[y] else (y, x)
            if out.get(key, z) != z:
                raise AmalgamError(
                    "bad-operation", "conflicting %s values for %r" % (word, key))
            bounds_ok = (self.leq(x, z) and self.leq(y, z)) if is_join else \
                (self.leq(z, x) and self.leq(z, y))
            if not bounds_ok:
                raise AmalgamError(
                    "bad-operation",
                    "%s(%s,%s)=%s is not consistent with the order" % (word, x, y, z),
                    (x, y, z))
            # on comparable pairs the operation must pick the obvious endpoint
            if self.leq(x, y) and z != (y if is_join else x):
                raise AmalgamError(
                    "bad-operation",
                    "%s(%s,%s) must be %s" % (word, x, y, y if is_join else x))
            if self.leq(y, x) and z != (x if is_join else y):
                raise AmalgamError(
                    "bad-operation",
                    "%s(%s,%s) must be %s" % (word, x, y, x if is_join else y))
            out[key] = z
        return out

    @classmethod
    def from_lattice(cls, lat):
        '''View a total lattice as a partial one (all operations defined).'''
        joins = {(x, y): lat.join(x, y) for x in lat.elements for y in lat.elements}
        meets = {(x, y): lat.meet(x, y) for x in lat.elements for y in lat.elements}
        return cls(lat.elements, lat.pairs(), joins, meets)

    def leq(self, x, y):
        return (self._down[self.index[y]] >> self.index[x]) & 1 == 1

    def defined_join(self, x, y):
        key = (x, y) if self.index[x] <= self.index[y] else (y, x)
        return self._joins.get(key)

    def defined_meet(self, x, y):
        key = (x, y) if self.index[x] <= self.index[y] else (y, x)
        return self._meets.get(key)

    def pairs(self):
        out = []
        for j, y in enumerate(self.elements):
            mask = self._down[j]
            for i, x in enumerate(self.elements):
                if (mask >> i) & 1:
                    out.append((x, y))
        return out

    def joins_table(self):
        '''The defined joins on all ordered pairs (both orientations).'''
        out = {}
        for (x, y), z in self._joins.items():
            out[(x, y)] = z
            out[(y, x)] = z
        return out

    def down(self, x):
        mask = self._down[self.index[x]]
        return frozenset(e for i, e in enumerate(self.elements) if (mask >> i) & 1)

    def generated_ideal(self, seed):
        '''Downward closure of seed, then closure under defined joins.'''
        out = set()
        queue = list(seed)
        while queue:
            e = queue.pop()
            if e in out:
                continue
            out |= self.down(e)
            for x in list(out):
                z = self.defined_join(e, x)
                if z is not None and z not in out:
                    queue.append(z)
        # join closure may have unlocked further joins between older members
        changed = True
        while changed:
            changed = False
            for x in list(out):
                for y in list(out):
                    z = self.defined_join(x, y)
                    if z is not None and z not in out:
                        out |= self.down(z)
                        changed = True
        return frozenset(out)

    def ideals(self):
        '''Every nonempty downward-closed, join-closed subset.

        Every ideal is the iterated binary join of the principal ideals of
        its members, so closing the principal ones under pairwise generated
        joins finds them all without scanning the subset space.
        '''
        found = {self.generated_ideal((e,)) for e in self.elements}
        frontier = list(found)
        while frontier:
            fresh = []
            for a in frontier:
                for b in found.copy():
                    c = self.generated_ideal(a | b)
                    if c not in found:
                        found.add(c)
                        fresh.append(c)
            frontier = fresh
        return sorted(found, key=lambda s: (len(s), sorted(self.index[e] for e in s)))

    def document(self):
        return {"elements": list(self.elements),
                "leq": [[x, y] for x, y in self.pairs() if x != y],
                "joins": [[x, y, z] for (x, y), z in sorted(
                    self._joins.items(), key=lambda kv: (self.index[kv[0][0]],
                                                         self.index[kv[0][1]]))]}


def _ideal_name(members, p):
    if members == frozenset(("0",)):
        return "0"
    if len(members) == len(p.elements):
        return "1"
    return "{%s}" % ",".join(sorted(members, key=p.index.get))


def named_ideals(p):
    '''The ideals of p with their element names in the completion.'''
    return [(_ideal_name(s, p), s) for s in p.ideals()]


def ideal_lattice(p):
    '''The lattice of ideals of p, ordered by containment.'''
    named = named_ideals(p)
    pairs = [(na, nb) for na, a in named for nb, b in named if a <= b]
    return Lattice.from_order([n for n, _ in named], pairs)


def check_embedding(f, a, b):
    '''Violations of f being a bound-preserving lattice embedding of a in b.'''
    bad = []
    for x in a.elements:
        if x not in f:
            bad.append(("not-total", x))
        elif f[x] not in b.index:
            bad.append(("unknown-image", x))
    if bad:
        return bad
    if len(set(f[x] for x in a.elements)) != len(a.elements):
        bad.append(("not-injective", None))
    if f["0"] != "0" or f[a.top] != b.top:
        bad.append(("bounds-moved", None))
    for x in a.elements:
        for y in a.elements:
            if f[a.join(x, y)] != b.join(f[x], f[y]):
                bad.append(("join", x, y))
            if f[a.meet(x, y)] != b.meet(f[x], f[y]):
                bad.append(("meet", x, y))
    return bad


def glue(a, b0, b1, f0, f1):
    '''The partial lattice on b0 and b1 overlapping exactly in a's images.

    Elements of b1 outside the image are renamed apart (primes appended).
    Returns the partial lattice and the name map for b1.
    '''
    image1 = {f1[x]: x for x in a.elements}
    used = set(b0.elements)
    r1 = {}
    for y in b1.elements:
        if y in image1:
            r1[y] = f0[image1[y]]
        else:
            name = y
            while name in used:
                name += "'"
            used.add(name)
            r1[y] = name
    elements = list(b0.elements) + [r1[y] for y in b1.elements if y not in image1]
    pairs = list(b0.pairs())
    pairs += [(r1[x], r1[y]) for x, y in b1.pairs()]
    b0_only = [x for x in b0.elements if x not in set(f0.values())]
    b1_only = [y for y in b1.elements if y not in image1]
    for x in b0_only:
        for y in b1_only:
            if any(b0.leq(x, f0[c]) and b1.leq(f1[c], y) for c in a.elements):
                pairs.append((x, r1[y]))
            if any(b1.leq(y, f1[c]) and b0.leq(f0[c], x) for c in a.elements):
                pairs.append((r1[y], x))
    joins, meets = {}, {}
    for x in b0.elements:
        for y in b0.elements:
            joins[(x, y)] = b0.join(x, y)
            meets[(x, y)] = b0.meet(x, y)
    for x in b1.elements:
        for y in b1.elements:
            jkey = (r1[x], r1[y])
            assert joins.get(jkey, r1[b1.join(x, y)]) == r1[b1.join(x, y)]
            assert meets.get(jkey, r1[b1.meet(x, y)]) == r1[b1.meet(x, y)]
            joins[jkey] = r1[b1.join(x, y)]
            meets[jkey] = r1[b1.meet(x, y)]
    return PartialLattice(elements, pairs, joins, meets), r1


def amalgamate(a, b0, b1, f0, f1):
    '''Embed b0 and b1 into one finite lattice, agreeing on a.

    Returns (C, g0, g1) where C is the ideal completion of the glued partial
    lattice and g_i sends each element to its principal ideal.
    '''
    for side, (f, b) in enumerate(((f0, b0), (f1, b1))):
        bad = check_embedding(f, a, b)
        if bad:
            raise AmalgamError(
                "not-an-embedding",
                "f%d is not a bound-preserving embedding" % side,
                (side, bad[0]))
    p, r1 = glue(a, b0, b1, f0, f1)

    # ideals of the glue are unions of one principal ideal per side whose
    # cross shadows are compatible, so the scan is |b0| x |b1|
    named = {}
    order = []
    for x0 in b0.elements:
        for x1 in b1.elements:
            if not all(b1.leq(y, x1) for y in b1.elements if p.leq(r1[y], x0)):
                continue
            if not all(b0.leq(y, x0) for y in b0.elements if p.leq(y, r1[x1])):
                continue
            members = p.down(x0) | p.down(r1[x1])
            if members not in named:
                named[members] = _ideal_name(members, p)
                order.append(members)
    assert len(named) <= len(b0.elements) * len(b1.elements)
    pairs = [(named[s], named[t]) for s in order for t in order if s <= t]
    c = Lattice.from_order([named[s] for s in order], pairs)
    g0 = {x: named[p.down(x)] for x in b0.elements}
    g1 = {y: named[p.down(r1[y])] for y in b1.elements}
    assert all(g0[f0[x]] == g1[f1[x]] for x in a.elements)
    assert not check_embedding(g0, b0, c) and not check_embedding(g1, b1, c)
    return c, g0, g1


def verify_amalgam(p, c):
    '''Check c against the ideals of p: containment order, meet as
    intersection, join as the least ideal containing both.  Returns a list
    of violations.'''
    named = named_ideals(p)
    by_name = {n: s for n, s in named}
    bad = []
    if sorted(by_name) != sorted(c.elements):
        return [{"error": "element-mismatch",
                 "expected": sorted(by_name), "got": sorted(c.elements)}]
    for nx, x in named:
        for ny, y in named:
            if c.leq(nx, ny) != (x <= y):
                bad.append({"error": "order-mismatch", "pair": (nx, ny)})
            meet = by_name[c.meet(nx, ny)]
            if meet != x & y:
                bad.append({"error": "meet-not-intersection", "pair": (nx, ny)})
            join = by_name[c.join(nx, ny)]
            if not (x | y <= join):
                bad.append({"error": "join-misses-arguments", "pair": (nx, ny)})
            for nw, w in named:
                if x | y <= w and w < join:
                    bad.append({"error": "join-not-minimal",
                                "pair": (nx, ny), "smaller": nw})
    return bad


# (base, side) fixture names for the amalgamation situations, cycled fairly
_SITUATIONS = (
    ("CHAIN2", "CHAIN3"), ("CHAIN2", "B2"), ("CHAIN3", "CHAIN4"),
    ("CHAIN3", "B2"), ("CHAIN2", "CHAIN4"), ("CHAIN3", "M3"),
    ("CHAIN2", "M3"), ("CHAIN3", "N5"),
)


def fraisse_chain(stages, size_cap=5, growth_cap=4000, stage_cap=64):
    '''An increasing chain of finite lattices with embeddings between stages.

    The schedule alternates two embed tasks (adjoin the next catalog lattice
    disjointly between the bounds) with one amalgamation-situation task
    (ideal completion over an embedded common part), so every catalog
    lattice and every scheduled situation is realized by some stage.
    Returns {"chain", "maps", "log"}.
    '''
    if stages < 1:
        raise AmalgamError("bad-stages", "need at least one stage")
    if stages > stage_cap:
        raise AmalgamError("cap-exceeded", "stages capped at %d" % stage_cap)
    embeds = [(n, idx, lat)
              for n in range(2, size_cap + 1)
              for idx, lat in enumerate(enumerate_lattices(n))]
    situations = itertools.cycle(_SITUATIONS)
    chain = [fixture("CHAIN2")]
    maps = []
    log = [{"stage": 0, "task": "base", "size": 2}]
    fresh = itertools.count()

    while len(chain) < stages:
        u = chain[-1]
        t = len(chain)
        if embeds and t % 3 != 0:
            n, idx, lat = embeds.pop(0)
            rename = {"0": "0", "1": "1"}
            for m in lat.elements:
                if m not in ("0", "1"):
                    rename[m] = "x%d" % next(fresh)
            elements = list(u.elements) + [
                rename[m] for m in lat.elements if m not in ("0", "1")]
            pairs = list(u.pairs()) + [
                (rename[x], rename[y]) for x, y in lat.pairs()]
            nxt = Lattice.from_order(elements, pairs)
            maps.append({e: e for e in u.elements})
            log.append({"stage": t, "task": "embed", "catalog": [n, idx],
                        "size": len(nxt)})
        else:
            while True:
                base_name, side_name = next(situations)
                base, side = fixture(base_name), fixture(side_name)
                anchors = find_embeddings(base, u)
                if anchors:
                    break
            e1 = find_embeddings(base, side)[0]
            c, g0, _g1 = amalgamate(base, u, side, anchors[0], e1)
            if len(c) > growth_cap:
                raise AmalgamError(
                    "cap-exceeded",
                    "stage %d would have %d elements" % (t, len(c)))
            rename = {"0": "0", "1": "1"}
            for e in c.elements:
                if e not in ("0", "1"):
                    rename[e] = "x%d" % next(fresh)
            nxt = Lattice.from_order(
                [rename[e] for e in c.elements],
                [(rename[x], rename[y]) for x, y in c.pairs()])
            maps.append({e: rename[g0[e]] for e in u.elements})
            log.append({"stage": t, "task": "situation",
                        "base": base_name, "side": side_name, "size": len(nxt)})
        chain.append(nxt)
    return {"chain": chain, "maps": maps, "log": log}
