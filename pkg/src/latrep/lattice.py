'''Finite bounded lattices, sub-semilattices, embeddings, and a small catalog.

Elements are opaque strings; "0" and "1" are reserved for the bounds.
Internally everything is indexed and order is kept as per-element bitmasks,
which keeps bound searches to integer ands.
'''

from __future__ import annotations

import itertools
import json


class LatticeError(Exception):
    '''Raised for malformed documents and order structures that are not lattices.'''

    def __init__(self, code, message, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


def _closure(n, pairs):
    '''Reflexive-transitive closure of pairs over range(n), as down-masks.'''
    leq = [1 << i for i in range(n)]
    for i, j in pairs:
        leq[j] |= 1 << i
    changed = True
    while changed:
        changed = False
        for j in range(n):
            mask = leq[j]
            acc = mask
            k = mask
            while k:
                low = k & -k
                acc |= leq[low.bit_length() - 1]
                k ^= low
            if acc != mask:
                leq[j] = acc
                changed = True
    return leq


class Lattice:
    '''A finite bounded lattice with total join/meet tables.

    Construct through load_lattice / from_order; the constructor validates
    bounds, antisymmetry, and unique least upper / greatest lower bounds.
    '''

    def __init__(self, elements, down_masks):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise LatticeError("duplicate-element", "duplicate element names")
        if "0" not in self.index:
            raise LatticeError("no-bounds", "elements must include '0'")
        # the one-element lattice collapses the bounds onto "0"
        self.top = "1" if len(self.elements) > 1 else "0"
        if self.top not in self.index:
            raise LatticeError("no-bounds", "elements must include '0' and '1'")
        n = len(self.elements)
        self._down = list(down_masks)
        # antisymmetry
        for i in range(n):
            for j in range(i + 1, n):
                if (self._down[i] >> j) & 1 and (self._down[j] >> i) & 1:
                    raise LatticeError(
                        "cycle", "order contains a cycle",
                        (self.elements[i], self.elements[j]))
        self._up = [0] * n
        for j in range(n):
            k = self._down[j]
            while k:
                low = k & -k
                self._up[low.bit_length() - 1] |= 1 << j
                k ^= low
        zero, one = self.index["0"], self.index[self.top]
        full = (1 << n) - 1
        if self._up[zero] != full:
            raise LatticeError("no-bounds", "'0' is not below every element")
        if self._down[one] != full:
            raise LatticeError("no-bounds", "'1' is not above every element")
        # unique-mask trick: x is the lub of a common-upper mask iff up(x) == mask
        up_owner = {}
        down_owner = {}
        for i in range(n):
            up_owner[self._up[i]] = i
            down_owner[self._down[i]] = i
        self._join = [[0] * n for _ in range(n)]
        self._meet = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                common = self._up[i] & self._up[j]
                got = up_owner.get(common)
                if got is None:
                    raise LatticeError(
                        "not-a-lattice",
                        "no least upper bound for (%s, %s)"
                        % (self.elements[i], self.elements[j]),
                        self._minimal_pair(common))
                self._join[i][j] = got
                common = self._down[i] & self._down[j]
                got = down_owner.get(common)
                if got is None:
                    raise LatticeError(
                        "not-a-lattice",
                        "no greatest lower bound for (%s, %s)"
                        % (self.elements[i], self.elements[j]),
                        self._maximal_pair(common))
                self._meet[i][j] = got

    def _minimal_pair(self, mask):
        mins = [i for i in range(len(self.elements))
                if (mask >> i) & 1 and self._down[i] & mask == (1 << i)]
        return tuple(self.elements[i] for i in mins[:2])

    def _maximal_pair(self, mask):
        maxs = [i for i in range(len(self.elements))
                if (mask >> i) & 1 and self._up[i] & mask == (1 << i)]
        return tuple(self.elements[i] for i in maxs[:2])

    @classmethod
    def from_order(cls, elements, pairs):
        idx = {e: i for i, e in enumerate(elements)}
        for x, y in pairs:
            if x not in idx or y not in idx:
                raise LatticeError("unknown-element", "leq names unknown element %r" % ((x, y),))
        down = _closure(len(elements), [(idx[x], idx[y]) for x, y in pairs])
        return cls(elements, down)

    def leq(self, x, y):
        return (self._down[self.index[y]] >> self.index[x]) & 1 == 1

    def join(self, x, y):
        return self.elements[self._join[self.index[x]][self.index[y]]]

    def meet(self, x, y):
        return self.elements[self._meet[self.index[x]][self.index[y]]]

    def down(self, x):
        '''Elements below-or-equal x, in element order.'''
        mask = self._down[self.index[x]]
        return tuple(e for i, e in enumerate(self.elements) if (mask >> i) & 1)

    def up(self, x):
        mask = self._up[self.index[x]]
        return tuple(e for i, e in enumerate(self.elements) if (mask >> i) & 1)

    def pairs(self):
        '''All ordered pairs (x, y) with x <= y.'''
        out = []
        for j, y in enumerate(self.elements):
            mask = self._down[j]
            for i, x in enumerate(self.elements):
                if (mask >> i) & 1:
                    out.append((x, y))
        return out

    def document(self):
        cover = []
        for y in self.elements:
            for x in self.elements:
                if x != y and self.leq(x, y):
                    cover.append([x, y])
        return {"elements": list(self.elements), "leq": cover}

    def order_matrix(self):
        n = len(self.elements)
        return tuple(tuple(1 if self.leq(self.elements[i], self.elements[j]) else 0
                           for j in range(n)) for i in range(n))

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return "Lattice(%s)" % (",".join(self.elements))

    def __eq__(self, other):
        return (isinstance(other, Lattice)
                and self.elements == other.elements
                and self._down == other._down)

    def __hash__(self):
        return hash((self.elements, tuple(self._down)))


def load_lattice(doc):
    '''Build a Lattice from a document dict (or JSON text).

    {"elements": [...], "leq": [[x,y], ...]} with optional "join"/"meet"
    tables that, when present, are checked against the derived ones.
    '''
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or "elements" not in doc:
        raise LatticeError("bad-document", "document must be a dict with 'elements'")
    elements = list(doc["elements"])
    lat = Lattice.from_order(elements, [tuple(p) for p in doc.get("leq", [])])
    for key, fn in (("join", lat.join), ("meet", lat.meet)):
        table = doc.get(key)
        if table is None:
            continue
        for x, row in table.items():
            for y, z in row.items():
                if fn(x, y) != z:
                    raise LatticeError(
                        "table-mismatch",
                        "declared %s(%s,%s)=%s but order gives %s" % (key, x, y, z, fn(x, y)),
                        (x, y))
    return lat


class Slsl:
    '''A sub-semilattice: a meet-closed subset of a lattice containing 0 and 1.

    Carries its own join (least member above both); meet coincides with the
    ambient one by closure.
    '''

    def __init__(self, lattice, members):
        self.lattice = lattice
        order = {e: i for i, e in enumerate(lattice.elements)}
        self.members = tuple(sorted(set(members), key=order.get))
        for m in self.members:
            if m not in order:
                raise LatticeError("unknown-element", "slsl member %r not in lattice" % (m,))
        if "0" not in self.members or lattice.top not in self.members:
            raise LatticeError("no-bounds", "slsl must contain the bounds")
        for x in self.members:
            for y in self.members:
                if lattice.meet(x, y) not in set(self.members):
                    raise LatticeError(
                        "not-meet-closed",
                        "slsl not closed under meet at (%s,%s)" % (x, y), (x, y))
        self._set = frozenset(self.members)

    def __contains__(self, x):
        return x in self._set

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return (isinstance(other, Slsl) and self.lattice == other.lattice
                and self._set == other._set)

    def __hash__(self):
        return hash(self._set)

    def __repr__(self):
        return "Slsl{%s}" % (",".join(self.members))

    def hat(self, x):
        '''Least member above x; total since 1 is a member and meets stay inside.'''
        above = [m for m in self.members if self.lattice.leq(x, m)]
        least = above[0]
        for m in above[1:]:
            least = self.lattice.meet(least, m)
        assert least in self._set and self.lattice.leq(x, least)
        return least

    def join_in(self, x, y):
        '''The join from the viewpoint of the slsl: least member above both.'''
        assert x in self._set and y in self._set
        above = [m for m in self.members
                 if self.lattice.leq(x, m) and self.lattice.leq(y, m)]
        least = above[0]
        for m in above[1:]:
            least = self.lattice.meet(least, m)
        return least

    def as_lattice(self):
        '''The slsl viewed as a bounded lattice with its own join.'''
        pairs = [(x, y) for x in self.members for y in self.members
                 if self.lattice.leq(x, y)]
        return Lattice.from_order(self.members, pairs)


def hat(slsl, x):
    return slsl.hat(x)


def generated_slsl(lattice, gens):
    '''Meet-closure of gens together with the bounds.'''
    closed = set(gens) | {"0", lattice.top}
    while True:
        new = {lattice.meet(x, y) for x in closed for y in closed} - closed
        if not new:
            break
        closed |= new
    return Slsl(lattice, closed)


def enumerate_slsls(lattice):
    '''All sub-semilattices, deterministically ordered by member tuple.'''
    middles = [e for e in lattice.elements if e not in ("0", lattice.top)]
    found = []
    for r in range(len(middles) + 1):
        for combo in itertools.combinations(middles, r):
            members = set(combo) | {"0", lattice.top}
            if all(lattice.meet(x, y) in members for x in members for y in members):
                found.append(Slsl(lattice, members))
    found.sort(key=lambda s: (len(s.members), s.members))
    return found


def find_embeddings(a, b):
    '''All bound-preserving lattice embeddings of a into b, as dicts.

    An embedding is injective and preserves join and meet (hence order,
    both ways).
    '''
    if a.top == "0" or b.top == "0":
        # bounds must map to bounds, so the one-element lattice only embeds
        # into itself
        return [{"0": "0"}] if a.top == "0" and b.top == "0" else []
    middles = [e for e in a.elements if e not in ("0", "1")]
    out = []

    def consistent(assign, x, fx):
        for y, fy in assign.items():
            jxy, mxy = a.join(x, y), a.meet(x, y)
            if jxy in assign and assign[jxy] != b.join(fx, fy):
                return False
            if mxy in assign and assign[mxy] != b.meet(fx, fy):
                return False
        return True

    def extend(i, assign, used):
        if i == len(middles):
            # total map: verify every join/meet (cheap, |a| is tiny)
            for x in a.elements:
                for y in a.elements:
                    if assign[a.join(x, y)] != b.join(assign[x], assign[y]):
                        return
                    if assign[a.meet(x, y)] != b.meet(assign[x], assign[y]):
                        return
            out.append(dict(assign))
            return
        x = middles[i]
        for fx in b.elements:
            if fx in used or fx in ("0", "1"):
                continue
            assign[x] = fx
            if consistent(assign, x, fx):
                extend(i + 1, assign, used | {fx})
            del assign[x]

    extend(0, {"0": "0", "1": "1"}, {"0", "1"})
    out.sort(key=lambda m: tuple(m[x] for x in middles))
    return out


def _canonical_matrix(elements, leq):
    '''Lexicographically minimal order matrix over permutations of the middles.'''
    middles = [e for e in elements if e not in ("0", "1")]
    best = None
    for perm in itertools.permutations(middles):
        order = ["0"] + list(perm) + ["1"]
        mat = tuple(tuple(1 if leq(x, y) else 0 for y in order) for x in order)
        if best is None or mat < best:
            best = mat
    return best


_MIDDLE_NAMES = "abcd"


def enumerate_lattices(n, cap=6):
    '''All bounded lattices with exactly n elements, one per isomorphism class.

    Middles are named a, b, c, ...; classes are returned sorted by canonical
    order matrix.
    '''
    if n < 1:
        raise LatticeError("bad-size", "lattices need at least one element")
    if n > cap:
        raise LatticeError("cap-exceeded", "enumeration capped at %d elements" % cap)
    if n == 1:
        return [Lattice(("0",), [1])]
    m = n - 2
    middles = list(_MIDDLE_NAMES[:m])
    elements = ["0"] + middles + ["1"]
    seen = {}
    pairs_idx = list(itertools.combinations(range(m), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs_idx)):
        rel = [("0", e) for e in elements if e != "0"]
        rel += [(e, "1") for e in elements if e != "1"]
        for (i, j), st in zip(pairs_idx, states):
            if st == 1:
                rel.append((middles[i], middles[j]))
            elif st == 2:
                rel.append((middles[j], middles[i]))
        try:
            lat = Lattice.from_order(elements, rel)
        except LatticeError:
            continue
        # closure may have introduced comparabilities the state said were absent
        ok = True
        for (i, j), st in zip(pairs_idx, states):
            x, y = middles[i], middles[j]
            if st == 0 and (lat.leq(x, y) or lat.leq(y, x)):
                ok = False
            if st == 1 and not lat.leq(x, y):
                ok = False
            if st == 2 and not lat.leq(y, x):
                ok = False
        if not ok:
            continue
        key = _canonical_matrix(elements, lat.leq)
        if key not in seen:
            seen[key] = lat
    return [seen[k] for k in sorted(seen)]


FIXTURES = {
    "CHAIN2": {"elements": ["0", "1"], "leq": [["0", "1"]]},
    "CHAIN3": {"elements": ["0", "m", "1"], "leq": [["0", "m"], ["m", "1"]]},
    "CHAIN4": {"elements": ["0", "m1", "m2", "1"],
               "leq": [["0", "m1"], ["m1", "m2"], ["m2", "1"]]},
    "B2": {"elements": ["0", "a", "b", "1"],
           "leq": [["0", "a"], ["0", "b"], ["a", "1"], ["b", "1"]]},
    "M3": {"elements": ["0", "a", "b", "c", "1"],
           "leq": [["0", "a"], ["0", "b"], ["0", "c"],
                   ["a", "1"], ["b", "1"], ["c", "1"]]},
    "N5": {"elements": ["0", "a", "b", "c", "1"],
           "leq": [["0", "a"], ["a", "c"], ["c", "1"], ["0", "b"], ["b", "1"]]},
}


def fixture(name):
    if name not in FIXTURES:
        raise LatticeError("unknown-fixture", "no fixture named %r" % (name,))
    return load_lattice(FIXTURES[name])
