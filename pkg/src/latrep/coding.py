'''Finite truncations of a locally finite coding lattice and the chain
decoder that reads a column set back out of a join-closed member set.

The carrier starts from one minimal element per column pair (i, j) with
j <= i <= N and takes all formal joins of them (a free usl ordered by
containment).  Marker elements are then grafted on: ph-joins exist as
fresh elements only over the inner usl generated by the pairs with j < i,
so joining ph with anything that contains a completed column (j = i) goes
straight to 1, which is how qh detects completion; e0/e1-joins exist one
per closure class, the closure bumping an even (odd) second index to its
successor within its column; fences f0/f1 sit above the even and odd
second indexes; and a meet witness ccb below the pair c, cb sits above
exactly the joins of the column heads (i, 0).  Every order relation not
forced by this description is false.  The Lattice constructor then checks
exhaustively that each pair has a least upper and greatest lower bound, so
a gap in the description surfaces as not-a-lattice instead of being
patched silently.

decode_membership reads column n back out of a join-closed K: it searches
for a chain x_0 .. x_n in K with x_0 under both c and cb, each later link
under the previous link joined with the parity-matching e and under the
opposite fence, every link joining p above q (which rules out 0), and the
last link joining ph above qh.  Walking the chain strips one step off
every column started at x_0, so the final clause can only fire if some
column of length exactly n was available in K from the start.
'''

import itertools

from .lattice import Lattice, LatticeError

SPECIALS = ("e0", "e1", "f0", "f1", "p", "q", "ph", "qh")
CONSTANTS = SPECIALS + ("c", "cb", "ccb")


def _dname(pair):
    return "d%d%d" % pair


def _jname(pairs):
    return "+".join(sorted(_dname(p) for p in pairs))


def _bump(s, parity):
    return frozenset(s) | {(i, j + 1) for i, j in s
                           if j % 2 == parity and j < i}


class CodingLattice:
    '''A truncated coding lattice with its designated elements.

    columns maps each free-join element back to its set of column pairs;
    the marker constants are carrier elements under their own names.
    '''

    def __init__(self, n, lattice, columns):
        self.n = n
        self.lattice = lattice
        self.columns = columns
        self.constants = CONSTANTS

    def d(self, i, j):
        assert 0 <= j <= i <= self.n, "column pair outside the truncation"
        return _dname((i, j))

    def document(self):
        return {"n": self.n, "constants": list(CONSTANTS),
                "columns": [sorted(map(list, s))
                            for s in sorted(self.columns.values(),
                                            key=lambda s: (len(s),
                                                           _jname(s)))],
                "lattice": self.lattice.document()}


def build_coding_lattice(n, cap=3):
    '''The truncation with columns 0..n, exhaustively validated.

    The carrier grows exponentially in n (every subset of the column pairs
    is a join), hence the cap.  All the stated identities are re-checked
    after construction: the stepping schemes with their terminal zeros, the
    p and ph detection clauses, and the screen ccb places below the exact
    pair.
    '''
    if n > cap:
        raise LatticeError("cap-exceeded",
                           "truncation %d exceeds the cap %d" % (n, cap))
    assert n >= 0
    atoms = [(i, j) for i in range(n + 1) for j in range(i + 1)]
    key = lambda s: (len(s), _jname(s))
    prime = [frozenset(c) for r in range(1, len(atoms) + 1)
             for c in itertools.combinations(atoms, r)]
    prime.sort(key=key)
    inner = [s for s in prime if all(j < i for i, j in s)]
    closed0 = [s for s in prime if _bump(s, 0) == s]
    closed1 = [s for s in prime if _bump(s, 1) == s]
    multi = [s for s in prime if len(s) >= 2]

    elements = (["0"] + list(SPECIALS) + [_dname(a) for a in atoms]
                + [_jname(s) for s in multi]
                + ["ph+" + _jname(s) for s in inner]
                + ["e0+" + _jname(s) for s in closed0]
                + ["e1+" + _jname(s) for s in closed1]
                + ["ccb", "c", "cb", "1"])
    pairs = [("0", e) for e in elements if e != "0"]
    pairs += [(e, "1") for e in elements if e != "1"]
    for s in multi:
        for a in s:
            pairs.append((_jname(s - {a}), _jname(s)))
    for s in inner:
        name = "ph+" + _jname(s)
        pairs.append((_jname(s), name))
        for a in s:
            rest = s - {a}
            pairs.append((("ph+" + _jname(rest)) if rest else "ph", name))
    for mark, closed in (("e0", closed0), ("e1", closed1)):
        for s in closed:
            name = mark + "+" + _jname(s)
            pairs.append((mark, name))
            pairs.append((_jname(s), name))
            for t in closed:
                if t < s:
                    pairs.append((mark + "+" + _jname(t), name))
    for parity, fence in ((0, "f0"), (1, "f1")):
        side = frozenset(a for a in atoms if a[1] % 2 == parity)
        if side:
            pairs.append((_jname(side), fence))
    heads = frozenset(a for a in atoms if a[1] == 0)
    pairs.append((_jname(heads), "ccb"))
    pairs.append(("ccb", "c"))
    pairs.append(("ccb", "cb"))

    lat = Lattice.from_order(elements, pairs)

    for i, j in atoms:
        mark, fence = ("e0", "f1") if j % 2 == 0 else ("e1", "f0")
        step = lat.meet(lat.join(_dname((i, j)), mark), fence)
        want = _dname((i, j + 1)) if j < i else "0"
        assert step == want, ("column-scheme", (i, j), step)
        assert lat.leq("q", lat.join("p", _dname((i, j))))
        assert lat.leq("qh", lat.join("ph", _dname((i, j)))) == (i == j), \
            ("completion-clause", (i, j))
    assert not lat.leq("q", "p") and not lat.leq("qh", "ph")
    screen = {x for x in lat.elements
              if x != "0" and lat.leq(x, "c") and lat.leq(x, "cb")}
    head_joins = {_jname(s) for s in prime if s <= heads}
    assert screen == head_joins | {"ccb"}, ("exact-pair-screen", screen)
    assert all(lat.leq(x, "ccb") for x in head_joins)

    columns = {_jname(s): s for s in prime}
    return CodingLattice(n, lat, columns)


def coding_susl(cl, members):
    '''Join-closure of the marker constants and the columns in members.

    members lists the column indexes i whose pairs (i, 0) .. (i, i) are
    generators.  ccb is deliberately not a generator: it is a meet, and
    the closure is under join only.
    '''
    lat = cl.lattice
    xset = sorted(set(members))
    assert all(0 <= i <= cl.n for i in xset), "column beyond the truncation"
    closed = set(SPECIALS) | {"c", "cb"}
    closed.update(_dname((i, j)) for i in xset for j in range(i + 1))
    while True:
        new = {lat.join(x, y) for x in closed for y in closed} - closed
        if not new:
            break
        closed |= new
    return tuple(sorted(closed, key=lat.index.get))


def decode_membership(cl, members, n):
    '''Whether the member set codes column n.

    members must be join-closed in the coding lattice.  The search keeps,
    per chain position, every member reachable under the clauses; the
    chain exists exactly when a survivor at position n joins ph above qh.
    '''
    lat = cl.lattice
    assert n >= 0
    level = [x for x in members
             if lat.leq(x, "c") and lat.leq(x, "cb")
             and lat.leq("q", lat.join(x, "p"))]
    for m in range(1, n + 1):
        mark, fence = ("e0", "f1") if m % 2 == 1 else ("e1", "f0")
        caps = {lat.meet(lat.join(prev, mark), fence) for prev in level}
        level = [x for x in members
                 if lat.leq("q", lat.join(x, "p"))
                 and any(lat.leq(x, cap) for cap in caps)]
    return any(lat.leq("qh", lat.join(x, "ph")) for x in level)
