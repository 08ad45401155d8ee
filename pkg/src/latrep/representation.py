'''Valuation families over finite lattices and the interpolant constructions.

A representation is a set of valuations alpha: elements -> naturals containing
the all-zero valuation and satisfying, for the ambient lattice:

  zero             alpha("0") = 0
  differentiation  x not<= y  ->  some pair agrees at y and differs at x
  order            x <= y and alpha =_y beta  ->  alpha =_x beta
  join             x v y = z and alpha =_{x,y} beta  ->  alpha =_z beta

where alpha =_x beta abbreviates alpha(x) == beta(x).
'''

from __future__ import annotations

from .lattice import Slsl


class RepresentationError(Exception):
    def __init__(self, code, message, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


class Representation:
    '''An immutable family of valuations, keyed by integer ids.'''

    def __init__(self, lattice, valuations):
        self.lattice = lattice
        self.vals = {i: dict(v) for i, v in valuations.items()}
        for i, v in self.vals.items():
            missing = set(lattice.elements) - set(v)
            if missing:
                raise RepresentationError(
                    "missing-values", "valuation %r lacks values at %s" % (i, sorted(missing)))

    @classmethod
    def build(cls, lattice, rows):
        '''rows: iterable of value tuples aligned with lattice.elements.'''
        vals = {}
        for i, row in enumerate(rows):
            vals[i] = dict(zip(lattice.elements, row))
        return cls(lattice, vals)

    def ids(self):
        return tuple(sorted(self.vals))

    def value(self, i, x):
        return self.vals[i][x]

    def congruent(self, i, j, x):
        return self.vals[i][x] == self.vals[j][x]

    def row(self, i):
        return tuple(self.vals[i][x] for x in self.lattice.elements)

    def max_value(self):
        return max((v for val in self.vals.values() for v in val.values()), default=0)

    def with_rows(self, new_vals):
        merged = {i: dict(v) for i, v in self.vals.items()}
        merged.update({i: dict(v) for i, v in new_vals.items()})
        return Representation(self.lattice, merged)

    def document(self):
        return {"lattice": list(self.lattice.elements),
                "valuations": [{"id": i, "values": dict(self.vals[i])}
                               for i in self.ids()]}

    def __len__(self):
        return len(self.vals)


def check_representation(rep):
    '''All clause violations, as a list of dicts; empty means valid.

    Grouping by value keeps this at O(|L|^2 * |Theta|) against the naive
    quadruple loop.
    '''
    lat = rep.lattice
    ids = rep.ids()
    bad = []
    if not any(all(v == 0 for v in rep.vals[i].values()) for i in ids):
        bad.append({"clause": "zero", "missing": "all-zero valuation"})
    for i in ids:
        if rep.vals[i]["0"] != 0:
            bad.append({"clause": "zero", "ids": (i,)})
    for x in lat.elements:
        for y in lat.elements:
            if x == y:
                continue
            groups = {}
            for i in ids:
                groups.setdefault(rep.vals[i][y], {}).setdefault(rep.vals[i][x], i)
            if lat.leq(x, y):
                for vy, seenx in groups.items():
                    if len(seenx) > 1:
                        pair = tuple(sorted(seenx.values()))[:2]
                        bad.append({"clause": "order", "x": x, "y": y, "ids": pair})
            else:
                if not any(len(seenx) > 1 for seenx in groups.values()):
                    bad.append({"clause": "differentiation", "x": x, "y": y})
    for xi, x in enumerate(lat.elements):
        for y in lat.elements[xi:]:
            z = lat.join(x, y)
            if z == x or z == y:
                continue  # covered by the order clause
            groups = {}
            for i in ids:
                key = (rep.vals[i][x], rep.vals[i][y])
                groups.setdefault(key, {}).setdefault(rep.vals[i][z], i)
            for key, seenz in groups.items():
                if len(seenz) > 1:
                    pair = tuple(sorted(seenz.values()))[:2]
                    bad.append({"clause": "join", "x": x, "y": y, "z": z, "ids": pair})
    return bad


def restrict(rep, members):
    '''Restrict to a meet-closed member set; value-duplicate rows collapse.

    Returns (representation over the member lattice, old id -> kept id map).
    '''
    sub = Slsl(rep.lattice, members).as_lattice()
    kept = {}
    mapping = {}
    by_row = {}
    for i in rep.ids():
        row = tuple(rep.vals[i][x] for x in sub.elements)
        if row in by_row:
            mapping[i] = by_row[row]
        else:
            by_row[row] = i
            mapping[i] = i
            kept[i] = dict(zip(sub.elements, row))
    return Representation(sub, kept), mapping


def is_homomorphism(mapping, rep, members):
    '''Does the id map preserve congruence at every member element?'''
    ids = [i for i in rep.ids() if i in mapping]
    for x in members:
        if x == "0":
            continue
        groups = {}
        for i in ids:
            groups.setdefault(rep.vals[i][x], []).append(i)
        for group in groups.values():
            target = {rep.vals[mapping[i]][x] for i in group}
            if len(target) > 1:
                return False
    return True


def extend_to_lattice(rep, slsl, lattice):
    '''Extend a representation of an slsl to the whole lattice.

    Old valuations take their hat's value at new elements; for each ordered
    pair s not<= t with s or t new, a witness pair is added agreeing exactly
    on the down-set of t (plus "0") and getting consecutive fresh values
    elsewhere, so the pair differs in parity at every disagreement element.

    Returns (representation over lattice, info dict).
    '''
    assert set(slsl.members) <= set(lattice.elements)
    sub = Slsl(lattice, slsl.members)
    counter = rep.max_value() + 1
    new_vals = {}
    for i in rep.ids():
        new_vals[i] = {x: rep.vals[i][sub.hat(x)] for x in lattice.elements}
    next_id = max(rep.ids(), default=-1) + 1
    old = set(slsl.members)
    pairs = []
    for s in lattice.elements:
        for t in lattice.elements:
            if lattice.leq(s, t) or (s in old and t in old):
                continue
            agree = set(lattice.down(t)) | {"0"}
            a, b = {}, {}
            for x in lattice.elements:
                if x == "0":
                    a[x] = b[x] = 0
                elif x in agree:
                    a[x] = b[x] = counter
                    counter += 1
                else:
                    a[x], b[x] = counter, counter + 1
                    counter += 2
            new_vals[next_id] = a
            new_vals[next_id + 1] = b
            pairs.append({"pair": (s, t), "ids": (next_id, next_id + 1)})
            next_id += 2
    out = Representation(lattice, new_vals)
    return out, {"pairs": pairs, "added": 2 * len(pairs)}


def meet_interpolants(rep, x, y, alpha, beta):
    '''Interpolants gamma0..gamma2 linking alpha to beta through x and y.

    Requires alpha =_z beta for z = x ^ y.  The chain
      alpha =_x g0 =_y g1 =_x g2 =_y beta
    holds for the result; when x <= y (or the valuations already agree) the
    triple (beta, beta, beta) suffices and nothing is added.
    '''
    lat = rep.lattice
    z = lat.meet(x, y)
    if not rep.congruent(alpha, beta, z):
        raise RepresentationError(
            "precondition-violated", "valuations differ at the meet", (alpha, beta, z))
    if lat.leq(x, y) or rep.row(alpha) == rep.row(beta):
        return {"gammas": (beta, beta, beta), "representation": rep, "added": 0}
    counter = rep.max_value() + 1
    down_x = set(lat.down(x))
    down_y = set(lat.down(y))
    g0, g1, g2 = {}, {}, {}
    for w in lat.elements:
        if w in down_x:
            g0[w] = rep.vals[alpha][w]
        else:
            g0[w] = counter
            counter += 1
    for w in lat.elements:
        if w in down_y:
            g1[w] = g0[w]
        else:
            g1[w] = counter
            counter += 1
    for w in lat.elements:
        if w in down_y:
            g2[w] = rep.vals[beta][w]
        elif w in down_x:
            g2[w] = g1[w]
        else:
            g2[w] = counter
            counter += 1
    by_row = {rep.row(i): i for i in rep.ids()}
    next_id = max(rep.ids()) + 1
    ids = []
    new_rows = {}
    for cand in (g0, g1, g2):
        row = tuple(cand[e] for e in lat.elements)
        if row in by_row:
            ids.append(by_row[row])
        else:
            new_rows[next_id] = cand
            by_row[row] = next_id
            ids.append(next_id)
            next_id += 1
    return {"gammas": tuple(ids), "representation": rep.with_rows(new_rows),
            "added": len(new_rows)}


def _qualifies(rep, members, a0, a1, b0, b1):
    return all(rep.congruent(b0, b1, w)
               for w in members if rep.congruent(a0, a1, w))


def homogeneity_interpolants(rep, slsl, a0, a1, b0, b1):
    '''Three layered maps f, h, g with interpolants gamma0, gamma1.

    Preconditions: the 4-tuple qualifies for the slsl (wherever a0 and a1
    agree on a member, b0 and b1 agree too) and is not the unsatisfiable
    shape a0 == a1 with b0 != b1.

    Fresh values depend only on the input's value at the hat of the element,
    one separate pool per layer; consequently each map is a homomorphism for
    the slsl and maps the a-pair onto the prescribed images:

        f: a0, a1 -> b0, gamma1      (on the base family)
        h: a0, a1 -> gamma0, b1      (on the base plus f's image)
        g: a0, a1 -> gamma0, gamma1  (on everything built so far)
    '''
    lat = rep.lattice
    if not _qualifies(rep, slsl.members, a0, a1, b0, b1):
        raise RepresentationError(
            "precondition-violated", "tuple does not qualify", (a0, a1, b0, b1))
    if rep.row(a0) == rep.row(a1) and rep.row(b0) != rep.row(b1):
        raise RepresentationError(
            "precondition-violated",
            "equal sources with distinct images admit no interpolants",
            (a0, a1, b0, b1))
    hats = {x: slsl.hat(x) for x in lat.elements}
    counter = rep.max_value() + 1

    def layer(base, anchors):
        '''Map each id through the case split; anchors is ((aid, image-id), ...).'''
        nonlocal counter
        stars = {}
        images = {}
        for i in sorted(base.vals):
            out = {}
            for x in lat.elements:
                hx = hats[x]
                for aid, img in anchors:
                    if base.vals[i][hx] == base.vals[aid][hx]:
                        out[x] = base.vals[img][x]
                        break
                else:
                    v = base.vals[i][hx]
                    if v not in stars:
                        stars[v] = counter
                        counter += 1
                    out[x] = stars[v]
            images[i] = out
        return images

    def absorb(base, images):
        by_row = {base.row(i): i for i in sorted(base.vals)}
        next_id = max(base.vals) + 1
        mapping = {}
        new_rows = {}
        for i, out in images.items():
            row = tuple(out[e] for e in base.lattice.elements)
            if row in by_row:
                mapping[i] = by_row[row]
            else:
                new_rows[next_id] = out
                by_row[row] = next_id
                mapping[i] = next_id
                next_id += 1
        return base.with_rows(new_rows), mapping

    theta1, f = absorb(rep, layer(rep, ((a0, b0),)))
    gamma1 = f[a1]
    theta2, h = absorb(theta1, layer(theta1, ((a1, b1),)))
    gamma0 = h[a0]
    theta3, g = absorb(theta2, layer(theta2, ((a0, gamma0), (a1, gamma1))))
    return {"f": f, "h": h, "g": g, "gamma0": gamma0, "gamma1": gamma1,
            "theta1": theta1, "theta2": theta2, "representation": theta3}
