'''Staged construction of valuation families along a growing chain of slsls.

The builder consumes a bounded lattice plus an enumeration order of its
non-bound elements and produces stages 0..depth.  Stage 0 is the bounds with
the all-zero valuation and a top marker; each later stage is reached by
closing the previous family under meet-chain and layer-map certificates for
every instance visible at that stage, then extending to the next slsl.

Certificates come in cheap intensional kinds wherever possible:

  comparable / equal   meet instances with x <= y, y <= x, or alpha == beta
  const / identity     image pair equal, or equal to the source pair
  swap                 crossed images; valid when the images agree wherever
                       one source shares a value with any other valuation
  cswap                crossed images routed by a congruence class of one
                       source; valid when no other class straddles it at an
                       element where the images disagree
  found                meet chain located among existing valuations
  fresh / layered      fallback constructions that add valuations

Only "found"/"fresh" meet triples and "layered" map tables are stored; the
rest are re-derived during verification, which keeps stored state small and
makes tampering visible.
'''

from __future__ import annotations

import itertools

from .lattice import Slsl, enumerate_slsls, generated_slsl
from .representation import (
    Representation, check_representation, extend_to_lattice,
    homogeneity_interpolants, meet_interpolants)


class SequenceError(Exception):
    def __init__(self, code, message, partial=None):
        super().__init__(message)
        self.code = code
        self.partial = partial


class RepSequence:
    '''Immutable result of build_sequence; all mappings keyed by stage index.'''

    def __init__(self, base, order, depth, theta_cap):
        self.base = base
        self.order = tuple(order)
        self.depth = depth
        self.theta_cap = theta_cap
        self.values = {}        # vid -> {element: value}
        self.member_stage = {}  # vid -> first stage whose family contains it
        self.meet_certs = {}    # (stage, x, y, a, b) -> (g0, g1, g2, kind)
        self.hom_fallbacks = {}  # (stage, members, a0, a1, b0, b1) -> tables
        self.log = []
        self._members = []
        self._lattices = []

    # ---------------------------------------------------------- stage views

    @property
    def stage_count(self):
        return self.depth + 1

    def stabilized(self):
        return len(self._members[-1]) == len(self.base.elements)

    def _clamp(self, i):
        if i < 0:
            raise SequenceError("stage-out-of-range", "negative stage")
        if i >= len(self._members):
            if not self.stabilized():
                raise SequenceError(
                    "stage-out-of-range",
                    "stage %d not built and chain not yet stabilized" % i)
            return len(self._members) - 1
        return i

    def members(self, i):
        return self._members[self._clamp(i)]

    def stage_lattice(self, i):
        return self._lattices[self._clamp(i)]

    def stage_slsl(self, i):
        return Slsl(self.base, self.members(i))

    def theta_ids(self, i):
        i = self._clamp(i)
        return tuple(v for v in sorted(self.values) if self.member_stage[v] <= i)

    def value(self, vid, x):
        return self.values[vid][x]

    def congruent(self, i, j, x):
        return self.values[i][x] == self.values[j][x]

    def representation(self, i):
        lat = self.stage_lattice(i)
        return Representation(
            lat, {v: {x: self.values[v][x] for x in lat.elements}
                  for v in self.theta_ids(i)})

    def size_report(self):
        return [dict(entry) for entry in self.log]

    def document(self):
        stages = []
        for i in range(self.stage_count):
            stages.append({
                "members": list(self.members(i)),
                "theta": [{"id": v,
                           "values": {x: self.values[v][x]
                                      for x in self.members(i)}}
                          for v in self.theta_ids(i)],
            })
        return {
            "order": list(self.order),
            "depth": self.depth,
            "stages": stages,
            "meet_certs": [
                {"stage": k[0], "x": k[1], "y": k[2], "pair": [k[3], k[4]],
                 "gammas": list(cert[:3]), "kind": cert[3]}
                for k, cert in sorted(self.meet_certs.items())],
            "layered_certs": [
                {"stage": k[0], "slsl": list(k[1]), "tuple": list(k[2:])}
                for k in sorted(self.hom_fallbacks)],
            "log": self.size_report(),
        }

    # ------------------------------------------------- certificate lookups

    def meet_chain_search(self, ids, x, y, a, b):
        '''Deterministic search for gamma0..2 among ids; None when absent.'''
        by_x, by_y, by_xy = {}, {}, {}
        for v in ids:
            vx, vy = self.values[v][x], self.values[v][y]
            by_x.setdefault(vx, []).append(v)
            by_y.setdefault(vy, []).append(v)
            by_xy.setdefault((vx, vy), []).append(v)
        want_b = self.values[b][y]
        for g0 in by_x.get(self.values[a][x], ()):
            for g1 in by_y.get(self.values[g0][y], ()):
                hits = by_xy.get((self.values[g1][x], want_b))
                if hits:
                    return (g0, g1, hits[0])
        return None

    def class_tables(self, ids, members):
        '''Per non-zero member, the ids grouped by their value there.'''
        byval = {}
        for u in members:
            if u == "0":
                continue
            groups = {}
            for v in ids:
                groups.setdefault(self.values[v][u], []).append(v)
            byval[u] = groups
        return byval

    def qualifies(self, members, a0, a1, b0, b1):
        return all(self.congruent(b0, b1, w)
                   for w in members if self.congruent(a0, a1, w))

    def hom_kind(self, byval, a0, a1, b0, b1):
        '''Cheapest intensional certificate kind over the grouped ids, or None.

        A swap routes by identity with the anchor; a cswap routes by sharing
        the anchor's value at one member u.  Either split is a homomorphism
        exactly when no value class at a disagreeing member straddles it.
        '''
        if b0 == b1:
            return ("const",)
        if b0 == a0 and b1 == a1:
            return ("identity",)
        disagree = [u for u in byval if not self.congruent(b0, b1, u)]
        for side, anchor in ((0, a0), (1, a1)):
            if all(len(byval[u][self.values[anchor][u]]) == 1
                   for u in disagree):
                return ("swap", side)
        for side, anchor, other in ((0, a0, a1), (1, a1, a0)):
            for u in byval:
                block = byval[u][self.values[anchor][u]]
                if other in block:
                    continue
                inside = set(block)
                if all(all(len(byval[w][self.values[v][w]])
                           == sum(self.congruent(v, v2, w) for v2 in inside)
                           for v in inside)
                       for w in disagree):
                    return ("cswap", side, u)
        return None

    def find_hom_map(self, members, a0, a1, b0, b1):
        '''On-demand certificate over the final family (deep-stage lookups).'''
        ids = self.theta_ids(self.depth)
        if not self.qualifies(members, a0, a1, b0, b1):
            return None
        if a0 == a1 and b0 != b1:
            return None
        return self.hom_kind(self.class_tables(ids, members), a0, a1, b0, b1)

    def apply_hom_map(self, kind, a0, a1, b0, b1, vid):
        '''The g-style routing of an intensional certificate, as a function.'''
        tag = kind[0]
        if tag == "const":
            return b0
        if tag == "identity":
            return vid
        if tag == "swap":
            anchor = (a0, a1)[kind[1]]
            hit, miss = (b1, b0) if kind[1] == 0 else (b0, b1)
            return hit if vid == anchor else miss
        if tag == "cswap":
            anchor = (a0, a1)[kind[1]]
            hit, miss = (b1, b0) if kind[1] == 0 else (b0, b1)
            return hit if self.congruent(vid, anchor, kind[2]) else miss
        raise SequenceError("bad-cert", "unknown certificate kind %r" % (tag,))


def _meet_instances(lat, ids, values):
    '''Nontrivial stage instances in lexicographic (x, y, a, b) order.'''
    out = []
    for x in lat.elements:
        for y in lat.elements:
            if lat.leq(x, y) or lat.leq(y, x):
                continue
            z = lat.meet(x, y)
            for a in ids:
                for b in ids:
                    if a != b and values[a][z] == values[b][z]:
                        out.append((x, y, a, b))
    return out


def build_sequence(base, depth, order=None, theta_cap=5000):
    '''Run the staged construction to the requested depth.

    order lists the non-bound elements in enumeration order (defaults to
    lattice order); stage i works over the slsl generated by the first i of
    them.  Raises theta-cap-exceeded with the partial sequence attached when
    a family outgrows theta_cap.
    '''
    middles = [e for e in base.elements if e not in ("0", base.top)]
    if order is None:
        order = middles
    if sorted(order) != sorted(middles):
        raise SequenceError(
            "bad-order", "order must enumerate the non-bound elements once")
    if depth < 0:
        raise SequenceError("bad-depth", "depth must be nonnegative")
    seq = RepSequence(base, order, depth, theta_cap)

    bottom = generated_slsl(base, ())
    seq._members.append(bottom.members)
    seq._lattices.append(bottom.as_lattice())
    seq.values[0] = {x: 0 for x in bottom.members}
    seq.member_stage[0] = 0
    if base.top != "0":
        seq.values[1] = {"0": 0, base.top: 1}
        seq.member_stage[1] = 0

    for i in range(depth + 1):
        entry = {"stage": i, "members": len(seq.members(i)),
                 "theta": len(seq.theta_ids(i)),
                 "meet_added": 0, "layer_added": 0, "pairs_added": 0}
        if i < depth:
            _process_stage(seq, i, entry)
            _extend_stage(seq, i)
            entry["pairs_added"] = len(
                [v for v in seq.values if seq.member_stage[v] == i + 1])
            entry["pairs_added"] -= entry["meet_added"] + entry["layer_added"]
        seq.log.append(entry)
        if len(seq.values) > theta_cap:
            raise SequenceError(
                "theta-cap-exceeded",
                "family grew past %d valuations at stage %d" % (theta_cap, i),
                partial=seq)
    return seq


def _adopt(seq, rep, known, stage):
    '''Register rows the fallback constructions created beyond known ids.'''
    added = 0
    for v in rep.ids():
        if v not in known:
            seq.values[v] = dict(rep.vals[v])
            seq.member_stage[v] = stage + 1
            known.add(v)
            added += 1
    if len(seq.values) > seq.theta_cap:
        raise SequenceError(
            "theta-cap-exceeded",
            "family grew past %d valuations during stage %d"
            % (seq.theta_cap, stage),
            partial=seq)
    return added


def _process_stage(seq, i, entry):
    lat = seq.stage_lattice(i)
    ids = seq.theta_ids(i)
    known = set(seq.values)
    rep = Representation(
        lat, {v: {x: seq.values[v][x] for x in lat.elements}
              for v in sorted(seq.values)})

    for x, y, a, b in _meet_instances(lat, ids, seq.values):
        triple = seq.meet_chain_search(sorted(rep.vals), x, y, a, b)
        if triple is None:
            out = meet_interpolants(rep, x, y, a, b)
            rep = out["representation"]
            entry["meet_added"] += _adopt(seq, rep, known, i)
            triple = out["gammas"]
            kind = "fresh"
        else:
            kind = "found"
        seq.meet_certs[(i, x, y, a, b)] = triple + (kind,)

    for slsl in enumerate_slsls(lat):
        byval = seq.class_tables(ids, slsl.members)
        for a0, a1, b0, b1 in itertools.product(ids, repeat=4):
            if not seq.qualifies(slsl.members, a0, a1, b0, b1):
                continue
            if a0 == a1 and b0 != b1:
                continue  # unsatisfiable: the layer chain would force b0 = b1
            if seq.hom_kind(byval, a0, a1, b0, b1) is not None:
                continue
            out = homogeneity_interpolants(rep, slsl, a0, a1, b0, b1)
            rep = out["representation"]
            entry["layer_added"] += _adopt(seq, rep, known, i)
            seq.hom_fallbacks[(i, slsl.members, a0, a1, b0, b1)] = {
                "f": out["f"], "h": out["h"], "g": out["g"],
                "gamma0": out["gamma0"], "gamma1": out["gamma1"],
            }


def _extend_stage(seq, i):
    target = generated_slsl(seq.base, seq.order[:i + 1])
    if target.members == seq.members(i):
        seq._members.append(seq.members(i))
        seq._lattices.append(seq.stage_lattice(i))
        return
    target_lat = target.as_lattice()
    lat = seq.stage_lattice(i)
    rep = Representation(
        lat, {v: {x: seq.values[v][x] for x in lat.elements}
              for v in sorted(seq.values)})
    ext, _info = extend_to_lattice(
        rep, Slsl(target_lat, seq.members(i)), target_lat)
    for v in ext.ids():
        seq.values[v] = dict(ext.vals[v])
        seq.member_stage.setdefault(v, i + 1)
    seq._members.append(target.members)
    seq._lattices.append(target_lat)


def verify_stage(seq, i):
    '''Re-check the three stage clauses; returns a violation list.'''
    report = []
    for v in check_representation(seq.representation(i)):
        report.append({"stage": i, "check": "family", **v})
    if i + 1 >= seq.stage_count:
        return report

    lat = seq.stage_lattice(i)
    ids = seq.theta_ids(i)
    next_ids = set(seq.theta_ids(i + 1))

    for x, y, a, b in _meet_instances(lat, ids, seq.values):
        cert = seq.meet_certs.get((i, x, y, a, b))
        if cert is None:
            report.append({"stage": i, "check": "meet-chain",
                           "error": "interpolant-missing",
                           "instance": (x, y, a, b)})
            continue
        g0, g1, g2, _kind = cert
        ok = all(g in next_ids for g in (g0, g1, g2))
        chain = ((a, g0, x), (g0, g1, y), (g1, g2, x), (g2, b, y))
        ok = ok and all(seq.congruent(p, q, w) for p, q, w in chain)
        if not ok:
            report.append({"stage": i, "check": "meet-chain",
                           "error": "interpolant-invalid",
                           "instance": (x, y, a, b), "cert": cert})

    for slsl in enumerate_slsls(lat):
        byval = seq.class_tables(ids, slsl.members)
        for a0, a1, b0, b1 in itertools.product(ids, repeat=4):
            if not seq.qualifies(slsl.members, a0, a1, b0, b1):
                continue
            if a0 == a1 and b0 != b1:
                continue
            if seq.hom_kind(byval, a0, a1, b0, b1) is not None:
                continue
            key = (i, slsl.members, a0, a1, b0, b1)
            cert = seq.hom_fallbacks.get(key)
            if cert is None:
                report.append({"stage": i, "check": "layer-maps",
                               "error": "interpolant-missing",
                               "instance": key[1:]})
                continue
            bad = _check_layered(seq, slsl, ids, next_ids,
                                 (a0, a1, b0, b1), cert)
            if bad:
                report.append({"stage": i, "check": "layer-maps",
                               "error": bad, "instance": key[1:]})
    return report


def _check_layered(seq, slsl, ids, next_ids, tup, cert):
    a0, a1, b0, b1 = tup
    f, h, g = cert["f"], cert["h"], cert["g"]
    g0, g1 = cert["gamma0"], cert["gamma1"]
    if g0 not in next_ids or g1 not in next_ids:
        return "gamma-not-in-next-stage"
    routing = ((f, a0, b0), (f, a1, g1), (h, a0, g0), (h, a1, b1),
               (g, a0, g0), (g, a1, g1))
    for table, src, image in routing:
        if table.get(src) != image:
            return "routing-mismatch"
    for table in (f, h, g):
        if any(v not in table for v in ids):
            return "map-not-total"
        if any(table[v] not in next_ids for v in ids):
            return "image-outside-family"
        for u in slsl.members:
            if u == "0":
                continue
            groups = {}
            for v in ids:
                groups.setdefault(seq.values[v][u], set()).add(
                    seq.values[table[v]][u])
            if any(len(images) > 1 for images in groups.values()):
                return "not-a-homomorphism"
    return None
