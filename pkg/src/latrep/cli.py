'''Command-line surface over the toolkit.

Subcommands cover lattice documents and catalogs, staged representation
builds, amalgamation, the universal chain, tree-calculus checks, the
splitting pipeline, coding truncations, and the acceptance suite.  Every
command prints a short human summary on stdout; --out additionally writes
the full machine report as JSON.  Exit status: 0 on success, 1 when a
property is violated (including domain errors surfaced from the modules,
with their witnesses), 2 on usage errors.  All commands are deterministic
for a fixed command line; randomized work is driven by --seed alone.
'''

import argparse
import itertools
import json
import sys

from . import acceptance
from .amalgam import AmalgamError, amalgamate, check_embedding, fraisse_chain
from .coding import build_coding_lattice, coding_susl, decode_membership
from .lattice import (FIXTURES, LatticeError, Slsl, enumerate_lattices,
                      enumerate_slsls, find_embeddings, fixture,
                      load_lattice)
from .representation import RepresentationError, check_representation
from .sequence import SequenceError, build_sequence, verify_stage
from .splitting import (SplitError, build_splitting_tree, least_nonsplit,
                        make_oracle, verify_splitting)
from .trees import (ZERO, Condition, TreeContext, TreeError, UniformTree,
                    check_subtree, derive, extend_condition, fuse,
                    identity_tree, recode, reshape)

DOMAIN_ERRORS = (LatticeError, RepresentationError, SequenceError,
                 TreeError, SplitError, AmalgamError)


class UsageError(Exception):
    pass


def _clean(obj):
    '''Best-effort conversion to JSON-encodable structure.'''
    if isinstance(obj, dict):
        return {k if isinstance(k, str) else repr(k): _clean(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_clean(v) for v in obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


def _source(text):
    '''A lattice from a fixture name or a JSON document path.'''
    if text in FIXTURES:
        return fixture(text)
    try:
        with open(text) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise UsageError("cannot read %r: %s" % (text, err))
    except json.JSONDecodeError as err:
        raise UsageError("%r is not JSON: %s" % (text, err))
    if not isinstance(doc, dict):
        raise UsageError("%r does not hold a lattice document" % text)
    return load_lattice(doc)


def _csv(text):
    return tuple(s for s in text.split(",") if s) if text else ()


def _int_csv(text):
    try:
        return tuple(int(s) for s in text.split(",") if s)
    except ValueError:
        raise UsageError("expected a comma-separated integer list, got %r"
                         % text)


def _build_seq(args):
    lat = _source(args.lattice)
    order = _csv(args.order) if args.order else None
    return build_sequence(lat, args.depth, order=order,
                          theta_cap=args.theta_cap)


def _guarded_condition(ctx, names):
    cond = identity_tree(ctx)
    for x in names:
        cond = extend_condition(ctx, cond, x)
    return cond


def _load_condition(seq, path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise UsageError("cannot read %r: %s" % (path, err))
    except json.JSONDecodeError as err:
        raise UsageError("%r is not JSON: %s" % (path, err))
    try:
        tdoc = doc["tree"]
        levels = [{entry["symbol"]: tuple(entry["segment"])
                   for entry in level} for level in tdoc["levels"]]
        tree = UniformTree(seq, tdoc["start"], tuple(tdoc["stem"]),
                           levels=levels)
        return Condition(tree, Slsl(seq.base, doc["guard"]))
    except (KeyError, TypeError) as err:
        raise UsageError("%r is not a condition document: %s" % (path, err))


def _first_child(n, cond):
    inner = derive(cond.tree, (ZERO,))
    return reshape(Condition(inner, cond.guard), cond, 1)


REFINERS = {
    "identity": lambda n, cond: cond,
    "first-child": _first_child,
    "parity": lambda n, cond: cond if n % 2 == 0 else _first_child(n, cond),
}


# ------------------------------------------------------------- handlers

def _lattice_check(args):
    lat = _source(args.path)
    print("valid lattice with %d elements" % len(lat))
    return 0, {"ok": True, "elements": list(lat.elements)}


def _lattice_enumerate(args):
    batch = enumerate_lattices(args.size, cap=args.cap)
    print("size %d: %d lattices up to isomorphism" % (args.size, len(batch)))
    return 0, {"size": args.size, "count": len(batch),
               "lattices": [lat.document() for lat in batch]}


def _lattice_slsls(args):
    lat = _source(args.source)
    slsls = enumerate_slsls(lat)
    print("%d meet-closed bounded subsets of %d elements"
          % (len(slsls), len(lat)))
    return 0, {"count": len(slsls),
               "members": [list(s.members) for s in slsls]}


def _stage_violations(seq, checker):
    out = {}
    for i in range(seq.stage_count):
        bad = checker(seq, i)
        if bad:
            out[i] = bad
    return out


def _rep_build(args):
    seq = _build_seq(args)
    report = {"order": list(seq.order), "depth": seq.depth,
              "sizes": seq.size_report(), "document": seq.document()}
    for entry in seq.size_report():
        print("stage %(stage)s: %(members)d members, %(theta)d valuations"
              % entry)
    if args.verify:
        bad = _stage_violations(seq, verify_stage)
        report["violations"] = bad
        if bad:
            print("stage verification FAILED at %s" % sorted(bad))
            return 1, report
        print("all %d stages verified" % seq.stage_count)
    return 0, report


def _rep_check(args):
    seq = _build_seq(args)
    bad = _stage_violations(
        seq, lambda s, i: check_representation(s.representation(i)))
    if bad:
        print("family clauses FAILED at stages %s" % sorted(bad))
        return 1, {"violations": bad}
    print("family clauses hold at every stage (depth %d)" % seq.depth)
    return 0, {"violations": {}}


def _rep_verify(args):
    seq = _build_seq(args)
    bad = _stage_violations(seq, verify_stage)
    if bad:
        print("stage verification FAILED at %s" % sorted(bad))
        return 1, {"violations": bad}
    print("all %d stages verified" % seq.stage_count)
    return 0, {"violations": {}}


def _amalgamate(args):
    a = _source(args.common)
    b0 = _source(args.left)
    b1 = _source(args.right)
    f0s = find_embeddings(a, b0)
    f1s = find_embeddings(a, b1)
    if not f0s or not f1s:
        print("no embeddings of the common part into both sides")
        return 1, {"embeddings": {"left": len(f0s), "right": len(f1s)}}
    pairs = (itertools.product(f0s, f1s) if args.all
             else [(f0s[0], f1s[0])])
    runs = []
    for f0, f1 in pairs:
        c, g0, g1 = amalgamate(a, b0, b1, f0, f1)
        load_lattice(c.document())
        glue_ok = all(g0[f0[e]] == g1[f1[e]] for e in a.elements)
        emb_ok = not check_embedding(g0, b0, c) and \
            not check_embedding(g1, b1, c)
        runs.append({"f0": f0, "f1": f1, "g0": g0, "g1": g1,
                     "size": len(c), "lattice": c.document(),
                     "glue_ok": glue_ok, "embeddings_ok": emb_ok})
        if not (glue_ok and emb_ok):
            print("amalgam FAILED verification (size %d)" % len(c))
            return 1, {"runs": runs}
    sizes = sorted({r["size"] for r in runs})
    print("%d amalgam(s) built and verified, sizes %s" % (len(runs), sizes))
    return 0, {"runs": runs}


def _universal(args):
    out = fraisse_chain(args.stages)
    for entry in out["log"]:
        print("stage %(stage)d: %(task)s -> %(size)d elements"
              % {**entry, "size": entry.get("size", 2)})
    return 0, {"log": out["log"],
               "sizes": [len(lat) for lat in out["chain"]],
               "final": out["chain"][-1].document()}


def _tree_check_subtree(args):
    seq = _build_seq(args)
    s = _load_condition(seq, args.sub)
    t = _load_condition(seq, args.sup)
    report = check_subtree(s, t, args.check_depth)
    flags = {k: report[k] for k in
             ("on_tree", "is_subtree", "is_extension", "congruence")}
    print("  ".join("%s=%s" % kv for kv in sorted(flags.items())))
    if not report["is_extension"]:
        print("failures: %s" % report["failures"][:3])
        return 1, report
    return 0, report


def _tree_fuse(args):
    seq = _build_seq(args)
    ctx = TreeContext(seq)
    p = _guarded_condition(ctx, _csv(args.guard))
    fused = fuse(p, REFINERS[args.refiner], args.fuse_depth)
    report = {"refiner": args.refiner,
              "input": p.document(args.fuse_depth),
              "fused": fused.document(args.fuse_depth),
              "check": check_subtree(fused, p, args.fuse_depth)}
    ok = report["check"]["is_extension"]
    print("fused %d levels with %r refiner; extension=%s"
          % (args.fuse_depth, args.refiner, ok))
    return (0 if ok else 1), report


def _tree_recode(args):
    seq = _build_seq(args)
    ctx = TreeContext(seq)
    p = _guarded_condition(ctx, _csv(args.guard))
    q = fuse(p, _first_child, args.fuse_depth)
    if args.sigma:
        sigma = _int_csv(args.sigma)
    else:
        sigma = tuple(min(q.tree.alphabet(l))
                      for l in range(args.fuse_depth))
    path = q.tree.node(sigma)
    tau = path[len(p.tree.stem):]
    if args.direction == "down":
        values = [seq.value(c, args.x) for c in tau]
    else:
        values = [seq.value(c, args.x) for c in sigma]
    out = recode(q, p, args.x, args.direction, values)
    print("%s at %s: %s -> %s" % (args.direction, args.x, values, out))
    return 0, {"sigma": list(sigma), "x": args.x,
               "direction": args.direction, "input": values, "output": out}


def _split_run(args):
    seq = _build_seq(args)
    ctx = TreeContext(seq)
    guard = _csv(args.guard) if args.guard else tuple(
        e for e in seq.base.elements if e not in ("0", seq.base.top))
    cond = _guarded_condition(ctx, guard)
    oracle = make_oracle(seq, args.oracle)
    rho, family, z = least_nonsplit(cond, oracle, args.depth)
    tree_depth = args.tree_depth or min(args.depth, 3)
    scond = build_splitting_tree(cond, oracle, rho, z, tree_depth)
    failures = verify_splitting(scond, oracle) if args.verify else []
    report = {"oracle": oracle.document(), "rho": list(rho),
              "nonsplitting": list(family), "z": z,
              "tree_depth": tree_depth,
              "splitting": scond.document(tree_depth),
              "verify_failures": failures}
    print("rho=%s  nonsplitting=%s  z=%s" % (list(rho), list(family), z))
    if args.verify:
        print("split property %s at depth %d"
              % ("FAILED" if failures else "re-verified", tree_depth))
    if failures:
        return 1, report
    return 0, report


def _coding_build(args):
    cl = build_coding_lattice(args.n, cap=args.cap)
    print("truncation %d: %d elements, validated"
          % (args.n, len(cl.lattice)))
    return 0, cl.document()


def _coding_decode(args):
    xset = _int_csv(args.x)
    n = args.n if args.n is not None else (max(xset) if xset else 0)
    if any(i < 0 or i > n for i in xset):
        raise UsageError("column set %s is outside truncation %d"
                         % (list(xset), n))
    cl = build_coding_lattice(n, cap=args.cap)
    members = coding_susl(cl, xset)
    got = decode_membership(cl, members, args.query)
    print("column %d coded by X=%s at truncation %d: %s"
          % (args.query, list(xset), n, "yes" if got else "no"))
    return 0, {"n": n, "x": list(xset), "query": args.query,
               "members": list(members), "coded": got}


def _suite_acceptance(args):
    names = _csv(args.criteria) if args.criteria else None
    if names:
        known = {name for name, _ in acceptance.CRITERIA}
        bad = [n for n in names if n not in known]
        if bad:
            raise UsageError("unknown criteria %s; known: %s"
                             % (bad, sorted(known)))
    reports = acceptance.run_suite(seed=args.seed, names=names)
    for report in reports:
        print("%s %s -- %s" % ("PASS" if report["ok"] else "FAIL",
                               report["criterion"], report["detail"]))
        if not report["ok"]:
            print("witness: %s"
                  % json.dumps(_clean(report["witness"]), sort_keys=True))
    ok = all(r["ok"] for r in reports)
    return (0 if ok else 1), {"seed": args.seed, "reports": reports}


# --------------------------------------------------------------- parser

def _build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--out", help="write the JSON report to this path")

    ctx = argparse.ArgumentParser(add_help=False)
    ctx.add_argument("--lattice", default="B2",
                     help="fixture name or lattice document path")
    ctx.add_argument("--order", help="comma-separated element order")
    ctx.add_argument("--depth", type=int, default=2,
                     help="stages to build beyond the bounds")
    ctx.add_argument("--theta-cap", type=int, default=5000,
                     help="abort if a stage family would exceed this")

    top = argparse.ArgumentParser(
        prog="latrep",
        description="staged lattice representations, trees, splitting, "
                    "coding")
    sub = top.add_subparsers(dest="command", required=True)

    lat = sub.add_parser("lattice", help="lattice documents and catalogs")
    lsub = lat.add_subparsers(dest="subcommand", required=True)
    p = lsub.add_parser("check", parents=[shared],
                        help="validate a lattice document")
    p.add_argument("path", help="fixture name or document path")
    p.set_defaults(handler=_lattice_check)
    p = lsub.add_parser("enumerate", parents=[shared],
                        help="bounded lattices up to isomorphism")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--cap", type=int, default=6)
    p.set_defaults(handler=_lattice_enumerate)
    p = lsub.add_parser("slsls", parents=[shared],
                        help="meet-closed bounded subsets")
    p.add_argument("source", help="fixture name or document path")
    p.set_defaults(handler=_lattice_slsls)

    rep = sub.add_parser("rep", help="staged representation sequences")
    rsub = rep.add_subparsers(dest="subcommand", required=True)
    p = rsub.add_parser("build", parents=[shared, ctx],
                        help="build and report stage sizes")
    p.add_argument("--verify", action="store_true",
                   help="also re-verify every stage")
    p.set_defaults(handler=_rep_build)
    p = rsub.add_parser("check", parents=[shared, ctx],
                        help="re-check the family clauses per stage")
    p.set_defaults(handler=_rep_check)
    p = rsub.add_parser("verify", parents=[shared, ctx],
                        help="re-verify the stage clauses")
    p.set_defaults(handler=_rep_verify)

    p = sub.add_parser("amalgamate", parents=[shared],
                       help="amalgamate two lattices over a common part")
    p.add_argument("--common", required=True)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--all", action="store_true",
                   help="run every embedding pair, not just the first")
    p.set_defaults(handler=_amalgamate)

    p = sub.add_parser("universal", parents=[shared],
                       help="build the universal chain")
    p.add_argument("--stages", type=int, required=True)
    p.set_defaults(handler=_universal)

    tree = sub.add_parser("tree", help="tree calculus")
    tsub = tree.add_subparsers(dest="subcommand", required=True)
    p = tsub.add_parser("check-subtree", parents=[shared, ctx],
                        help="alignment/congruence report for two "
                             "condition documents")
    p.add_argument("--sub", required=True, help="candidate refinement")
    p.add_argument("--sup", required=True, help="condition refined")
    p.add_argument("--check-depth", type=int, default=2)
    p.set_defaults(handler=_tree_check_subtree)
    p = tsub.add_parser("fuse", parents=[shared, ctx],
                        help="fuse a named refiner over a guarded tree")
    p.add_argument("--guard", help="elements to extend the guard by")
    p.add_argument("--refiner", choices=sorted(REFINERS),
                   default="first-child")
    p.add_argument("--fuse-depth", type=int, default=2)
    p.set_defaults(handler=_tree_fuse)
    p = tsub.add_parser("recode", parents=[shared, ctx],
                        help="move projected values across a refinement")
    p.add_argument("--guard", help="elements to extend the guard by")
    p.add_argument("--x", required=True, help="element to project at")
    p.add_argument("--direction", choices=("down", "up"), default="down")
    p.add_argument("--fuse-depth", type=int, default=2)
    p.add_argument("--sigma", help="branch string on the finer tree")
    p.set_defaults(handler=_tree_recode)

    split = sub.add_parser("split", help="splitting pipeline")
    ssub = split.add_subparsers(dest="subcommand", required=True)
    p = ssub.add_parser("run", parents=[shared, ctx],
                        help="least non-splitting scan plus splitting tree")
    p.add_argument("--oracle", required=True,
                   help="oracle spec, e.g. proj:a, xor:a,b, const:0")
    p.add_argument("--guard", help="elements to extend the guard by "
                                   "(default: all)")
    p.add_argument("--tree-depth", type=int,
                   help="splitting tree depth (default min(depth, 3))")
    p.add_argument("--verify", action="store_true", default=True,
                   help="re-verify the split property (default on)")
    p.set_defaults(handler=_split_run)

    coding = sub.add_parser("coding", help="coding lattice truncations")
    csub = coding.add_subparsers(dest="subcommand", required=True)
    p = csub.add_parser("build", parents=[shared],
                        help="build and validate a truncation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cap", type=int, default=3)
    p.set_defaults(handler=_coding_build)
    p = csub.add_parser("decode", parents=[shared],
                        help="decode column membership from a join-closed "
                             "member set")
    p.add_argument("--x", default="", help="columns, e.g. 0,2")
    p.add_argument("--query", type=int, required=True)
    p.add_argument("--n", type=int, help="truncation (default max of x)")
    p.add_argument("--cap", type=int, default=3)
    p.set_defaults(handler=_coding_decode)

    suite = sub.add_parser("suite", help="aggregate checks")
    usub = suite.add_subparsers(dest="subcommand", required=True)
    p = usub.add_parser("acceptance", parents=[shared],
                        help="run the acceptance criteria, failing fast")
    p.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    p.add_argument("--criteria", help="comma-separated criterion names")
    p.set_defaults(handler=_suite_acceptance)

    return top


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        code, report = args.handler(args)
    except UsageError as err:
        print("usage error: %s" % err, file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as err:
        witness = getattr(err, "witness", None) or getattr(err, "partial",
                                                           None)
        print("violation [%s]: %s" % (getattr(err, "code", "?"), err))
        if witness is not None:
            print("witness: %s" % json.dumps(_clean(witness),
                                             sort_keys=True))
        _write_out(args, {"error": {"kind": type(err).__name__,
                                    "code": getattr(err, "code", None),
                                    "message": str(err),
                                    "witness": _clean(witness)}})
        return 1
    except AssertionError as err:
        print("invalid input: %s" % (err.args[0] if err.args else err),
              file=sys.stderr)
        return 2
    _write_out(args, report)
    return code


def _write_out(args, report):
    if getattr(args, "out", None):
        doc = {"command": args.command,
               "subcommand": getattr(args, "subcommand", None),
               "report": _clean(report)}
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


if __name__ == "__main__":
    sys.exit(main())
