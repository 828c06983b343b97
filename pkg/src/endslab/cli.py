"""Batch command-line front end.

Every subcommand prints one deterministic JSON document (sorted keys) or,
where it makes sense, CSV or Graphviz DOT.  Exit status: 0 success,
1 negative verdict, 2 input error, 3 resource cap.

JSON arguments (``--space``, ``--s``, ``--t``, ``--f``, ``--g``) may be given
inline or as ``@path`` to read a file.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import components, epsilon, maps, spaces, witness
from .coarse import BoundedRegion
from .errors import EndsLabError, InconclusiveError, InputError
from .sequences import CoarseSequence

KINDS = {
    "integer_line": "the integers with unit steps",
    "integer_grid": "Z^d with the l1 word metric; field dim",
    "free_group": "Cayley graph of the free group; field rank",
    "word_tree": "all words over an alphabet; field alphabet",
    "comb_tree": "words a^n b^m (one spine, one tooth per spine vertex)",
    "finitely_branching_tree": "rooted tree given by child counts; field child_rule",
    "custom": "lattice with adjacency_rule offsets, or a finite edge list",
    "subdivision": "barycentric subdivision of another space; field base",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _json_arg(text, what):
    if text is None:
        raise InputError(f"--{what} is required")
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read --{what} file: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"--{what} is not valid JSON: {exc}") from None


def _space(args):
    return spaces.parse_descriptor(_json_arg(args.space, "space"), args.cap)


def _sequence(text, space, what):
    doc = _json_arg(text, what)
    if isinstance(doc, dict) and "kind" in doc:
        bound = doc.pop("step_bound", None)
        doc = {"rule": doc} if bound is None else {"rule": doc, "step_bound": bound}
    return CoarseSequence.from_json(doc, space)


def _map(text, what):
    return maps.CoarseMap.from_json(_json_arg(text, what))


def _point(space, text):
    return None if text is None else space.parse_point(text)


# ---------------------------------------------------------------------------
# subcommands; each returns (document or text, exit status)


def cmd_spaces(args):
    if args.space is None:
        return {"kinds": KINDS}, 0
    space = _space(args)
    return {"descriptor": space.descriptor(), "kind": space.kind,
            "basepoint": space.format_point(space.basepoint)}, 0


def cmd_ball(args):
    space = _space(args)
    if args.radius is None or args.radius < 0:
        raise InputError("ball needs a non-negative --radius")
    w = spaces.ball(space, _point(space, args.center), args.radius, args.cap)
    if args.format == "csv":
        rows = ["point,radius"] + [f'"{n}",{int(r)}' for n, r in zip(w.names, w.radius)]
        return "\n".join(rows) + "\n", 0
    return w.to_json(), 0


def cmd_ends(args):
    space = _space(args)
    prof = components.end_profile(space, args.K, args.rmax, args.margin,
                                  _point(space, args.center), args.cap)
    if args.format == "csv":
        return prof.to_csv(), 0
    return prof.to_json(), 0


def cmd_threads(args):
    space = _space(args)
    ts = components.component_threads(space, args.K, args.rmax, args.margin,
                                      _point(space, args.center), args.cap)
    if args.format == "dot":
        return ts.to_dot(), 0
    if args.format == "csv":
        rows = ["thread,r,class"] + [f'{t[-1]},{r},{c}' for t in ts.threads for r, c in enumerate(t)]
        return "\n".join(rows) + "\n", 0
    return ts.to_json(), 0


def cmd_components(args):
    space = _space(args)
    radius = args.radius if args.radius is not None else 1
    margin = components.default_margin(args.K) if args.margin is None else args.margin
    w = spaces.ball(space, _point(space, args.center), radius + margin, args.cap)
    part = components.k_components(w, BoundedRegion(w.origin, radius), args.K)
    if args.format == "csv":
        rows = ["point,class,live"]
        for i, name in enumerate(w.names):
            c = int(part.labels[i])
            if c >= 0:
                rows.append(f'"{name}",{part.ids[c]},{int(bool(part.live[c]))}')
        return "\n".join(rows) + "\n", 0
    return part.to_json(), 0


def _eps(args):
    space = _space(args)
    s = _sequence(args.s, space, "s")
    t = _sequence(args.t, space, "t")
    if args.Kmax is not None:
        res = epsilon.epsilon_search_K(s, t, args.Kmax, args.rmax, args.margin, args.prefix, args.cap)
    else:
        res = epsilon.epsilon_equivalent(s, t, args.K, args.rmax, args.margin, args.prefix, args.cap)
    return s, t, res


def cmd_eps(args):
    _, _, res = _eps(args)
    return res.to_json(), 0 if isinstance(res, epsilon.EpsCertificate) else 1


def cmd_witness(args):
    s, t, res = _eps(args)
    if not isinstance(res, epsilon.EpsCertificate):
        return res.to_json(), 1
    w = witness.build_witness(s, t, res)
    if args.format == "csv":
        fmt, norm = s.space.format_point, s.space.norm
        rows = ["k,point,norm"] + [f'{k},"{fmt(p)}",{norm(p)}' for k, p in enumerate(w.points)]
        return "\n".join(rows) + "\n", 0
    return w.to_json(), 0


def cmd_map_check(args):
    f = _map(args.f, "f")
    rep = maps.check_coarse(f, args.probe, args.K, args.cap)
    return rep.to_json(), 0 if rep.ok else 1


def cmd_map_close(args):
    f, g = _map(args.f, "f"), _map(args.g, "g")
    close, sup = maps.are_close(f, g, args.probe, args.cap)
    return {"close": close, "sup": sup if sup != float("inf") else "inf"}, 0 if close else 1


def cmd_map_ends(args):
    f = _map(args.f, "f")
    src, tgt, mapping = maps.end_map(f, args.K, args.rmax, args.margin, args.cap)
    doc = {"map": mapping, "source_threads": src.thread_ids, "target_threads": tgt.thread_ids,
           "bijective": maps.is_bijection(mapping, tgt.thread_ids),
           "source_horizon": src.horizon, "target_horizon": tgt.horizon}
    if args.format == "csv":
        rows = ["source,target"] + [f"{k},{v}" for k, v in sorted(mapping.items())]
        return "\n".join(rows) + "\n", 0
    return doc, 0


def cmd_verify(args):
    doc = _json_arg(args.certificate, "certificate")
    rep = epsilon.verify(doc, args.cap)
    return rep.to_json(), 0 if rep.ok else 1


COMMANDS = {
    "spaces": (cmd_spaces, "list space kinds, or normalise a --space descriptor"),
    "ball": (cmd_ball, "enumerate B(center; radius)"),
    "ends": (cmd_ends, "live component counts outside B(r) for r = 1..rmax"),
    "threads": (cmd_threads, "the inverse system of components up to rmax"),
    "components": (cmd_components, "K-components outside B(center; radius)"),
    "eps": (cmd_eps, "decide epsilon-equivalence of --s and --t (exit 1 on refutation)"),
    "witness": (cmd_witness, "common supersequence of two equivalent sequences"),
    "map-check": (cmd_map_check, "probe a map for bornologousness and properness"),
    "map-close": (cmd_map_close, "are --f and --g close?"),
    "map-ends": (cmd_map_ends, "map induced by --f on threads"),
    "verify": (cmd_verify, "re-check a certificate, refutation or witness document"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="space descriptor JSON (or @file)")
    common.add_argument("--center", help="canonical point string (default basepoint)")
    common.add_argument("--radius", type=int, help="ball or forbidden radius")
    common.add_argument("--s", help="sequence JSON (or @file)")
    common.add_argument("--t", help="sequence JSON (or @file)")
    common.add_argument("--f", help="map JSON {source, target, rule} (or @file)")
    common.add_argument("--g", help="map JSON {source, target, rule} (or @file)")
    common.add_argument("--certificate", help="certificate/refutation/witness JSON (or @file)")
    common.add_argument("--K", type=float, default=1, help="hop threshold (default 1)")
    common.add_argument("--Kmax", type=int, help="search K = 1..Kmax instead of a fixed K")
    common.add_argument("--rmax", type=int, default=16, help="largest probed radius (default 16)")
    common.add_argument("--margin", type=int, help="horizon margin beyond rmax (default 2K+4)")
    common.add_argument("--prefix", type=int, help="sequence prefix length (default automatic)")
    common.add_argument("--probe", type=int, default=16, help="probe radius for map checks")
    common.add_argument("--format", choices=("json", "csv", "dot"), default="json")
    common.add_argument("--cap", type=int, help="point cap (default ENDSLAB_CAP or 1000000)")
    common.add_argument("--out", help="write output here instead of stdout")

    parser = _Parser(prog="endslab", description="Desk-scale computation of the ends of coarse spaces.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    for name, (_, helptext) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=helptext, description=helptext)
    return parser


def _normalise_K(args):
    if args.K is not None and float(args.K).is_integer():
        args.K = int(args.K)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _normalise_K(args)
    fn = COMMANDS[args.command][0]
    try:
        if args.format == "dot" and args.command != "threads":
            raise InputError("--format dot is only defined for threads")
        out, status = fn(args)
    except InconclusiveError as exc:
        out, status = {"error": "inconclusive", "message": str(exc)}, exc.exit_code
    except EndsLabError as exc:
        print(f"endslab {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"endslab {args.command}: {exc}", file=sys.stderr)
        return 2
    text = out if isinstance(out, str) else json.dumps(out, sort_keys=True) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"endslab: cannot write {args.out}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
