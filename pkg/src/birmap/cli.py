"""Command-line front end.

Exit codes: 0 success, 1 failed verification (or no fit, or disagreeing
methods), 2 usage error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import maps
from .degfit import NoFit, fit
from .iterate import Budget, BudgetExceeded, as_schedule, iterate_direct, iterate_pullback, \
    prepare
from .poly import PolyError, parse
from .projmap import GenericityError, MapFileError, RationalMap, load_map_file
from .singular import track_orbit
from .verify import TARGETS, run_target

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str)


def _resolve_map(args):
    if args.map_file:
        try:
            return load_map_file(args.map_file)
        except (OSError, MapFileError) as exc:
            raise UsageError(f"cannot load map file: {exc}") from exc
    try:
        return maps.get_map(args.map)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc


def _budget(args) -> Budget:
    return Budget(max_terms=args.budget_terms) if args.budget_terms else Budget()


# -- subcommands ----------------------------------------------------------------------


def cmd_maps(args, out) -> int:
    if args.format == "json":
        out.write(_dump({k: maps.DESCRIPTIONS[k] for k in sorted(maps.BUILTIN)}) + "\n")
    else:
        for k in sorted(maps.BUILTIN):
            out.write(f"{k:14s} {maps.DESCRIPTIONS[k]}\n")
    return EXIT_OK


def cmd_degrees(args, out) -> int:
    f = _resolve_map(args)
    kw = dict(mode=args.mode, seed=args.seed, frame=args.frame, budget=_budget(args))
    traces = {}
    if args.method in ("direct", "both"):
        traces["direct"] = iterate_direct(f, args.steps, **kw)
    if args.method in ("pullback", "both"):
        try:
            traces["pullback"] = iterate_pullback(f, args.steps, **kw)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    first = next(iter(traces.values()))
    agree = len({tuple(t.degrees) for t in traces.values()}) == 1
    if args.format == "csv":
        out.write(first.to_csv())
    elif args.format == "json":
        if len(traces) == 1:
            out.write(first.to_json() + "\n")
        else:
            out.write(_dump({"agree": agree, **{k: t.to_dict() for k, t in traces.items()}})
                      + "\n")
    else:
        spec = first.specialization
        out.write(f"# map {first.map_name}, mode {args.mode}, seed {args.seed}, "
                  f"frame {first.frame}\n")
        if spec:
            out.write("# " + ", ".join(f"{k}={v}" for k, v in sorted(spec.items())) + "\n")
        out.write("n d_n\n")
        for s in first.steps:
            out.write(f"{s.k} {s.degree}\n")
        if len(traces) > 1:
            out.write(f"# methods agree: {agree}\n")
    for t in traces.values():
        for v in t.claim_violations:
            print(f"warning: {t.method} step {v.step} left factor {v.factor}", file=sys.stderr)
    if not agree:
        print("error: direct and pull-back degree sequences differ", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _read_sequence(args) -> list[int]:
    if args.input:
        text = Path(args.input).read_text() if args.input != "-" else sys.stdin.read()
        stripped = text.lstrip()
        if stripped.startswith(("{", "[")):
            data = json.loads(text)
            if isinstance(data, dict):
                # a single trace, a two-method run, or a fit report
                data = data.get("direct", data)
                data = data.get("degrees", data.get("sequence"))
            if not isinstance(data, list):
                raise UsageError("JSON input needs a list or a 'degrees' field")
            return [int(v) for v in data]
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and not rows[0][0].strip().lstrip("-").isdigit():
            rows = rows[1:]
        return [int(r[-1]) for r in rows if r]
    items = []
    for tok in args.sequence:
        items.extend(s for s in tok.replace(",", " ").split() if s)
    if not items:
        raise UsageError("give a sequence or --input")
    return [int(v) for v in items]


def _fit_and_report(seq, args, out) -> int:
    try:
        res = fit(seq)
    except NoFit as exc:
        print(f"no fit: {exc}", file=sys.stderr)
        return EXIT_FAIL
    d = res.to_dict()
    if args.format == "json":
        out.write(_dump(d) + "\n")
    elif args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k in sorted(d):
            w.writerow([k, json.dumps(d[k], default=str) if isinstance(d[k], (list, dict))
                        else d[k]])
    else:
        out.write(f"sequence            {', '.join(map(str, seq))}\n")
        out.write(f"generating function {d['generating_function']}\n")
        out.write(f"factored            {d['generating_function_factored']}\n")
        kind = d["kind"] if d["nu"] is None else f"{d['kind']} (degree {d['nu']})"
        out.write(f"growth              {kind}\n")
        out.write(f"entropy             {d['entropy']}\n")
        if d["leading_coefficient"] is not None:
            out.write(f"leading coefficient {d['leading_coefficient']}\n")
        if d["closed_form"] is not None:
            out.write(f"closed form         {d['closed_form']}\n")
    return EXIT_OK


def cmd_fit(args, out) -> int:
    return _fit_and_report(_read_sequence(args), args, out)


def cmd_entropy(args, out) -> int:
    if args.sequence or args.input:
        seq = _read_sequence(args)
    else:
        f = _resolve_map(args)
        seq = iterate_direct(f, args.steps, mode=args.mode, seed=args.seed, frame=args.frame,
                             budget=_budget(args)).degrees
    return _fit_and_report(seq, args, out)


def cmd_orbit(args, out) -> int:
    f = _resolve_map(args)
    if not isinstance(f, RationalMap):
        raise UsageError("orbit tracking needs an autonomous map")
    if args.source:
        try:
            source = parse(args.source, f.varspec.all)
        except PolyError as exc:
            raise UsageError(f"bad --source: {exc}") from exc
    else:
        cands = f.exceptional_candidates()
        if not cands:
            raise UsageError("the map has no exceptional candidate; pass --source")
        source = cands[0]
    if args.mode == "symbolic":
        values = {k: Fraction(v) for k, v in f.gauge.items()} or None
    else:
        _, values = prepare(as_schedule(f), "specialized", args.seed, True, 1)
        values = values or None
    orb = track_orbit(source, f, args.steps, values=values)
    d = orb.to_dict()
    d.update({"map": f.name, "mode": args.mode, "seed": args.seed,
              "specialization": None if values is None else
              {k: str(v) for k, v in sorted(values.items())}})
    if args.format == "json":
        out.write(_dump(d) + "\n")
    else:
        out.write(f"# orbit of {{{source} = 0}} under {f.name}\n")
        for i, p in enumerate(d["images"], 1):
            shown = "[" + ", ".join(map(str, p)) + "]" if p else "not a point"
            out.write(f"{i} {shown}\n")
        out.write(f"# absorbed at step {d['absorbed_at']}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    rep = run_target(args.target, mode=args.mode, seed=args.seed, steps=args.steps)
    if args.format == "json":
        out.write(rep.to_json() + "\n")
    else:
        out.write(rep.to_text() + "\n")
    return EXIT_OK if rep.ok else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, steps: int | None = 12):
    p.add_argument("--map", default="phitilde", help="builtin map name (see 'maps list')")
    p.add_argument("--map-file", help="map definition file, overrides --map")
    p.add_argument("--steps", type=int, default=steps)
    p.add_argument("--mode", choices=("specialized", "symbolic"), default="specialized")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frame", choices=("line", "full"), default="line")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--budget-terms", type=int, default=None,
                   help="largest number of terms allowed in one component")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="birmap",
                                     description="degree growth of birational maps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("maps", help="builtin maps")
    p.add_argument("action", choices=("list",))
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_maps)

    p = sub.add_parser("degrees", help="degree sequence of the iterates")
    _common(p)
    p.add_argument("--method", choices=("direct", "pullback", "both"), default="direct")
    p.set_defaults(func=cmd_degrees)

    for name, func, helptext in (("fit", cmd_fit, "generating function of a sequence"),
                                 ("entropy", cmd_entropy, "growth and entropy")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("sequence", nargs="*", help="integers, separated by spaces or commas")
        p.add_argument("--input", help="trace JSON or n,d_n CSV ('-' for stdin)")
        p.set_defaults(func=func)

    p = sub.add_parser("orbit", help="orbit of an exceptional hypersurface")
    _common(p, steps=5)
    p.add_argument("--source", help="hypersurface equation (default: the map's candidate)")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("verify", help="reproduce and check the builtin results")
    p.add_argument("target", choices=tuple(TARGETS) + ("all",))
    p.add_argument("--mode", choices=("specialized", "symbolic"), default="specialized")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, GenericityError, PolyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
