"""Command-line front end: ``flatfront <command> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import catalog, mesh, verify
from .errors import ExcludedParameter, FlatFrontError, InputError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _value(text):
    for conv in (int, float, complex):
        try:
            return conv(text)
        except ValueError:
            pass
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise InputError(f"cannot read parameter value {text!r}") from None


def _params(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise InputError(f"parameter {item!r} is not of the form key=value")
        v = _value(val)
        out[key] = tuple(v) if isinstance(v, list) else v
    return out


def _spec(args):
    return catalog.load(args.spec, **_params(args.param))


def _stem(spec):
    return spec.name.replace(" ", "_")


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _mesh(args, target, t=0.0, suffix=""):
    spec = _spec(args)
    d = catalog.build(spec)
    m = mesh.sample_surface(d, target=target, t=t, grid=args.grid)
    stem = _stem(spec) + suffix
    paths = mesh.write_mesh(m, args.out, stem)
    info = dict(m.meta, spec=spec.name, files=[os.path.basename(p) for p in paths])
    _dump(info, os.path.join(args.out, f"{stem}_{m.name}.json"))
    return info


# ---------------------------------------------------------------------------
# commands

def cmd_build(args):
    _dump(_mesh(args, "front"))
    return EXIT_OK


def cmd_caustic(args):
    _dump(_mesh(args, "caustic"))
    return EXIT_OK


def cmd_parallel(args):
    spec = _spec(args)
    d = catalog.build(spec)
    for t in args.t:
        mesh.refuse_excluded(d, t)
    out = []
    for k, t in enumerate(args.t):
        m = mesh.sample_surface(d, target="front", t=t, grid=args.grid)
        stem = f"{_stem(spec)}_t{k:03d}"
        paths = mesh.write_mesh(m, args.out, stem)
        out.append(dict(m.meta, files=[os.path.basename(p) for p in paths]))
    _dump({"spec": spec.name, "series": out})
    return EXIT_OK


ENDS_COLUMNS = ["label", "z", "sheet", "cover", "alpha", "type", "multiplicity", "ord_Q",
                "q0", "coorientable", "weaklyComplete", "error"]


def _fmt_z(z):
    if np.isinf(z):
        return "inf"
    return f"{z.real:.12g}{z.imag:+.12g}j"


def cmd_classify_ends(args):
    from .ends import end_profile

    spec = _spec(args)
    d = catalog.build(spec)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(ENDS_COLUMNS)
    for p in d.punctures:
        row = {"label": p.label, "z": _fmt_z(p.z), "sheet": p.sheet, "cover": p.cover}
        try:
            prof = end_profile(d, p, tol=args.tol)
            row.update(alpha=f"{prof.alpha:.12g}", type=prof.type, multiplicity=prof.multiplicity,
                       ord_Q=prof.ord_Q, q0="" if prof.q0 is None else _fmt_z(prof.q0),
                       coorientable=prof.coorientable,
                       weaklyComplete=prof.extra.get("weaklyComplete"))
        except FlatFrontError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        wr.writerow([row.get(c, "") for c in ENDS_COLUMNS])
    _emit(buf.getvalue(), args, f"{_stem(spec)}_ends.csv")
    return EXIT_OK


def cmd_singular_locus(args):
    spec = _spec(args)
    d = catalog.build(spec)
    lines = d.singular_locus(args.t, grid=args.grid)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["polyline", "x", "y"])
    for k, ln in enumerate(lines):
        for z in ln:
            wr.writerow([k, f"{z.real:.12g}", f"{z.imag:.12g}"])
    _emit(buf.getvalue(), args, f"{_stem(spec)}_singular_t{args.t:g}.csv")
    return EXIT_OK


def _emit(text, args, name):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args):
    spec = _spec(args)
    d = catalog.build(spec)
    reps = verify.run(d, args.suite, name=spec.name, seed=args.seed, deck=spec.deck,
                      params=spec.params, n=args.points)
    report = {"spec": spec.name, "suite": args.suite, "seed": args.seed,
              "pass": all(r.passed for r in reps), "suites": [r.to_json() for r in reps]}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _dump(report, os.path.join(args.out, f"{_stem(spec)}_verify_{args.suite}.json"))
    _dump(report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_catalog(args):
    if args.show:
        sys.stdout.write(catalog.builtin(args.show, **_params(args.param)).dumps() + "\n")
        return EXIT_OK
    for name, (_, desc) in catalog.BUILTINS.items():
        sys.stdout.write(f"{name}\t{desc}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _common(defaults):
    """Global flags; subcommands get a copy without defaults so either position works."""
    g = argparse.ArgumentParser(add_help=False)
    dflt = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    g.add_argument("--tol", type=float, default=dflt(1e-6), help="classification tolerance")
    g.add_argument("--grid", type=int, default=dflt(256), help="samples per side of the chart window")
    g.add_argument("--out", default=dflt(None), help="output directory")
    g.add_argument("--seed", type=int, default=dflt(0), help="seed for randomized checks")
    return g


def parser():
    common = _common(False)
    p = argparse.ArgumentParser(prog="flatfront", parents=[_common(True)],
                                description="Flat fronts in hyperbolic space: construction, "
                                            "caustics, ends and mesh export.")
    sub = p.add_subparsers(dest="command", required=True)

    def spec_cmd(name, fn, help):
        s = sub.add_parser(name, parents=[common], help=help, argument_default=argparse.SUPPRESS)
        s.add_argument("spec", help="builtin name or path to a scene-spec JSON file")
        s.add_argument("--param", "-p", action="append", default=[], help="fixture parameter key=value")
        s.set_defaults(func=fn)
        return s

    spec_cmd("build", cmd_build, "mesh the front")
    spec_cmd("caustic", cmd_caustic, "mesh the caustic")
    s = spec_cmd("parallel", cmd_parallel, "mesh parallel fronts (one file set per t)")
    s.add_argument("--t", type=float, nargs="+", required=True)
    spec_cmd("classify-ends", cmd_classify_ends, "CSV table of end types")
    s = spec_cmd("singular-locus", cmd_singular_locus, "CSV of the singular set of the parallel front")
    s.add_argument("--t", type=float, default=0.0)
    s = spec_cmd("verify", cmd_verify, "run a verification suite and print a JSON report")
    s.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    s.add_argument("--points", type=int, default=50, help="random sample points per check")
    s = sub.add_parser("catalog", parents=[common], help="list builtin scene specs",
                       argument_default=argparse.SUPPRESS)
    s.add_argument("--list", action="store_true")
    s.add_argument("--show", default=None, help="print the JSON spec of a builtin")
    s.add_argument("--param", "-p", action="append", default=[])
    s.set_defaults(func=cmd_catalog)
    return p


def main(argv=None):
    args = parser().parse_args(argv)
    try:
        if args.command in ("build", "caustic", "parallel") and not args.out:
            args.out = "."
        return args.func(args)
    except (InputError, ExcludedParameter) as exc:
        sys.stderr.write(f"flatfront: error: {exc}\n")
        return EXIT_INPUT
    except FlatFrontError as exc:
        sys.stderr.write(f"flatfront: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
