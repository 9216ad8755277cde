"""Command-line front end: ``schifferlab <command> ...``.

Structured reports go to stdout as JSON, curves to CSV and nodal pictures
to SVG under ``--out``. Every run that writes files also writes
``manifest.json`` with the resolved configuration, the package version and
the wall-clock time. Floats are written with 17 significant digits.

Exit codes: 0 success, 1 check failed, 2 invalid input, 3 degenerate.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import DegenerateError, PreconditionError, SchifferLabError
from .geom2d import load_domain, normal_count
from .helmholtz import (certificate, scan_neumann_eigs,
                        scan_schiffer, schiffer_residual)
from .nodal import trace_nodal
from .verify import (normal_derivative_trace,
                     tangent_harmonic_coeffs, verification_report)
from .wavefield import KillingField, apply_killing, load_field

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_DEGENERATE = 0, 1, 2, 3


class InvalidInput(Exception):
    pass


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj, indent=2, _level=0):
    """JSON text with every float written to 17 significant digits."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_float(float(v)) for v in row) + "\n")


def parse_killing(text):
    """'rot:PX,PY' or 'const:A,B' -> KillingField."""
    try:
        kind, rest = text.split(":", 1)
        a, b = (float(v) for v in rest.split(","))
    except ValueError as exc:
        raise InvalidInput(f"bad Killing field {text!r}") from exc
    if kind == "rot":
        return KillingField.rotation((a, b))
    if kind == "const":
        return KillingField.constant(a, b)
    raise InvalidInput(f"unknown Killing field kind {kind!r}")


def _load_domain(path):
    try:
        return load_domain(path)
    except (OSError, ValueError, KeyError, TypeError, SchifferLabError) as exc:
        raise InvalidInput(f"cannot load domain {path}: {exc}") from exc


class Run:
    """Output bookkeeping for one command invocation."""

    def __init__(self, args):
        self.args = args
        self.out = os.path.abspath(args.out) if getattr(args, "out", None) else None
        self.files = []
        self.start = time.perf_counter()

    def path(self, name):
        if self.out is None:
            return None
        os.makedirs(self.out, exist_ok=True)
        p = os.path.join(self.out, name)
        self.files.append(name)
        return p

    def write_json(self, name, obj):
        p = self.path(name)
        if p:
            with open(p, "w") as fh:
                fh.write(dumps(obj) + "\n")

    def config(self):
        cfg = {}
        for key, value in sorted(vars(self.args).items()):
            if key == "func":
                continue
            if key in ("domain", "field", "out") and value is not None:
                value = os.path.abspath(value)
            cfg[key] = value
        return cfg

    def finish(self, code):
        if self.out is None:
            return code
        manifest = {"command": self.args.command, "config": self.config(),
                    "version": __version__, "files": self.files, "exit_code": code,
                    "wall_clock_seconds": time.perf_counter() - self.start,
                    "finished_utc": datetime.now(timezone.utc).isoformat()}
        os.makedirs(self.out, exist_ok=True)
        with open(os.path.join(self.out, "manifest.json"), "w") as fh:
            fh.write(dumps(manifest) + "\n")
        return code


def _emit(run, name, obj):
    print(dumps(obj))
    run.write_json(name, obj)


def cmd_tau(run):
    args = run.args
    domain = _load_domain(args.domain)
    probe = tuple(args.probe) if args.probe else None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = normal_count(domain, probe)
    except DegenerateError as exc:
        _emit(run, "tau.json", {"count": None, "degenerate": True, "reason": str(exc)})
        return EXIT_DEGENERATE
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    _emit(run, "tau.json", report.to_dict())
    return EXIT_DEGENERATE if report.degenerate else EXIT_OK


def cmd_certify(run):
    domain = _load_domain(run.args.domain)
    domain_id = os.path.splitext(os.path.basename(run.args.domain))[0]
    report = certificate(domain, domain_id)
    _emit(run, "certificate.json", report.to_dict())
    return EXIT_DEGENERATE if report.conclusion == "degenerate" else EXIT_OK


def _check_scan(args):
    if not 0 < args.kmin < args.kmax:
        raise InvalidInput("need 0 < kmin < kmax")
    if args.step <= 0:
        raise InvalidInput("step must be positive")
    if args.order < 1:
        raise InvalidInput("order must be at least 1")


def cmd_eigs(run):
    args = run.args
    _check_scan(args)
    domain = _load_domain(args.domain)
    try:
        found, ks, sig = scan_neumann_eigs(domain, args.kmin, args.kmax, args.step, args.order,
                                           m=args.m, seed=args.seed, return_curve=True)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    p = run.path("sigma_curve.csv")
    if p:
        write_csv(p, ["k", "sigma_min"], zip(ks, sig))
    _emit(run, "eigenvalues.json", {"order": args.order,
                                    "eigenvalues": [r.to_dict() for r in found]})
    return EXIT_OK


def cmd_schiffer(run):
    args = run.args
    domain = _load_domain(args.domain)
    if args.order < 1:
        raise InvalidInput("order must be at least 1")
    if args.k is not None:
        res = schiffer_residual(domain, args.k, args.order, m=args.m)
        report = {"k": res.k, "defect": res.defect,
                  "accepted": res.defect < args.threshold, "threshold": args.threshold,
                  "field": res.field.to_dict()}
    else:
        if args.kmin is None or args.kmax is None or args.step is None:
            raise InvalidInput("give --k or all of --kmin, --kmax, --step")
        _check_scan(args)
        scan = scan_schiffer(domain, args.kmin, args.kmax, args.step, args.order,
                             m=args.m, threshold=args.threshold)
        p = run.path("defect_curve.csv")
        if p:
            write_csv(p, ["k", "defect"], zip(scan.ks, scan.defects))
        res = schiffer_residual(domain, scan.k_min, args.order, m=args.m)
        report = dict(scan.to_dict(), field=res.field.to_dict())
    report["order"] = args.order
    _emit(run, "schiffer.json", report)
    return EXIT_OK


def cmd_verify(run):
    args = run.args
    domain = _load_domain(args.domain)
    res = schiffer_residual(domain, args.k, args.order, m=args.m)
    report = {"k": args.k, "order": args.order, "schiffer_defect": res.defect}
    try:
        rows = verification_report(res.field, domain, samples=args.samples)
    except PreconditionError as exc:
        report.update(precondition=str(exc), checks=[], all_pass=False)
        _emit(run, "verify.json", report)
        return EXIT_FAILED
    trace = normal_derivative_trace(res.field, domain, KillingField.rotation(domain.center),
                                    args.samples)
    coeffs = tangent_harmonic_coeffs(trace, 3)
    report["rotational_trace_harmonics"] = {"cos": coeffs.c, "sin": coeffs.s}
    report["checks"] = [r.to_dict() for r in rows]
    report["all_pass"] = all(r.passed for r in rows)
    _emit(run, "verify.json", report)
    return EXIT_OK if report["all_pass"] else EXIT_FAILED


def cmd_nodal(run):
    args = run.args
    try:
        field = load_field(args.field)
    except (OSError, ValueError, KeyError, TypeError, SchifferLabError) as exc:
        raise InvalidInput(f"cannot load field {args.field}: {exc}") from exc
    x0, y0, x1, y1 = args.bbox
    if not (x0 < x1 and y0 < y1):
        raise InvalidInput("bbox must satisfy x0 < x1 and y0 < y1")
    if args.cells < 64:
        raise InvalidInput("cells must be at least 64")
    if args.killing:
        field = apply_killing(field, parse_killing(args.killing))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        graph = trace_nodal(field, args.bbox, args.cells)
    if run.out is None:
        run.out = os.path.abspath(".")
    graph.to_svg(run.path("nodal.svg"))
    graph.to_csv(run.path("nodal_edges.csv"))
    summary = {"cell_size": graph.cell_size, "edges": len(graph.edges),
               "closed_loops": len(graph.loops()),
               "vertices": [{"x": v.point.x, "y": v.point.y, "degree": v.degree,
                             "tangential": v.tangential}
                            for v in graph.interior_vertices]}
    _emit(run, "nodal.json", summary)
    return EXIT_OK


def cmd_sturm(run):
    from .verify import sturm_trial_counts
    args = run.args
    if args.mlow < 1 or args.trials < 1:
        raise InvalidInput("mlow and trials must be positive")
    counts = sturm_trial_counts(args.mlow, args.trials, args.seed)
    ok = bool((counts >= 2 * args.mlow).all())
    _emit(run, "sturm.json", {"pass": ok, "min_count": int(counts.min()),
                              "required": 2 * args.mlow})
    return EXIT_OK if ok else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="schifferlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", help="output directory for files and manifest")
        p.set_defaults(func=func)
        return p

    p = command("tau", cmd_tau, "count boundary normals through a point")
    p.add_argument("--domain", required=True)
    p.add_argument("--probe", type=float, nargs=2, metavar=("X", "Y"))

    p = command("certify", cmd_certify, "check the symmetry and normal-count hypotheses")
    p.add_argument("--domain", required=True)

    for name, func, text in (("eigs", cmd_eigs, "scan for Neumann eigenvalues"),
                             ("schiffer", cmd_schiffer, "scan the Schiffer defect")):
        p = command(name, func, text)
        p.add_argument("--domain", required=True)
        required = name == "eigs"
        p.add_argument("--kmin", type=float, required=required)
        p.add_argument("--kmax", type=float, required=required)
        p.add_argument("--step", type=float, required=required)
        p.add_argument("--order", type=int, required=True)
        p.add_argument("--m", type=int, help="boundary points (default 4N + 16)")
        if name == "eigs":
            p.add_argument("--seed", type=int, default=0)
        else:
            p.add_argument("--k", type=float, help="evaluate a single wavenumber")
            p.add_argument("--threshold", type=float, default=1e-8)

    p = command("verify", cmd_verify, "run the boundary identity checks")
    p.add_argument("--domain", required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--samples", type=int, default=1024)

    p = command("nodal", cmd_nodal, "trace the nodal set of a field")
    p.add_argument("--field", required=True)
    p.add_argument("--bbox", type=float, nargs=4, required=True, metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--cells", type=int, default=256)
    p.add_argument("--killing", help="rot:PX,PY or const:A,B")

    p = command("sturm", cmd_sturm, "random check of the eight-sign-change bound")
    p.add_argument("--mlow", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    r = Run(args)
    try:
        code = args.func(r)
    except InvalidInput as exc:
        print(f"schifferlab {args.command}: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        code = EXIT_INVALID
    return r.finish(code)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
