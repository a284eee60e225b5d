"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numerical error.
``PTMAP_THREADS`` sets the number of worker threads for scenario cells.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import catalog
from .base import Chart, OrbitSpec
from .errors import ConsistencyError, DomainError, InputError, NumericalError
from .lie import ConnectionKind
from .paths import FourierPath
from .shape import assemble_fiber_shape_operator, assemble_orbit_shape_operator, spectrum_report
from .transport import SolverConfig, solve_transport
from .verification import run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(InputError):
    pass


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and a rename."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    try:
        parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(source, what="input"):
    """JSON from a file path or inline text, with line/column diagnostics."""
    p = Path(source)
    try:
        text = p.read_text(encoding="utf-8") if p.exists() else str(source)
    except OSError as exc:
        raise UsageError(f"cannot read {what} {source}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        where = str(source) if p.exists() else what
        raise UsageError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def parse_vector(text, dim, what="vector"):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        text = str(text).strip()
        vals = json.loads(text) if text.startswith("[") else [float(v) for v in text.split(",")]
    v = np.asarray(vals, dtype=float)
    if v.shape != (dim,):
        raise UsageError(f"{what} must have {dim} entries, got {v.size}")
    return v


def _threads():
    raw = os.environ.get("PTMAP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"PTMAP_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


# ------------------------------------------------------------ commands

def cmd_catalog(args):
    rows = catalog.describe()
    if args.json:
        sys.stdout.write(dumps(rows))
    else:
        for r in rows:
            print(f"{r['name']:9s} dim={r['dim']} dim_k={r['dim_k']} dim_p={r['dim_p']} "
                  f"matrix={r['matrix_size']}x{r['matrix_size']} radius={r['chart_radius']}  "
                  f"{r['description']}")
    return EXIT_OK


def cmd_verify(args):
    config = load_json(args.config, "config") if args.config else {}
    if not isinstance(config, dict):
        raise UsageError("verify config must be a JSON object")
    if args.algebra:
        config["algebras"] = args.algebra
    if args.seed is not None:
        config["seed"] = args.seed
    if args.checks:
        config["checks"] = args.checks
    report = run_verify(config, progress=None if args.quiet else lambda r: print(r.line(), flush=True))
    if args.out:
        atomic_write(args.out, report.dumps(include_runtime=False) + "\n")
    print("all checks passed" if report.ok else "some checks FAILED")
    return EXIT_OK if report.ok else EXIT_FAIL


def transport_report(entry, u, cfg):
    alg = entry.algebra
    chart = Chart.from_entry(entry)
    res = solve_transport(alg, u, cfg, chart)
    half = solve_transport(alg, u, cfg.with_steps(cfg.steps // 2) if cfg.steps >= 32 else cfg)
    return {
        "algebra": entry.name,
        "steps": cfg.steps,
        "method": cfg.method,
        "endpoint": res.endpoint.tolist(),
        "chart_coordinates": None if res.coset_chart is None else res.coset_chart.tolist(),
        "diagnostics": {
            "log_derivative_residual": res.log_derivative_residual(alg, u),
            "group_relation_residual": float(alg.relation_residual(res.endpoint)),
            "step_halving_difference": float(np.abs(half.endpoint - res.endpoint).max()),
        },
    }


def cmd_transport(args):
    entry = catalog.resolve(args.algebra)
    u = FourierPath.from_json(load_json(args.path, "path"))
    if u.dim != entry.algebra.dim:
        raise UsageError(f"path has dimension {u.dim}, algebra {entry.name} has {entry.algebra.dim}")
    rep = transport_report(entry, u, SolverConfig(args.steps, args.method))
    text = dumps(rep)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _spectrum_output(args, A, meta):
    rep = spectrum_report(A, meta)
    text = rep.dumps() + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        atomic_write(args.csv, rep.to_csv())
    return EXIT_OK


def cmd_fiber(args):
    entry = catalog.resolve(args.algebra)
    xi = parse_vector(args.xi, entry.algebra.dim, "--xi")
    A = assemble_fiber_shape_operator(entry.pair, xi, args.N, route=args.route)
    return _spectrum_output(args, A, {"algebra": entry.name, "kind": "fiber", "xi": xi.tolist()})


def cmd_orbit(args):
    entry = catalog.resolve(args.algebra)
    orbit = OrbitSpec.from_json(entry.pair, load_json(args.orbit, "orbit"))
    xi = parse_vector(args.xi, entry.algebra.dim, "--xi")
    A = assemble_orbit_shape_operator(orbit, xi, args.N)
    return _spectrum_output(args, A, {"algebra": entry.name, "kind": "orbit", "xi": xi.tolist(),
                                      "orbit": orbit.to_json()})


# ------------------------------------------------------------ scenarios

SCENARIO_KEYS = {"algebra", "kind", "connection", "solver", "truncations", "xi", "xi_random",
                 "orbit", "paths", "output", "seed"}


def validate_scenario(cfg):
    """Normalised scenario config; raises UsageError naming the offending field."""
    if not isinstance(cfg, dict):
        raise UsageError("scenario config must be a JSON object")
    unknown = set(cfg) - SCENARIO_KEYS
    if unknown:
        raise UsageError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if "algebra" not in cfg:
        raise UsageError("field 'algebra' is required")
    try:
        entry = catalog.resolve(cfg["algebra"])
    except InputError as exc:
        raise UsageError(f"field 'algebra': {exc}") from exc
    kind = cfg.get("kind", "fiber")
    if kind not in ("fiber", "orbit", "transport"):
        raise UsageError("field 'kind' must be 'fiber', 'orbit' or 'transport'")
    out = {"entry": entry, "kind": kind, "seed": int(cfg.get("seed", 0))}
    try:
        out["connection"] = ConnectionKind.parse(cfg.get("connection", "natural-torsion-free"))
    except InputError as exc:
        raise UsageError(f"field 'connection': {exc}") from exc
    solver = cfg.get("solver", {})
    try:
        out["solver"] = SolverConfig(int(solver.get("steps", 512)), solver.get("method", "rkmk4"),
                                     float(solver.get("tolerance", 1e-6)))
    except (InputError, AttributeError, TypeError, ValueError) as exc:
        raise UsageError(f"field 'solver': {exc}") from exc
    output = cfg.get("output", {})
    if not isinstance(output, dict) or "dir" not in output:
        raise UsageError("field 'output' must be an object with a 'dir' entry")
    out["dir"] = Path(output["dir"])
    dim = entry.algebra.dim
    if kind == "transport":
        paths = cfg.get("paths")
        if not paths:
            raise UsageError("field 'paths' must list at least one path for a transport scenario")
        try:
            out["paths"] = [FourierPath.from_json(p) for p in paths]
        except InputError as exc:
            raise UsageError(f"field 'paths': {exc}") from exc
        return out
    Ns = cfg.get("truncations")
    if not isinstance(Ns, list) or not Ns:
        raise UsageError("field 'truncations' must be a non-empty list")
    if any(not isinstance(n, int) or n < 1 for n in Ns) or Ns != sorted(Ns):
        raise UsageError("field 'truncations' must hold positive integers in ascending order")
    out["truncations"] = Ns
    rng = np.random.default_rng(out["seed"])
    xis = [parse_vector(x, dim, "field 'xi' entry") for x in cfg.get("xi", [])]
    for _ in range(int(cfg.get("xi_random", 0))):
        x = entry.pair.p_part(rng.standard_normal(dim))
        xis.append(x / entry.algebra.norm(x))
    if not xis:
        raise UsageError("field 'xi' (or 'xi_random') must give at least one direction")
    out["xi"] = xis
    if kind == "orbit":
        if "orbit" not in cfg:
            raise UsageError("field 'orbit' is required for an orbit scenario")
        try:
            out["orbit"] = OrbitSpec.from_json(entry.pair, cfg["orbit"])
        except InputError as exc:
            raise UsageError(f"field 'orbit': {exc}") from exc
    return out


def run_scenario(config):
    """Execute a scenario and write its JSON report (plus eigenvalue CSVs).

    Returns the list of written files.
    """
    sc = validate_scenario(config)
    entry, outdir = sc["entry"], sc["dir"]
    written = []
    if sc["kind"] == "transport":
        rows = [transport_report(entry, u, sc["solver"]) for u in sc["paths"]]
        path = outdir / "transport.json"
        atomic_write(path, dumps({"algebra": entry.name, "results": rows}))
        return [path]

    cells = [(i, xi, N) for i, xi in enumerate(sc["xi"]) for N in sc["truncations"]]

    def run_cell(cell):
        i, xi, N = cell
        if sc["kind"] == "fiber":
            A = assemble_fiber_shape_operator(entry.pair, xi, N)
        else:
            A = assemble_orbit_shape_operator(sc["orbit"], xi, N)
        return spectrum_report(A, {"algebra": entry.name, "kind": sc["kind"], "xi_index": i,
                                   "xi": xi.tolist()})

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        reports = list(pool.map(run_cell, cells))
    summary = []
    for (i, xi, N), rep in zip(cells, reports):
        csv_path = outdir / f"eigenvalues_xi{i}_N{N}.csv"
        atomic_write(csv_path, rep.to_csv())
        written.append(csv_path)
        summary.append(rep.to_json())
    path = outdir / "report.json"
    atomic_write(path, dumps({"algebra": entry.name, "kind": sc["kind"],
                              "connection": sc["connection"].value,
                              "truncations": sc["truncations"], "seed": sc["seed"],
                              "cells": summary}))
    return [path] + written


def cmd_scenario(args):
    files = run_scenario(load_json(args.config, "config"))
    for f in files:
        print(f)
    return EXIT_OK


# ------------------------------------------------------------ parser

def build_parser():
    p = argparse.ArgumentParser(prog="ptmap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="catalog management")
    csub = c.add_subparsers(dest="action", required=True)
    cl = csub.add_parser("list", help="list catalog algebras")
    cl.add_argument("--json", action="store_true")
    cl.set_defaults(func=cmd_catalog)

    v = sub.add_parser("verify", help="run the verification suite")
    v.add_argument("--config", help="JSON config file or inline JSON")
    v.add_argument("--algebra", action="append", help="restrict to these algebras (repeatable)")
    v.add_argument("--checks", nargs="+", help="run only these checks")
    v.add_argument("--seed", type=int)
    v.add_argument("--out", help="write the JSON report here")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("transport", help="solve the transport ODE for one path")
    t.add_argument("--algebra", required=True)
    t.add_argument("--path", required=True, help="FourierPath JSON file or inline JSON")
    t.add_argument("--steps", type=int, default=512)
    t.add_argument("--method", default="rkmk4", choices=["rkmk4", "rk4-reproject"])
    t.add_argument("--out")
    t.set_defaults(func=cmd_transport)

    for name, func, helptext in (("fiber-spectrum", cmd_fiber, "fiber shape operator spectrum"),
                                 ("orbit-spectrum", cmd_orbit, "lifted orbit shape operator spectrum")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--algebra", required=True)
        s.add_argument("--xi", required=True, help="comma list or JSON array of g-coordinates")
        s.add_argument("--N", type=int, required=True)
        s.add_argument("--out")
        s.add_argument("--csv", help="eigenvalue table")
        if name == "orbit-spectrum":
            s.add_argument("--orbit", required=True, help="OrbitSpec JSON file or inline JSON")
        else:
            s.add_argument("--route", default="closed-form", choices=["closed-form", "path"])
        s.set_defaults(func=func)

    sc = sub.add_parser("scenario", help="run a scenario config")
    sc.add_argument("--config", required=True)
    sc.set_defaults(func=cmd_scenario)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        if isinstance(exc, (DomainError, np.linalg.LinAlgError)):
            print(f"numerical error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
