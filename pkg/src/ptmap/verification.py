"""The acceptance suite as named, report-valued checks.

Each check returns a :class:`CheckResult` with a measured value and the
tolerance it is held to. :func:`run_verify` runs every check once.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import catalog
from .base import Chart, OrbitSpec, PolynomialField, coset_distance, manifold_to_chart
from .config import TOL
from .errors import InputError
from .lie import ConnectionKind, validate_reductive
from .paths import FourierPath, check_l2_inequality
from .shape import (assemble_fiber_shape_operator, assemble_orbit_shape_operator, austere_check,
                    block_norm_decay, eigen_spectrum, max_modulus_eigenvalue, regularized_trace_I,
                    regularized_trace_II)
from .transport import (SolverConfig, check_affine_submersion, gauge_transform, solve_frame,
                        solve_transport)

__all__ = ["CheckResult", "VerificationReport", "run_verify", "CHECKS", "latitude_orbit",
           "latitude_curvature_fd"]

PASS, FAIL, INFO = "pass", "fail", "info"


@dataclass
class CheckResult:
    name: str
    status: str
    value: float | None
    tolerance: float | None
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status != FAIL

    def line(self):
        val = "n/a" if self.value is None else f"{self.value:.3e}"
        tol = "n/a" if self.tolerance is None else f"{self.tolerance:.1e}"
        return f"[{self.status.upper():4s}] {self.name:32s} value={val:>10s} tol={tol:>8s} ({self.runtime:.2f}s)"


@dataclass
class VerificationReport:
    results: list
    config: dict

    @property
    def ok(self):
        return all(r.passed for r in self.results)

    def to_json(self):
        return {"config": self.config, "ok": self.ok,
                "checks": [_jsonable(asdict(r)) for r in self.results]}

    def dumps(self, include_runtime=True):
        obj = self.to_json()
        if not include_runtime:
            for c in obj["checks"]:
                c.pop("runtime", None)
        return json.dumps(obj, indent=2, sort_keys=True)

    def lines(self):
        return [r.line() for r in self.results]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _status(ok):
    return PASS if ok else FAIL


# ------------------------------------------------------------ helpers

def latitude_orbit(r):
    """Latitude circle at geodesic distance ``r`` from a pole of the unit sphere SU(2)/U(1).

    ``H`` is the rotation group about the axis ``cos r e3 + sin r e2``; the
    returned unit transversal ``xi = -e1`` points towards the pole.
    """
    pair = catalog.load("su2").pair
    axis = np.array([0.0, np.sin(r), np.cos(r)])
    return OrbitSpec(pair, [axis], [[1.0, 0.0, 0.0]]), np.array([-1.0, 0.0, 0.0])


def latitude_curvature_fd(r, h=1e-3):
    """Geodesic curvature of the latitude circle from finite differences on the chart.

    The orbit curve is pulled back to the chart with ``manifold_to_chart``
    and pushed into R^3 by the isometry ``w -> Ad(exp w) e3`` onto the unit
    sphere; the curvature is signed along the image of ``xi``.
    """
    entry = catalog.load("su2")
    alg, chart = entry.algebra, Chart.from_entry(entry)
    orbit, xi = latitude_orbit(r)
    a = orbit.h_basis[0]
    e3 = np.array([0.0, 0.0, 1.0])

    def p(theta):
        w = manifold_to_chart(chart, alg.exp(theta * a))
        return alg.Ad(alg.exp(w)) @ e3

    P = [p(k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (P[0] - 8 * P[1] + 8 * P[3] - P[4]) / (12 * h)
    d2 = (-P[0] + 16 * P[1] - 30 * P[2] + 16 * P[3] - P[4]) / (12 * h * h)
    n = alg.bracket(xi, e3)
    n = n / np.linalg.norm(n)
    return float(d2 @ n / (d1 @ d1))


def _unit_p(pair, rng):
    x = pair.p_part(rng.standard_normal(pair.algebra.dim))
    return x / pair.algebra.norm(x)


# ------------------------------------------------------------ checks

def check_reductive(ctx):
    worst, failing = 0.0, []
    for name, entry in ctx["entries"].items():
        rep = validate_reductive(entry.pair)
        worst = max(worst, rep.subalgebra, rep.reductivity, rep.projections)
        if not rep.ok:
            failing.append({"algebra": name, "messages": rep.messages})
    for name, msg in ctx["invalid"].items():
        failing.append({"algebra": name, "messages": [msg]})
    return _status(not failing), worst, TOL.reductive, {"failing": failing}


def check_c1(ctx):
    worst, per = 0.0, {}
    targets = [n for n in ("su2", "sl2r", "so3") if n in ctx["entries"]]
    for name in targets:
        alg = ctx["entries"][name].algebra
        rng = ctx["rng"](name)
        err = 0.0
        for _ in range(20):
            X = alg.random_element(rng, 2.0 * rng.uniform(0.05, 1.0))
            ep = solve_transport(alg, FourierPath.constant(X), SolverConfig(1024)).endpoint
            err = max(err, float(np.abs(ep - alg.exp(X)).max()))
        per[name] = err
        worst = max(worst, err)
    if not targets:
        return INFO, None, TOL.transport_exact, {"skipped": "no applicable algebra"}
    return _status(worst <= TOL.transport_exact), worst, TOL.transport_exact, {"per_algebra": per}


def check_c2(ctx, trials=50, steps=256):
    worst_g, worst_c, per = 0.0, 0.0, {}
    for name, entry in ctx["entries"].items():
        alg, pair = entry.algebra, entry.pair
        rng = ctx["rng"](name)
        eg = ec = 0.0
        for _ in range(trials):
            u = FourierPath.random(rng, alg.dim, 3, 0.5)
            w = FourierPath.random(rng, alg.dim, 2, 0.5)
            kappa = pair.k_part(alg.random_element(rng, 0.5)) if pair.dim_k else np.zeros(alg.dim)
            # gauge in P(G, G x K): g(1) = exp(kappa) in K, g(0) arbitrary
            g = solve_frame(alg, w, SolverConfig(2 * steps), terminal=alg.exp(kappa))
            lhs = solve_transport(alg, gauge_transform(alg, g, u), SolverConfig(steps)).endpoint
            Pu = solve_transport(alg, u, SolverConfig(steps)).endpoint
            rhs = g.start @ Pu @ np.linalg.inv(g.end)
            eg = max(eg, float(np.abs(lhs - rhs).max()))
            ec = max(ec, coset_distance(pair, lhs, g.start @ Pu))
        per[name] = {"group": eg, "coset": ec}
        worst_g, worst_c = max(worst_g, eg), max(worst_c, ec)
    worst = max(worst_g, worst_c)
    return _status(worst <= TOL.equivariance), worst, TOL.equivariance, {"per_algebra": per}


def _fiber_sweep(ctx, Ns, n_xi):
    for name, entry in ctx["entries"].items():
        rng = ctx["rng"](name)
        for N in Ns:
            for _ in range(n_xi):
                if entry.pair.dim_p == 0:
                    continue
                yield name, entry, N, _unit_p(entry.pair, rng)


def check_c3(ctx):
    worst, per = 0.0, {}
    for name, entry, N, xi in _fiber_sweep(ctx, range(1, 17), ctx["n_xi"]):
        A = assemble_fiber_shape_operator(entry.pair, xi, N)
        B = assemble_fiber_shape_operator(entry.pair, xi, N, route="path")
        d = float(np.abs(A.matrix - B.matrix).max())
        per[name] = max(per.get(name, 0.0), d)
        worst = max(worst, d)
    return _status(worst <= TOL.dual_route), worst, TOL.dual_route, {"per_algebra": per}


def check_c4(ctx):
    # the trace is a sum of entries each within the diagonal tolerance
    worst_d, worst_t, ok = 0.0, 0.0, True
    for name, entry, N, xi in _fiber_sweep(ctx, range(1, 17), 3):
        A = assemble_fiber_shape_operator(entry.pair, xi, N)
        t2, d, _ = regularized_trace_II(A)
        worst_d = max(worst_d, float(np.abs(d).max()))
        worst_t = max(worst_t, abs(t2))
        ok &= abs(t2) <= TOL.zero_diagonal * A.size
    ok &= worst_d <= TOL.zero_diagonal
    return _status(ok), worst_d, TOL.zero_diagonal, {"max_abs_trace_II": worst_t}


def check_c5(ctx):
    worst_mass, worst_t1, not_matched = 0.0, 0.0, []
    for name, entry, N, xi in _fiber_sweep(ctx, range(1, 17), 1):
        ev, _, _ = eigen_spectrum(assemble_fiber_shape_operator(entry.pair, xi, N))
        rep = austere_check(ev)
        t1, _ = regularized_trace_I(ev)
        worst_mass = max(worst_mass, rep["unmatched_mass"])
        worst_t1 = max(worst_t1, abs(t1))
        if not rep["matched"]:
            not_matched.append({"algebra": name, "N": N})
    ok = worst_mass <= TOL.austere and worst_t1 <= TOL.trace_I
    return _status(ok), max(worst_mass, worst_t1), TOL.trace_I, {
        "max_unmatched_mass": worst_mass, "max_abs_trace_I": worst_t1, "unmatched_cells": not_matched}


def _decay_targets(ctx):
    out = []
    if "su2" in ctx["entries"]:
        out.append(("su2", ctx["entries"]["su2"].pair, np.array([1.0, 0.0, 0.0])))
    for name, entry in ctx["entries"].items():
        if name != "su2" and entry.pair.dim_p:
            out.append((name, entry.pair, _unit_p(entry.pair, ctx["rng"](name))))
    return out


def check_c6a(ctx):
    window = TOL.decay_exponent_window
    min_slack, exps, ok = np.inf, {}, True
    for name, pair, xi in _decay_targets(ctx):
        bn = block_norm_decay(assemble_fiber_shape_operator(pair, xi, 16))
        min_slack = min(min_slack, bn["min_slack"])
        exps[name] = bn["exponent"]
        if bn["exponent"] is not None:
            ok &= abs(bn["exponent"] + TOL.decay_exponent) <= window
    ok &= min_slack >= -TOL.block_norm_slack
    return _status(ok), float(min_slack), -TOL.block_norm_slack, {"exponents": exps}


def check_c6b(ctx):
    if "su2" not in ctx["entries"]:
        return INFO, None, TOL.eigen_cauchy, {"skipped": "su2 not selected"}
    pair = ctx["entries"]["su2"].pair
    xi = np.array([1.0, 0.0, 0.0])
    lam = {N: max_modulus_eigenvalue(assemble_fiber_shape_operator(pair, xi, N)) for N in (12, 16)}
    diff = abs(abs(lam[16]) - abs(lam[12]))
    return _status(diff <= TOL.eigen_cauchy), float(diff), TOL.eigen_cauchy, {
        "lambda_max": {str(N): abs(v) for N, v in lam.items()}, "limit": 1 / np.pi}


def check_c7a(ctx, trials=10):
    worst, per = 0.0, {}
    targets = [n for n in ("su2", "sl2r") if n in ctx["entries"]]
    for name in targets:
        entry = ctx["entries"][name]
        chart, pair = Chart.from_entry(entry), entry.pair
        rng = ctx["rng"](name)
        res = []
        for _ in range(trials):
            X = _unit_p(pair, rng)
            Z = PolynomialField.random(pair, rng)
            res.append(check_affine_submersion(chart, Z, X, h=1e-4, kind=ConnectionKind.NATURAL).residual)
        per[name] = max(res)
        worst = max(worst, per[name])
    if not targets:
        return INFO, None, TOL.affine_residual, {"skipped": "no applicable algebra"}
    return _status(worst <= TOL.affine_residual), worst, TOL.affine_residual, {"per_algebra": per}


def check_c7b(ctx, trials=3):
    if "su3" not in ctx["entries"]:
        return INFO, None, TOL.affine_negative, {"skipped": "su3 not selected"}
    entry = ctx["entries"]["su3"]
    chart, pair = Chart.from_entry(entry), entry.pair
    rng = ctx["rng"]("su3")
    res = []
    for _ in range(trials):
        X = _unit_p(pair, rng)
        Z = PolynomialField.random(pair, rng)
        res.append(check_affine_submersion(chart, Z, X, h=1e-4, kind=ConnectionKind.CANONICAL).residual)
    return _status(min(res) > TOL.affine_negative), min(res), TOL.affine_negative, {"residuals": res}


def check_c8(ctx):
    if "su2" not in ctx["entries"]:
        return INFO, None, TOL.mean_curvature, {"skipped": "su2 not selected"}
    rows, worst, worst_N = [], 0.0, 0.0
    for r in (0.5, 1.0):
        orbit, xi = latitude_orbit(r)
        traces = [regularized_trace_II(assemble_orbit_shape_operator(orbit, xi, N))[0]
                  for N in (4, 8, 16)]
        oracle = latitude_curvature_fd(r)
        err = max(abs(traces[0] - 1 / np.tan(r)), abs(traces[0] - oracle))
        spread = max(traces) - min(traces)
        worst, worst_N = max(worst, err), max(worst_N, spread)
        rows.append({"r": r, "trace_II": traces, "cot_r": 1 / np.tan(r), "fd_oracle": oracle})
    ok = worst <= TOL.mean_curvature and worst_N <= TOL.trace_II_N_independence
    return _status(ok), worst, TOL.mean_curvature, {"rows": rows, "N_spread": worst_N}


def check_c9(ctx, trials=1000):
    rng = ctx["rng"]("l2")
    worst = np.inf
    for _ in range(trials):
        dim = int(rng.integers(1, 9))
        N = int(rng.integers(0, 9))
        u = FourierPath.random(rng, dim, N, float(rng.uniform(0.1, 3.0)))
        worst = min(worst, check_l2_inequality(u, float(rng.uniform(0, 1))).slack)
    return _status(worst >= TOL.l2_slack), float(worst), TOL.l2_slack, {"trials": trials}


def check_c10(ctx):
    worst = 0.0
    for name, entry, N, xi in _fiber_sweep(ctx, (1, 4, 8, 16), 2):
        A = assemble_fiber_shape_operator(entry.pair, xi, N)
        O = assemble_orbit_shape_operator(OrbitSpec.point(entry.pair), xi, N)
        worst = max(worst, float(np.abs(A.matrix - O.matrix).max()))
    return _status(worst <= TOL.orbit_fiber_agreement), worst, TOL.orbit_fiber_agreement, {}


CHECKS = {
    "reductive-split": check_reductive,
    "C1 transport-exactness": check_c1,
    "C2 gauge-equivariance": check_c2,
    "C3 dual-route-assembly": check_c3,
    "C4 zero-diagonals": check_c4,
    "C5 austerity-trace-I": check_c5,
    "C6a block-norm-decay": check_c6a,
    "C6b eigen-cauchy-N12-N16": check_c6b,
    "C7a affine-submersion": check_c7a,
    "C7b affine-negative-control": check_c7b,
    "C8 latitude-trace-II": check_c8,
    "C9 l2-inequality": check_c9,
    "C10 degenerate-orbit": check_c10,
}


def _context(config):
    seed = int(config.get("seed", 0))
    entries, invalid = {}, {}
    for spec in config.get("algebras", catalog.names()):
        label = spec if isinstance(spec, str) else spec.get("name", "custom")
        try:
            entry = catalog.resolve(spec, validate=False)
        except InputError as exc:
            invalid[label] = str(exc)
            continue
        rep = validate_reductive(entry.pair)
        if rep.ok:
            entries[entry.name] = entry
        else:
            invalid[entry.name] = "; ".join(rep.messages)

    def rng(tag):
        return np.random.default_rng([seed, sum(map(ord, tag))])

    return {"entries": entries, "invalid": invalid, "rng": rng,
            "n_xi": int(config.get("n_xi", 10))}


def run_verify(config=None, progress=None) -> VerificationReport:
    """Run every check once.

    ``config`` keys: ``algebras`` (names or structure-constant JSON objects,
    default the whole catalog), ``seed``, ``n_xi`` (directions per cell for
    the dual-route sweep) and ``checks`` (names to run; the others are
    reported as skipped).
    """
    config = dict(config or {})
    unknown = set(config) - {"algebras", "seed", "n_xi", "checks"}
    if unknown:
        raise InputError(f"unknown verify config field(s): {', '.join(sorted(unknown))}")
    selected = config.get("checks")
    if selected is not None:
        bad = [c for c in selected if c not in CHECKS]
        if bad:
            raise InputError(f"unknown check(s): {', '.join(bad)}")
    ctx = _context(config)
    results = []
    for name, fn in CHECKS.items():
        if selected is not None and name not in selected:
            results.append(CheckResult(name, INFO, None, None, 0.0, {"skipped": "not selected"}))
            continue
        t0 = time.perf_counter()
        status, value, tol, details = fn(ctx)
        res = CheckResult(name, status, None if value is None else float(value),
                          None if tol is None else float(tol), time.perf_counter() - t0,
                          _jsonable(details))
        results.append(res)
        if progress is not None:
            progress(res)
    cfg = {"algebras": [a if isinstance(a, str) else a.get("name", "custom")
                        for a in config.get("algebras", catalog.names())],
           "seed": int(config.get("seed", 0)), "n_xi": ctx["n_xi"]}
    return VerificationReport(results, cfg)
