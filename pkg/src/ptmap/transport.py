"""The transport map ``Phi(u) = g_u(1)``, the gauge action and the affine-submersion check.

``g_u`` solves ``g' = g u(t)``, ``g(0) = I``. Two integrators are available:

``rkmk4``
    a fourth-order commutator-free Lie-group method (two exponentials per
    step) that stays on the group without projection;
``rk4-reproject``
    classical RK4 in the ambient matrix space followed by re-projection onto
    the group's defining relations, kept as an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import Chart, central_difference, covariant_derivative_at_origin, manifold_to_chart
from .config import TOL
from .errors import DomainError, InputError, NumericalError
from .lie import ConnectionKind, LieAlgebra, ReductivePair, expm
from .paths import (FourierPath, GroupPath, integral_01, path_values, project_to_truncation,
                    quadrature_grid)

__all__ = [
    "SolverConfig", "TransportResult", "solve_transport", "solve_frame", "gauge_action",
    "gauge_transform", "differential_phiN_at_0", "differential_phiN_fd",
    "vertical_horizontal_split_at_0", "check_affine_submersion", "AffineReport",
    "observed_order", "METHODS",
]

METHODS = ("rkmk4", "rk4-reproject")


@dataclass(frozen=True)
class SolverConfig:
    steps: int = 512
    method: str = "rkmk4"
    tolerance: float = 1e-6

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 16:
            raise InputError(f"steps must be an integer >= 16, got {self.steps}")
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.tolerance > 0:
            raise InputError("tolerance must be positive")

    def with_steps(self, steps):
        return SolverConfig(steps, self.method, self.tolerance)


@dataclass
class TransportResult:
    g_u: GroupPath
    endpoint: np.ndarray
    coset_chart: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def log_derivative_residual(self, algebra: LieAlgebra, u):
        """Max deviation of ``g^-1 g'`` from ``u`` at the grid midpoints."""
        g = self.g_u
        mid = (np.arange(g.M) + 0.5) / g.M
        G = g(mid)
        dG = g.spline.derivative()(mid)
        logder = algebra.coords(np.linalg.solve(G, dG))
        return float(np.abs(logder - path_values(u, mid)).max())


def _stage_values(u, steps):
    """Values of ``u`` on the half-step grid ``j / (2 steps)``.

    ``u`` may be a FourierPath, a callable path, or an array already sampled
    on that grid.
    """
    if isinstance(u, np.ndarray) and u.ndim == 2:
        if u.shape[0] != 2 * steps + 1:
            raise InputError(f"sampled path needs {2 * steps + 1} rows, got {u.shape[0]}")
        return u
    return path_values(u, np.linspace(0.0, 1.0, 2 * steps + 1))


def _cf4_exponentials(A, h):
    """The two exponentials of each commutator-free step, for stage matrices ``A``."""
    A0, Ah, A1 = A[0:-1:2], A[1::2], A[2::2]
    early = expm(h / 12 * (3 * A0 + 4 * Ah - A1))
    late = expm(h / 12 * (-A0 + 4 * Ah + 3 * A1))
    return early, late


def _check_blowup(g, t):
    nrm = np.abs(g).max()
    if not np.isfinite(nrm) or nrm > TOL.blowup_norm:
        raise NumericalError(f"transport blew up near t = {t:.4g} (|g| = {nrm:.3g})")


def _integrate(algebra: LieAlgebra, A, steps, method, g0, backward=False):
    """Solve ``g' = g A(t)`` (or ``z' = A z`` when ``backward``) on a uniform grid.

    ``A`` holds the stage matrices at ``j / (2 steps)`` in integration order.
    """
    h = 1.0 / steps
    n = g0.shape[0]
    out = np.empty((steps + 1, n, n))
    out[0] = g0
    g = g0
    if method == "rkmk4":
        early, late = _cf4_exponentials(A, h)
        for j in range(steps):
            g = late[j] @ early[j] @ g if backward else g @ early[j] @ late[j]
            out[j + 1] = g
            if j % 64 == 0:
                _check_blowup(g, (j + 1) * h)
    else:
        reproject = algebra.group_relation is not None
        for j in range(steps):
            A0, Ah, A1 = A[2 * j], A[2 * j + 1], A[2 * j + 2]
            if backward:
                k1 = A0 @ g
                k2 = Ah @ (g + 0.5 * h * k1)
                k3 = Ah @ (g + 0.5 * h * k2)
                k4 = A1 @ (g + h * k3)
            else:
                k1 = g @ A0
                k2 = (g + 0.5 * h * k1) @ Ah
                k3 = (g + 0.5 * h * k2) @ Ah
                k4 = (g + h * k3) @ A1
            g = g + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if reproject:
                g = algebra.reproject(g)
            out[j + 1] = g
            if j % 64 == 0:
                _check_blowup(g, (j + 1) * h)
    _check_blowup(g, 1.0)
    return out


def solve_transport(algebra: LieAlgebra, u, cfg: SolverConfig | None = None,
                    chart: Chart | None = None) -> TransportResult:
    """Solve ``g' = g u(t)``, ``g(0) = I`` and return ``g_u`` with ``Phi(u) = g_u(1)``.

    When a chart is given, ``coset_chart`` holds the chart coordinates of
    ``Phi_N(u)`` (``None`` if the coset lies outside the chart).
    """
    cfg = cfg or SolverConfig()
    U = _stage_values(u, cfg.steps)
    A = algebra.matrix(U)
    samples = _integrate(algebra, A, cfg.steps, cfg.method, np.eye(algebra.size))
    derivs = samples @ A[::2]
    res = TransportResult(GroupPath(samples, derivs), samples[-1].copy())
    if chart is not None:
        try:
            res.coset_chart = manifold_to_chart(chart, res.endpoint)
        except (DomainError, NumericalError):
            res.coset_chart = None
    return res


def solve_frame(algebra: LieAlgebra, u, cfg: SolverConfig | None = None,
                terminal=None) -> GroupPath:
    """Solve ``g' = -u g`` with ``g(1) = terminal`` (identity by default).

    The result satisfies ``g * 0 = u`` under the gauge action, so ``u`` lies
    on the orbit of the zero path. Exact derivatives ``-u g`` are stored.
    """
    cfg = cfg or SolverConfig()
    S = cfg.steps
    U = _stage_values(u, S)
    A = algebra.matrix(U)
    g1 = np.eye(algebra.size) if terminal is None else np.asarray(terminal, dtype=float)
    # z(tau) = g(1 - tau) solves z' = u(1 - tau) z.
    z = _integrate(algebra, A[::-1], S, cfg.method, g1, backward=True)
    samples = z[::-1]
    derivs = -A[::2] @ samples
    return GroupPath(samples, derivs)


def _gauge_values(algebra, g: GroupPath, u, t, derivative="fd"):
    if derivative == "fd":
        g = GroupPath(g.samples, g.fd_derivative_samples())
    elif derivative != "stored":
        raise InputError(f"derivative must be 'fd' or 'stored', not {derivative!r}")
    G = g(t)
    dG = g.spline.derivative()(t)
    AdG = algebra.Ad(G)
    logder = algebra.coords(dG @ np.linalg.inv(G))
    return np.einsum("tij,tj->ti", AdG, path_values(u, t)) - logder


def gauge_action(algebra: LieAlgebra, g: GroupPath, u, N_out) -> FourierPath:
    """``g * u = Ad(g) u - g' g^-1`` projected to truncation ``N_out``.

    ``g'`` comes from fourth-order differences on the sample grid; values at
    the quadrature nodes use cubic Hermite interpolation of the samples.
    The projection is spectrally accurate only when ``g * u`` is smooth and
    periodic (for instance ``g(0) = g(1)`` and ``u`` a trigonometric
    polynomial); otherwise the sin/cos coefficients decay like ``1/n``.
    """
    panels = 4 * N_out + 4
    if g.M < panels:
        raise InputError(f"gauge element has {g.M} intervals; truncation {N_out} needs >= {panels}")
    nodes, _ = quadrature_grid(panels)
    return project_to_truncation(_gauge_values(algebra, g, u, nodes), N_out)


def gauge_transform(algebra: LieAlgebra, g: GroupPath, u, derivative="fd"):
    """Pointwise ``g * u`` as a callable path, without Fourier truncation.

    ``derivative="fd"`` differentiates the samples of ``g`` to fourth order;
    ``"stored"`` uses the derivatives attached to ``g`` (exact for ODE output).
    At the sample times the values involve no interpolation error.
    """
    if derivative == "stored" and g.derivatives is None:
        raise InputError("gauge element carries no stored derivatives")
    return lambda t: _gauge_values(algebra, g, u, np.asarray(t, dtype=float), derivative)


def differential_phiN_at_0(pair: ReductivePair, X: FourierPath):
    """``dPhi_N`` at the zero path: the 𝔭-part of the mean of ``X``."""
    return pair.p_part(integral_01(X))


def differential_phiN_fd(chart: Chart, u0, v, cfg: SolverConfig | None = None, step=None):
    """Central difference of ``s -> manifold_to_chart(Phi(u0 + s v))`` at ``s = 0``."""
    alg = chart.algebra
    cfg = cfg or SolverConfig()
    h = TOL.differential_fd_step if step is None else step
    U0, V = _stage_values(u0, cfg.steps), _stage_values(v, cfg.steps)

    def f(s):
        return manifold_to_chart(chart, solve_transport(alg, U0 + s * V, cfg).endpoint)

    return central_difference(f, h, richardson=False)


def vertical_horizontal_split_at_0(pair: ReductivePair, X: FourierPath):
    """Split ``X`` into its horizontal part (constant in 𝔭) and its vertical remainder."""
    hor = pair.p_part(X.a0)
    return hor, X - FourierPath.constant(hor, X.N)


@dataclass
class AffineReport:
    residual: float
    lhs: np.ndarray
    rhs: np.ndarray
    kind: str
    h: float

    def to_json(self):
        return {"residual": self.residual, "lhs": self.lhs.tolist(), "rhs": self.rhs.tolist(),
                "kind": self.kind, "h": self.h}


def _simpson_weights(S):
    if S % 2:
        raise InputError("Simpson's rule needs an even number of intervals")
    w = np.ones(S + 1)
    w[1:-1:2], w[2:-1:2] = 4, 2
    return w / (3 * S)


def _horizontal_lift_coefficients(chart: Chart, s, X, Z, cfg: SolverConfig, eps):
    """Coefficients ``c`` of the horizontal lift ``sum_i c_i Ad(g_s) P_i`` at ``u_s = s X``.

    Returns the coefficients and the frame samples of ``g_s`` on the
    half-step grid of ``cfg``.
    """
    pair, alg = chart.pair, chart.algebra
    S = cfg.steps
    fine = cfg.with_steps(2 * S)
    Us = np.broadcast_to(s * X, (2 * S + 1, alg.dim)).copy()
    # the frame grid (2S intervals) coincides with the transport stage grid
    g = solve_frame(alg, np.broadcast_to(s * X, (4 * S + 1, alg.dim)), fine)
    AdG = alg.Ad(g.samples)                                 # (2S+1, dim, dim)
    dirs = np.einsum("tij,jk->kti", AdG, pair.p_basis)      # (p, 2S+1, dim)
    w_s = manifold_to_chart(chart, solve_transport(alg, Us, cfg).endpoint)
    D = np.empty((pair.dim_p, pair.dim_p))
    for i in range(pair.dim_p):
        def f(e, V=dirs[i]):
            return pair.p_coords(manifold_to_chart(chart, solve_transport(alg, Us + e * V, cfg).endpoint))
        D[:, i] = central_difference(f, eps)
    target = pair.p_coords(np.asarray(Z(w_s), dtype=float))
    return np.linalg.solve(D, target), dirs


def check_affine_submersion(chart: Chart, Z, X, h=1e-4, kind=ConnectionKind.NATURAL,
                            cfg: SolverConfig | None = None, eps=3e-2) -> AffineReport:
    """Compare ``(D_X Zhat)^H`` at the zero path with ``nabla_X Z`` at ``eK``.

    ``Zhat`` is the horizontal lift of the chart field ``Z``: at ``u`` it is
    the element of ``Ad(g_u) 𝔭`` (``u = g_u * 0``) that the differential of
    ``Phi_N`` (by finite differences with step ``eps``) maps to ``Z``. The
    lift is differentiated along the segment ``s X`` by central differences
    with step ``h`` and projected to constant 𝔭-paths.

    Round-off in ``Phi`` is amplified by roughly ``1 / (eps h)``; the default
    ``eps`` (with one Richardson step) keeps that below the O(h^2) truncation.
    """
    pair = chart.pair
    X = pair.require_p(X, "X")
    kind = ConnectionKind.parse(kind)
    cfg = cfg or SolverConfig(steps=128)
    for s in (-h, h):
        if not chart.contains(s * X):
            raise DomainError("segment leaves the chart")
    wts = _simpson_weights(2 * cfg.steps)
    lifts = []
    for s in (h, -h):
        c, dirs = _horizontal_lift_coefficients(chart, s, X, Z, cfg, eps)
        path = np.einsum("i,itd->td", c, dirs)
        lifts.append(pair.p_part(wts @ path))
    lhs = (lifts[0] - lifts[1]) / (2 * h)
    rhs = covariant_derivative_at_origin(chart, kind, X, Z)
    return AffineReport(float(np.abs(lhs - rhs).max()), lhs, rhs, kind.value, h)


def observed_order(algebra: LieAlgebra, u, steps=(64, 128, 256, 512), method="rkmk4",
                   reference_steps=None):
    """Observed convergence order of the endpoint error against a fine reference solve."""
    ref_steps = reference_steps or 8 * max(steps)
    ref = solve_transport(algebra, u, SolverConfig(ref_steps, method)).endpoint
    errs = np.array([np.abs(solve_transport(algebra, u, SolverConfig(S, method)).endpoint - ref).max()
                     for S in steps])
    orders = np.log2(errs[:-1] / errs[1:])
    return errs, orders
