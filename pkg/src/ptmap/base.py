"""Geometry of ``N = G/K`` near the origin coset.

Chart points and tangent vectors are 𝔤-coordinate vectors lying in 𝔭. The
chart is ``w -> exp(w) K`` on a ball of the configured radius; the invariant
frame ``Y^#`` is the left translate of ``Y`` along the chart section
``exp(w)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import TOL
from .errors import DomainError, InputError, NumericalError
from .lie import ConnectionKind, ReductivePair, alpha

__all__ = [
    "Chart", "chart_to_manifold", "manifold_to_chart", "coset_distance", "frame_sharp", "frame_matrix",
    "frame_field", "covariant_derivative_at_origin", "fundamental_field",
    "fundamental_tensor_pi", "chart_lie_bracket_at_origin", "geodesic_acceleration",
    "PolynomialField", "OrbitSpec", "central_difference",
]


def central_difference(f, h, richardson=True):
    """``f'(0)`` by central differences, optionally with one Richardson step."""
    d1 = (np.asarray(f(h)) - np.asarray(f(-h))) / (2 * h)
    if not richardson:
        return d1
    d2 = (np.asarray(f(h / 2)) - np.asarray(f(-h / 2))) / h
    return (4 * d2 - d1) / 3


@dataclass(frozen=True)
class Chart:
    """Exponential chart ``w -> exp(w) K`` on the ball ``|w| <= radius`` in 𝔭."""

    pair: ReductivePair
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("chart radius must be positive")

    @classmethod
    def from_entry(cls, entry):
        return cls(entry.pair, entry.chart_radius)

    @property
    def algebra(self):
        return self.pair.algebra

    def contains(self, w, slack=1e-12):
        return bool(self.algebra.norm(w) <= self.radius * (1 + slack))

    def tangent_map(self, w):
        """``T(w) = proj_p D(w)`` restricted to 𝔭, in 𝔭-coordinates.

        ``D(w)`` is the left-trivialised derivative of ``exp``; the chart
        velocity of a curve whose left-trivialised velocity at ``exp(w)`` has
        𝔭-part ``v`` solves ``T(w) dw = v``.
        """
        pair = self.pair
        D = self.algebra.dexp_series(w)
        return pair._p_dual @ D @ pair.p_basis


def chart_to_manifold(chart: Chart, w):
    """Coset representative ``exp(w)`` of the chart point ``w``."""
    w = chart.pair.require_p(w, "w")
    if not chart.contains(w):
        raise DomainError(f"|w| = {chart.algebra.norm(w):.4g} exceeds chart radius {chart.radius}")
    return chart.algebra.exp(w)


def _initial_log(alg, g):
    """Starting guess for the coset solve.

    The series logarithm only covers ``rho(g - I) < 1``; cosets whose
    representative carries a large 𝔨-factor fall outside it, so the principal
    logarithm from scipy is used as a fallback.
    """
    try:
        return alg.log(g)
    except DomainError:
        L = scipy.linalg.logm(g)
        if np.iscomplexobj(L):
            if np.abs(L.imag).max() > 1e-10 * max(1.0, np.abs(L).max()):
                raise DomainError("coset representative has no real principal logarithm") from None
            L = L.real
        return alg.coords(L)


def manifold_to_chart(chart: Chart, g, *, maxiter=None, return_k=False):
    """Chart coordinates of the coset ``g K``.

    Solves ``exp(w) exp(kappa) = g`` for ``w`` in 𝔭 and ``kappa`` in 𝔨 by Newton
    iteration on ``log(g^-1 exp(w) exp(kappa)) = 0``, started from the 𝔭/𝔨
    split of ``log g``.

    Raises
    ------
    DomainError
        If ``log g`` does not exist or the solution lies outside the chart.
    NumericalError
        If Newton does not reach the residual tolerance.
    """
    pair, alg = chart.pair, chart.algebra
    maxiter = TOL.chart_newton_maxiter if maxiter is None else maxiter
    g = np.asarray(g, dtype=float)
    ginv = np.linalg.inv(g)
    y = _initial_log(alg, g)
    Pp, Pk = pair.proj_p, pair.proj_k

    def residual(y):
        w, kappa = Pp @ y, Pk @ y
        return alg.log(ginv @ alg.exp(w) @ alg.exp(kappa))

    G = residual(y)
    for _ in range(maxiter):
        scale = 1.0 + np.abs(y).max()
        if np.abs(G).max() <= 1e-15 * scale:
            break
        w, kappa = Pp @ y, Pk @ y
        J = (alg.Ad(alg.exp(-kappa)) @ alg.dexp_series(w) @ Pp
             + alg.dexp_series(kappa) @ Pk)
        step = np.linalg.solve(J, -G)
        y = y + step
        G = residual(y)
        if np.abs(step).max() <= 1e-16 * scale:
            break
    res = np.abs(G).max()
    if not res <= TOL.chart_newton_residual:
        raise NumericalError(f"coset logarithm did not converge (residual {res:.3g})")
    w = Pp @ y
    if not chart.contains(w):
        raise DomainError(f"coset lies outside the chart (|w| = {alg.norm(w):.4g})")
    return (w, Pk @ y) if return_k else w


def coset_distance(pair: ReductivePair, g1, g2):
    """Size of the 𝔭-part of ``log(g2^-1 g1)``; zero iff ``g1 K = g2 K`` (near the identity)."""
    y = pair.algebra.log(np.linalg.solve(g2, g1))
    return float(pair.algebra.norm(pair.p_part(y)))


def frame_matrix(chart: Chart, w):
    """Columns are the 𝔭-coordinates of ``P_i^#`` at ``w`` (``P_i`` the 𝔭 basis)."""
    return np.linalg.inv(chart.tangent_map(w))


def frame_sharp(chart: Chart, Y, w, method="dexp"):
    """Chart components at ``w`` of the frame field generated by ``Y`` in 𝔭.

    ``method="dexp"`` inverts the tangent map of the chart section;
    ``method="fd"`` differentiates ``manifold_to_chart(exp(w) exp(sY))``.
    """
    pair = chart.pair
    Y = pair.require_p(Y, "Y")
    w = pair.require_p(w, "w")
    if method == "dexp":
        return pair.from_p_coords(np.linalg.solve(chart.tangent_map(w), pair.p_coords(Y)))
    if method == "fd":
        alg = chart.algebra
        a = alg.exp(w)
        h = TOL.frame_fd_step
        return central_difference(lambda s: manifold_to_chart(chart, a @ alg.exp(s * Y)), h,
                                  richardson=False)
    raise InputError(f"unknown method {method!r}")


def frame_field(chart: Chart, Y):
    """The vector field ``w -> Y^#(w)`` on the chart."""
    Y = chart.pair.require_p(Y, "Y")
    return lambda w: frame_sharp(chart, Y, w)


def covariant_derivative_at_origin(chart: Chart, kind, X, Z, *, step=None):
    """``(nabla_X Z)(eK)`` for a vector field ``Z`` given in chart components.

    ``Z`` is expanded in the frame ``P_i^#``; its coefficients
    ``phi(w) = T(w) Z(w)`` are differentiated along ``X`` by central
    differences with one Richardson step.
    """
    pair = chart.pair
    kind = ConnectionKind.parse(kind)
    X = pair.require_p(X, "X")
    h = TOL.fd_step if step is None else step

    def phi(s):
        w = s * X
        return chart.tangent_map(w) @ pair.p_coords(np.asarray(Z(w), dtype=float))

    phi0 = phi(0.0)
    dphi = central_difference(phi, h)
    out = pair.from_p_coords(dphi)
    for i in range(pair.dim_p):
        out = out + phi0[i] * alpha(pair, kind, X, pair.p_basis[:, i])
    return out


def fundamental_field(chart: Chart, X, w, method="dexp"):
    """Chart components of ``X*`` at ``w``: velocity of ``exp(tX) exp(w) K``."""
    pair, alg = chart.pair, chart.algebra
    X = alg._check(X)
    w = pair.require_p(w, "w")
    if method == "dexp":
        v = pair.p_coords(pair.p_part(alg.Ad(alg.exp(-w)) @ X))
        return pair.from_p_coords(np.linalg.solve(chart.tangent_map(w), v))
    if method == "fd":
        a = alg.exp(w)
        return central_difference(lambda s: manifold_to_chart(chart, alg.exp(s * X) @ a),
                                  TOL.fd_step)
    raise InputError(f"unknown method {method!r}")


def fundamental_tensor_pi(pair: ReductivePair, X, Y):
    """O'Neill tensor of ``G -> G/K`` on horizontal vectors: half the 𝔨-part of ``[X, Y]``."""
    X = pair.require_p(X, "X")
    Y = pair.require_p(Y, "Y")
    return 0.5 * pair.k_part(pair.algebra.bracket(X, Y))


def chart_lie_bracket_at_origin(chart: Chart, A, B, *, step=None):
    """Lie bracket ``[A, B] = D_A B - D_B A`` of chart vector fields at ``w = 0``."""
    h = TOL.fd_step if step is None else step
    a0 = np.asarray(A(np.zeros(chart.algebra.dim)))
    b0 = np.asarray(B(np.zeros(chart.algebra.dim)))
    dB = central_difference(lambda s: np.asarray(B(s * a0)), h)
    dA = central_difference(lambda s: np.asarray(A(s * b0)), h)
    return dB - dA


def geodesic_acceleration(chart: Chart, kind, X):
    """Covariant acceleration at ``t = 0`` of ``t -> exp(tX) K``.

    The velocity of this curve is the frame field ``X^#`` along it, so the
    acceleration is ``nabla_X X^#`` at the origin. Returns the acceleration and
    the mismatch between the finite-difference velocity of the curve and
    ``X^#`` at ``t = 0.1`` (which checks the extension).
    """
    X = chart.pair.require_p(X, "X")
    acc = covariant_derivative_at_origin(chart, kind, X, frame_field(chart, X))
    alg = chart.algebra
    t0 = 0.1
    vel = central_difference(lambda s: manifold_to_chart(chart, alg.exp((t0 + s) * X)),
                             TOL.fd_step)
    mismatch = np.abs(vel - frame_sharp(chart, X, manifold_to_chart(chart, alg.exp(t0 * X)))).max()
    return acc, mismatch


class PolynomialField:
    """Quadratic chart vector field ``Z(w) = c + L w + Q(w, w)`` with values in 𝔭.

    Coefficients act on 𝔭-coordinates: ``c`` has shape ``(p,)``, ``L`` is
    ``(p, p)`` and ``Q`` is ``(p, p, p)``.
    """

    def __init__(self, pair: ReductivePair, c, L=None, Q=None):
        p = pair.dim_p
        self.pair = pair
        self.c = np.asarray(c, dtype=float).reshape(p)
        self.L = np.zeros((p, p)) if L is None else np.asarray(L, dtype=float)
        self.Q = np.zeros((p, p, p)) if Q is None else np.asarray(Q, dtype=float)

    @classmethod
    def random(cls, pair, rng, scale=1.0):
        p = pair.dim_p
        return cls(pair, scale * rng.standard_normal(p), scale * rng.standard_normal((p, p)),
                   scale * rng.standard_normal((p, p, p)))

    def __call__(self, w):
        x = self.pair.p_coords(w)
        v = self.c + self.L @ x + np.einsum("ijk,j,k->i", self.Q, x, x)
        return self.pair.from_p_coords(v)


def _orthonormal_columns(R, M, rtol=1e-10):
    """Gram-orthonormal basis (columns) of the span of ``M``; ``R`` with gram = R^T R."""
    if M.shape[1] == 0:
        return M
    U, s, _ = np.linalg.svd(R @ M, full_matrices=False)
    rank = int(np.sum(s > rtol * max(1.0, s[0])))
    return np.linalg.solve(R, U[:, :rank])


def _null_space(M, rtol=1e-10):
    if M.size == 0:
        return np.eye(M.shape[1])
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > rtol * max(1.0, s[0]))) if s.size else 0
    return Vt[rank:].T


class OrbitSpec:
    """Orbit ``M = H . eK`` of a connected subgroup ``H`` with a transversal ``W``.

    ``h_basis`` and ``transversal_basis`` are given as rows of 𝔤-coordinates.
    """

    def __init__(self, pair: ReductivePair, h_basis, transversal_basis, *, validate=True):
        alg = pair.algebra
        self.pair = pair
        self.h_basis = np.array(h_basis, dtype=float).reshape(-1, alg.dim)
        self.transversal_basis = np.array(transversal_basis, dtype=float).reshape(-1, alg.dim)
        R = alg._gram_half
        self.tangent_basis = _orthonormal_columns(R, pair.proj_p @ self.h_basis.T).T
        Hb, Kb = self.h_basis.T, pair.k_basis
        ker = _null_space(np.hstack([Hb, -Kb]))
        self.hk_basis = _orthonormal_columns(np.eye(alg.dim), Hb @ ker[:Hb.shape[1]]).T
        if validate:
            self.validate()

    @property
    def dim_M(self):
        return self.tangent_basis.shape[0]

    def violations(self):
        """Measured violations of the orbit invariants (all should be small)."""
        pair, alg = self.pair, self.pair.algebra
        Hb = self.h_basis
        out = {}
        if len(Hb):
            br = alg.bracket(Hb[:, None, :], Hb[None, :, :]).reshape(-1, alg.dim).T
            coef, *_ = np.linalg.lstsq(Hb.T, br, rcond=None)
            out["subalgebra"] = float(np.abs(Hb.T @ coef - br).max())
        else:
            out["subalgebra"] = 0.0
        Wb = self.transversal_basis
        out["transversal_in_p"] = float(np.abs(pair.k_part(Wb)).max(initial=0.0))
        stacked = np.vstack([self.tangent_basis, Wb]).T
        rank = np.linalg.matrix_rank(stacked, tol=1e-10) if stacked.size else 0
        out["rank_deficit"] = float(pair.dim_p - rank) + float(stacked.shape[1] - rank)
        if len(self.hk_basis) and len(Wb):
            br = alg.bracket(self.hk_basis[:, None, :], Wb[None, :, :]).reshape(-1, alg.dim).T
            coef, *_ = np.linalg.lstsq(Wb.T, br, rcond=None)
            out["equivariance"] = float(np.abs(Wb.T @ coef - br).max())
        else:
            out["equivariance"] = 0.0
        return out

    def validate(self):
        v = self.violations()
        if v["subalgebra"] > TOL.orbit_subalgebra:
            raise InputError(f"h is not a subalgebra (violation {v['subalgebra']:.3g})")
        if v["transversal_in_p"] > TOL.reductive:
            raise InputError("transversal basis is not contained in p")
        if v["rank_deficit"] != 0:
            raise InputError("proj_p(h) and the transversal basis do not split p")
        if v["equivariance"] > TOL.orbit_equivariance:
            raise InputError(f"[h ∩ k, W] is not contained in W (violation {v['equivariance']:.3g}); "
                             "non-equivariant transversals are unsupported")
        return v

    def to_json(self):
        return {"h_basis": self.h_basis.tolist(),
                "transversal_basis": self.transversal_basis.tolist()}

    @classmethod
    def from_json(cls, pair, obj):
        try:
            return cls(pair, obj.get("h_basis", []), obj["transversal_basis"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed orbit JSON: {exc}") from exc

    @classmethod
    def point(cls, pair):
        """The degenerate orbit of the trivial subgroup: a single point with W = 𝔭."""
        return cls(pair, np.zeros((0, pair.algebra.dim)), pair.p_basis.T)
