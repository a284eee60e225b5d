"""Truncated Fourier model of L^2([0,1], g) and sampled group-valued paths.

A :class:`FourierPath` stores ``u(t) = a0 + sum_n b_n sin(2 n pi t) + c_n cos(2 n pi t)``
for ``n = 1..N`` with algebra-valued coefficients. All algebra-dependent
operations take the :class:`~ptmap.lie.LieAlgebra` (or just its gram matrix)
explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.special import polygamma

from .config import TOL
from .errors import InputError

__all__ = [
    "FourierPath", "GroupPath", "evaluate", "l2_inner", "l2_norm", "integral_01",
    "antiderivative", "antiderivative_path", "linear_tail_bound", "bracket_with_constant",
    "quadrature_grid", "project_to_truncation", "check_l2_inequality", "path_values",
    "fd4_derivative",
]

GL_ORDER = 8


class FourierPath:
    """Truncated Fourier element of ``V_g`` with real basis ``{1, sin 2n pi t, cos 2n pi t}``."""

    __slots__ = ("a0", "b", "c")

    def __init__(self, a0, b=None, c=None):
        a0 = np.array(a0, dtype=float)
        if a0.ndim != 1:
            raise InputError("a0 must be a coordinate vector")
        dim = a0.shape[0]
        b = np.zeros((0, dim)) if b is None else np.array(b, dtype=float).reshape(-1, dim)
        c = np.zeros_like(b) if c is None else np.array(c, dtype=float).reshape(-1, dim)
        if b.shape != c.shape:
            raise InputError("sin and cos coefficient arrays differ in shape")
        self.a0, self.b, self.c = a0, b, c

    # construction helpers
    @classmethod
    def zeros(cls, dim, N=0):
        return cls(np.zeros(dim), np.zeros((N, dim)), np.zeros((N, dim)))

    @classmethod
    def constant(cls, x, N=0):
        x = np.asarray(x, dtype=float)
        return cls(x, np.zeros((N, x.size)), np.zeros((N, x.size)))

    @classmethod
    def mode(cls, y, n, kind, N=None):
        """Pure mode ``y sin(2 n pi t)`` (kind ``"sin"``) or ``y cos(2 n pi t)``."""
        y = np.asarray(y, dtype=float)
        N = n if N is None else N
        if not 1 <= n <= N:
            raise InputError(f"mode index {n} outside 1..{N}")
        u = cls.zeros(y.size, N)
        if kind == "sin":
            u.b[n - 1] = y
        elif kind == "cos":
            u.c[n - 1] = y
        else:
            raise InputError(f"mode kind must be 'sin' or 'cos', not {kind!r}")
        return u

    @classmethod
    def random(cls, rng, dim, N, scale=1.0, decay=1.0):
        """Random path with coefficient scale ``scale / n**decay`` on mode ``n``."""
        w = scale / np.arange(1, N + 1) ** decay
        return cls(scale * rng.standard_normal(dim),
                   w[:, None] * rng.standard_normal((N, dim)),
                   w[:, None] * rng.standard_normal((N, dim)))

    @property
    def N(self):
        return self.b.shape[0]

    @property
    def dim(self):
        return self.a0.shape[0]

    def __repr__(self):
        return f"FourierPath(dim={self.dim}, N={self.N})"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.N == 0:
            return np.broadcast_to(self.a0, t.shape + (self.dim,)).copy()
        arg = 2 * np.pi * np.multiply.outer(t, np.arange(1, self.N + 1))
        return self.a0 + np.sin(arg) @ self.b + np.cos(arg) @ self.c

    def pad(self, N):
        if N < self.N:
            raise InputError(f"cannot pad a path with N={self.N} down to {N}")
        extra = np.zeros((N - self.N, self.dim))
        return FourierPath(self.a0, np.vstack([self.b, extra]), np.vstack([self.c, extra]))

    def truncate(self, N):
        return FourierPath(self.a0, self.b[:N], self.c[:N]).pad(N)

    def _align(self, other):
        if not isinstance(other, FourierPath):
            return NotImplemented
        if other.dim != self.dim:
            raise InputError("paths live in algebras of different dimension")
        N = max(self.N, other.N)
        return self.pad(N), other.pad(N)

    def __add__(self, other):
        pair = self._align(other)
        if pair is NotImplemented:
            return pair
        u, v = pair
        return FourierPath(u.a0 + v.a0, u.b + v.b, u.c + v.c)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FourierPath(-self.a0, -self.b, -self.c)

    def __mul__(self, s):
        s = float(s)
        return FourierPath(s * self.a0, s * self.b, s * self.c)

    __rmul__ = __mul__

    def to_vector(self):
        """Coefficients ordered ``[a0, b_1, c_1, b_2, c_2, ...]``."""
        modes = np.stack([self.b, self.c], axis=1).reshape(-1)
        return np.concatenate([self.a0, modes])

    @classmethod
    def from_vector(cls, v, dim):
        v = np.asarray(v, dtype=float)
        if (v.size - dim) % (2 * dim):
            raise InputError("coefficient vector length does not match dim")
        modes = v[dim:].reshape(-1, 2, dim)
        return cls(v[:dim], modes[:, 0], modes[:, 1])

    def to_json(self):
        return {"N": self.N, "a0": self.a0.tolist(),
                "modes": [{"b": b.tolist(), "c": c.tolist()} for b, c in zip(self.b, self.c)]}

    @classmethod
    def from_json(cls, obj):
        try:
            a0 = obj["a0"]
            modes = obj.get("modes", [])
            N = int(obj.get("N", len(modes)))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed path JSON: {exc}") from exc
        if len(modes) != N:
            raise InputError(f"path JSON declares N={N} but lists {len(modes)} modes")
        dim = len(a0)
        b = [m.get("b", [0.0] * dim) for m in modes]
        c = [m.get("c", [0.0] * dim) for m in modes]
        return cls(a0, np.reshape(b, (N, dim)), np.reshape(c, (N, dim)))


def evaluate(u: FourierPath, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise InputError("evaluate: t must lie in [0, 1]")
    return u(t)


def path_values(u, t):
    """Values of a FourierPath or of any callable path at the times ``t``."""
    vals = np.asarray(u(np.asarray(t, dtype=float)), dtype=float)
    if vals.shape[:-1] != np.shape(t):
        raise InputError(f"path returned shape {vals.shape} for {np.shape(t)} times")
    return vals


def _gram(gram, dim):
    if gram is None:
        return np.eye(dim)
    return getattr(gram, "gram", gram)


def l2_inner(u: FourierPath, v: FourierPath, gram=None):
    """L^2 inner product by Parseval; ``gram`` may be a matrix or a LieAlgebra."""
    u, v = u._align(v)
    G = _gram(gram, u.dim)
    modes = np.einsum("ni,ij,nj->", u.b, G, v.b) + np.einsum("ni,ij,nj->", u.c, G, v.c)
    return float(u.a0 @ G @ v.a0 + 0.5 * modes)


def l2_norm(u: FourierPath, gram=None):
    return np.sqrt(l2_inner(u, u, gram))


def integral_01(u: FourierPath):
    return u.a0.copy()


def antiderivative(u: FourierPath, t):
    """Closed form of ``int_0^t u``."""
    t = np.asarray(t, dtype=float)
    out = np.multiply.outer(t, u.a0)
    if u.N:
        k = 2 * np.pi * np.arange(1, u.N + 1)
        arg = np.multiply.outer(t, k)
        out = out + ((1 - np.cos(arg)) / k) @ u.b + (np.sin(arg) / k) @ u.c
    return out


def antiderivative_path(u: FourierPath, N=None):
    """``int_0^t u`` as a FourierPath of truncation ``N``.

    The non-periodic part ``a0 t`` is expanded as ``a0 (1/2 - sum_n sin(2 n pi t)/(n pi))``
    and modes above ``N`` are dropped (see :func:`linear_tail_bound`).
    """
    N = u.N if N is None else N
    if N < u.N:
        raise InputError("antiderivative_path: N below the input truncation")
    u = u.pad(N)
    n = np.arange(1, N + 1)[:, None]
    k = 2 * np.pi * n
    a0 = 0.5 * u.a0 + np.sum(u.b / k, axis=0)
    b = u.c / k - u.a0[None, :] / (n * np.pi)
    c = -u.b / k
    return FourierPath(a0, b, c)


def linear_tail_bound(N):
    """Upper bound ``(sum_{n>N} 1/(n pi)^2)^{1/2}`` on the dropped tail of ``t - 1/2``."""
    return float(np.sqrt(polygamma(1, N + 1)) / np.pi)


def bracket_with_constant(algebra, u: FourierPath, xi):
    """Pointwise ``[u(t), xi]``; mode ``n`` maps to mode ``n``."""
    xi = np.asarray(xi, dtype=float)
    return FourierPath(algebra.bracket(u.a0, xi), algebra.bracket(u.b, xi),
                       algebra.bracket(u.c, xi))


def quadrature_grid(panels, order=GL_ORDER):
    """Composite Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.arange(panels) / panels
    nodes = (edges[:, None] + (x[None, :] + 1) / (2 * panels)).ravel()
    weights = np.tile(w / (2 * panels), panels)
    return nodes, weights


def project_to_truncation(values, N, order=GL_ORDER):
    """Fourier coefficients of samples taken on ``quadrature_grid(panels)``.

    ``values`` has shape ``(panels * order, dim)``; at least ``4N + 4`` panels
    are required.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] % order:
        raise InputError("values must have shape (panels * order, dim)")
    panels = values.shape[0] // order
    if panels < 4 * N + 4:
        raise InputError(f"project_to_truncation needs at least {4 * N + 4} panels, got {panels}")
    t, w = quadrature_grid(panels, order)
    a0 = w @ values
    if N == 0:
        return FourierPath(a0)
    arg = 2 * np.pi * np.multiply.outer(np.arange(1, N + 1), t)
    b = 2 * (np.sin(arg) * w) @ values
    c = 2 * (np.cos(arg) * w) @ values
    return FourierPath(a0, b, c)


@dataclass(frozen=True)
class L2InequalityReport:
    t: float
    lhs: float
    bound: float

    @property
    def slack(self):
        return self.bound - self.lhs

    @property
    def ok(self):
        return self.slack >= TOL.l2_slack


def check_l2_inequality(u: FourierPath, t, gram=None):
    """Compare ``|int_0^t u|^2`` with ``t * int_0^1 |u|^2``."""
    if not 0 <= t <= 1:
        raise InputError("t must lie in [0, 1]")
    G = _gram(gram, u.dim)
    F = antiderivative(u, t)
    return L2InequalityReport(float(t), float(F @ G @ F), float(t * l2_inner(u, u, G)))


def fd4_derivative(samples, h):
    """Fourth-order finite-difference derivative along axis 0 of a uniform grid."""
    f = np.asarray(samples, dtype=float)
    if f.shape[0] < 5:
        raise InputError("fourth-order differences need at least 5 samples")
    d = np.empty_like(f)
    d[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


class GroupPath:
    """Group-valued path sampled on the uniform grid ``t_j = j / M``.

    Off-grid values come from cubic Hermite interpolation, using the stored
    derivatives when the producer knows them exactly (ODE solutions) and
    fourth-order differences otherwise.
    """

    def __init__(self, samples, derivatives=None, continuity=None):
        samples = np.array(samples, dtype=float)
        if samples.ndim != 3 or samples.shape[1] != samples.shape[2] or samples.shape[0] < 2:
            raise InputError("samples must have shape (M+1, n, n) with M >= 1")
        dets = np.linalg.det(samples)
        if np.any(dets == 0) or not np.all(np.isfinite(dets)):
            raise InputError("GroupPath samples must be invertible")
        self.samples = samples
        self.derivatives = None if derivatives is None else np.array(derivatives, dtype=float)
        if continuity is not None and not self.is_continuous(continuity):
            raise InputError("consecutive samples jump by more than continuity / M")
        self._spline = None

    @property
    def M(self):
        return self.samples.shape[0] - 1

    @property
    def times(self):
        return np.linspace(0.0, 1.0, self.M + 1)

    def __len__(self):
        return self.samples.shape[0]

    def is_continuous(self, C):
        jumps = np.linalg.norm(np.diff(self.samples, axis=0), ord=2, axis=(1, 2))
        return bool(np.all(jumps <= C / self.M))

    def fd_derivative_samples(self):
        return fd4_derivative(self.samples, 1.0 / self.M)

    def derivative_samples(self):
        return self.fd_derivative_samples() if self.derivatives is None else self.derivatives

    @property
    def spline(self):
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.times, self.samples,
                                              self.derivative_samples(), axis=0)
        return self._spline

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-14) or np.any(t > 1 + 1e-14):
            raise InputError("GroupPath evaluated outside [0, 1]")
        return self.spline(np.clip(t, 0.0, 1.0))

    def derivative(self, t):
        """Derivative at ``t`` from a cubic spline through the derivative samples."""
        return CubicSpline(self.times, self.derivative_samples(), axis=0)(t)

    @property
    def start(self):
        return self.samples[0]

    @property
    def end(self):
        return self.samples[-1]
