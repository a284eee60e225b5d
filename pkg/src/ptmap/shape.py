"""Shape operators of fibers and lifted orbits in a compatible basis, and their spectra.

A tangent vector ``v`` at the zero path is written as ``v = Z'`` with ``Z(0)``
in 𝔥 and ``Z(1)`` in 𝔨 (𝔥 = 0 for fibers). The shape operator in the
direction of the constant transversal ``xi`` maps ``v`` to the tangential
part of the path ``[Z, xi]``. For fibers the tangential part drops the
constant 𝔭-component, which gives the closed forms

* ``x`` in 𝔨 (constant): ``(t - 1/2) [x, xi]``
* ``y sin 2n pi t``: ``([y, xi]_k - [y, xi] cos 2n pi t) / (2 n pi)``
* ``y cos 2n pi t``: ``[y, xi] sin 2n pi t / (2 n pi)``

with ``t - 1/2 = -sum_n sin(2 n pi t) / (n pi)`` truncated at ``N``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .base import OrbitSpec
from .config import TOL
from .errors import ConsistencyError, InputError, NumericalError
from .lie import ReductivePair
from .paths import (FourierPath, antiderivative_path, bracket_with_constant, linear_tail_bound)

__all__ = [
    "CompatibleBasis", "ShapeOperatorMatrix", "SpectrumReport",
    "assemble_fiber_shape_operator", "assemble_orbit_shape_operator",
    "eigen_spectrum", "regularized_trace_I", "regularized_trace_II", "austere_check",
    "block_norm_decay", "perturbation_probe", "spectrum_report", "max_modulus_eigenvalue",
]


class CompatibleBasis:
    """Ordered basis ``[horizontal | k | sin_1 | cos_1 | ... | sin_N | cos_N]``.

    ``horizontal`` rows are 𝔤-coordinates of a gram-orthonormal basis of
    ``T_eK M`` (empty for fibers), lifted as constant paths. The 𝔨 block uses
    the columns of ``pair.k_basis``; each mode block uses the 𝔤 basis.
    ``transversal`` rows span the complement ``W`` used to split constants.
    """

    def __init__(self, pair: ReductivePair, N, horizontal=None, transversal=None):
        if N < 1:
            raise InputError("truncation N must be at least 1")
        dim = pair.algebra.dim
        self.pair = pair
        self.N = int(N)
        self.horizontal = np.zeros((0, dim)) if horizontal is None else np.asarray(horizontal, float).reshape(-1, dim)
        self.transversal = (pair.p_basis.T if transversal is None
                            else np.asarray(transversal, float).reshape(-1, dim))
        self.m = self.horizontal.shape[0]
        self.dim_k = pair.dim_k
        self.dim_g = dim
        const = np.hstack([self.horizontal.T, pair.k_basis, self.transversal.T])
        if const.shape[1] != dim or np.linalg.matrix_rank(const) < dim:
            raise InputError("horizontal, k and transversal bases do not split the algebra")
        self._const_inv = np.linalg.inv(const)

    @property
    def size(self):
        return self.m + self.dim_k + 2 * self.N * self.dim_g

    def __len__(self):
        return self.size

    def sin_offset(self, n):
        return self.m + self.dim_k + 2 * (n - 1) * self.dim_g

    def cos_offset(self, n):
        return self.sin_offset(n) + self.dim_g

    def blocks(self):
        """Ordered ``(label, slice)`` pairs; labels are ``"horizontal"``, ``"k"``, ``"sin n"``, ``"cos n"``."""
        out = [("horizontal", slice(0, self.m)), ("k", slice(self.m, self.m + self.dim_k))]
        for n in range(1, self.N + 1):
            s, c = self.sin_offset(n), self.cos_offset(n)
            out += [(f"sin {n}", slice(s, s + self.dim_g)), (f"cos {n}", slice(c, c + self.dim_g))]
        return out

    def labels(self):
        lab = []
        for name, sl in self.blocks():
            lab += [(name, j) for j in range(sl.stop - sl.start)]
        return lab

    def block_index(self):
        """Block number of every basis vector (0 horizontal, 1 k, then 2n and 2n+1)."""
        idx = np.empty(self.size, dtype=int)
        for b, (_, sl) in enumerate(self.blocks()):
            idx[sl] = b
        return idx

    def mode_slice(self, n):
        """Indices of the combined ``sin n`` and ``cos n`` blocks."""
        return slice(self.sin_offset(n), self.sin_offset(n) + 2 * self.dim_g)

    def metric(self):
        """Gram matrix of the basis in the L^2 inner product."""
        G = self.pair.algebra.gram
        M = np.zeros((self.size, self.size))
        H = self.horizontal
        M[:self.m, :self.m] = H @ G @ H.T
        Kb = self.pair.k_basis
        k = slice(self.m, self.m + self.dim_k)
        M[k, k] = Kb.T @ G @ Kb
        for n in range(1, self.N + 1):
            for off in (self.sin_offset(n), self.cos_offset(n)):
                M[off:off + self.dim_g, off:off + self.dim_g] = 0.5 * G
        return M

    def vector(self, j) -> FourierPath:
        """The ``j``-th basis vector as a FourierPath."""
        dim = self.dim_g
        if j < self.m:
            return FourierPath.constant(self.horizontal[j], self.N)
        j -= self.m
        if j < self.dim_k:
            return FourierPath.constant(self.pair.k_basis[:, j], self.N)
        j -= self.dim_k
        n, r = divmod(j, 2 * dim)
        kind = "sin" if r < dim else "cos"
        return FourierPath.mode(np.eye(dim)[r % dim], n + 1, kind, self.N)

    def coefficients(self, P: FourierPath):
        """Coordinates of the tangential part of ``P`` and its constant transversal part."""
        if P.N > self.N:
            raise InputError("path has modes beyond the basis truncation")
        P = P.pad(self.N)
        split = self._const_inv @ P.a0
        m, k = self.m, self.dim_k
        modes = np.stack([P.b, P.c], axis=1).reshape(-1)
        normal = self.transversal.T @ split[m + k:]
        return np.concatenate([split[:m + k], modes]), normal

    def to_json(self):
        return {"N": self.N, "horizontal": self.horizontal.tolist(),
                "k_basis": self.pair.k_basis.T.tolist(), "transversal": self.transversal.tolist(),
                "blocks": [[name, sl.start, sl.stop] for name, sl in self.blocks()]}


@dataclass
class ShapeOperatorMatrix:
    matrix: np.ndarray
    basis: CompatibleBasis
    xi: np.ndarray
    orbit: OrbitSpec | None = None
    tail_bound: float = 0.0
    route: str = "closed-form"

    @property
    def N(self):
        return self.basis.N

    @property
    def size(self):
        return self.matrix.shape[0]


def _check_direction(pair, xi):
    return pair.require_p(np.asarray(xi, dtype=float), "xi")


def _fiber_closed_form(pair: ReductivePair, xi, N):
    alg = pair.algebra
    basis = CompatibleBasis(pair, N)
    d, dk = alg.dim, pair.dim_k
    A = np.zeros((basis.size, basis.size))
    n = np.arange(1, N + 1)
    for a in range(dk):
        bx = alg.bracket(pair.k_basis[:, a], xi)
        for m in n:
            off = basis.sin_offset(m)
            A[off:off + d, a] = -bx / (m * np.pi)
    ad = alg.bracket(np.eye(d), xi)            # row j = [e_j, xi]
    for m in n:
        s, c = basis.sin_offset(m), basis.cos_offset(m)
        k = 2 * m * np.pi
        A[:dk, s:s + d] = pair.k_coords(ad).T / k
        A[c:c + d, s:s + d] = -ad.T / k
        A[s:s + d, c:c + d] = ad.T / k
    return A, basis


def _fiber_path_route(pair: ReductivePair, xi, N):
    alg = pair.algebra
    basis = CompatibleBasis(pair, N)
    A = np.zeros((basis.size, basis.size))
    for j in range(basis.size):
        Z = antiderivative_path(basis.vector(j), N)
        P = bracket_with_constant(alg, Z, xi)
        P = P - FourierPath.constant(pair.p_part(P.a0), N)
        coef, normal = basis.coefficients(P)
        A[:, j] = coef
    return A, basis


def assemble_fiber_shape_operator(pair: ReductivePair, xi, N, route="closed-form"):
    """Matrix of the fiber shape operator at the zero path in the compatible basis.

    ``route="closed-form"`` fills the columns from the closed forms;
    ``route="path"`` integrates each basis vector, brackets with ``xi`` in the
    path algebra and removes the constant 𝔭-part.
    """
    xi = _check_direction(pair, xi)
    if route == "closed-form":
        A, basis = _fiber_closed_form(pair, xi, N)
    elif route == "path":
        A, basis = _fiber_path_route(pair, xi, N)
    else:
        raise InputError(f"unknown route {route!r}")
    tail = 0.0
    if pair.dim_k:
        bx = pair.algebra.bracket(pair.k_basis.T, xi)
        tail = linear_tail_bound(N) * float(np.max(pair.algebra.norm(bx)))
    return ShapeOperatorMatrix(A, basis, xi, None, tail, route)


def assemble_orbit_shape_operator(orbit: OrbitSpec, xi, N):
    """Shape operator of the lifted orbit ``Phi_N^-1(H . eK)`` at the zero path.

    Representatives ``Z`` with ``Z' = v``: ``Z = -X + t X_p`` for a horizontal
    vector ``X_p`` (``X`` in 𝔥), and the antiderivative vanishing at 0 for
    vertical vectors. The image ``[Z, xi]`` is split along the constant
    transversal paths.

    Raises
    ------
    ConsistencyError
        If a constant in 𝔥 ∩ 𝔨 (the ambiguity of ``Z``) changes the tangential
        part by more than the tolerance.
    """
    pair, alg = orbit.pair, orbit.pair.algebra
    xi = _check_direction(pair, xi)
    Wb = orbit.transversal_basis
    if len(Wb):
        coef, *_ = np.linalg.lstsq(Wb.T, xi, rcond=None)
        off = np.abs(Wb.T @ coef - xi).max()
    else:
        off = np.abs(xi).max()
    if off > 1e-12 * max(1.0, np.abs(xi).max()):
        raise InputError("xi is not in the transversal space W")
    basis = CompatibleBasis(pair, N, orbit.tangent_basis, Wb)

    for c in orbit.hk_basis:
        tang, _ = basis.coefficients(FourierPath.constant(alg.bracket(c, xi), N))
        if np.abs(tang).max() > TOL.orbit_consistency:
            raise ConsistencyError(f"representative ambiguity: generator {np.round(c, 12).tolist()} "
                                   f"of h ∩ k moves the tangential part by {np.abs(tang).max():.3g}")

    Hp = pair.proj_p @ orbit.h_basis.T
    A = np.zeros((basis.size, basis.size))
    for j in range(basis.size):
        v = basis.vector(j)
        Z = antiderivative_path(v, N)
        if j < basis.m:
            a, *_ = np.linalg.lstsq(Hp, basis.horizontal[j], rcond=None)
            X = orbit.h_basis.T @ a
            Z = Z - FourierPath.constant(X, N)
        A[:, j] = basis.coefficients(bracket_with_constant(alg, Z, xi))[0]
    tail = 0.0
    if pair.dim_k or basis.m:
        cols = np.vstack([basis.horizontal, pair.k_basis.T])
        tail = linear_tail_bound(N) * float(np.max(alg.norm(alg.bracket(cols, xi))))
    return ShapeOperatorMatrix(A, basis, xi, orbit, tail, "orbit")


# ---------------------------------------------------------------- spectra

def _as_matrix(A):
    return A.matrix if isinstance(A, ShapeOperatorMatrix) else np.asarray(A, dtype=float)


def _symmetrize_conjugates(ev, tol):
    """Real eigenvalues get exact zero imaginary part; complex ones exact conjugate pairs."""
    scale = max(1.0, np.abs(ev).max(initial=0.0))
    ev = ev.copy()
    real = np.abs(ev.imag) <= tol * scale
    ev[real] = ev[real].real
    upper = np.flatnonzero(ev.imag > tol * scale)
    lower = list(np.flatnonzero(ev.imag < -tol * scale))
    if len(upper) != len(lower):
        raise NumericalError("eigenvalues of a real matrix are not closed under conjugation")
    for i in upper:
        j = min(lower, key=lambda k: abs(ev[k] - np.conj(ev[i])))
        lower.remove(j)
        z = 0.5 * (ev[i] + np.conj(ev[j]))
        ev[i], ev[j] = z, np.conj(z)
    return ev


def _group(ev, tol):
    groups = []
    for lam in ev:
        for g in groups:
            if abs(g[0] - lam) <= tol * max(1.0, abs(lam)):
                g[1] += 1
                break
        else:
            groups.append([lam, 1])
    return [(complex(l), m) for l, m in groups]


def eigen_spectrum(A, *, tol=None):
    """Eigenvalues (conjugate-symmetrised), multiplicities and dominant block per eigenvector.

    The returned eigenvalues are ordered by descending real part, then
    descending ``|Im|``, then block index of the dominant eigenvector entry.
    """
    tol = TOL.eigen_grouping if tol is None else tol
    M = _as_matrix(A)
    if M.size == 0:
        return np.zeros(0, complex), [], np.zeros(0, int)
    if not np.all(np.isfinite(M)):
        raise NumericalError("matrix has non-finite entries")
    try:
        ev, vec = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration failed: {exc}") from exc
    ev = _symmetrize_conjugates(ev, tol)
    if isinstance(A, ShapeOperatorMatrix):
        blocks = A.basis.block_index()[np.argmax(np.abs(vec), axis=0)]
    else:
        blocks = np.argmax(np.abs(vec), axis=0)
    order = np.lexsort((blocks, -np.abs(ev.imag), -ev.real))
    ev, blocks = ev[order], blocks[order]
    return ev, _group(ev, tol), blocks


def _mu_nu(ev, zero=None):
    zero = TOL.zero_real_part if zero is None else zero
    re = np.real(ev)
    mu = np.sort(re[re > zero])[::-1]
    nu = np.sort(re[re < -zero])
    L = max(len(mu), len(nu))
    return np.pad(mu, (0, L - len(mu))), np.pad(nu, (0, L - len(nu))), len(mu), len(nu)


def regularized_trace_I(eigenvalues, *, zero=None):
    """Paired sum ``sum_k (mu_k + nu_k)`` with zero padding of the shorter list.

    Returns ``(value, diagnostics)``; diagnostics hold the sorted lists, the
    partial sums and a convergence flag (the partial sums over the last
    quarter of the pairs stay within the trace-I tolerance of the value).
    """
    ev = eigenvalues.eigenvalues if isinstance(eigenvalues, SpectrumReport) else np.asarray(eigenvalues)
    mu, nu, nmu, nnu = _mu_nu(ev, zero)
    partial = np.cumsum(mu + nu)
    value = float(partial[-1]) if partial.size else 0.0
    tail = partial[-max(1, len(partial) // 4):] if partial.size else np.zeros(1)
    converged = bool(np.abs(tail - value).max() <= TOL.trace_I)
    return value, {"mu": mu, "nu": nu, "n_positive": nmu, "n_negative": nnu,
                   "partial_sums": partial, "converged": converged}


def regularized_trace_II(A: ShapeOperatorMatrix):
    """Sum of the diagonal entries, with the per-block sums."""
    d = np.diag(A.matrix).copy()
    blocks = {name: float(d[sl].sum()) for name, sl in A.basis.blocks()}
    return float(d.sum()), d, blocks


def austere_check(eigenvalues, tol=None):
    """Greedy matching of ``lambda`` with ``-lambda``; returns the unmatched eigenvalues and mass."""
    tol = TOL.austere if tol is None else tol
    ev = eigenvalues.eigenvalues if isinstance(eigenvalues, SpectrumReport) else np.asarray(eigenvalues)
    ev = np.asarray(ev, dtype=complex)
    order = np.argsort(-np.abs(ev), kind="stable")
    free = np.ones(len(ev), dtype=bool)
    unmatched = []
    for i in order:
        if not free[i]:
            continue
        free[i] = False
        lam = ev[i]
        if abs(lam) <= tol:
            continue
        cand = np.flatnonzero(free)
        if cand.size:
            j = cand[np.argmin(np.abs(ev[cand] + lam))]
            if abs(ev[j] + lam) <= tol * max(1.0, abs(lam)):
                free[j] = False
                continue
        unmatched.append(complex(lam))
    mass = float(sum(abs(l) for l in unmatched))
    return {"matched": not unmatched, "unmatched": unmatched, "unmatched_mass": mass}


def block_norm_decay(A: ShapeOperatorMatrix):
    """L^2 operator norms of the diagonal mode blocks and their decay.

    For mode ``n`` the block maps ``𝔤 sin ⊕ 𝔤 cos`` to itself; the bound is
    ``kappa / (2 n pi)`` with ``kappa`` the operator norm of ``ad_xi``. Column
    norms (mode ``n`` into the whole space) are reported as data only.
    """
    basis, M = A.basis, A.matrix
    alg = basis.pair.algebra
    kappa = float(alg.op_norm(alg.ad(A.xi)))
    R = np.linalg.cholesky(basis.metric()).T
    n = np.arange(1, basis.N + 1)
    norms, col_norms = np.empty(basis.N), np.empty(basis.N)
    for i, m in enumerate(n):
        sl = basis.mode_slice(m)
        Rb = R[sl, sl]
        norms[i] = np.linalg.norm(Rb @ M[sl, sl] @ np.linalg.inv(Rb), 2)
        col_norms[i] = np.linalg.norm(R @ M[:, sl] @ np.linalg.inv(Rb), 2)
    bound = kappa / (2 * np.pi * n)
    slack = bound - norms
    exponent = None
    pos = norms > 1e-300
    if pos.sum() >= 2:
        exponent = float(np.polyfit(np.log(n[pos]), np.log(norms[pos]), 1)[0])
    return {"n": n, "norms": norms, "bound": bound, "kappa": kappa,
            "min_slack": float(slack.min()), "exponent": exponent, "column_norms": col_norms}


def max_modulus_eigenvalue(A):
    ev = np.linalg.eigvals(_as_matrix(A))
    return complex(ev[np.argmax(np.abs(ev))]) if ev.size else 0j


def perturbation_probe(assemble, B, Ns):
    """Tabulate ``trace_I(A + B) - (trace_I(A) + tr B)`` over truncations.

    ``assemble(N)`` returns the operator at truncation ``N``; ``B`` is a
    small square matrix acting on the leading (N-independent) coordinates of
    the compatible basis and is zero-padded. Output is data, not a verdict.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[0] != B.shape[1]:
        raise InputError("B must be square")
    if np.linalg.matrix_rank(B) > 5:
        raise InputError("B must have rank at most 5")
    rows = []
    for N in Ns:
        A = assemble(N)
        M = _as_matrix(A)
        if B.shape[0] > M.shape[0]:
            raise InputError("B is larger than the operator")
        Bp = np.zeros_like(M)
        Bp[:B.shape[0], :B.shape[0]] = B
        tA, _ = regularized_trace_I(np.linalg.eigvals(M))
        tAB, _ = regularized_trace_I(np.linalg.eigvals(M + Bp))
        rows.append({"N": int(N), "trace_I_A": tA, "trace_I_A_plus_B": tAB,
                     "trace_B": float(np.trace(B)), "difference": tAB - (tA + float(np.trace(B)))})
    return rows


@dataclass
class SpectrumReport:
    N: int
    eigenvalues: np.ndarray
    multiplicities: list
    eigen_blocks: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    pair_partial_sums: np.ndarray
    trace_r_I: float
    trace_r_I_converged: bool
    diag_entries: np.ndarray
    trace_r_II: float
    block_sums: dict
    block_norms: dict
    austere: dict
    tail_bound: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_json(self):
        def cx(z):
            return [float(np.real(z)), float(np.imag(z))]
        bn = self.block_norms
        return {
            "meta": self.meta,
            "N": self.N,
            "eigenvalues": [cx(z) for z in self.eigenvalues],
            "multiplicities": [[cx(z), m] for z, m in self.multiplicities],
            "mu": self.mu.tolist(),
            "nu": self.nu.tolist(),
            "pair_partial_sums": self.pair_partial_sums.tolist(),
            "trace_r_I": {"value": self.trace_r_I, "converged": self.trace_r_I_converged},
            "diag_entries": self.diag_entries.tolist(),
            "trace_r_II": {"value": self.trace_r_II, "block_sums": self.block_sums},
            "block_norms": {"n": bn["n"].tolist(), "norms": bn["norms"].tolist(),
                            "bound": bn["bound"].tolist(), "kappa": bn["kappa"],
                            "min_slack": bn["min_slack"], "exponent": bn["exponent"],
                            "column_norms": bn["column_norms"].tolist()},
            "austere": {"matched": self.austere["matched"],
                        "unmatched": [cx(z) for z in self.austere["unmatched"]],
                        "unmatched_mass": self.austere["unmatched_mass"]},
            "tail_bound": self.tail_bound,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "re", "im", "abs", "block"])
        for i, (z, b) in enumerate(zip(self.eigenvalues, self.eigen_blocks)):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z))), int(b)])
        return buf.getvalue()


def spectrum_report(A: ShapeOperatorMatrix, meta=None) -> SpectrumReport:
    ev, groups, blocks = eigen_spectrum(A)
    t1, diag1 = regularized_trace_I(ev)
    t2, d, bsums = regularized_trace_II(A)
    return SpectrumReport(
        N=A.N, eigenvalues=ev, multiplicities=groups, eigen_blocks=blocks,
        mu=diag1["mu"], nu=diag1["nu"], pair_partial_sums=diag1["partial_sums"],
        trace_r_I=t1, trace_r_I_converged=diag1["converged"], diag_entries=d,
        trace_r_II=t2, block_sums=bsums, block_norms=block_norm_decay(A),
        austere=austere_check(ev), tail_bound=A.tail_bound, meta=dict(meta or {}))
