"""Finite-dimensional matrix Lie algebras and groups.

Elements of the Lie algebra are handled as coordinate vectors with respect to
a fixed basis of real matrices; group elements are plain invertible
``numpy`` arrays. Complex algebras (su(n)) are realised as real matrix
algebras of doubled size, so everything stays real.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .errors import DomainError, InputError, NumericalError

__all__ = [
    "expm", "logm", "realify",
    "LieAlgebra", "ReductivePair", "ConnectionKind",
    "alpha", "nabla_bi_invariant", "validate_reductive", "ReductiveReport",
]

# Diagonal Pade [13/13] coefficients and the matching scaling threshold.
_PADE13 = np.array([
    64764752532480000., 32382376266240000., 7771770303897600.,
    1187353796428800., 129060195264000., 10559470521600., 670442572800.,
    33522128640., 1323241920., 40840800., 960960., 16380., 182., 1.,
])
_THETA13 = 5.371920351148152


def expm(A):
    """Matrix exponential by scaling and squaring with a [13/13] Pade kernel.

    Accepts a single ``(n, n)`` matrix or a stack ``(m, n, n)``; each matrix in
    a stack gets its own scaling exponent.
    """
    A = np.asarray(A)
    if A.ndim not in (2, 3) or A.shape[-1] != A.shape[-2]:
        raise InputError(f"expm expects square matrices, got shape {A.shape}")
    single = A.ndim == 2
    if single:
        A = A[None]
    n = A.shape[-1]
    norms = np.abs(A).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norms > _THETA13, np.ceil(np.log2(norms / _THETA13)), 0.0)
    s = s.astype(int)
    A = A / (2.0 ** s)[:, None, None]
    b = _PADE13
    ident = np.broadcast_to(np.eye(n), A.shape)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for k in range(int(s.max(initial=0))):
        mask = s > k
        R[mask] = R[mask] @ R[mask]
    return R[0] if single else R


def _sqrtm_db(A, maxiter=60):
    # Denman-Beavers iteration; only ever called close to the identity.
    Y = A.copy()
    Z = np.eye(A.shape[0])
    for _ in range(maxiter):
        Yn = 0.5 * (Y + np.linalg.inv(Z))
        Zn = 0.5 * (Z + np.linalg.inv(Y))
        done = np.linalg.norm(Yn - Y, 1) <= 1e-15 * np.linalg.norm(Yn, 1)
        Y, Z = Yn, Zn
        if done:
            return Y
    raise NumericalError("Denman-Beavers square root did not converge")


def logm(g):
    """Principal matrix logarithm for ``g`` with spectral radius of ``g - I`` below one.

    Uses inverse scaling and squaring down to ``|g - I| <= 1/4`` followed by
    the odd series ``2 atanh((g - I)(g + I)^-1)``.

    Raises
    ------
    DomainError
        If the spectral radius of ``g - I`` is not below one.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    ident = np.eye(n)
    rho = np.max(np.abs(np.linalg.eigvals(g - ident)))
    if not rho < 1.0:
        raise DomainError(f"logm: spectral radius of g - I is {rho:.3g} >= 1")
    X = g
    k = 0
    while np.linalg.norm(X - ident, 1) > 0.25:
        X = _sqrtm_db(X)
        k += 1
        if k > 40:
            raise NumericalError("logm: inverse scaling did not reach the identity")
    Z = np.linalg.solve((X + ident).T, (X - ident).T).T
    Z2 = Z @ Z
    term = Z
    S = Z.copy()
    for j in range(1, 200):
        term = term @ Z2
        S += term / (2 * j + 1)
        if np.linalg.norm(term, 1) < 1e-18:
            break
    return 2.0 ** (k + 1) * S


def realify(M):
    """Real ``2n x 2n`` form ``[[A, -B], [B, A]]`` of the complex matrix ``A + iB``."""
    M = np.asarray(M, dtype=complex)
    A, B = M.real, M.imag
    return np.block([[A, -B], [B, A]])


class LieAlgebra:
    """A real matrix Lie algebra with a chosen basis and inner product.

    Parameters
    ----------
    basis : array_like, shape (dim, n, n)
        Basis matrices of a faithful representation.
    gram : array_like, shape (dim, dim), optional
        Gram matrix of the inner product in this basis; identity by default.
    structure_constants : array_like, shape (dim, dim, dim), optional
        ``c[i, j, k]`` with ``[e_i, e_j] = sum_k c[i, j, k] e_k``. When given
        they are checked against the matrix commutators; otherwise they are
        computed from them.
    group_relation : {None, "orthogonal", "unitary", "unimodular"}
        Defining relation of the matrix group, used for validation and for
        re-projection by the ``rk4-reproject`` integrator.
    ad_invariant : bool
        Whether ``gram`` is Ad-invariant (compact cases).
    """

    def __init__(self, basis, gram=None, structure_constants=None, *, name="",
                 group_relation=None, ad_invariant=False):
        basis = np.array(basis, dtype=float)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise InputError(f"basis must have shape (dim, n, n), got {basis.shape}")
        self.name = name
        self.basis = basis
        self.dim = basis.shape[0]
        self.size = basis.shape[1]
        self.group_relation = group_relation
        self.ad_invariant = bool(ad_invariant)

        vec = basis.reshape(self.dim, -1).T
        if np.linalg.matrix_rank(vec) < self.dim:
            raise InputError("basis matrices are linearly dependent")
        self._coord_map = np.linalg.pinv(vec)

        comm = np.einsum("iab,jbc->ijac", basis, basis)
        comm = comm - comm.transpose(1, 0, 2, 3)
        c = self.coords(comm)
        if structure_constants is not None:
            given = np.asarray(structure_constants, dtype=float)
            if given.shape != (self.dim,) * 3:
                raise InputError(f"structure constants must have shape {(self.dim,) * 3}")
            err = np.max(np.abs(given - c), initial=0.0)
            if err > TOL.structure:
                raise InputError(f"structure constants disagree with commutators by {err:.3g}")
            c = given
        self.c = c

        self.gram = np.eye(self.dim) if gram is None else np.array(gram, dtype=float)
        if self.gram.shape != (self.dim, self.dim):
            raise InputError("gram has the wrong shape")
        if np.max(np.abs(self.gram - self.gram.T)) > 1e-14:
            raise InputError("gram is not symmetric")
        evals = np.linalg.eigvalsh(self.gram)
        if evals.min() <= 0:
            raise InputError("gram is not positive definite")
        self._gram_half = np.linalg.cholesky(self.gram).T   # gram = R^T R

    def __repr__(self):
        return f"LieAlgebra({self.name or 'unnamed'}, dim={self.dim}, size={self.size})"

    # coordinates <-> matrices
    def matrix(self, x):
        x = np.asarray(x, dtype=float)
        return np.tensordot(x, self.basis, axes=([-1], [0]))

    def coords(self, M):
        M = np.asarray(M)
        flat = M.reshape(M.shape[:-2] + (-1,))
        return flat @ self._coord_map.T

    def membership_residual(self, M):
        """Distance of ``M`` from the span of the basis (max abs entry)."""
        M = np.asarray(M)
        return np.max(np.abs(self.matrix(self.coords(M)) - M), initial=0.0)

    def _check(self, x, what="X"):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise InputError(f"{what} has length {x.shape[-1]}, expected {self.dim}")
        return x

    # algebra structure
    def bracket(self, x, y):
        x = self._check(x)
        y = self._check(y, "Y")
        return np.einsum("ijk,...i,...j->...k", self.c, x, y)

    def ad(self, x):
        """Matrix of ``y -> [x, y]``."""
        x = self._check(x)
        return np.einsum("ijk,i->kj", self.c, x)

    def inner(self, x, y):
        return np.einsum("...i,ij,...j->...", x, self.gram, y)

    def norm(self, x):
        return np.sqrt(self.inner(x, x))

    def op_norm(self, M):
        """Operator norm of a linear map of the algebra (given as a matrix in coordinates)."""
        R = self._gram_half
        return np.linalg.norm(R @ np.asarray(M) @ np.linalg.inv(R), 2)

    # group level
    def exp(self, x):
        return expm(self.matrix(self._check(x)))

    def log(self, g):
        """Coordinates of the principal logarithm of ``g``."""
        L = logm(g)
        res = self.membership_residual(L)
        if res > 1e-8 * max(1.0, np.abs(L).max()):
            raise DomainError(f"log(g) is not in the algebra (residual {res:.3g})")
        return self.coords(L)

    def Ad(self, g):
        """Coordinate matrix of ``v -> g v g^-1``; accepts a stack of group elements."""
        g = np.asarray(g, dtype=float)
        try:
            ginv = np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise InputError("Ad: singular group element") from exc
        conj = np.einsum("...ab,jbc,...cd->...jad", g, self.basis, ginv)
        return np.swapaxes(self.coords(conj), -1, -2)

    def dexp_series(self, x, tol=None):
        """Matrix of ``v -> sum_k (-ad_x)^k v / (k+1)!`` (left-trivialised derivative of exp)."""
        tol = TOL.dexp_series_term if tol is None else tol
        M = -self.ad(x)
        term = np.eye(self.dim)
        S = term.copy()
        for k in range(1, 400):
            term = term @ M / (k + 1)
            S += term
            if np.linalg.norm(term, 2) < tol:
                return S
        raise NumericalError("dexp series did not converge")

    def dexp(self, x, v):
        """``d/ds exp(x + s v)`` at ``s = 0``, as a matrix."""
        v = self._check(v, "direction")
        return self.exp(x) @ self.matrix(self.dexp_series(x) @ v)

    def relation_residual(self, g):
        """How far ``g`` is from satisfying the group's defining relations."""
        g = np.asarray(g, dtype=float)
        n = g.shape[0]
        if self.group_relation is None:
            return 0.0
        if self.group_relation == "unimodular":
            return abs(np.linalg.det(g) - 1.0)
        res = np.max(np.abs(g.T @ g - np.eye(n)))
        if self.group_relation == "unitary":
            J = _complex_structure(n // 2)
            res = max(res, np.max(np.abs(g @ J - J @ g)), abs(np.linalg.det(g) - 1.0))
        return res

    def reproject(self, g):
        """Nearest point (in a cheap sense) satisfying the defining relations."""
        if self.group_relation in ("orthogonal", "unitary"):
            U, _, Vt = np.linalg.svd(g)
            return U @ Vt
        if self.group_relation == "unimodular":
            d = np.linalg.det(g)
            return g / np.sign(d) / abs(d) ** (1.0 / g.shape[0])
        return g

    def random_element(self, rng, scale=1.0):
        """Random algebra element with gram-norm ``scale``."""
        x = rng.standard_normal(self.dim)
        return scale * x / self.norm(x)

    def to_json(self):
        return {"dim": self.dim, "basis": self.basis.tolist(), "c": self.c.tolist(),
                "gram": self.gram.tolist()}


def _complex_structure(n):
    Z = np.zeros((n, n))
    I = np.eye(n)
    return np.block([[Z, -I], [I, Z]])


class ConnectionKind(enum.Enum):
    CANONICAL = "canonical"
    NATURAL = "natural-torsion-free"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for kind in cls:
            if value in (kind.value, kind.name.lower(), kind.name):
                return kind
        raise InputError(f"unknown connection kind {value!r}")


def _columns(vectors, dim, what):
    M = np.array(vectors, dtype=float)
    if M.ndim == 1 and M.size in (0, dim):
        M = M.reshape(dim, -1)
    if M.ndim != 2 or M.shape[0] != dim:
        raise InputError(f"{what} must have shape ({dim}, m) with basis vectors as columns, "
                         f"got {M.shape}")
    return M


class ReductivePair:
    """A decomposition ``g = k + p`` of a Lie algebra.

    ``k_basis`` and ``p_basis`` hold coordinate column vectors. If ``p_basis``
    is omitted the gram-orthogonal complement of ``k`` is used.
    """

    def __init__(self, algebra: LieAlgebra, k_basis, p_basis=None, *, name=""):
        self.algebra = algebra
        self.name = name or algebra.name
        dim = algebra.dim
        Kb = _columns(k_basis, dim, "k_basis")
        if p_basis is None:
            # gram-orthogonal complement of k
            if Kb.shape[1]:
                _, _, Vt = np.linalg.svd(Kb.T @ algebra.gram)
                Pb = Vt[Kb.shape[1]:].T
            else:
                Pb = np.eye(dim)
        else:
            Pb = _columns(p_basis, dim, "p_basis")
        Q = np.hstack([Kb, Pb])
        if Q.shape[1] != dim or np.linalg.matrix_rank(Q) < dim:
            raise InputError("k_basis and p_basis do not form a basis of the algebra")
        self.k_basis = Kb
        self.p_basis = Pb
        self.dim_k = Kb.shape[1]
        self.dim_p = Pb.shape[1]
        Qinv = np.linalg.inv(Q)
        self._k_dual = Qinv[:self.dim_k]
        self._p_dual = Qinv[self.dim_k:]
        self.proj_k = Kb @ self._k_dual
        self.proj_p = Pb @ self._p_dual

    @classmethod
    def from_indices(cls, algebra, k_indices, name=""):
        k_indices = list(k_indices)
        eye = np.eye(algebra.dim)
        rest = [i for i in range(algebra.dim) if i not in k_indices]
        return cls(algebra, eye[:, k_indices], eye[:, rest], name=name)

    def __repr__(self):
        return f"ReductivePair({self.name}, dim_k={self.dim_k}, dim_p={self.dim_p})"

    def k_coords(self, x):
        return np.asarray(x) @ self._k_dual.T

    def p_coords(self, x):
        return np.asarray(x) @ self._p_dual.T

    def from_p_coords(self, a):
        return np.asarray(a) @ self.p_basis.T

    def from_k_coords(self, a):
        return np.asarray(a) @ self.k_basis.T

    def k_part(self, x):
        return np.asarray(x) @ self.proj_k.T

    def p_part(self, x):
        return np.asarray(x) @ self.proj_p.T

    def require_p(self, x, what="X", tol=TOL.reductive):
        x = self.algebra._check(x, what)
        if np.max(np.abs(self.k_part(x)), initial=0.0) > tol * max(1.0, np.abs(x).max(initial=0.0)):
            raise InputError(f"{what} is not in p")
        return x


def alpha(pair: ReductivePair, kind, X, Y):
    """Connection function of the canonical or natural torsion-free connection."""
    kind = ConnectionKind.parse(kind)
    X = pair.require_p(X, "X")
    Y = pair.require_p(Y, "Y")
    if kind is ConnectionKind.CANONICAL:
        return np.zeros_like(X + Y)
    return 0.5 * pair.p_part(pair.algebra.bracket(X, Y))


def nabla_bi_invariant(algebra: LieAlgebra, X, Y):
    """Canonical connection of G = (G x G)/diag(G) on left-invariant fields: half the bracket."""
    return 0.5 * algebra.bracket(X, Y)


@dataclass
class ReductiveReport:
    subalgebra: float
    reductivity: float
    projections: float
    group_invariance: float
    tolerance: float = TOL.reductive
    group_tolerance: float = TOL.group_invariance
    messages: list = field(default_factory=list)

    @property
    def ok(self):
        return (self.subalgebra <= self.tolerance and self.reductivity <= self.tolerance
                and self.projections <= self.tolerance
                and self.group_invariance <= self.group_tolerance)


def validate_reductive(pair: ReductivePair, *, n_samples=3, seed=0) -> ReductiveReport:
    """Measure how far ``pair`` is from a reductive decomposition."""
    alg = pair.algebra
    Kb, Pb = pair.k_basis.T, pair.p_basis.T
    kk = alg.bracket(Kb[:, None, :], Kb[None, :, :]).reshape(-1, alg.dim)
    kp = alg.bracket(Kb[:, None, :], Pb[None, :, :]).reshape(-1, alg.dim)
    sub = np.max(np.abs(pair.p_part(kk)), initial=0.0)
    red = np.max(np.abs(pair.k_part(kp)), initial=0.0)
    Pk, Pp = pair.proj_k, pair.proj_p
    proj = max(np.max(np.abs(Pk @ Pk - Pk)), np.max(np.abs(Pp @ Pp - Pp)),
               np.max(np.abs(Pk @ Pp)), np.max(np.abs(Pk + Pp - np.eye(alg.dim))))

    grp = 0.0
    if pair.dim_k:
        rng = np.random.default_rng(seed)
        for _ in range(n_samples):
            x = pair.from_k_coords(rng.standard_normal(pair.dim_k))
            x /= alg.norm(x)
            for t in (0.1, 0.5, 1.0):
                img = alg.Ad(alg.exp(t * x)) @ Pb.T
                grp = max(grp, np.max(np.abs(pair.k_part(img.T))))

    report = ReductiveReport(sub, red, proj, grp)
    if sub > report.tolerance:
        report.messages.append(f"[k,k] not contained in k (violation {sub:.3g})")
    if red > report.tolerance:
        report.messages.append(f"[k,p] not contained in p (violation {red:.3g})")
    if proj > report.tolerance:
        report.messages.append(f"projection identities violated ({proj:.3g})")
    if grp > report.group_tolerance:
        report.messages.append(f"Ad(exp(k)) does not preserve p ({grp:.3g})")
    return report
