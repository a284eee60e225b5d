"""Named algebras with their reductive splits and chart radii.

Each entry bundles a :class:`~ptmap.lie.ReductivePair` with the chart radius
used by :mod:`ptmap.base`. Custom entries can be loaded from a JSON object::

    {"dim": n, "basis": [[...]], "c": [[[...]]], "gram": [[...]],
     "k_indices": [...], "chart_radius": r, "group_relation": "orthogonal"}

where ``c[i][j][k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .lie import LieAlgebra, ReductivePair, realify, validate_reductive

__all__ = ["CatalogEntry", "load", "names", "from_json", "describe"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    pair: ReductivePair
    chart_radius: float
    description: str = ""
    symmetric: bool = True

    @property
    def algebra(self) -> LieAlgebra:
        return self.pair.algebra


def _pauli():
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]])
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return s1, s2, s3


def _gell_mann():
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = np.diag([1, 1, -2]) / np.sqrt(3)
    return lam


def _su2():
    # e_k = -i sigma_k / 2 gives [e1, e2] = e3 cyclically; the identity gram
    # makes SU(2)/U(1) the unit round sphere.
    basis = [realify(-0.5j * s) for s in _pauli()]
    alg = LieAlgebra(basis, name="su2", group_relation="unitary", ad_invariant=True)
    return CatalogEntry("su2", ReductivePair.from_indices(alg, [2], name="su2/u1"), 1.0,
                        "SU(2)/U(1), unit round sphere")


def _so3():
    L = np.zeros((3, 3, 3))
    L[0][2, 1], L[0][1, 2] = 1, -1
    L[1][0, 2], L[1][2, 0] = 1, -1
    L[2][1, 0], L[2][0, 1] = 1, -1
    alg = LieAlgebra(L, name="so3", group_relation="orthogonal", ad_invariant=True)
    return CatalogEntry("so3", ReductivePair.from_indices(alg, [2], name="so3/so2"), 1.0,
                        "SO(3)/SO(2), unit round sphere")


def _sl2r():
    H = np.array([[1., 0], [0, -1]])
    S = np.array([[0., 1], [1, 0]])
    J = np.array([[0., -1], [1, 0]])
    alg = LieAlgebra([H / 2, S / 2, J / 2], name="sl2r", group_relation="unimodular")
    return CatalogEntry("sl2r", ReductivePair.from_indices(alg, [2], name="sl2r/so2"), 1.0,
                        "SL(2,R)/SO(2), hyperbolic plane")


def _su3():
    basis = [realify(-0.5j * lam) for lam in _gell_mann()]
    alg = LieAlgebra(basis, name="su3", group_relation="unitary", ad_invariant=True)
    return CatalogEntry("su3", ReductivePair.from_indices(alg, [2, 7], name="su3/t2"), 0.8,
                        "SU(3)/T^2, full flag manifold (not symmetric)", symmetric=False)


def _abelian2():
    alg = LieAlgebra([np.diag([1., 0.]), np.diag([0., 1.])], name="abelian2",
                     ad_invariant=True)
    return CatalogEntry("abelian2", ReductivePair.from_indices(alg, [1], name="abelian2"), 0.5,
                        "R^2 / R, flat line")


_BUILDERS = {
    "abelian2": _abelian2,
    "su2": _su2,
    "sl2r": _sl2r,
    "su3": _su3,
    "so3": _so3,
}
_CACHE: dict = {}


def names():
    return list(_BUILDERS)


def load(name: str, *, validate=True) -> CatalogEntry:
    """Catalog entry by name; entries are validated once when first built."""
    if name not in _BUILDERS:
        raise InputError(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}")
    if name not in _CACHE:
        entry = _BUILDERS[name]()
        if validate:
            report = validate_reductive(entry.pair)
            if not report.ok:
                raise InputError(f"catalog entry {name} failed validation: {report.messages}")
        _CACHE[name] = entry
    return _CACHE[name]


def from_json(obj, *, validate=True) -> CatalogEntry:
    """Entry from a structure-constant JSON object (dict, JSON text or file path)."""
    if isinstance(obj, (str, Path)):
        p = Path(obj)
        try:
            obj = json.loads(p.read_text()) if p.exists() else json.loads(str(obj))
        except json.JSONDecodeError as exc:
            raise InputError(f"{str(obj)!r} is neither a catalog name ({', '.join(_BUILDERS)}) "
                             f"nor valid algebra JSON ({exc.msg} at line {exc.lineno} "
                             f"column {exc.colno})") from exc
    if not isinstance(obj, dict):
        raise InputError("algebra JSON must be an object")
    try:
        dim = int(obj["dim"])
        basis = np.asarray(obj["basis"], dtype=float)
        c = np.asarray(obj["c"], dtype=float) if "c" in obj else None
        gram = np.asarray(obj["gram"], dtype=float) if "gram" in obj else None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed algebra JSON: {exc}") from exc
    if basis.shape[0] != dim:
        raise InputError(f"basis has {basis.shape[0]} matrices but dim = {dim}")
    name = obj.get("name", "custom")
    alg = LieAlgebra(basis, gram, c, name=name, group_relation=obj.get("group_relation"),
                     ad_invariant=bool(obj.get("ad_invariant", False)))
    if "k_basis" in obj:
        pair = ReductivePair(alg, np.asarray(obj["k_basis"], dtype=float).T,
                             None if "p_basis" not in obj
                             else np.asarray(obj["p_basis"], dtype=float).T, name=name)
    else:
        pair = ReductivePair.from_indices(alg, obj.get("k_indices", []), name=name)
    entry = CatalogEntry(name, pair, float(obj.get("chart_radius", 0.5)),
                         obj.get("description", ""), bool(obj.get("symmetric", False)))
    if validate:
        report = validate_reductive(pair)
        if not report.ok:
            raise InputError(f"algebra {name} failed validation: {report.messages}")
    return entry


def resolve(spec, *, validate=True) -> CatalogEntry:
    """Catalog name, JSON object or JSON file path -> entry."""
    if isinstance(spec, CatalogEntry):
        return spec
    if isinstance(spec, str) and spec in _BUILDERS:
        return load(spec, validate=validate)
    return from_json(spec, validate=validate)


def describe():
    rows = []
    for name in _BUILDERS:
        e = load(name)
        rows.append({"name": name, "dim": e.algebra.dim, "dim_k": e.pair.dim_k,
                     "dim_p": e.pair.dim_p, "matrix_size": e.algebra.size,
                     "chart_radius": e.chart_radius, "description": e.description})
    return rows
