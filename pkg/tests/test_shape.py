import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from ptmap import ConsistencyError, InputError, catalog
from ptmap.base import OrbitSpec
from ptmap.paths import FourierPath, antiderivative_path, bracket_with_constant, linear_tail_bound
from ptmap.shape import (CompatibleBasis, assemble_fiber_shape_operator,
                         assemble_orbit_shape_operator, austere_check, block_norm_decay,
                         eigen_spectrum, max_modulus_eigenvalue, perturbation_probe,
                         regularized_trace_I, regularized_trace_II, spectrum_report)
from ptmap.verification import latitude_curvature_fd, latitude_orbit

from conftest import NONABELIAN

E = np.eye(3)


def _unit_p(pair, rng):
    x = pair.p_part(rng.standard_normal(pair.algebra.dim))
    return x / pair.algebra.norm(x)


def test_compatible_basis_layout():
    pair = catalog.load("su3").pair
    B = CompatibleBasis(pair, 3)
    assert B.size == 2 + 2 * 3 * 8
    names = [name for name, _ in B.blocks()]
    assert names[:4] == ["horizontal", "k", "sin 1", "cos 1"] and names[-1] == "cos 3"
    assert B.sin_offset(2) == 2 + 16 and B.cos_offset(2) == 2 + 24
    v = B.vector(B.cos_offset(2) + 5)
    assert_allclose(v.c[1], np.eye(8)[5]) and np.abs(v.b).max() == 0
    M = B.metric()
    assert_allclose(np.diag(M)[2:], 0.5)
    # coefficient extraction inverts vector()
    for j in (0, 1, 7, B.size - 1):
        coef, normal = B.coefficients(B.vector(j))
        assert_allclose(coef, np.eye(B.size)[j]) and assert_allclose(normal, 0.0)


def test_abelian_and_zero_direction():
    pair = catalog.load("abelian2").pair
    A = assemble_fiber_shape_operator(pair, pair.from_p_coords([1.0]), 5)
    assert np.abs(A.matrix).max() == 0
    su2 = catalog.load("su2").pair
    assert np.abs(assemble_fiber_shape_operator(su2, np.zeros(3), 4).matrix).max() == 0


def test_direction_must_be_in_p():
    with pytest.raises(InputError):
        assemble_fiber_shape_operator(catalog.load("su2").pair, E[2], 3)


def test_su2_k_column():
    pair = catalog.load("su2").pair
    N = 6
    A = assemble_fiber_shape_operator(pair, E[0], N)
    B = A.basis
    col = A.matrix[:, 0]                      # k block holds x = e3
    for n in range(1, N + 1):
        s = B.sin_offset(n)
        assert_allclose(col[s:s + 3], -E[1] / (n * np.pi), atol=1e-15)
        c = B.cos_offset(n)
        assert_allclose(col[c:c + 3], 0.0)
    assert col[0] == 0.0
    assert_allclose(A.tail_bound, linear_tail_bound(N))


def test_su2_sin_one_column():
    pair = catalog.load("su2").pair
    A = assemble_fiber_shape_operator(pair, E[0], 4)
    B = A.basis
    col = A.matrix[:, B.sin_offset(1) + 1]    # y = e2 in the sin 1 block
    expected = np.zeros(B.size)
    expected[0] = -1 / (2 * np.pi)
    expected[B.cos_offset(1) + 2] = 1 / (2 * np.pi)
    assert_allclose(col, expected, atol=1e-15)


def test_cos_column_closed_form(rng):
    pair = catalog.load("sl2r").pair
    alg = pair.algebra
    xi = _unit_p(pair, rng)
    A = assemble_fiber_shape_operator(pair, xi, 3)
    B = A.basis
    for n in (1, 3):
        for j in range(3):
            col = A.matrix[:, B.cos_offset(n) + j]
            s = B.sin_offset(n)
            assert_allclose(col[s:s + 3], alg.bracket(np.eye(3)[j], xi) / (2 * n * np.pi), atol=1e-15)
            mask = np.ones(B.size, bool)
            mask[s:s + 3] = False
            assert np.abs(col[mask]).max() == 0


@pytest.mark.parametrize("name", NONABELIAN)
def test_dual_route(name, rng):
    pair = catalog.load(name).pair
    for N in (1, 5, 16):
        xi = _unit_p(pair, rng)
        A = assemble_fiber_shape_operator(pair, xi, N)
        B = assemble_fiber_shape_operator(pair, xi, N, route="path")
        assert_allclose(A.matrix, B.matrix, atol=1e-12)


def test_path_route_reproduces_shape_formula(rng):
    # integrate directly: [Z, xi] minus the p-part of its mean, for a random vertical vector
    pair = catalog.load("su3").pair
    alg = pair.algebra
    N = 4
    xi = _unit_p(pair, rng)
    A = assemble_fiber_shape_operator(pair, xi, N)
    B = A.basis
    x = rng.standard_normal(B.size)
    v = sum((x[j] * B.vector(j) for j in range(B.size)), FourierPath.zeros(alg.dim, N))
    P = bracket_with_constant(alg, antiderivative_path(v, N), xi)
    P = P - FourierPath.constant(pair.p_part(P.a0), N)
    coef, normal = B.coefficients(P)
    assert_allclose(A.matrix @ x, coef, atol=1e-12)
    assert_allclose(normal, 0.0, atol=1e-14)


@pytest.mark.parametrize("name", NONABELIAN)
def test_zero_diagonal(name, rng):
    pair = catalog.load(name).pair
    for N in (1, 8, 16):
        A = assemble_fiber_shape_operator(pair, _unit_p(pair, rng), N)
        t2, d, blocks = regularized_trace_II(A)
        assert np.abs(d).max() <= 1e-14
        assert abs(t2) <= 1e-14 * A.size
        assert set(blocks) == {name for name, _ in A.basis.blocks()}


def test_linearity(rng):
    pair = catalog.load("su3").pair
    xi, eta = _unit_p(pair, rng), _unit_p(pair, rng)
    a, b = 1.7, -0.4
    A = assemble_fiber_shape_operator(pair, a * xi + b * eta, 6).matrix
    B = (a * assemble_fiber_shape_operator(pair, xi, 6).matrix
         + b * assemble_fiber_shape_operator(pair, eta, 6).matrix)
    assert_allclose(A, B, atol=1e-13)


def test_block_diagonal_basis_change_keeps_trace_II(rng):
    pair = catalog.load("su2").pair
    orbit, xi = latitude_orbit(0.7)
    A = assemble_orbit_shape_operator(orbit, xi, 5)
    S = np.zeros_like(A.matrix)
    for _, sl in A.basis.blocks():
        k = sl.stop - sl.start
        if k:
            S[sl, sl] = rng.standard_normal((k, k)) + 3 * np.eye(k)
    A2 = np.linalg.solve(S, A.matrix @ S)
    assert abs(np.trace(A2) - regularized_trace_II(A)[0]) <= 1e-10


def test_eigen_examples():
    ev, groups, _ = eigen_spectrum(np.zeros((4, 4)))
    assert np.all(ev == 0) and groups == [(0j, 4)]
    ev, _, _ = eigen_spectrum(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert_allclose(sorted(ev.imag), [-1.0, 1.0], atol=1e-15)
    assert ev[0] == np.conj(ev[1])


def test_fiber_spectrum_su2():
    pair = catalog.load("su2").pair
    A = assemble_fiber_shape_operator(pair, E[0], 8)
    ev, _, _ = eigen_spectrum(A)
    assert austere_check(ev)["matched"]
    lam = abs(max_modulus_eigenvalue(A))
    kappa = pair.algebra.op_norm(pair.algebra.ad(E[0]))
    assert kappa / (2 * np.pi) < lam < kappa / np.pi


@pytest.mark.parametrize("name", NONABELIAN)
def test_austere_and_trace_I(name, rng):
    pair = catalog.load(name).pair
    for N in (1, 4, 12):
        ev, _, _ = eigen_spectrum(assemble_fiber_shape_operator(pair, _unit_p(pair, rng), N))
        rep = austere_check(ev)
        assert rep["matched"] and rep["unmatched_mass"] <= 1e-8
        assert abs(regularized_trace_I(ev)[0]) <= 1e-10


def test_trace_I_examples():
    assert regularized_trace_I([1.0, -1.0])[0] == 0.0
    val, diag = regularized_trace_I([0.5, -0.2, -0.3])
    assert_allclose(val, 0.0, atol=1e-16)
    assert_allclose(diag["mu"], [0.5, 0.0]) and assert_allclose(diag["nu"], [-0.3, -0.2])
    val, _ = regularized_trace_I([2.0, 1.0, -0.5, 1j, -1j, 1e-13])
    assert_allclose(val, 2.5)


def test_austere_negative_control():
    rep = austere_check(np.linalg.eigvals(np.diag([1.0, 2.0, -1.0])))
    assert not rep["matched"]
    assert_allclose(rep["unmatched_mass"], 2.0)
    assert austere_check(np.zeros(5))["matched"]


def test_block_norm_decay():
    pair = catalog.load("su2").pair
    bn = block_norm_decay(assemble_fiber_shape_operator(pair, E[0], 16))
    assert bn["min_slack"] >= -1e-10
    assert -1.05 <= bn["exponent"] <= -0.95
    assert_allclose(bn["norms"], bn["kappa"] / (2 * np.pi * bn["n"]), rtol=1e-12)
    bn2 = block_norm_decay(assemble_fiber_shape_operator(pair, 2 * E[0], 16))
    assert_allclose(bn2["norms"], 2 * bn["norms"], rtol=1e-13)
    ab = catalog.load("abelian2").pair
    assert np.all(block_norm_decay(assemble_fiber_shape_operator(ab, ab.from_p_coords([1.0]), 4))["norms"] == 0)


@pytest.mark.parametrize("name", NONABELIAN)
def test_block_norm_bound_random_direction(name, rng):
    pair = catalog.load(name).pair
    bn = block_norm_decay(assemble_fiber_shape_operator(pair, _unit_p(pair, rng), 12))
    assert bn["min_slack"] >= -1e-10


def test_max_modulus_eigenvalue_limit():
    # the largest eigenvalue approaches 1/pi from below, only at rate 1/N
    pair = catalog.load("su2").pair
    lam = [abs(max_modulus_eigenvalue(assemble_fiber_shape_operator(pair, E[0], N))) for N in (8, 16, 32)]
    assert lam[0] < lam[1] < lam[2] < 1 / np.pi
    d1, d2 = lam[1] - lam[0], lam[2] - lam[1]
    assert 1.5 < d1 / d2 < 2.5


def test_perturbation_probe():
    pair = catalog.load("su2").pair
    rows = perturbation_probe(lambda N: assemble_fiber_shape_operator(pair, E[0], N), np.zeros((1, 1)), [2, 4])
    assert all(abs(r["difference"]) <= 1e-14 for r in rows)
    B = np.array([[0.3, 0.1], [0.0, -0.2]])
    rows = perturbation_probe(lambda N: np.zeros((N, N)), B, [3, 5])
    assert all(abs(r["difference"]) <= 1e-15 for r in rows)
    rows = perturbation_probe(lambda N: assemble_fiber_shape_operator(pair, E[0], N), [[0.25]], [2, 4, 8])
    assert [r["N"] for r in rows] == [2, 4, 8]
    assert all(np.isfinite(r["difference"]) for r in rows)
    with pytest.raises(InputError):
        perturbation_probe(lambda N: np.zeros((10, 10)), np.eye(6), [1])


@pytest.mark.parametrize("name", NONABELIAN)
def test_point_orbit_equals_fiber(name, rng):
    pair = catalog.load(name).pair
    for N in (1, 6):
        xi = _unit_p(pair, rng)
        O = assemble_orbit_shape_operator(OrbitSpec.point(pair), xi, N)
        F = assemble_fiber_shape_operator(pair, xi, N)
        assert_allclose(O.matrix, F.matrix, atol=1e-13)


def test_abelian_orbit_zero():
    pair = catalog.load("abelian2").pair
    orb = OrbitSpec(pair, np.zeros((0, 2)), pair.p_basis.T)
    A = assemble_orbit_shape_operator(orb, pair.p_basis[:, 0], 3)
    assert np.abs(A.matrix).max() == 0
    assert regularized_trace_II(A)[0] == 0


@pytest.mark.parametrize("r", [0.3, 0.5, 1.0, 1.3])
def test_latitude_trace_II(r):
    orbit, xi = latitude_orbit(r)
    traces = []
    for N in (4, 8, 16):
        A = assemble_orbit_shape_operator(orbit, xi, N)
        t2, d, blocks = regularized_trace_II(A)
        assert_allclose(t2, blocks["horizontal"], atol=1e-15)
        traces.append(t2)
    assert max(traces) - min(traces) <= 1e-13
    assert_allclose(traces[0], 1 / np.tan(r), atol=1e-12)
    assert_allclose(latitude_curvature_fd(r), 1 / np.tan(r), atol=1e-8)


def test_latitude_orbit_direction_flip():
    orbit, xi = latitude_orbit(0.6)
    t_plus = regularized_trace_II(assemble_orbit_shape_operator(orbit, xi, 4))[0]
    t_minus = regularized_trace_II(assemble_orbit_shape_operator(orbit, -xi, 4))[0]
    assert_allclose(t_minus, -t_plus, atol=1e-15)


def test_orbit_direction_must_be_transversal():
    orbit, _ = latitude_orbit(0.5)
    with pytest.raises(InputError):
        assemble_orbit_shape_operator(orbit, E[1], 4)


def test_orbit_representative_ambiguity_detected():
    pair = catalog.load("su3").pair
    I = np.eye(8)
    # h = span(e0, e1, e2) is an su(2) meeting k in e2; a sheared W is not e2-invariant
    W = np.vstack([I[3] + I[0], I[4], I[5], I[6]])
    orbit = OrbitSpec(pair, I[:3], W, validate=False)
    assert orbit.violations()["equivariance"] > 1e-3
    with pytest.raises(ConsistencyError):
        assemble_orbit_shape_operator(orbit, (I[3] + I[0]) / np.sqrt(2), 3)
    good = OrbitSpec(pair, I[:3], I[3:7])
    A = assemble_orbit_shape_operator(good, I[3], 3)
    assert A.basis.m == 2


def test_spectrum_report_serialisation():
    pair = catalog.load("su2").pair
    rep = spectrum_report(assemble_fiber_shape_operator(pair, E[0], 3), {"algebra": "su2"})
    obj = json.loads(rep.dumps())
    assert obj["N"] == 3 and obj["meta"]["algebra"] == "su2"
    assert abs(obj["trace_r_I"]["value"]) <= 1e-10 and obj["austere"]["matched"]
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "index,re,im,abs,block" and len(lines) == 1 + rep.eigenvalues.size
    assert rep.dumps() == spectrum_report(assemble_fiber_shape_operator(pair, E[0], 3),
                                          {"algebra": "su2"}).dumps()


@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(1, 6))
def test_fiber_properties_su2(a, b, N):
    pair = catalog.load("su2").pair
    xi = a * E[0] + b * E[1]
    A = assemble_fiber_shape_operator(pair, xi, N)
    assert np.abs(np.diag(A.matrix)).max() <= 1e-14
    ev, _, _ = eigen_spectrum(A)
    assert austere_check(ev)["unmatched_mass"] <= 1e-8
    assert block_norm_decay(A)["min_slack"] >= -1e-10
