import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from ptmap import InputError, catalog
from ptmap.paths import (FourierPath, GroupPath, antiderivative, antiderivative_path,
                         bracket_with_constant, check_l2_inequality, evaluate, fd4_derivative,
                         integral_01, l2_inner, l2_norm, linear_tail_bound, project_to_truncation,
                         quadrature_grid)

E = np.eye(3)


def _quad_values(u, N_quad):
    t, w = quadrature_grid(N_quad)
    return t, w, u(t)


def test_evaluate_examples():
    X = np.array([0.3, -1.0, 2.0])
    assert_allclose(evaluate(FourierPath.constant(X, 3), 0.71), X)
    assert_allclose(evaluate(FourierPath.mode(E[0], 1, "sin"), 0.25), E[0], atol=1e-15)
    assert_allclose(evaluate(FourierPath.mode(E[1], 2, "cos"), 0.25), -E[1], atol=1e-15)


def test_evaluate_matches_defining_sum(rng):
    u = FourierPath.random(rng, 3, 5)
    t = 3 / 7
    ref = u.a0 + sum(u.b[n - 1] * np.sin(2 * n * np.pi * t) + u.c[n - 1] * np.cos(2 * n * np.pi * t)
                     for n in range(1, 6))
    assert_allclose(evaluate(u, t), ref, atol=1e-14)


def test_evaluate_range():
    with pytest.raises(InputError):
        evaluate(FourierPath.zeros(3, 1), 1.5)


def test_integrals():
    X = np.array([1.0, 2.0, 3.0])
    assert_allclose(integral_01(FourierPath.constant(X)), X)
    assert_allclose(integral_01(FourierPath.mode(E[0], 3, "sin")), 0.0)


def test_l2_inner_sin_half():
    u = FourierPath.mode(E[0], 1, "sin")
    assert_allclose(l2_inner(u, u), 0.5)
    t, w = quadrature_grid(16)
    assert_allclose(w @ np.sin(2 * np.pi * t) ** 2, 0.5, atol=1e-14)


@pytest.mark.parametrize("name", ["su2", "sl2r", "su3"])
def test_parseval_against_quadrature(name, rng):
    alg = catalog.load(name).algebra
    G = rng.standard_normal((alg.dim, alg.dim))
    G = G @ G.T + alg.dim * np.eye(alg.dim)
    for N in (0, 3, 7):
        u = FourierPath.random(rng, alg.dim, N)
        v = FourierPath.random(rng, alg.dim, N + 2)
        t, w = quadrature_grid(4 * N + 12)
        quad = np.einsum("t,ti,ij,tj->", w, u(t), G, v(t))
        assert_allclose(l2_inner(u, v, G), quad, rtol=1e-10, atol=1e-10)
    assert_allclose(l2_inner(u, u, alg), l2_norm(u, alg) ** 2)


def test_antiderivative_closed_form(rng):
    u = FourierPath.random(rng, 3, 4)
    for t in (0.0, 0.3, 1.0):
        nodes, w = quadrature_grid(40)
        ref = (t * w) @ u(t * nodes)
        assert_allclose(antiderivative(u, t), ref, atol=1e-13)


def test_antiderivative_path_modes(rng):
    # derivative of the periodic part reproduces the oscillating part of u
    u = FourierPath(np.zeros(3), rng.standard_normal((3, 3)), rng.standard_normal((3, 3)))
    F = antiderivative_path(u)
    t = np.linspace(0, 1, 9)
    assert_allclose(F(t), antiderivative(u, t), atol=1e-14)


def test_linear_part_expansion_tail_bound():
    N = 12
    F = antiderivative_path(FourierPath.constant(E[0], N))
    t, w = quadrature_grid(400)
    err = np.sqrt(w @ ((t - F(t)[:, 0]) ** 2))
    bound = linear_tail_bound(N)
    assert err <= bound * (1 + 1e-6)
    # the exact L2 tail carries the factor 1/2 from the mean of sin^2
    assert_allclose(err, bound / np.sqrt(2), rtol=1e-4)
    assert_allclose(bound, np.sqrt(sum(1 / (n * np.pi) ** 2 for n in range(N + 1, 200000))), rtol=1e-4)


def test_bracket_with_constant_examples():
    alg = catalog.load("su2").algebra
    u = FourierPath.mode(E[1], 1, "sin")
    out = bracket_with_constant(alg, u, E[0])
    assert_allclose(out.b[0], -E[2], atol=1e-15)
    assert_allclose(bracket_with_constant(alg, u, np.zeros(3)).to_vector(), 0.0)
    ab = catalog.load("abelian2").algebra
    assert_allclose(bracket_with_constant(ab, FourierPath.random(np.random.default_rng(1), 2, 3),
                                          [1.0, 2.0]).to_vector(), 0.0)


def test_projection_examples():
    N = 4
    t, _ = quadrature_grid(4 * N + 4)
    vals = np.outer(np.sin(2 * np.pi * t), E[0])
    P = project_to_truncation(vals, N)
    assert_allclose(P.b[0], E[0], atol=1e-12)
    rest = np.concatenate([P.a0, P.b[1:].ravel(), P.c.ravel()])
    assert np.abs(rest).max() <= 1e-12
    X = np.array([0.5, -2.0, 1.0])
    assert_allclose(project_to_truncation(np.tile(X, (t.size, 1)), N).a0, X, atol=1e-13)


def test_projection_of_saw_tooth():
    N = 6
    t, _ = quadrature_grid(64)
    P = project_to_truncation((t - 0.5)[:, None], N)
    n = np.arange(1, N + 1)
    assert_allclose(P.b[:, 0], -1 / (n * np.pi), atol=1e-10)
    assert np.abs(P.c).max() <= 1e-10
    assert abs(P.a0[0]) <= 1e-14


def test_projection_grid_guard():
    t, _ = quadrature_grid(10)
    with pytest.raises(InputError):
        project_to_truncation(np.zeros((t.size, 3)), 3)


def test_projection_exact_on_trig_polynomials(rng):
    for N in (1, 5, 9):
        u = FourierPath.random(rng, 3, N)
        t, _ = quadrature_grid(4 * N + 4)
        P = project_to_truncation(u(t), N)
        assert_allclose(P.to_vector(), u.to_vector(), atol=1e-10)


def test_bracket_commutes_with_projection(rng):
    alg = catalog.load("su3").algebra
    N = 3
    u = FourierPath.random(rng, alg.dim, N)
    xi = rng.standard_normal(alg.dim)
    t, _ = quadrature_grid(4 * N + 4)
    lhs = bracket_with_constant(alg, project_to_truncation(u(t), N), xi)
    rhs = project_to_truncation(alg.bracket(u(t), xi), N)
    assert_allclose(lhs.to_vector(), rhs.to_vector(), atol=1e-12)


def test_linearity(rng):
    u, v = FourierPath.random(rng, 3, 3), FourierPath.random(rng, 3, 5)
    w = 2.0 * u - 0.5 * v
    t = np.linspace(0, 1, 11)
    assert_allclose(w(t), 2.0 * u(t) - 0.5 * v(t), atol=1e-14)
    assert_allclose(integral_01(w), 2.0 * integral_01(u) - 0.5 * integral_01(v), atol=1e-15)


def test_l2_inequality_examples():
    X = FourierPath.constant(np.array([1.0, 2.0, -1.0]))
    rep = check_l2_inequality(X, 1.0)
    assert_allclose(rep.lhs, rep.bound, rtol=1e-15)
    rep = check_l2_inequality(FourierPath.mode(E[0], 1, "sin"), 1.0)
    assert abs(rep.lhs) <= 1e-30
    assert_allclose(rep.bound, 0.5)


@given(seed=st.integers(0, 2**32 - 1), N=st.integers(0, 8), t=st.floats(0.0, 1.0))
def test_l2_inequality_property(seed, N, t):
    u = FourierPath.random(np.random.default_rng(seed), 3, N, decay=0.0)
    assert check_l2_inequality(u, t).slack >= -1e-12


def test_json_round_trip(rng):
    u = FourierPath.random(rng, 3, 2)
    v = FourierPath.from_json(u.to_json())
    assert_allclose(v.to_vector(), u.to_vector())
    assert set(u.to_json()) == {"N", "a0", "modes"}
    with pytest.raises(InputError):
        FourierPath.from_json({"N": 2, "a0": [0, 0, 0], "modes": [{"b": [0, 0, 0]}]})


def test_fd4_derivative_is_fourth_order():
    errs = []
    for M in (32, 64):
        t = np.linspace(0, 1, M + 1)
        d = fd4_derivative(np.sin(3 * t)[:, None], 1 / M)
        errs.append(np.abs(d[:, 0] - 3 * np.cos(3 * t)).max())
    assert errs[0] / errs[1] > 12


def test_group_path(su2):
    alg = su2.algebra
    X = np.array([0.4, -0.2, 0.9])
    M = 64
    t = np.linspace(0, 1, M + 1)
    g = GroupPath(alg.exp(np.multiply.outer(t, X)))
    assert g.M == M
    assert g.is_continuous(5.0)
    assert_allclose(g.start, np.eye(alg.size), atol=1e-15)
    assert_allclose(g(0.37), alg.exp(0.37 * X), atol=1e-7)
    assert_allclose(g.derivative_samples()[10], alg.exp(t[10] * X) @ alg.matrix(X), atol=1e-7)
    with pytest.raises(InputError):
        GroupPath(np.zeros((5, alg.size, alg.size)))
