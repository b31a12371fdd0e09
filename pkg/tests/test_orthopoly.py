import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_hermite, gammaln

from janossy.equilibrium import Potential, gue_potential
from janossy.errors import DomainError
from janossy.fredholm import det1m, discretize, gap_probs, resolvent
from janossy.numcore import composite_rule, gauss_legendre, halfline_rule
from janossy.orthopoly import (
    WeightSpec, build_recurrence, cd_kernel, cd_kernel_sum, correlation_k, eval_phi, janossy_k, l_kernel_cd,
    phi_matrix, phi_value,
)

V = gue_potential()


def table(n, K=None, c=None):
    return build_recurrence(WeightSpec(V, n, c), K if K is not None else n + 1)


def verification_rule(lo=-2.5, hi=2.5, panels=500):
    edges = np.linspace(lo, hi, panels + 1)
    return composite_rule(gauss_legendre(12), list(zip(edges[:-1], edges[1:])))


@pytest.mark.parametrize("n", [1, 5, 16, 64])
def test_gue_beta(n):
    T = table(n, K=2 * n if n > 1 else 4)
    k = np.arange(1, T.K + 1)
    np.testing.assert_allclose(T.beta[1:], k / (4 * n), rtol=1e-10)
    assert np.max(np.abs(T.alpha)) <= 1e-12
    assert np.all(T.beta > 0)


def test_gue_beta_large_n():
    n = 512
    T = table(n, K=n + 1)
    k = np.arange(1, T.K + 1)
    np.testing.assert_allclose(T.beta[1:], k / (4 * n), rtol=1e-10)
    mant, e = eval_phi(T, n, 1.0)
    assert 0.1 <= abs(mant) < 10 and np.isfinite(mant)


def test_leading_coefficients_grow():
    T = table(8, K=20)
    # gamma_k = h_k^{-1/2}; h_k = k! (1/(4n))^k mu_0 for GUE, so gamma_k / gamma_{k+1} -> 0
    ratios = np.exp(T.log_gamma[:-1] - T.log_gamma[1:])
    k = np.arange(T.K)
    np.testing.assert_allclose(ratios, np.sqrt((k + 1) / (4 * 8)), rtol=1e-10)


def test_halfline_alpha0():
    T = build_recurrence(WeightSpec(V, 1, 0.0), 3)
    assert T.alpha[0] == pytest.approx(-1 / math.sqrt(2 * math.pi), abs=1e-10)


def test_resolution_doubling():
    w = WeightSpec(Potential([0, 0, 0.5, 0, 1]), 12, 0.9)
    a = build_recurrence(w, 14, panels=64)
    b = build_recurrence(w, 14, panels=128)
    np.testing.assert_allclose(a.alpha, b.alpha, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(a.beta, b.beta, rtol=1e-10)


def _hermite_phi(n, k, x):
    # monic orthogonal polynomials of e^{-2n x^2}: (2 sqrt(2n))^{-k} H_k(sqrt(2n) x)
    s = math.sqrt(2 * n)
    log_h = -k * math.log(4 * 2 * n) + 0.5 * math.log(math.pi) + k * math.log(2) + gammaln(k + 1) - math.log(s)
    monic = eval_hermite(k, s * x) / (2 * s) ** k
    return monic * math.exp(-n * x * x) / math.exp(0.5 * log_h)


def test_phi_against_hermite():
    n = 8
    T = table(n, K=10)
    assert phi_value(T, 8, 0.5) == pytest.approx(_hermite_phi(n, 8, 0.5), rel=1e-9)
    x = np.linspace(-1.5, 1.5, 7)
    np.testing.assert_allclose(phi_value(T, 0, x), np.exp(-n * x * x) / math.sqrt(T.h[0]), rtol=1e-13)


def test_orthonormality_independent_grid():
    n = 10
    T = table(n, K=24)
    rule = verification_rule()
    P = phi_matrix(T, 25, rule.nodes)
    G = (P * rule.weights) @ P.T
    assert np.max(np.abs(G - np.eye(25))) <= 1e-8


def test_eval_phi_out_of_range():
    T = table(4)
    with pytest.raises(DomainError):
        eval_phi(T, 6, 0.0)


def test_cd_forms_agree():
    n = 10
    T = table(n)
    assert cd_kernel(T, n, 0.3, 0.7) == pytest.approx(cd_kernel_sum(T, n, 0.3, 0.7), rel=1e-10)
    rng = np.random.default_rng(11)
    x, y = rng.uniform(-1.3, 1.3, (2, 50))
    a = np.asarray(cd_kernel(T, n, x, y))
    b = np.asarray(cd_kernel_sum(T, n, x, y))
    assert np.all(np.abs(a - b) <= 1e-9 * (1 + np.abs(b)))
    # diagonal by the derivative form
    np.testing.assert_allclose(cd_kernel(T, n, x, x), cd_kernel_sum(T, n, x, x), rtol=1e-10)


def test_cd_trace_and_idempotence():
    n = 12
    T = table(n)
    rule = verification_rule()
    t = rule.nodes
    assert rule.integrate(lambda s: cd_kernel(T, n, s, s)) == pytest.approx(n, abs=1e-8)
    kk = np.sum(rule.weights * cd_kernel(T, n, 0.2, t) * cd_kernel(T, n, t, 0.4))
    assert kk == pytest.approx(cd_kernel(T, n, 0.2, 0.4), abs=1e-8)


def test_correlations():
    n = 6
    T = table(n)
    assert correlation_k(T, n, [0.3]) == pytest.approx(cd_kernel(T, n, 0.3, 0.3)) and correlation_k(T, n, [0.3]) >= 0
    assert abs(correlation_k(T, n, [0.3, 0.3])) <= 1e-12
    rule = verification_rule()
    assert rule.integrate(lambda s: np.array([correlation_k(T, n, [v]) for v in s])) == pytest.approx(n, abs=1e-8)
    with pytest.raises(DomainError):
        correlation_k(T, 2, [0.1, 0.2, 0.3])


def _window_operator(n, c):
    T = table(n)

    def kern(X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X, float), np.asarray(Y, float))
        return np.asarray(cd_kernel(T, n, X.ravel(), Y.ravel())).reshape(X.shape)

    d0 = cd_kernel(T, n, c, c)
    rule = halfline_rule(c, "right", 0.5 / math.sqrt(n), 20, envelope=lambda x: cd_kernel(T, n, x, x) / d0)
    return discretize(kern, rule)


def test_l_kernel_symmetry_positivity():
    n, c = 12, 0.95
    Tt = table(n, c=c)
    rng = np.random.default_rng(2)
    x, y = c + rng.uniform(0, 0.6, (2, 10))
    np.testing.assert_allclose(l_kernel_cd(Tt, n, x, y), l_kernel_cd(Tt, n, y, x), rtol=1e-12, atol=0)
    assert np.all(np.asarray(l_kernel_cd(Tt, n, x, x)) >= 0)
    with pytest.raises(DomainError):
        l_kernel_cd(Tt, n, c - 0.1, c + 0.1)


@pytest.mark.parametrize("n,c", [(12, 1.05), (8, 1.0), (20, 0.95)])
def test_l_kernel_equals_resolvent(n, c):
    op = _window_operator(n, c)
    Tt = table(n, c=c)
    pts = [(c + 0.05, c + 0.15), (c + 0.02, c + 0.02), (c + 0.3, c + 0.1)]
    if (n, c) == (12, 1.05):
        pts.append((1.1, 1.2))
    for x, y in pts:
        assert l_kernel_cd(Tt, n, x, y) == pytest.approx(resolvent(op, x, y), rel=1e-6)


def test_janossy_densities():
    n, c = 8, 1.0
    op = _window_operator(n, c)
    Tt = table(n, c=c)
    D = det1m(op)
    assert janossy_k(Tt, n, [], D) == D
    rng = np.random.default_rng(4)
    for _ in range(5):
        assert janossy_k(Tt, n, c + rng.uniform(0, 0.5, 3), D) >= 0
    x, w = op.nodes, op.rule.weights
    L = np.asarray(l_kernel_cd(Tt, n, x[:, None], x[None, :])).reshape(x.size, x.size)
    d = np.diag(L)
    J2 = 0.5 * D * np.sum(w[:, None] * w[None, :] * (d[:, None] * d[None, :] - L * L.T))
    assert J2 == pytest.approx(gap_probs(op, 2)[2], abs=1e-7)
    with pytest.raises(DomainError):
        janossy_k(Tt, n, [c - 0.5], D)


@settings(max_examples=10, deadline=None)
@given(n=st.integers(2, 24), x=st.floats(-1.2, 1.2), y=st.floats(-1.2, 1.2))
def test_cd_property(n, x, y):
    T = table(n)
    a = cd_kernel(T, n, x, y)
    assert abs(a - cd_kernel_sum(T, n, x, y)) <= 1e-9 * (1 + abs(a))
    assert a == pytest.approx(cd_kernel(T, n, y, x), rel=1e-12, abs=1e-300)
