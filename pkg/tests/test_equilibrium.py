import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from janossy.errors import ConstraintInfeasibleError, DomainError, UnsupportedPotentialError
from janossy.equilibrium import (
    Potential, density_at, edge_constant, g_phi, gue_potential, solve_constrained, solve_full_line,
)


def gue_b(c):
    return (c - 2 * math.sqrt(c * c + 3)) / 3


@pytest.fixture(scope="module")
def gue():
    return solve_full_line(gue_potential())


@pytest.fixture(scope="module")
def quartic():
    return solve_full_line(Potential([0, 0, 0, 0, 1]))


def test_potential_validation():
    with pytest.raises(DomainError):
        Potential([0, 0, 0, 1])
    with pytest.raises(DomainError):
        Potential([0, 0, -1])
    V = Potential([1, 0, 2])
    assert V(2.0) == 9.0 and V.deriv(1.0) == 4.0 and V.degree == 2 and V.is_even


def test_gue_band_and_density(gue):
    assert gue.left == pytest.approx(-1.0, abs=1e-10)
    assert gue.right == pytest.approx(1.0, abs=1e-10)
    assert density_at(gue, 0.0) == pytest.approx(2 / math.pi, rel=1e-13)
    assert density_at(gue, 1.0) == 0.0 and density_at(gue, -1.0) == 0.0
    assert density_at(gue, 1.5) == 0.0
    x = np.linspace(-0.99, 0.99, 17)
    np.testing.assert_allclose(density_at(gue, x), 2 / math.pi * np.sqrt(1 - x * x), rtol=1e-12)


def test_gue_edge_quantities(gue):
    assert gue.beta_edge == pytest.approx(2 * math.sqrt(2) / math.pi, rel=1e-13)
    # Airy-scaling constant (pi beta)^{2/3}; the (beta/2)^{2/3} formula would give (sqrt2/pi)^{2/3} ~ 0.766,
    # which contradicts the Monte Carlo edge statistics (see test_sampler)
    assert edge_constant(gue) == pytest.approx(2.0, rel=1e-13)
    assert gue.c_V == pytest.approx(2.0, rel=1e-13) and gue.c_V > 0
    assert gue.ell == pytest.approx(-1 - 2 * math.log(2), abs=1e-12)


def test_mass_and_euler_lagrange(gue, quartic):
    for meas in (gue, quartic):
        assert meas.mass() == pytest.approx(1.0, abs=1e-10)
        x = np.linspace(meas.left, meas.right, 12)[1:-1]
        assert np.max(np.abs(meas.el_residual(x))) <= 1e-8
        out = meas.el_residual(meas.right + np.array([0.1, 1.0]))
        assert np.all(out < -1e-6)


def _energy_minimizer(V, N=400, lo=-1.4, hi=1.4):
    """Active-set KKT solve of min w'Lw + v'w, sum w = 1, w >= 0 on a cell grid."""
    h = (hi - lo) / N
    x = lo + h * (np.arange(N) + 0.5)
    D = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(D, 1.0)
    L = -np.log(D)
    np.fill_diagonal(L, -math.log(h) + 1.5)  # self-energy of a uniform cell
    v = V(x)
    S = np.ones(N, bool)
    for _ in range(500):
        idx = np.flatnonzero(S)
        k = idx.size
        A = np.zeros((k + 1, k + 1))
        A[:k, :k] = 2 * L[np.ix_(idx, idx)]
        A[:k, k] = A[k, :k] = 1.0
        sol = np.linalg.solve(A, np.concatenate([-v[idx], [1.0]]))
        w, lam = sol[:k], sol[k]
        if w.min() < 0:
            S[idx[w < 0]] = False
            continue
        full = np.zeros(N)
        full[idx] = w
        viol = ~S & (2 * L @ full + v + lam < -1e-12)
        if not viol.any():
            return x, full / h, h
        S[viol] = True
    raise RuntimeError("active set did not settle")


def test_quartic_against_energy_minimization(quartic):
    x, dens, h = _energy_minimizer(quartic.potential)
    supp = x[dens > 0]
    assert abs(supp.min() - quartic.left) <= h and abs(supp.max() - quartic.right) <= h
    assert np.sum(np.abs(dens - density_at(quartic, x))) * h <= 5e-3
    assert quartic.mass() == pytest.approx(1.0, abs=1e-10)


def test_rescaling_records_scale():
    raw = solve_full_line(Potential([0, 0, 0, 0, 1]), rescale=False)
    norm = solve_full_line(Potential([0, 0, 0, 0, 1]))
    assert norm.right == pytest.approx(1.0, abs=1e-13)
    assert norm.scale == pytest.approx(raw.right, rel=1e-13)
    # x^4 band: a^4 = 4/3
    assert raw.right == pytest.approx((4 / 3) ** 0.25, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(a=st.floats(0.0, 3.0), b=st.floats(0.05, 2.0))
def test_mass_property(a, b):
    meas = solve_full_line(Potential([0, 0, a, 0, b]))
    assert meas.mass() == pytest.approx(1.0, abs=1e-10)
    assert meas.right == pytest.approx(1.0, abs=1e-12)


def test_multicut_rejected():
    # deep double well: the density vanishes in the middle
    with pytest.raises(UnsupportedPotentialError):
        solve_full_line(Potential([0, 0, -6, 0, 1]))


def test_g_function_relations(quartic):
    gp = g_phi(quartic)
    x = np.linspace(quartic.left, quartic.right, 12)[1:-1]
    assert np.max(np.abs(gp.el_residual(x))) <= 1e-8
    # g+ - g- = 2 pi i left of the band
    for z in (quartic.left - 0.3, quartic.left - 2.0):
        assert gp.g(z, 1) - gp.g(z, -1) == pytest.approx(2j * math.pi, abs=1e-12)
    # beyond the right edge the E-L expression equals -phi
    z = quartic.right + np.array([0.1, 0.5, 1.0])
    np.testing.assert_allclose(gp.el_residual(z), -gp.phi(z), atol=1e-8)
    with pytest.raises(DomainError):
        gp.g(0.0)


def test_g_off_axis_is_log_potential(gue):
    # independent quadrature of int log(z - x) psi(x) dx off the real axis
    from scipy.integrate import quad
    z = 0.3 + 0.7j
    re = quad(lambda x: math.log(abs(z - x)) * density_at(gue, x), -1, 1, limit=200)[0]
    assert gue.g(z).real == pytest.approx(re, abs=1e-10)


@pytest.mark.parametrize("c", [1.0, 0.95, 0.9, 0.5, 0.0])
def test_constrained_gue_closed_form(c):
    meas = solve_constrained(gue_potential(), c)
    assert meas.left == pytest.approx(gue_b(c), abs=1e-10)
    assert meas.mass() == pytest.approx(1.0, abs=1e-10)


def test_constrained_at_free_edge_matches_free(gue):
    meas = solve_constrained(gue_potential(), 1.0)
    x = np.linspace(-0.9, 0.9, 7)
    np.testing.assert_allclose(density_at(meas, x), density_at(gue, x), atol=1e-10)
    above = solve_constrained(gue_potential(), 1.2)
    np.testing.assert_allclose(density_at(above, x), density_at(gue, x), atol=1e-10)


def test_constrained_edge_blowup_trend():
    eps = 1e-2
    meas = solve_constrained(gue_potential(), 1 - eps)
    c = 1 - eps
    target = eps / 2 * 2 * math.sqrt(2) / math.pi
    for d in (1e-6, 1e-8):
        assert density_at(meas, c - d) * math.sqrt(d) == pytest.approx(target, rel=0.05)


def test_constrained_continuity():
    free_b = -1.0
    cs = np.array([0.99, 0.98, 0.96, 0.92])
    bs = np.array([solve_constrained(gue_potential(), c).left for c in cs])
    K = np.max(np.abs(bs - free_b) / (1 - cs))
    assert np.all(np.abs(bs - free_b) <= K * (1 - cs) + 1e-14)
    assert K < 1.0


def test_constrained_infeasible():
    with pytest.raises(ConstraintInfeasibleError):
        solve_constrained(gue_potential(), -1.5)
