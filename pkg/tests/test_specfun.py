import cmath
import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as st

from janossy.errors import DomainError
from janossy.specfun import (
    OMEGA, TWO_THIRDS_PI, airy, airy_ai, airy_ai_prime, bessel_asymptotic_matrix, bessel_i0, bessel_i0_exp,
    bessel_i01, bessel_k0, bessel_k01, bessel_k1, bessel_Q, cpow, csqrt, directed_limit, hankel_h0_1,
    hankel_h0_2, jump_residual, model_PA, model_PB, twist,
)


def test_airy_at_zero():
    assert airy_ai(0.0) == pytest.approx(0.3550280538878172, abs=1e-16)
    assert airy_ai_prime(0.0) == pytest.approx(-0.2588194037928068, abs=1e-16)


def test_airy_connection_identity():
    z = 1.3 + 0.7j
    s = airy_ai(z) + OMEGA * airy_ai(OMEGA * z) + OMEGA ** 2 * airy_ai(OMEGA ** 2 * z)
    assert abs(s) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.0, 10.0), t=st.floats(-math.pi, math.pi))
def test_airy_vs_scipy(r, t):
    z = r * cmath.exp(1j * t)
    ai, aip, _, _ = sp.airy(z)
    a, ap = airy(np.array([z]))
    # absolute 1e-11 where |Ai| <= 1; in the growth sectors |Ai| reaches ~1e7 at |z| = 10,
    # beyond what absolute accuracy in double precision can mean, so scale there
    assert abs(a[0] - ai) <= 1e-11 * max(1.0, abs(ai))
    assert abs(ap[0] - aip) <= 1e-11 * max(1.0, abs(aip))


def test_airy_ode_residual():
    h = 1e-3
    for z in [0.5, -3.0, 5.0 + 2.0j, -7.5, 8.0 * cmath.exp(0.4j)]:
        a = airy(np.array([z - h, z, z + h]))[0]
        d2 = (a[0] - 2 * a[1] + a[2]) / h ** 2
        assert abs(d2 - z * a[1]) <= 1e-5 * max(1.0, abs(z * a[1]))
        # exact form: derivative of Ai' equals z Ai
        ap = airy(np.array([z - h, z + h]))[1]
        assert abs((ap[1] - ap[0]) / (2 * h) - z * a[1]) <= 1e-6 * max(1.0, abs(z))


def test_airy_representation_overlap():
    # series and asymptotic branches meet at |z| = 7: continuity across the switch
    for t in [0.0, 1.0, 2.0, 3.0]:
        zs = np.array([6.999999 * cmath.exp(1j * t), 7.000001 * cmath.exp(1j * t)])
        a = airy(zs)[0]
        ref = sp.airy(zs)[0]
        np.testing.assert_allclose(a, ref, rtol=1e-9, atol=1e-15)


def test_airy_out_of_range():
    with pytest.raises(DomainError):
        airy_ai(50.0)


def test_bessel_i0_values():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-15)
    for x in [0.3, 5.0, 12.0, 35.0, 60.0, 150.0, 199.0]:
        assert bessel_i0(x) == pytest.approx(sp.i0(x), rel=1e-10)


def test_bessel_i0_exp_no_overflow():
    m, e = bessel_i0_exp(1000.0)
    m, e = float(np.squeeze(m)), int(np.squeeze(e))
    ref_log10 = (1000.0 + math.log(sp.i0e(1000.0))) / math.log(10)
    assert 1 <= m < 10
    assert e + math.log10(m) == pytest.approx(ref_log10, rel=1e-13)


def test_bessel_wronskian():
    x = 2.0
    i0, i1 = bessel_i01(x)
    k0, k1 = bessel_k01(x)
    # I0 K0' - I0' K0 = -I0 K1 - I1 K0 = -1/x
    assert (-i0 * k1 - i1 * k0).real == pytest.approx(-0.5, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.05, 150.0), t=st.floats(-math.pi / 2, math.pi / 2))
def test_bessel_complex_vs_scipy(r, t):
    z = r * cmath.exp(1j * t)
    i0, i1 = bessel_i01(z)
    k0, k1 = bessel_k01(z)
    assert abs(i0 / sp.iv(0, z) - 1) <= 1e-10
    assert abs(i1 / sp.iv(1, z) - 1) <= 1e-10
    assert abs(k0 / sp.kv(0, z) - 1) <= 1e-10
    assert abs(k1 / sp.kv(1, z) - 1) <= 1e-10


def test_bessel_k_domain():
    assert bessel_k0(1.5) == pytest.approx(sp.k0(1.5), rel=1e-12)
    assert bessel_k1(1.5) == pytest.approx(sp.k1(1.5), rel=1e-12)
    with pytest.raises(DomainError):
        bessel_k0(0.0)
    with pytest.raises(DomainError):
        bessel_k0(-1.0)


@pytest.mark.parametrize("z", [0.7, 3.0 + 1.0j, 15.0, 8.0 - 6.0j, 0.2j, -2.0 - 0.5j, 120.0 + 1.0j])
def test_hankel_vs_scipy(z):
    # H^(1) is validated for arg z in (-pi/2, pi], H^(2) for (-pi, pi/2]
    if cmath.phase(z) > -math.pi / 2:
        assert abs(hankel_h0_1(z) / sp.hankel1(0, z) - 1) <= 1e-10
    if cmath.phase(z) <= math.pi / 2:
        assert abs(hankel_h0_2(z) / sp.hankel2(0, z) - 1) <= 1e-10


def test_hankel_domain():
    with pytest.raises(DomainError):
        hankel_h0_2(-2.0 + 0.5j)


def test_branch_consistency():
    rng = np.random.default_rng(5)
    z = rng.uniform(-5, 5, 100) + 1j * rng.uniform(-5, 5, 100)
    s = csqrt(z)
    np.testing.assert_allclose(s ** 3, cpow(z, 1.5), rtol=1e-13)
    np.testing.assert_allclose(s * s, z, rtol=1e-13)
    assert np.all(csqrt(z[z.real > 0]).real > 0)


def test_Q_jumps():
    assert jump_residual("Q", -2.0) <= 1e-8
    assert jump_residual("Q", 2 * cmath.exp(1j * TWO_THIRDS_PI)) <= 1e-8
    # operational +/- limits by offsets agree with the pinned-sector boundary values
    Qp = directed_limit(bessel_Q, -2.0, 1j)
    Qm = directed_limit(bessel_Q, -2.0, -1j)
    assert np.abs(Qp - Qm @ np.array([[0, 1], [-1, 0]])).max() <= 1e-6


def test_Q_determinant_constant():
    d = [np.linalg.det(bessel_Q(z)) for z in (1.0, 4.0, 2.0 + 1.0j)]
    for v in d:
        assert abs(v - d[0]) <= 1e-10
    assert d[0] == pytest.approx(2.0, abs=1e-12)


def test_Q_region_errors():
    with pytest.raises(DomainError):
        bessel_Q(-1.0)  # on the cut without a region
    with pytest.raises(DomainError):
        bessel_Q(1.0, "II")  # region/argument mismatch
    with pytest.raises(DomainError):
        bessel_Q(0.0)


def test_PA_jumps_and_asymptotics():
    assert jump_residual("PA", 1.0) <= 1e-9
    assert jump_residual("PA", 2 * cmath.exp(1j * TWO_THIRDS_PI)) <= 1e-9
    assert jump_residual("PA", -3.0) <= 1e-9
    for t in (0.3, 1.5, 2.5, -1.0, -2.8):
        z = 30 * cmath.exp(1j * t)
        X = model_PA(z) @ np.linalg.inv(twist(z))
        assert np.abs(X - np.eye(2)).max() <= 0.05
    assert abs(np.linalg.det(model_PA(1 + 1j)) - 1) <= 1e-12


def test_PB_jumps_det_asymptotics():
    for z in (2 * cmath.exp(1j * TWO_THIRDS_PI), 2 * cmath.exp(-1j * TWO_THIRDS_PI), -5.0):
        assert jump_residual("PB", z) <= 1e-8
    d = [np.linalg.det(model_PB(z)) for z in (1.0, 9.0, 25.0)]
    for v in d:
        assert abs(v - d[0]) <= 1e-9
    A = bessel_asymptotic_matrix(100.0)
    assert np.abs(np.linalg.solve(A, model_PB(100.0)) - np.eye(2)).max() <= 0.15


def test_PB_literal_right_product_has_order_one_entry():
    # P_B A^{-1} is conjugated by zeta^{sigma3/4}: its (2,1) entry does not decay
    A = bessel_asymptotic_matrix(100.0)
    X = model_PB(100.0) @ np.linalg.inv(A)
    assert abs(X[1, 0]) > 0.15


def test_twenty_contour_points_each():
    from janossy.selftest import contour_points
    for model in ("Q", "PA", "PB"):
        pts = contour_points(model, 20)
        assert len(pts) == 20
        assert max(jump_residual(model, z) for z in pts) <= 1e-8


def test_jump_residual_rejects_off_contour():
    with pytest.raises(DomainError):
        jump_residual("Q", 1.0 + 1.0j)
    with pytest.raises(DomainError):
        jump_residual("Q", 2.0)
