"""Airy, modified Bessel and Hankel functions of complex argument, plus the
explicit 2x2 model solutions (Bessel matrix Q, Airy model P_A, Bessel model
P_B) and helpers to check their jump relations.

Branch convention: principal branches with the cut on the negative real
axis, arg in (-pi, pi]. Boundary values on a contour are taken by
evaluating the formula of the adjacent region on the contour itself, with
the argument pinned to that region's closed sector (so -2 seen from below
has arg -pi).
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

Matrix2 = np.ndarray  # complex (2, 2)

AI0 = 0.355028053887817239260063186004
AIP0 = -0.258819403792806798405183560189
EULER_GAMMA = 0.577215664901532860606512090082
OMEGA = np.exp(2j * np.pi / 3)
SIGMA3 = np.diag([1.0, -1.0])

AIRY_SWITCH = 7.0
AIRY_MAX = 40.0
AIRY_LAPLACE_MIN = 1.5
I_SERIES_MAX = 10.0
I_ASYMP_MIN = 40.0
K_SERIES_MAX = 2.0
K_ASYMP_MIN = 20.0
BESSEL_MAX = 200.0
LOG10_OVERFLOW = 300.0


# ------------------------------------------------------------------ branches


def carg(z, arg: Optional[float] = None):
    """Principal argument, or ``arg`` when given (used on the cut)."""
    return np.angle(z) if arg is None else np.full(np.shape(z), float(arg))


def cpow(z, p: float, arg: Optional[float] = None):
    """z**p on the principal branch; ``arg`` overrides the argument."""
    z = np.asarray(z, dtype=complex)
    return np.abs(z) ** p * np.exp(1j * p * carg(z, arg))


def csqrt(z, arg: Optional[float] = None):
    return cpow(z, 0.5, arg)


def pin_arg(zeta: complex, lo: float, hi: float, slack: float = 1e-12) -> float:
    """Argument of ``zeta`` represented inside the closed sector [lo, hi]."""
    a = math.atan2(zeta.imag, zeta.real)
    for cand in (a, a + 2 * math.pi, a - 2 * math.pi):
        if lo - slack <= cand <= hi + slack:
            return min(max(cand, lo), hi)
    raise DomainError(f"arg {a:.6g} of {zeta} is outside the sector [{lo:.6g}, {hi:.6g}]")


# --------------------------------------------------------------------- Airy


def _airy_series(z):
    z3 = z ** 3
    f = np.ones_like(z)
    g = z.copy()
    fp = np.zeros_like(z)
    gp = np.ones_like(z)
    t, s = f.copy(), g.copy()
    u, v = z * z / 2.0, gp.copy()
    fp = fp + u
    for k in range(0, 60):
        t = t * z3 / ((3 * k + 2) * (3 * k + 3))
        s = s * z3 / ((3 * k + 3) * (3 * k + 4))
        v = v * z3 / ((3 * k + 1) * (3 * k + 3))
        if k >= 1:
            u = u * z3 / ((3 * k) * (3 * k + 2))
            fp = fp + u
        f = f + t
        g = g + s
        gp = gp + v
        if k > 2 and np.all(np.abs(t) + np.abs(s) + np.abs(u) + np.abs(v)
                            <= 1e-18 * (np.abs(f) + np.abs(g) + np.abs(fp) + np.abs(gp))):
            break
    ai = AI0 * f + AIP0 * g
    aip = AI0 * fp + AIP0 * gp
    return ai, aip


def _airy_asymptotic(z):
    """Large |z| with |arg z| <= 2pi/3."""
    z14 = cpow(z, 0.25)
    xi = (2.0 / 3.0) * cpow(z, 1.5)
    terms_u = [np.ones_like(z)]
    terms_v = [np.ones_like(z)]
    uk = 1.0
    for k in range(1, 40):
        uk = uk * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        vk = -(6 * k + 1) / (6 * k - 1) * uk
        terms_u.append((-1) ** k * uk / xi ** k)
        terms_v.append((-1) ** k * vk / xi ** k)
    tu = np.array(terms_u)
    tv = np.array(terms_v)
    # optimal truncation: stop at the smallest term
    cut = np.argmin(np.abs(tu), axis=0)
    idx = np.arange(tu.shape[0])[:, None]
    mask = idx < cut[None, :]
    su = np.where(mask, tu, 0).sum(axis=0)
    sv = np.where(mask, tv, 0).sum(axis=0)
    pref = np.exp(-xi) / (2.0 * math.sqrt(math.pi))
    return pref * su / z14, -pref * z14 * sv


_AIRY_LAPLACE = {}


def _airy_laplace(z):
    """Ai, Ai' from e^{-xi}/pi int_0^inf exp(-sqrt(z) t^2) cos(t^3/3) dt.

    Used where Ai decays (|arg z| < pi/3, moderate |z|) and the Maclaurin
    series loses digits to cancellation.
    """
    if "gl" not in _AIRY_LAPLACE:
        from .numcore import composite_rule, gauss_legendre

        edges = np.linspace(0.0, 7.0, 15)
        rule = composite_rule(gauss_legendre(24), list(zip(edges[:-1], edges[1:])))
        _AIRY_LAPLACE["gl"] = (rule.nodes, rule.weights * np.cos(rule.nodes ** 3 / 3.0))
    t, wc = _AIRY_LAPLACE["gl"]
    sz = cpow(z, 0.5)
    e = np.exp(-np.multiply.outer(sz, t * t))
    i0 = e @ wc
    i2 = e @ (wc * t * t)
    xi = (2.0 / 3.0) * sz ** 3
    pref = np.exp(-xi) / np.pi
    return pref * i0, -pref * (sz * i0 + i2 / (2.0 * sz))


def airy(z):
    """(Ai(z), Ai'(z)) for |z| <= 40. Real input gives real output."""
    zin = np.asarray(z)
    real = not np.iscomplexobj(zin)
    zc = np.atleast_1d(zin.astype(complex))
    if np.any(np.abs(zc) > AIRY_MAX):
        raise DomainError(f"Airy function validated only for |z| <= {AIRY_MAX}")
    ai = np.empty_like(zc)
    aip = np.empty_like(zc)
    r = np.abs(zc)
    small = r <= AIRY_SWITCH
    decay = small & (r >= AIRY_LAPLACE_MIN) & (np.abs(np.angle(zc)) < np.pi / 3)
    small &= ~decay
    if np.any(small):
        ai[small], aip[small] = _airy_series(zc[small])
    if np.any(decay):
        ai[decay], aip[decay] = _airy_laplace(zc[decay])
    small |= decay
    big = ~small
    if np.any(big):
        zb = zc[big]
        inner = np.abs(np.angle(zb)) <= 2 * np.pi / 3
        a = np.empty_like(zb)
        ap = np.empty_like(zb)
        if np.any(inner):
            a[inner], ap[inner] = _airy_asymptotic(zb[inner])
        outer = ~inner
        if np.any(outer):
            zo = zb[outer]
            a1, ap1 = _airy_asymptotic(OMEGA * zo)
            a2, ap2 = _airy_asymptotic(OMEGA ** 2 * zo)
            a[outer] = -OMEGA * a1 - OMEGA ** 2 * a2
            ap[outer] = -OMEGA ** 2 * ap1 - OMEGA * ap2
        ai[big], aip[big] = a, ap
    if real:
        ai, aip = ai.real, aip.real
    shape = zin.shape
    return ai.reshape(shape), aip.reshape(shape)


def airy_ai(z):
    return airy(z)[0]


def airy_ai_prime(z):
    return airy(z)[1]


# ------------------------------------------------------------------- Bessel


def _i01_series(z):
    q = (z / 2.0) ** 2
    t0 = np.ones_like(z)
    t1 = z / 2.0
    s0, s1 = t0.copy(), t1.copy()
    for k in range(1, 120):
        t0 = t0 * q / (k * k)
        t1 = t1 * q / (k * (k + 1))
        s0 = s0 + t0
        s1 = s1 + t1
        if np.all(np.abs(t0) <= 1e-18 * np.abs(s0)) and np.all(np.abs(t1) <= 1e-18 * np.abs(s1) + 1e-300):
            break
    return s0, s1


def _i01_trapezoid(z):
    """I_nu(z) = (1/pi) int_0^pi exp(z cos t) cos(nu t) dt by the periodic trapezoid rule."""
    n = int(np.max(np.abs(z))) + 48
    t = (np.arange(n) + 0.5) * np.pi / n
    c = np.cos(t)
    e = np.exp(np.multiply.outer(z, c))
    return e.mean(axis=-1), (e * c).mean(axis=-1)


def _i01_asymptotic_scaled(x):
    """e^{-x} (I0, I1) for large real x."""
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        term = np.ones_like(x)
        total = term.copy()
        best = np.abs(term)
        for k in range(1, 60):
            term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
            grow = np.abs(term) > best
            if np.all(grow):
                break
            total = total + np.where(grow, 0.0, term)
            best = np.minimum(best, np.abs(term))
        out.append(total / np.sqrt(2 * np.pi * x))
    return out[0], out[1]


def bessel_i01(z):
    """(I0(z), I1(z)) for complex |z| <= 200."""
    zin = np.asarray(z)
    real = not np.iscomplexobj(zin)
    zc = np.atleast_1d(zin.astype(complex))
    if np.any(np.abs(zc) > BESSEL_MAX):
        raise DomainError(f"Bessel functions validated only for |z| <= {BESSEL_MAX}")
    i0 = np.empty_like(zc)
    i1 = np.empty_like(zc)
    small = np.abs(zc) <= I_SERIES_MAX
    if np.any(small):
        i0[small], i1[small] = _i01_series(zc[small])
    big = ~small
    if np.any(big):
        zb = zc[big]
        pos = (np.abs(zb.imag) == 0) & (zb.real > I_ASYMP_MIN)
        a = np.empty_like(zb)
        b = np.empty_like(zb)
        if np.any(pos):
            x = zb[pos].real
            s0, s1 = _i01_asymptotic_scaled(x)
            a[pos], b[pos] = s0 * np.exp(x), s1 * np.exp(x)
        if np.any(~pos):
            a[~pos], b[~pos] = _i01_trapezoid(zb[~pos])
        i0[big], i1[big] = a, b
    if real:
        i0, i1 = i0.real, i1.real
    return i0.reshape(zin.shape), i1.reshape(zin.shape)


def bessel_i0(x):
    """I0 for real x >= 0 (overflows to inf past ~700; see bessel_i0_exp)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bessel_i0 takes x >= 0")
    with np.errstate(over="ignore"):
        return bessel_i01(np.minimum(x, BESSEL_MAX))[0] if np.all(x <= BESSEL_MAX) else _i0_big(x)


def _i0_big(x):
    m, e = bessel_i0_exp(x)
    with np.errstate(over="ignore"):
        return m * 10.0 ** e


def bessel_i0_exp(x):
    """I0(x) as (mantissa, exponent10) with mantissa in [1, 10); no overflow."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0):
        raise DomainError("bessel_i0_exp takes x >= 0")
    log10 = np.empty_like(x)
    small = x <= BESSEL_MAX
    if np.any(small):
        log10[small] = np.log10(bessel_i01(x[small])[0])
    if np.any(~small):
        s0, _ = _i01_asymptotic_scaled(x[~small])
        log10[~small] = np.log10(s0) + x[~small] / math.log(10.0)
    e = np.floor(log10)
    return 10.0 ** (log10 - e), e.astype(int)


def bessel_i1(x):
    return bessel_i01(x)[1]


def _k01_series(z):
    q = (z / 2.0) ** 2
    i0, i1 = _i01_series(z)
    lg = np.log(z / 2.0)
    # K0
    t = np.ones_like(z)
    h = 0.0
    s0 = np.zeros_like(z)
    # K1 sum: (psi(k+1)+psi(k+2)) q^k / (k!(k+1)!)
    psi1 = -EULER_GAMMA
    psi2 = 1.0 - EULER_GAMMA
    t1 = np.ones_like(z)
    s1 = (psi1 + psi2) * t1
    for k in range(1, 80):
        t = t * q / (k * k)
        h += 1.0 / k
        s0 = s0 + h * t
        t1 = t1 * q / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        s1 = s1 + (psi1 + psi2) * t1
        if np.all(np.abs(t) < 1e-18) and np.all(np.abs(t1) < 1e-18):
            break
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / z + lg * i1 - (z / 4.0) * s1
    return k0, k1


def _k01_asymptotic(z):
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        term = np.ones_like(z)
        total = term.copy()
        best = np.abs(term)
        for k in range(1, 80):
            term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
            grow = np.abs(term) > best
            if np.all(grow):
                break
            total = total + np.where(grow, 0.0, term)
            best = np.minimum(best, np.abs(term))
        out.append(np.sqrt(np.pi / (2 * z)) * np.exp(-z) * total)
    return out[0], out[1]


_KQ_CACHE: dict = {}


def _k_nodes():
    if "gl" not in _KQ_CACHE:
        from .numcore import composite_rule, gauss_legendre

        edges = np.linspace(0.0, 7.0, 8)
        rule = composite_rule(gauss_legendre(24), list(zip(edges[:-1], edges[1:])))
        _KQ_CACHE["gl"] = (rule.nodes, rule.weights)
    return _KQ_CACHE["gl"]


def _k01_integral(z):
    """K0, K1 from the rotated integral over (1, inf); needs Re z >= 0, |z| >= 1."""
    y, w = _k_nodes()
    r = np.abs(z)
    th = np.angle(z)
    rot = np.exp(-1j * th)
    base = np.sqrt(np.multiply.outer(rot / r, y * y) + 2.0)  # (N, q)
    g = np.exp(-y * y) * w
    i0 = (g / base).sum(axis=-1)
    i1 = (g * y * y * base).sum(axis=-1)
    pref = np.exp(-z) * np.exp(-0.5j * th) / np.sqrt(r)
    return 2.0 * pref * i0, 2.0 * pref * i1


def _k01_right(z):
    """K0, K1 for Re z >= 0."""
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    r = np.abs(z)
    a = r <= K_SERIES_MAX
    b = (r > K_SERIES_MAX) & (r < K_ASYMP_MIN)
    c = r >= K_ASYMP_MIN
    if np.any(a):
        k0[a], k1[a] = _k01_series(z[a])
    if np.any(b):
        k0[b], k1[b] = _k01_integral(z[b])
    if np.any(c):
        k0[c], k1[c] = _k01_asymptotic(z[c])
    return k0, k1


def bessel_k01(z):
    """(K0(z), K1(z)) on the principal branch, 0 < |z| <= 200."""
    zin = np.asarray(z)
    real = not np.iscomplexobj(zin)
    zc = np.atleast_1d(zin.astype(complex))
    if np.any(zc == 0):
        raise DomainError("K0/K1 are singular at 0")
    if real and np.any(zc.real <= 0):
        raise DomainError("real K0/K1 need x > 0")
    if np.any(np.abs(zc) > BESSEL_MAX):
        raise DomainError(f"Bessel functions validated only for |z| <= {BESSEL_MAX}")
    k0 = np.empty_like(zc)
    k1 = np.empty_like(zc)
    right = zc.real >= 0
    if np.any(right):
        k0[right], k1[right] = _k01_right(zc[right])
    left = ~right
    if np.any(left):
        zl = zc[left]
        up = zl.imag >= 0  # arg in (pi/2, pi]: rotate by -pi
        w = -zl  # z = w e^{+i pi} (upper) or w e^{-i pi} (lower)
        kw0, kw1 = _k01_right(w)
        iw0, iw1 = bessel_i01(w)
        sgn = np.where(up, 1.0, -1.0)
        # K0(w e^{+-i pi}) = K0(w) -+ i pi I0(w);  K1(w e^{+-i pi}) = -K1(w) -+ i pi I1(w)
        k0[left] = kw0 - sgn * 1j * np.pi * iw0
        k1[left] = -kw1 - sgn * 1j * np.pi * iw1
    if real:
        k0, k1 = k0.real, k1.real
    return k0.reshape(zin.shape), k1.reshape(zin.shape)


def bessel_k0(x):
    return bessel_k01(x)[0]


def bessel_k1(x):
    return bessel_k01(x)[1]


def hankel_01(z, kind: int):
    """(H_0^{(kind)}(z), H_1^{(kind)}(z)).

    Kind 1 is valid for arg z in (-pi/2, pi], kind 2 for (-pi, pi/2].
    """
    z = np.asarray(z, dtype=complex)
    a = np.angle(z)
    if kind == 1:
        if np.any(a <= -np.pi / 2):
            raise DomainError("H^(1) validated for arg z in (-pi/2, pi]")
        k0, k1 = bessel_k01(-1j * z)
        return (2 / (np.pi * 1j)) * k0, -(2 / np.pi) * k1
    if kind == 2:
        if np.any(a > np.pi / 2):
            raise DomainError("H^(2) validated for arg z in (-pi, pi/2]")
        k0, k1 = bessel_k01(1j * z)
        return -(2 / (np.pi * 1j)) * k0, -(2 / np.pi) * k1
    raise DomainError(f"kind must be 1 or 2, got {kind}")


def hankel_h0_1(z):
    return hankel_01(z, 1)[0]


def hankel_h0_2(z):
    return hankel_01(z, 2)[0]


# ---------------------------------------------------------- model matrices

TWO_THIRDS_PI = 2 * math.pi / 3

# closed sectors of each region
Q_REGIONS = {
    "I": (-TWO_THIRDS_PI, TWO_THIRDS_PI),
    "II": (TWO_THIRDS_PI, math.pi),
    "III": (-math.pi, -TWO_THIRDS_PI),
}
PA_REGIONS = {
    "I+": (0.0, TWO_THIRDS_PI),
    "I-": (-TWO_THIRDS_PI, 0.0),
    "II": (TWO_THIRDS_PI, math.pi),
    "III": (-math.pi, -TWO_THIRDS_PI),
}


def _auto_region(zeta: complex, regions: dict) -> str:
    a = math.atan2(zeta.imag, zeta.real)
    for name, (lo, hi) in regions.items():
        if lo < a < hi:
            return name
    raise DomainError(f"{zeta} lies on a jump contour; pass region explicitly")


def bessel_Q(zeta: complex, region: Optional[str] = None) -> Matrix2:
    """Bessel model matrix Q with jumps [[0,1],[-1,0]] on R_- and
    [[1,0],[1,1]] on arg = +-2pi/3; det Q = 2."""
    zeta = complex(zeta)
    if zeta == 0:
        raise DomainError("Q is singular at the origin")
    region = region or _auto_region(zeta, Q_REGIONS)
    if region not in Q_REGIONS:
        raise DomainError(f"unknown region {region!r}")
    arg = pin_arg(zeta, *Q_REGIONS[region])
    r = abs(zeta)
    s = math.sqrt(r) * complex(math.cos(arg / 2), math.sin(arg / 2))  # zeta^{1/2}
    if region == "I":
        i0, i1 = bessel_i01(s)
        k0, k1 = bessel_k01(s)
        return np.array([[i0, 1j / np.pi * k0],
                         [2j * np.pi * s * i1, 2 * s * k1]], dtype=complex)
    # (-zeta)^{1/2}: arg(-zeta) = arg - pi (region II) or arg + pi (region III)
    marg = arg - math.pi if region == "II" else arg + math.pi
    w = math.sqrt(r) * complex(math.cos(marg / 2), math.sin(marg / 2))
    h10, h11 = hankel_01(w, 1)
    h20, h21 = hankel_01(w, 2)
    # H_0' = -H_1
    if region == "II":
        return np.array([[0.5 * h10, 0.5 * h20],
                         [-np.pi * s * h11, -np.pi * s * h21]], dtype=complex)
    return np.array([[0.5 * h20, -0.5 * h10],
                     [np.pi * s * h21, -np.pi * s * h11]], dtype=complex)


def _pa_core(zeta: complex, region: str) -> Matrix2:
    arg = pin_arg(zeta, *PA_REGIONS[region])
    r = abs(zeta)
    z = r * complex(math.cos(arg), math.sin(arg))
    z32 = r ** 1.5 * complex(math.cos(1.5 * arg), math.sin(1.5 * arg))
    upper = region in ("I+", "II")
    ai, aip = airy(np.array([z]))
    if upper:
        b, bp = airy(np.array([OMEGA ** 2 * z]))
        P = np.array([[ai[0], b[0]], [aip[0], OMEGA ** 2 * bp[0]]])
    else:
        b, bp = airy(np.array([OMEGA * z]))
        P = np.array([[ai[0], -OMEGA ** 2 * b[0]], [aip[0], -bp[0]]])
    t = (2.0 / 3.0) * z32
    E = np.diag([np.exp(t - 1j * np.pi / 6), np.exp(-t + 1j * np.pi / 6)])
    M = math.sqrt(2 * math.pi) * np.exp(-1j * np.pi / 12) * (P @ E)
    if region == "II":
        M = M @ np.array([[1, 0], [-np.exp(2 * t), 1]])
    elif region == "III":
        M = M @ np.array([[1, 0], [np.exp(2 * t), 1]])
    return M


def model_PA(zeta: complex, region: Optional[str] = None) -> Matrix2:
    """Airy model solution; det = 1, jumps [[1,e^{-4/3 z^{3/2}}],[0,1]] on R_+,
    [[1,0],[e^{4/3 z^{3/2}},1]] on the rays and [[0,1],[-1,0]] on R_-."""
    zeta = complex(zeta)
    region = region or _auto_region(zeta, PA_REGIONS)
    if region not in PA_REGIONS:
        raise DomainError(f"unknown region {region!r}")
    if abs(zeta) > AIRY_MAX:
        raise DomainError(f"model_PA validated only for |zeta| <= {AIRY_MAX}")
    return _pa_core(zeta, region)


# constant left factor normalizing sqrt(2pi) Q e^{-zeta^{1/2} sigma3} to
# zeta^{-sigma3/4} (1/sqrt2)[[1,i],[i,1]] (I + O(zeta^{-1/2})); det P_B = 1
PB_NORMALIZER = np.diag([1 / math.sqrt(2), 1 / (2 * math.sqrt(2) * math.pi)])


def model_PB(zeta: complex, region: Optional[str] = None) -> Matrix2:
    """Bessel model P_B = N sqrt(2pi) Q(zeta) exp(-zeta^{1/2} sigma3), N = PB_NORMALIZER."""
    zeta = complex(zeta)
    region = region or _auto_region(zeta, Q_REGIONS)
    arg = pin_arg(zeta, *Q_REGIONS[region])
    s = math.sqrt(abs(zeta)) * complex(math.cos(arg / 2), math.sin(arg / 2))
    return (math.sqrt(2 * math.pi) * PB_NORMALIZER @ bessel_Q(zeta, region)
            @ np.diag([np.exp(-s), np.exp(s)]))


def twist(zeta: complex, arg: Optional[float] = None) -> Matrix2:
    """zeta^{-sigma3/4} (1/sqrt2)[[1,1],[-1,1]] e^{-i pi sigma3/4}."""
    z14 = complex(cpow(complex(zeta), 0.25, arg))
    return (np.diag([1 / z14, z14]) @ (np.array([[1, 1], [-1, 1]]) / math.sqrt(2))
            @ np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)]))


def bessel_asymptotic_matrix(zeta: complex, arg: Optional[float] = None) -> Matrix2:
    """zeta^{-sigma3/4} (1/sqrt2)[[1,i],[i,1]], the large-zeta form of P_B."""
    z14 = complex(cpow(complex(zeta), 0.25, arg))
    return np.diag([1 / z14, z14]) @ (np.array([[1, 1j], [1j, 1]]) / math.sqrt(2))


# ------------------------------------------------------------- jump checks

J_FLIP = np.array([[0, 1], [-1, 0]], dtype=complex)
J_LOWER = np.array([[1, 0], [1, 1]], dtype=complex)

# contour -> (+ region, - region); + is the clockwise neighbour except on R_+
Q_CONTOURS = {"neg_real": ("II", "III"), "ray_up": ("I", "II"), "ray_down": ("III", "I")}
PA_CONTOURS = {"pos_real": ("I+", "I-"), "ray_up": ("I+", "II"),
               "ray_down": ("III", "I-"), "neg_real": ("II", "III")}


def _z32(zeta: complex, arg: float) -> complex:
    r = abs(zeta)
    return r ** 1.5 * complex(math.cos(1.5 * arg), math.sin(1.5 * arg))


def contour_of(zeta: complex, tol: float = 1e-12) -> str:
    a = math.atan2(zeta.imag, zeta.real)
    if abs(a) < tol:
        return "pos_real"
    if abs(abs(a) - math.pi) < tol:
        return "neg_real"
    if abs(a - TWO_THIRDS_PI) < tol:
        return "ray_up"
    if abs(a + TWO_THIRDS_PI) < tol:
        return "ray_down"
    raise DomainError(f"{zeta} is not on a jump contour")


def jump_residual(model: str, zeta: complex) -> float:
    """max |X_+ - X_- J| for model in {'Q', 'PA', 'PB'} at a contour point."""
    zeta = complex(zeta)
    contour = contour_of(zeta)
    if model == "PA":
        fn: Callable = model_PA
        plus, minus = PA_CONTOURS[contour]
        arg = pin_arg(zeta, *PA_REGIONS[plus])
        if contour == "pos_real":
            J = np.array([[1, np.exp(-(4 / 3) * _z32(zeta, 0.0))], [0, 1]])
        elif contour == "neg_real":
            J = J_FLIP
        else:
            J = np.array([[1, 0], [np.exp((4 / 3) * _z32(zeta, arg)), 1]])
    elif model in ("Q", "PB"):
        if contour == "pos_real":
            raise DomainError(f"{model} has no jump on the positive axis")
        fn = bessel_Q if model == "Q" else model_PB
        plus, minus = Q_CONTOURS[contour]
        if contour == "neg_real":
            J = J_FLIP
        elif model == "Q":
            J = J_LOWER
        else:
            arg = pin_arg(zeta, *Q_REGIONS[plus])
            s = math.sqrt(abs(zeta)) * complex(math.cos(arg / 2), math.sin(arg / 2))
            J = np.array([[1, 0], [np.exp(-2 * s), 1]])
    else:
        raise DomainError(f"unknown model {model!r}")
    Xp = fn(zeta, plus)
    Xm = fn(zeta, minus)
    scale = max(1.0, float(np.abs(Xp).max()))
    return float(np.abs(Xp - Xm @ J).max()) / scale


def directed_limit(fn: Callable[[complex], Matrix2], zeta: complex, normal: complex,
                   delta: Optional[float] = None) -> Matrix2:
    """Boundary value by offsets zeta + t*normal, t = delta, 2*delta, with
    Richardson extrapolation to t = 0."""
    zeta = complex(zeta)
    if delta is None:
        delta = 1e-8 * max(1.0, abs(zeta))
    n = normal / abs(normal)
    a = fn(zeta + delta * n)
    b = fn(zeta + 2 * delta * n)
    return 2 * a - b
