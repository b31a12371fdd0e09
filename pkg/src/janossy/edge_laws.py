"""Soft-edge laws: Airy kernel, Tracy-Widom (Fredholm and Painleve II), the limit
Janossy kernel M_alpha, m-th largest eigenvalue laws, and finite-n edge scaling.

M_alpha is the resolvent K_Airy (1 - K_Airy)^{-1} of the Airy operator on
[alpha, inf). Its hard-edge (alpha -> -inf) and soft-edge (alpha -> +inf)
asymptotic forms are provided for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import pi
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .equilibrium import Potential, solve_full_line
from .errors import ConsistencyError, ConvergenceError, DomainError
from .fredholm import NystromOperator, det1m, discretize, elementary_symmetric_product, gap_probs, resolvent
from .numcore import QuadratureRule, gauss_legendre, newton_solve
from .orthopoly import WeightSpec, build_recurrence, l_kernel_cd
from .specfun import airy, bessel_i01

TW_GATE = -7.0
KERNEL_GATE = -6.0
AIRY_TAIL = 1e-30
DEFAULT_M = 160


# ------------------------------------------------------------------ Airy kernel

def airy_kernel(x, y):
    """K_Airy(x, y); the diagonal is Ai'(x)^2 - x Ai(x)^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    pts, inv = np.unique(np.concatenate([x.ravel(), y.ravel()]), return_inverse=True)
    ai, aip = airy(pts)
    ax, ay = ai[inv[:x.size]].reshape(x.shape), ai[inv[x.size:]].reshape(x.shape)
    px, py = aip[inv[:x.size]].reshape(x.shape), aip[inv[x.size:]].reshape(x.shape)
    d = x - y
    same = d == 0
    off = (ax * py - px * ay) / np.where(same, 1.0, d)
    diag = px * px - x * ax * ax
    out = np.where(same, diag, off)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def airy_cutoff(tail: float = AIRY_TAIL) -> float:
    """Smallest s with Ai(s)^2 below tail."""
    lo, hi = 0.0, 30.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if airy(mid)[0] ** 2 < tail:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class AiryWindow:
    alpha: float
    T: float
    m: int
    operator: NystromOperator


@lru_cache(maxsize=256)
def airy_window(alpha: float, m: int = DEFAULT_M, tail: float = AIRY_TAIL) -> AiryWindow:
    """Nystrom discretization of K_Airy on [alpha, alpha + T] with Ai(alpha + T)^2 < tail."""
    alpha = float(alpha)
    T = max(airy_cutoff(tail) - alpha, 1.0)
    base = gauss_legendre(m)
    half = 0.5 * T
    rule = QuadratureRule(alpha + half * (base.nodes + 1.0), half * base.weights,
                          ("interval", alpha, alpha + T))
    return AiryWindow(alpha, T, m, discretize(airy_kernel, rule))


def tw_fredholm(alpha: float, m: int = DEFAULT_M) -> float:
    """F_TW(alpha) = det(1 - K_Airy on [alpha, inf))."""
    if alpha < TW_GATE:
        raise DomainError(f"alpha={alpha} below the determinant gate {TW_GATE}")
    return det1m(airy_window(alpha, m).operator)


# --------------------------------------------------------------- Painleve II

def _cheb_diff(N: int):
    """Chebyshev points on [-1, 1] (descending) and the first-derivative matrix."""
    k = np.arange(N + 1)
    x = np.cos(pi * k / N)
    c = np.where((k == 0) | (k == N), 2.0, 1.0) * (-1.0) ** k
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (X + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def hm_left_closure(s: float) -> float:
    """u(s) ~ sqrt(-s/2) (1 + 1/(8 s^3) - 73/(128 s^6)) as s -> -inf."""
    return float(np.sqrt(-s / 2) * (1 + 1 / (8 * s ** 3) - 73 / (128 * s ** 6)))


@dataclass(frozen=True)
class HastingsMcLeod:
    s: np.ndarray  # ascending collocation points
    u: np.ndarray
    up: np.ndarray
    coef: np.ndarray  # Chebyshev coefficients of u in t = (2s - sL - sR)/(sR - sL)

    @property
    def s_L(self) -> float:
        return float(self.s[0])

    @property
    def s_R(self) -> float:
        return float(self.s[-1])

    def _t(self, s):
        return (2 * np.asarray(s, dtype=float) - self.s_L - self.s_R) / (self.s_R - self.s_L)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < self.s_L - 1e-12) or np.any(s > self.s_R + 1e-12):
            raise DomainError("outside the Hastings-McLeod grid")
        return C.chebval(self._t(s), self.coef)

    def deriv(self, s, order: int = 1):
        d = C.chebder(self.coef, order) * (2.0 / (self.s_R - self.s_L)) ** order
        return C.chebval(self._t(s), d)

    def residual(self, s=None):
        """u'' - s u - 2u^3 at s (default: interior collocation points)."""
        s = self.s[1:-1] if s is None else np.asarray(s, dtype=float)
        u = self(s)
        return self.deriv(s, 2) - s * u - 2 * u ** 3


def hastings_mcleod(s_L: float = -12.0, s_R: float = 8.0, grid_size: int = 160,
                    tol: float = 1e-13) -> HastingsMcLeod:
    """Collocation/Newton solve of u'' = s u + 2u^3 with u(s_R) = Ai(s_R) and the left closure."""
    if s_R < 6 or s_L < -12 - 1e-12 or s_L >= s_R:
        raise DomainError("need s_L >= -12 and s_R >= 6")
    N = grid_size
    t, D = _cheb_diff(N)
    t, D = t[::-1], D[::-1, ::-1]
    L = s_R - s_L
    s = s_L + 0.5 * L * (t + 1)
    D1 = D * (2.0 / L)
    D2 = D1 @ D1
    uL, uR = hm_left_closure(s_L), float(airy(s_R)[0])

    def F(u):
        r = D2 @ u - s * u - 2 * u ** 3
        r[0] = u[0] - uL
        r[-1] = u[-1] - uR
        return r

    def J(u):
        A = D2 - np.diag(s + 6 * u ** 2)
        A[0] = 0.0
        A[0, 0] = 1.0
        A[-1] = 0.0
        A[-1, -1] = 1.0
        return A

    ai = airy(np.minimum(s, 40.0))[0]
    blend = 0.5 * (1 - np.tanh(2 * (s + 1)))
    u0 = blend * np.sqrt(np.maximum(-s, 0) / 2) + (1 - blend) * ai
    try:
        u = newton_solve(F, u0, tol=tol * max(1.0, np.max(np.abs(D2))), max_iter=60, jac=J)
    except ConvergenceError as exc:
        raise ConvergenceError(f"Hastings-McLeod collocation did not converge: {exc}",
                               best=exc.best, residual=exc.residual) from exc
    coef = C.chebfit(t, u, N)
    return HastingsMcLeod(s, u, D1 @ u, coef)


@lru_cache(maxsize=8)
def _default_hm() -> HastingsMcLeod:
    return hastings_mcleod()


def _tail_rule(a: float, b: float, m: int = 60):
    base = gauss_legendre(m)
    h = 0.5 * (b - a)
    return a + h * (base.nodes + 1), h * base.weights


def _u2_moments(alpha: float, hm: HastingsMcLeod):
    """(int_alpha^inf u^2, int_alpha^inf (s - alpha) u^2); u = Ai beyond the grid."""
    if alpha < hm.s_L:
        raise DomainError(f"alpha={alpha} is left of the Hastings-McLeod grid")
    lo = min(alpha, hm.s_R)
    x, w = _tail_rule(lo, hm.s_R, 120)
    u = hm(x)
    m0 = np.sum(w * u * u)
    m1 = np.sum(w * (x - alpha) * u * u)
    xt, wt = _tail_rule(max(alpha, hm.s_R), max(alpha, hm.s_R) + 20.0, 80)
    at = airy(xt)[0]
    m0 += np.sum(wt * at * at)
    m1 += np.sum(wt * (xt - alpha) * at * at)
    return float(m0), float(m1)


def tw_painleve(alpha: float, hm: Optional[HastingsMcLeod] = None) -> float:
    """F_TW(alpha) = exp(-int_alpha^inf (s - alpha) u(s)^2 ds)."""
    hm = hm or _default_hm()
    return float(np.exp(-_u2_moments(alpha, hm)[1]))


def u2_integral(alpha: float, hm: Optional[HastingsMcLeod] = None) -> float:
    """int_alpha^inf u^2 = d/dalpha log F_TW."""
    hm = hm or _default_hm()
    return _u2_moments(alpha, hm)[0]


# --------------------------------------------------------------- limit kernel

@dataclass(frozen=True)
class LimitKernel:
    alpha: float
    window: AiryWindow

    @property
    def regime(self) -> str:
        return "->" if self.alpha > 0 else "<-"

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x < self.alpha) or np.any(y < self.alpha):
            raise DomainError("M_alpha is defined for x, y >= alpha")
        return resolvent(self.window.operator, x, y)


def limit_kernel(alpha: float, m: int = DEFAULT_M) -> LimitKernel:
    if alpha < KERNEL_GATE:
        raise DomainError(f"alpha={alpha} below the resolvent gate {KERNEL_GATE}")
    return LimitKernel(float(alpha), airy_window(float(alpha), m))


def continuity_at_zero(delta: float, x: float, y: float, m: int = DEFAULT_M) -> float:
    """|M_{+delta}(x, y) - M_{-delta}(x, y)|."""
    if delta == 0:
        return 0.0
    if x <= delta or y <= delta:
        raise DomainError("need x, y > delta")
    return abs(limit_kernel(delta, m)(x, y) - limit_kernel(-delta, m)(x, y))


def _bessel_fg(alpha: float, z, variant: str = "parametrix"):
    """f, g of the alpha -> -inf forms and their z-derivatives.

    With A = |alpha| - 2z/3 and w = z^{1/2} A:
      parametrix: f = A^{1/2} I0(w), g = -z^{1/2} A^{1/2} I0'(w)  (local Bessel model,
                  zeta = w^2, conjugated by (zeta/z)^{sigma3/4}; overall constant 1/2)
      printed:    f = A^{1/2} I0(w), g = -2 pi I0'(w)
    """
    A = abs(alpha) - (2.0 / 3.0) * z
    if np.any(A <= 0) or np.any(z <= 0):
        raise DomainError("need 0 < x - alpha < 3|alpha|/2")
    rz = np.sqrt(z)
    rA = np.sqrt(A)
    w = rz * A
    if np.any(w > 700):
        raise DomainError("I0 argument beyond the double-precision range")
    i0, i1 = bessel_i01(w)
    dw = A / (2 * rz) - (2.0 / 3.0) * rz
    di1 = (i0 - i1 / w) * dw  # d/dz I1(w)
    f = rA * i0
    fp = -(1.0 / 3.0) / rA * i0 + rA * i1 * dw
    if variant == "parametrix":
        g = -rz * rA * i1
        gp = -(0.5 / rz * rA * i1 - (1.0 / 3.0) * rz / rA * i1 + rz * rA * di1)
    elif variant == "printed":
        g = -2 * pi * i1
        gp = -2 * pi * di1
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return f, g, fp, gp


BESSEL_KAPPA = 0.5


def bessel_form_kernel(alpha: float, x, y, kappa: float = BESSEL_KAPPA, variant: str = "parametrix"):
    """kappa (f(x-a) g(y-a) - g(x-a) f(y-a)) / (x - y) from the alpha -> -inf forms of f, g."""
    if alpha > -2:
        raise DomainError("bessel_form_kernel needs alpha <= -2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    fx, gx, fpx, gpx = _bessel_fg(alpha, x - alpha, variant)
    fy, gy, _, _ = _bessel_fg(alpha, y - alpha, variant)
    d = x - y
    same = d == 0
    off = (fx * gy - gx * fy) / np.where(same, 1.0, d)
    diag = fpx * gx - gpx * fx
    out = kappa * np.where(same, diag, off)
    return float(out) if out.ndim == 0 else out


def fitted_bessel_kernel(alpha: float, ref=(0.3, 0.3), m: int = DEFAULT_M, variant: str = "parametrix"):
    """Bessel-form kernel with kappa matched to M_alpha at the reference offsets (x-alpha, y-alpha)."""
    xr, yr = alpha + ref[0], alpha + ref[1]
    kappa = limit_kernel(alpha, m)(xr, yr) / bessel_form_kernel(alpha, xr, yr, 1.0, variant)

    def K(x, y):
        return bessel_form_kernel(alpha, x, y, kappa, variant)

    return K, kappa


# ------------------------------------------------------------- m-th largest

@dataclass(frozen=True)
class MthLaw:
    m: int
    alphas: np.ndarray
    cdf: np.ndarray


@lru_cache(maxsize=32)
def _resolvent_spectrum(alpha: float, mres: int) -> np.ndarray:
    op = airy_window(alpha, mres).operator
    x = op.nodes
    sw = op.sqrt_w
    R = np.asarray(resolvent(op, x[:, None], x[None, :]))
    Rm = sw[:, None] * R * sw[None, :]
    mu = np.linalg.eigvalsh(0.5 * (Rm + Rm.T))[::-1]
    mu.setflags(write=False)
    return mu


def janossy_sum(alpha: float, m: int, mres: int = DEFAULT_M) -> np.ndarray:
    """(1/j!) int_{[alpha,inf)^j} det[M_alpha(x_l, x_k)] for j = 0..m-1."""
    return elementary_symmetric_product(_resolvent_spectrum(float(alpha), int(mres)), m - 1)


def mth_law_limit(m: int, alpha: float, mres: int = DEFAULT_M, check: float = 1e-8,
                  both: bool = False):
    """lim P(lambda_m <= 1 + alpha/(c_V n^{2/3})).

    Route A: F_TW(alpha) sum_{j<m} (1/j!) int det[M_alpha] (product expansion of the
    resolvent spectrum). Route B: cumulative exact gap probabilities of the Airy window
    (Newton's identities on the kernel spectrum).
    """
    if m < 1 or m > 6:
        raise DomainError("m must be in 1..6")
    if alpha < KERNEL_GATE:
        raise DomainError(f"alpha={alpha} below the resolvent gate {KERNEL_GATE}")
    if alpha >= airy_cutoff():
        return (1.0, 1.0) if both else 1.0
    F = tw_fredholm(alpha, mres)
    a = F * float(np.sum(janossy_sum(alpha, m, mres)))
    b = float(np.sum(gap_probs(airy_window(alpha, mres).operator, m - 1)))
    if abs(a - b) > max(check, 1e-6):
        raise ConsistencyError(f"route A {a!r} and route B {b!r} disagree at m={m}, alpha={alpha}")
    # probabilities: clamp round-off just outside [0, 1]
    a, b = min(max(a, 0.0), 1.0), min(max(b, 0.0), 1.0)
    return (a, b) if both else a


def order_law_cdf(m: int, lo: float = TW_GATE, step: float = 0.05, mres: int = DEFAULT_M):
    """Interpolated limit CDF of the scaled m-th largest eigenvalue (m=1: F_TW).

    Tabulated from exact gap probabilities of the Airy window on [lo, cutoff],
    monotone cubic interpolation in between, 0 below lo and 1 above the cutoff.
    """
    from scipy.interpolate import PchipInterpolator

    hi = airy_cutoff()
    grid = np.arange(lo, hi + step, step)
    vals = np.array([np.sum(gap_probs(airy_window(float(a), mres).operator, m - 1)) for a in grid])
    vals = np.clip(np.maximum.accumulate(vals), 0.0, 1.0)
    interp = PchipInterpolator(grid, vals)

    def F(a):
        a = np.asarray(a, dtype=float)
        out = np.where(a < lo, 0.0, np.where(a > grid[-1], 1.0, interp(np.clip(a, lo, grid[-1]))))
        return float(out) if out.ndim == 0 else out

    return F


def mth_law_table(m: int, alphas: Sequence[float], mres: int = DEFAULT_M) -> MthLaw:
    al = np.asarray(alphas, dtype=float)
    return MthLaw(m, al, np.array([mth_law_limit(m, a, mres) for a in al]))


# ------------------------------------------------------------- finite n

@lru_cache(maxsize=64)
def _edge_setup(coefficients: tuple, n: int, alpha: float):
    V = Potential(coefficients)
    meas = solve_full_line(V)
    cV = meas.c_V
    scale = cV * n ** (2.0 / 3.0)
    c = 1.0 + alpha / scale
    table = build_recurrence(WeightSpec(meas.potential, n, c), n + 1)
    return meas, scale, c, table


def finite_n_scaled_kernel(V: Potential, n: int, alpha: float, x, y):
    """(1/(c_V n^{2/3})) L_{n,[c,inf)}(1 + x/(c_V n^{2/3}), 1 + y/(c_V n^{2/3})), c = 1 + alpha/(c_V n^{2/3}).

    V is normalized to right endpoint 1 first.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < alpha) or np.any(y < alpha):
        raise DomainError("need x, y >= alpha")
    meas, scale, c, table = _edge_setup(tuple(V.coefficients.tolist()), int(n), float(alpha))
    X = 1.0 + x / scale
    Y = 1.0 + y / scale
    return np.asarray(l_kernel_cd(table, n, X, Y)) / scale if x.ndim else l_kernel_cd(table, n, X, Y) / scale


@dataclass(frozen=True)
class RateFit:
    ns: np.ndarray
    errors: np.ndarray
    slope: float
    noise_floor: bool


def convergence_rate(V: Potential, alpha: float, ns: Sequence[int], point=(2.0, 3.0),
                     m: int = DEFAULT_M, floor: float = 1e-12) -> RateFit:
    """Least-squares slope of log|finite-n kernel - M_alpha| against log n."""
    ns = np.asarray(ns, dtype=int)
    lim = limit_kernel(alpha, m)(*point)
    errs = np.array([abs(finite_n_scaled_kernel(V, int(n), alpha, *point) - lim) for n in ns])
    noisy = bool(np.any(errs <= floor * max(1.0, abs(lim))))
    good = errs > floor * max(1.0, abs(lim))
    if good.sum() < 2:
        return RateFit(ns, errs, float("nan"), True)
    slope = float(np.polyfit(np.log(ns[good]), np.log(errs[good]), 1)[0])
    return RateFit(ns, errs, slope, noisy)
