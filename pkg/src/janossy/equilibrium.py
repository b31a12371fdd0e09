"""Equilibrium measures of one-cut polynomial potentials.

The free measure minimizes the logarithmic energy
    I(mu) = iint log|x-y|^{-1} dmu dmu + int V dmu
over probability measures on R. The constrained measure solves the same
problem on (-inf, c] and picks up an inverse square-root edge at c when
c lies inside the free support.

All band integrals use x = m + r cos(theta); on the band the density times
dx/dtheta is a trigonometric polynomial, so its cosine coefficients are exact
and give the log potential g in closed form through the Joukowski map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb, pi
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.fft import dct
from scipy.optimize import brentq

from .errors import ConstraintInfeasibleError, DomainError, UnsupportedPotentialError
from .numcore import gauss_legendre, newton_solve

THETA_NODES = 200
POSITIVITY_TOL = 1e-12


class Potential:
    """Real polynomial V(x) = sum_k coef[k] x^k of even degree, positive leading coefficient."""

    def __init__(self, coefficients: Sequence[float]):
        c = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
        if c.size < 3 or (c.size - 1) % 2:
            raise DomainError("potential must have even positive degree")
        if c[-1] <= 0:
            raise DomainError("leading coefficient must be positive")
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite coefficient")
        c.setflags(write=False)
        self.coefficients = c
        self.poly = Polynomial(c)
        self.dpoly = self.poly.deriv()
        self.ddpoly = self.dpoly.deriv()

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def is_even(self) -> bool:
        return bool(np.all(self.coefficients[1::2] == 0))

    def __call__(self, x):
        return self.poly(x)

    def deriv(self, x):
        return self.dpoly(x)

    def rescaled(self, s: float) -> "Potential":
        """V(s x): coefficients c_k -> c_k s^k."""
        return Potential(self.coefficients * s ** np.arange(self.coefficients.size))

    def __eq__(self, other):
        return isinstance(other, Potential) and np.array_equal(self.coefficients, other.coefficients)

    def __hash__(self):
        return hash(self.coefficients.tobytes())

    def __repr__(self):
        return f"Potential({self.coefficients.tolist()})"


def gue_potential() -> Potential:
    return Potential([0.0, 0.0, 2.0])


def _theta_nodes(N: int = THETA_NODES) -> np.ndarray:
    return (np.arange(N) + 0.5) * pi / N


def _theta_mean(values: np.ndarray) -> float:
    """(1/pi) int_0^pi f dtheta by the midpoint rule (exact for cosine polynomials of degree < 2N)."""
    return float(np.mean(values))


def _sqrt_series(p: float, t: float, K: int) -> np.ndarray:
    """Taylor coefficients of (1 - t w)^p in w, for p = +-1/2."""
    k = np.arange(K)
    if p == -0.5:
        base = np.array([comb(2 * j, j) / 4.0 ** j for j in range(K)])
    elif p == 0.5:
        base = np.array([comb(2 * j, j) / (4.0 ** j * (1 - 2 * j)) for j in range(K)])
    else:
        raise ValueError(p)
    return base * t ** k


def _polynomial_part(dV: Polynomial, series: np.ndarray, shift: int) -> Polynomial:
    """Polynomial part of dV(z) * z^{-shift} * sum_k series[k] z^{-k}."""
    d = dV.coef
    deg = d.size - 1 - shift
    if deg < 0:
        return Polynomial([0.0])
    out = np.zeros(deg + 1)
    for mpow in range(deg + 1):
        out[mpow] = sum(d[j] * series[j - shift - mpow] for j in range(mpow + shift, d.size))
    return Polynomial(out)


def _joukowski_inverse(w: np.ndarray) -> np.ndarray:
    """u with (u + 1/u)/2 = w and |u| >= 1; signed-zero imaginary parts select the side on [-1,1]."""
    return w + np.sqrt(w - 1) * np.sqrt(w + 1)


class _OneCut:
    """Shared machinery: band [left, right], cosine coefficients of psi(x) dx/dtheta."""

    potential: Potential
    left: float
    right: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.left + self.right)

    @property
    def half(self) -> float:
        return 0.5 * (self.right - self.left)

    def density(self, x):
        raise NotImplementedError

    def _theta_weighted(self, theta: np.ndarray) -> np.ndarray:
        """psi(m + r cos t) * r sin t, a cosine polynomial in t."""
        raise NotImplementedError

    def _phi_integrand(self, z, tau):
        """Integrand of phi in the tau variable, s = right + (z - right) tau^2."""
        raise NotImplementedError

    @cached_property
    def cosine_coefficients(self) -> np.ndarray:
        N = THETA_NODES
        f = self._theta_weighted(_theta_nodes(N))
        c = dct(f, type=2) / N
        c[0] *= 0.5
        c.setflags(write=False)
        return c

    def mass(self) -> float:
        return pi * float(self.cosine_coefficients[0])

    def _log_sum(self, u: np.ndarray) -> np.ndarray:
        c = self.cosine_coefficients
        inv = 1.0 / u
        acc = np.zeros_like(u)
        # Horner in 1/u for sum c_k / (k u^k)
        for j in range(c.size - 1, 0, -1):
            acc = (acc + c[j] / j) * inv
        return acc

    def g(self, z, side: Optional[int] = None):
        """g(z) = int log(z - s) psi(s) ds, principal branch, cut on (-inf, right].

        Real z <= right needs side = +1 (upper limit) or -1 (lower limit).
        """
        z = np.asarray(z)
        scalar = z.ndim == 0
        z = np.atleast_1d(z).astype(complex)
        on_cut = (z.imag == 0) & (z.real <= self.right)
        if np.any(on_cut) and side not in (1, -1):
            raise DomainError("g on the cut (-inf, right endpoint] needs side=+1 or -1")
        w = (z - self.mid) / self.half
        u = np.where(on_cut, 2.0, w)
        u = _joukowski_inverse(u)
        logu = np.log(u)
        if np.any(on_cut):
            wr = w.real[on_cut]
            band = wr >= -1.0
            # boundary values: u = e^{+-i theta0} on the band, log|u| +- i pi left of it
            ub = np.where(band, np.clip(wr, -1, 1) + side * 1j * np.sqrt(np.maximum(1 - wr ** 2, 0)),
                          wr - np.sqrt(np.maximum(wr ** 2 - 1, 0)))
            lb = np.where(band, side * 1j * np.arccos(np.clip(wr, -1, 1)),
                          np.log(np.abs(ub)) + side * 1j * pi)
            u[on_cut], logu[on_cut] = ub, lb
        c0 = self.cosine_coefficients[0]
        val = pi * (c0 * (logu + np.log(self.half / 2)) - self._log_sum(u))
        return val[0] if scalar else val

    def el_residual(self, x):
        """g+(x) + g-(x) - V(x) - l, real; zero on the band, negative off it for regular measures."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        gp = self.g(x, side=1)
        gm = self.g(x, side=-1) if np.any(x <= self.right) else gp
        return np.real(gp + gm) - self.potential(x) - self.ell

    @cached_property
    def ell(self) -> float:
        m = self.mid
        c = self.cosine_coefficients
        k = np.arange(1, c.size)
        # theta0 = pi/2 at the midpoint
        two_re_g = 2 * pi * (c[0] * np.log(self.half / 2) - np.sum(c[1:] * np.cos(k * pi / 2) / k))
        return float(two_re_g - self.potential(m))

    def phi(self, z, nodes: int = 48):
        """phi(z) = -(g+ + g- - V - l) continued off the band, by quadrature from the right endpoint.

        Path s = e + (z - e) tau^2 absorbs the endpoint square root.
        """
        z = np.asarray(z)
        scalar = z.ndim == 0
        z = np.atleast_1d(z).astype(complex)
        e = self.right
        rule = gauss_legendre(nodes)
        tau = 0.5 * (rule.nodes + 1.0)
        wts = 0.5 * rule.weights
        out = np.empty(z.shape, dtype=complex)
        for i, zi in enumerate(z):
            if zi.imag == 0 and zi.real <= e:
                raise DomainError("phi is evaluated to the right of the band or off the real axis")
            out[i] = np.sum(wts * self._phi_integrand(zi, tau))
        if np.all(np.isreal(z)):
            out = out.real
        return out[0] if scalar else out


@dataclass(frozen=True, eq=False)
class EquilibriumMeasure(_OneCut):
    """One-cut free equilibrium measure psi = (1/2pi) sqrt((a-x)(x-b)) h(x) on [b, a]."""

    potential: Potential
    b: float
    a: float
    h: Polynomial = field(repr=False)
    scale: float = 1.0  # endpoint of the potential before rescaling

    @property
    def left(self) -> float:
        return self.b

    @property
    def right(self) -> float:
        return self.a

    @property
    def band(self):
        return (self.b, self.a)

    def beta(self, x):
        """psi = sqrt(a - x) beta(x) near the right edge."""
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.maximum(x - self.b, 0.0)) * self.h(x) / (2 * pi)

    @property
    def beta_edge(self) -> float:
        """beta_V at the right endpoint."""
        return float(self.beta(self.a))

    @property
    def c_V(self) -> float:
        return edge_constant(self)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.b) & (x < self.a)
        val = np.sqrt(np.where(inside, self.a - x, 0.0)) * self.beta(np.where(inside, x, self.a))
        return np.where(inside, val, 0.0)

    def _theta_weighted(self, t):
        s = self.mid + self.half * np.cos(t)
        return self.half ** 2 * np.sin(t) ** 2 * self.h(s) / (2 * pi)

    def _phi_integrand(self, z, tau):
        e = self.a
        s = e + (z - e) * tau ** 2
        return 2 * (z - e) ** 1.5 * tau ** 2 * np.sqrt(s - self.b) * self.h(s)


@dataclass(frozen=True, eq=False)
class ConstrainedMeasure(_OneCut):
    """Equilibrium measure on (-inf, c] with hard edge at c inside the free band.

    psi = (1/2pi) sqrt((x-b)/(c-x)) q(x), q(x) = C + (c - x) h_c(x), C = q(c) >= 0.
    """

    potential: Potential
    c: float
    b: float
    q: Polynomial = field(repr=False)
    free: EquilibriumMeasure = field(repr=False)

    @property
    def left(self) -> float:
        return self.b

    @property
    def right(self) -> float:
        return self.c

    @property
    def band(self):
        return (self.b, self.c)

    @property
    def C(self) -> float:
        return float(self.q(self.c))

    @property
    def h_c(self) -> Polynomial:
        # (q(x) - C)/(c - x), exact polynomial division
        num = self.q - self.C
        quo, _ = divmod(num, Polynomial([self.c, -1.0]))
        return quo

    @property
    def eps(self) -> float:
        return self.free.a - self.c

    def beta_a(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.maximum(x - self.b, 0.0)) * self.h_c(x) / (2 * pi)

    def beta_b(self, x):
        """Coefficient of (eps/2)(c - x)^{-1/2} in the split density."""
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.maximum(x - self.b, 0.0)) * self.C / (pi * self.eps)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.b) & (x < self.c)
        xs = np.where(inside, x, self.b)
        d = np.where(inside, self.c - x, 1.0)
        root_b = np.sqrt(np.maximum(xs - self.b, 0.0))
        val = root_b * (np.sqrt(d) * self.h_c(xs) + self.C / np.sqrt(d)) / (2 * pi)
        return np.where(inside, val, 0.0)

    def _theta_weighted(self, t):
        s = self.mid + self.half * np.cos(t)
        return self.half * (1 + np.cos(t)) * self.q(s) / (2 * pi)

    def _phi_integrand(self, z, tau):
        e = self.c
        s = e + (z - e) * tau ** 2
        return -2 * np.sqrt(z - e) * np.sqrt(s - self.b) * self.q(s)


# ---------------------------------------------------------------- free solve

def _free_residual(V: Potential, mr, t):
    m, r = mr
    x = m + r * np.cos(t)
    dV = V.deriv(x)
    return np.array([_theta_mean(dV), 0.5 * r * _theta_mean(dV * np.cos(t)) - 1.0])


def _free_jacobian(V: Potential, mr, t):
    m, r = mr
    ct = np.cos(t)
    x = m + r * ct
    dV, ddV = V.deriv(x), V.ddpoly(x)
    return np.array([
        [_theta_mean(ddV), _theta_mean(ddV * ct)],
        [0.5 * r * _theta_mean(ddV * ct), 0.5 * _theta_mean(dV * ct) + 0.5 * r * _theta_mean(ddV * ct ** 2)],
    ])


def _initial_halfwidth(V: Potential) -> float:
    # V ~ lead x^{2p}: r^{2p} p lead (2p-1)!!/(2p)!! = 1
    p = V.degree // 2
    lead = V.coefficients[-1]
    ratio = comb(2 * p, p) / 4.0 ** p
    return float((1.0 / (p * lead * ratio)) ** (1.0 / (2 * p)))


def _bracket_halfwidth(V: Potential, r0: float, t) -> float:
    """Largest root of the centred mass equation, refined by bisection.

    The leading-term guess can sit on the wrong side of a fold when lower-order
    terms dominate (double wells); Newton then runs to r -> 0.
    """
    def mass(r):
        return _free_residual(V, (0.0, r), t)[1]

    hi = r0
    while mass(hi) <= 0:
        hi *= 2.0
    lo = hi
    while lo > 1e-8 * r0 and mass(lo) > 0:
        hi, lo = lo, lo / 1.25
    if mass(lo) > 0:
        return r0
    return float(brentq(mass, lo, hi, xtol=1e-15))


def _h_poly(V: Potential, b: float, a: float) -> Polynomial:
    K = V.degree + 2
    s = np.convolve(_sqrt_series(-0.5, a, K), _sqrt_series(-0.5, b, K))[:K]
    return _polynomial_part(V.dpoly, s, 1)


def _check_regular(meas: _OneCut, positive: Polynomial, lo: float, hi: float, err):
    xs = np.linspace(lo, hi, 801)
    vals = positive(xs)
    scale = max(1.0, float(np.max(np.abs(vals))))
    roots = positive.roots()
    real_roots = roots[np.abs(roots.imag) < 1e-10].real
    inside = real_roots[(real_roots > lo + 1e-9) & (real_roots < hi - 1e-9)]
    if np.min(vals) < -POSITIVITY_TOL * scale or inside.size:
        raise err("density factor changes sign on the band (not one-cut regular)")


def _check_outside(meas: _OneCut, err, reach: float = 3.0):
    w = meas.half
    xs_r = meas.right + w * np.geomspace(1e-3, reach, 60)
    xs_l = meas.left - w * np.geomspace(1e-3, reach, 60)
    xs = xs_l if isinstance(meas, ConstrainedMeasure) else np.concatenate([xs_l, xs_r])
    res = meas.el_residual(xs)
    if np.max(res) >= 0:
        raise err("Euler-Lagrange inequality fails off the band (support is not a single interval)")


def _solve_free_unscaled(V: Potential, tol: float = 1e-14) -> EquilibriumMeasure:
    t = _theta_nodes()
    r0 = _bracket_halfwidth(V, _initial_halfwidth(V), t)
    m0 = 0.0

    def F(mr):
        if mr[1] <= 0:
            return np.array([np.inf, np.inf])
        return _free_residual(V, mr, t)

    mr = newton_solve(F, [m0, r0], tol=tol, max_iter=100, jac=lambda v: _free_jacobian(V, v, t))
    m, r = float(mr[0]), float(mr[1])
    if V.is_even:
        m = 0.0
    b, a = m - r, m + r
    meas = EquilibriumMeasure(V, b, a, _h_poly(V, b, a))
    _check_regular(meas, meas.h, b, a, UnsupportedPotentialError)
    if meas.h(a) <= 0 or meas.h(b) <= 0:
        raise UnsupportedPotentialError("density does not vanish like a square root at an endpoint")
    _check_outside(meas, UnsupportedPotentialError)
    return meas


def solve_full_line(V: Potential, rescale: bool = True) -> EquilibriumMeasure:
    """Free one-cut equilibrium measure; by default rescaled so the right endpoint is 1.

    The returned measure carries the rescaled potential V(s x) and scale = s,
    the right endpoint of the original problem.
    """
    meas = _solve_free_unscaled(V)
    if not rescale:
        return meas
    s = meas.a
    if s <= 0:
        raise UnsupportedPotentialError("right endpoint is not positive; cannot normalize it to 1")
    if s == 1.0:
        return meas
    Vs = V.rescaled(s)
    out = _solve_free_unscaled(Vs)
    return EquilibriumMeasure(Vs, out.b, out.a, out.h, scale=s)


# ----------------------------------------------------------- constrained solve

def _q_poly(V: Potential, b: float, c: float) -> Polynomial:
    K = V.degree + 2
    s = np.convolve(_sqrt_series(0.5, c, K), _sqrt_series(-0.5, b, K))[:K]
    return -_polynomial_part(V.dpoly, s, 0)


def constrained_residual(V: Potential, b: float, c: float) -> float:
    """Unit-mass condition (r/2pi) int_0^pi V'(m + r cos t)(1 - cos t) dt + 1."""
    t = _theta_nodes()
    m, r = 0.5 * (b + c), 0.5 * (c - b)
    return 0.5 * r * _theta_mean(V.deriv(m + r * np.cos(t)) * (1 - np.cos(t))) + 1.0


def solve_constrained(V: Potential, c: float, tol: float = 1e-14):
    """Equilibrium measure of V on (-inf, c].

    For c at or beyond the free right endpoint the constraint is inactive and
    the free measure (of V as given, not rescaled) is returned.
    """
    free = _solve_free_unscaled(V)
    c = float(c)
    if c >= free.a:
        return free
    if c <= free.b:
        raise ConstraintInfeasibleError(f"c={c} lies left of the free support [{free.b}, {free.a}]")

    def F(x):
        b = x[0]
        if b >= c:
            return np.array([np.inf])
        return np.array([constrained_residual(V, b, c)])

    try:
        b = float(newton_solve(F, [free.b], tol=tol, max_iter=100)[0])
    except Exception as exc:  # noqa: BLE001
        raise ConstraintInfeasibleError(f"constrained moment condition has no solution for c={c}") from exc
    meas = ConstrainedMeasure(V, c, b, _q_poly(V, b, c), free)
    if meas.C < -POSITIVITY_TOL * max(1.0, abs(float(meas.q(b)))):
        raise ConstraintInfeasibleError(f"negative hard-edge coefficient C={meas.C:.3e} at c={c}")
    _check_regular(meas, meas.q, b, c, ConstraintInfeasibleError)
    if meas.q(b) <= 0:
        raise ConstraintInfeasibleError("density fails to vanish like a square root at the left endpoint")
    _check_outside(meas, ConstraintInfeasibleError)
    return meas


# ------------------------------------------------------------------ evaluators

def density_at(measure: _OneCut, x):
    """Density via the edge-split form; 0 outside the band."""
    return measure.density(x)


@dataclass(frozen=True)
class GPhiPair:
    measure: _OneCut
    ell: float

    def g(self, z, side: Optional[int] = None):
        return self.measure.g(z, side)

    def phi(self, z):
        return self.measure.phi(z)

    def el_residual(self, x):
        return self.measure.el_residual(x)


def g_phi(measure: _OneCut) -> GPhiPair:
    return GPhiPair(measure, measure.ell)


def edge_constant(measure: EquilibriumMeasure) -> float:
    """Edge scaling constant c_V = (pi beta_V(1))^{2/3}.

    With this value psi_V(1 - x/(c_V n^{2/3})) n^{1/3}/c_V matches the Airy-kernel
    density sqrt(x)/pi, so lambda_1 ~ 1 + s/(c_V n^{2/3}) with s ~ F_TW.
    For V = 2x^2 this gives 2.
    """
    # beta of the potential rescaled to right endpoint 1
    beta = measure.beta_edge * measure.right ** 1.5
    if not beta > 0:
        raise DomainError("beta_V(1) must be positive")
    return float((pi * beta) ** (2.0 / 3.0))
