"""Foundational numerics: quadrature, symmetric eigensolves, linear solves,
adaptive ODE integration and damped Newton iteration.

Everything here is pure; returned arrays are marked read-only so rules and
spectra can be shared between threads and cached safely.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import ConditioningError, ConvergenceError, DomainError, StiffnessError

TINY = 1e-300


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights pair.

    ``domain`` is a short descriptor: ``("interval", lo, hi)`` or
    ``("halfline", endpoint, direction, truncation)``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple = ("interval", -1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in length")

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class SymmetricSpectrum:
    """Eigenvalues sorted descending, eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))


# ---------------------------------------------------------------- quadrature


@functools.lru_cache(maxsize=64)
def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule on [-1, 1] via Golub-Welsch."""
    if m < 1:
        raise DomainError(f"need m >= 1, got {m}")
    if m == 1:
        return QuadratureRule(np.zeros(1), np.full(1, 2.0))
    k = np.arange(1, m)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    x, v = scipy.linalg.eigh_tridiagonal(np.zeros(m), off)
    w = 2.0 * v[0, :] ** 2
    # symmetrize to kill the O(eps) asymmetry of the eigensolver
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(x, w)


def composite_rule(base: QuadratureRule, panels: Sequence[Sequence[float]]) -> QuadratureRule:
    """Affine copies of ``base`` (assumed on [-1, 1]) on each panel."""
    panels = [tuple(map(float, p)) for p in panels]
    if not panels:
        raise DomainError("empty panel list")
    panels.sort()
    for (a0, b0), (a1, _) in zip(panels, panels[1:]):
        if a1 < b0 - 1e-15 * max(1.0, abs(b0)):
            raise DomainError("panels overlap")
    nodes, weights = [], []
    for a, b in panels:
        if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
            raise DomainError(f"bad panel [{a}, {b}]")
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        nodes.append(mid + half * base.nodes)
        weights.append(half * base.weights)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights),
                          ("interval", panels[0][0], panels[-1][1]))


def geometric_panels(endpoint: float, direction: str, first: float, reach: float,
                     ratio: float = 2.0) -> list[tuple[float, float]]:
    """Panels growing by ``ratio`` away from ``endpoint`` until ``reach`` is covered."""
    sign = 1.0 if direction == "right" else -1.0
    edges = [0.0]
    h = first
    while edges[-1] < reach:
        edges.append(edges[-1] + h)
        h *= ratio
    pts = [endpoint + sign * e for e in edges]
    return [(min(a, b), max(a, b)) for a, b in zip(pts, pts[1:])]


def halfline_rule(endpoint: float, direction: str, decay_scale: float, m_per_panel: int = 20,
                  envelope: Optional[Callable[[float], float]] = None) -> QuadratureRule:
    """Composite rule on a half-line starting at ``endpoint``.

    Panels double in length away from the endpoint; the rule stops once the
    declared integrand envelope (default ``exp(-distance/decay_scale)``)
    drops below 1e-300.
    """
    if not decay_scale > 0:
        raise DomainError(f"decay_scale must be positive, got {decay_scale}")
    if direction not in ("left", "right"):
        raise DomainError(f"direction must be 'left' or 'right', got {direction!r}")
    sign = 1.0 if direction == "right" else -1.0
    if envelope is None:
        def envelope(x):
            return math.exp(-abs(x - endpoint) / decay_scale)
    reach = decay_scale
    while envelope(endpoint + sign * reach) >= TINY:
        reach *= 2.0
        if reach > 1e6 * decay_scale:
            raise DomainError("envelope does not decay")
    # bisect the truncation point down to a panel-resolution distance
    lo, hi = 0.0, reach
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if envelope(endpoint + sign * mid) >= TINY:
            lo = mid
        else:
            hi = mid
    panels = geometric_panels(endpoint, direction, decay_scale, hi)
    rule = composite_rule(gauss_legendre(m_per_panel), panels)
    trunc = endpoint + sign * hi
    return QuadratureRule(rule.nodes, rule.weights, ("halfline", endpoint, direction, trunc))


# ------------------------------------------------------------ linear algebra


def check_symmetric(A: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    scale = max(np.abs(A).max(initial=0.0), TINY)
    if np.abs(A - A.T).max(initial=0.0) > rtol * scale:
        raise DomainError("matrix is not symmetric")
    return A


def sym_eigs(A) -> SymmetricSpectrum:
    A = check_symmetric(A)
    lam, vec = np.linalg.eigh(0.5 * (A + A.T))
    return SymmetricSpectrum(lam[::-1], vec[:, ::-1])


def tridiag_eigvals(diag, off, top: Optional[int] = None) -> np.ndarray:
    """Eigenvalues (descending) of a symmetric tridiagonal matrix; only the largest ``top`` if given."""
    d = np.asarray(diag, float)
    e = np.asarray(off, float)
    if top is None or top >= d.size:
        lam = scipy.linalg.eigvalsh_tridiagonal(d, e)
    else:
        lam = scipy.linalg.eigvalsh_tridiagonal(d, e, select="i", select_range=(d.size - top, d.size - 1))
    return lam[::-1]


def solve_linear(A, b, max_cond: float = 1e14) -> np.ndarray:
    """LU solve with a 1-norm condition estimate; raises past ``max_cond``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    anorm = np.abs(A).sum(axis=0).max(initial=0.0)
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if np.any(np.diag(lu) == 0.0):
        raise ConditioningError("matrix is singular")
    rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond * max_cond < 1.0:
        cond = math.inf if rcond == 0 else 1.0 / rcond
        raise ConditioningError(f"condition estimate {cond:.3g} exceeds {max_cond:.0e}")
    return scipy.linalg.lu_solve((lu, piv), b)


# --------------------------------------------------------------- ODE solver

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def integrate_ivp(f: Callable, t0: float, y0, t1: float, tol: float = 1e-10,
                  h0: Optional[float] = None, max_steps: int = 1_000_000) -> np.ndarray:
    """Dormand-Prince 5(4) with per-step error control at ``tol``.

    ``f(t, y)`` returns dy/dt. Works for complex ``y0`` too.
    """
    y = np.array(y0, dtype=np.result_type(np.asarray(y0).dtype, float))
    t = float(t0)
    span = float(t1) - t
    if span == 0.0:
        return y
    direction = math.copysign(1.0, span)
    h = abs(h0) if h0 else min(abs(span), 1e-2 * max(1.0, abs(span)))
    hmin = 1e-14 * max(1.0, abs(t0), abs(t1))
    k = np.empty((7,) + y.shape, dtype=y.dtype)
    k[0] = f(t, y)
    for _ in range(max_steps):
        if direction * (t1 - t) <= 0:
            return y
        h = min(h, abs(t1 - t))
        hs = direction * h
        for i in range(1, 7):
            yi = y + hs * np.tensordot(_DP_A[i], k[:i], axes=1)
            k[i] = f(t + _DP_C[i] * hs, yi)
        y5 = y + hs * np.tensordot(_DP_B5, k, axes=1)
        err = hs * np.tensordot(_DP_B5 - _DP_B4, k, axes=1)
        scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y5)))
        enorm = float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))
        if enorm <= 1.0:
            t += hs
            y = y5
            k[0] = k[6]  # FSAL
            fac = 5.0 if enorm == 0 else min(5.0, 0.9 * enorm ** -0.2)
            h *= fac
        else:
            h *= max(0.1, 0.9 * enorm ** -0.25)
            if h < hmin:
                raise StiffnessError(f"step size underflow at t={t:.6g}")
    raise StiffnessError("too many steps")


# ------------------------------------------------------------------- Newton


def fd_jacobian(F: Callable, x: np.ndarray, fx: np.ndarray, rel_step: float = 1e-7) -> np.ndarray:
    J = np.empty((fx.size, x.size))
    for j in range(x.size):
        h = rel_step * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        J[:, j] = (np.atleast_1d(F(xp)) - fx) / h
    return J


def newton_solve(F: Callable, x0, tol: float = 1e-12, max_iter: int = 50,
                 jac: Optional[Callable] = None) -> np.ndarray:
    """Damped Newton: full step, halved while the residual norm increases."""
    x = np.atleast_1d(np.array(x0, dtype=float))
    fx = np.atleast_1d(np.asarray(F(x), dtype=float))
    r = float(np.linalg.norm(fx))
    best, best_r = x.copy(), r
    for _ in range(max_iter):
        if r <= tol:
            return x
        J = jac(x) if jac is not None else fd_jacobian(F, x, fx)
        J = np.atleast_2d(np.asarray(J, dtype=float))
        try:
            dx = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -fx, rcond=None)[0]
        step = 1.0
        while True:
            xn = x + step * dx
            fn = np.atleast_1d(np.asarray(F(xn), dtype=float))
            rn = float(np.linalg.norm(fn))
            if step < 1e-10 or (np.isfinite(rn) and rn < r):
                break
            step *= 0.5
        x, fx, r = xn, fn, rn
        if r < best_r:
            best, best_r = x.copy(), r
    if r <= tol:
        return x
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations "
                           f"(residual {best_r:.3e})", best=best, residual=best_r)
