"""Orthonormal polynomials for e^{-nV} on R or on (-inf, c], and Christoffel-Darboux kernels.

Polynomials on the half line (-inf, c] are the "tilde" system: their CD kernel,
evaluated at points x, y > c, is the Janossy kernel L of the window [c, inf).

phi_k(x) = p_k(x) e^{-nV(x)/2} is carried as (mantissa, log10 exponent) so the
weight can underflow while the polynomial overflows.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log
from typing import Optional, Tuple

import numpy as np

from .equilibrium import Potential
from .errors import DomainError, ResolutionError
from .numcore import QuadratureRule, composite_rule, gauss_legendre

LOG_FLOOR = 700.0  # e^{-700} ~ 1e-304
LN10 = log(10.0)


@dataclass(frozen=True)
class WeightSpec:
    potential: Potential
    n: int
    c: Optional[float] = None  # None: full line; else support (-inf, c]

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be a positive integer")

    @property
    def full_line(self) -> bool:
        return self.c is None

    def log_weight(self, x):
        return -self.n * self.potential(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class RecurrenceTable:
    """x p_k = b_{k+1} p_{k+1} + alpha_k p_k + b_k p_{k-1} for orthonormal p_k.

    beta_k = b_k^2 are the monic product coefficients, log_h[k] = log of the squared
    norm of the monic polynomial, log_gamma[k] = -log_h[k]/2 the leading coefficient.
    """

    weight: WeightSpec
    alpha: np.ndarray
    beta: np.ndarray  # beta[0] = mu_0 (total mass), beta[k] for k >= 1
    log_h: np.ndarray

    @property
    def K(self) -> int:
        return self.alpha.size - 1

    @property
    def b(self) -> np.ndarray:
        out = np.sqrt(self.beta)
        out[0] = 0.0
        return out

    @property
    def h(self) -> np.ndarray:
        return np.exp(self.log_h)

    @property
    def log_gamma(self) -> np.ndarray:
        return -0.5 * self.log_h

    @property
    def gamma(self) -> np.ndarray:
        return np.exp(self.log_gamma)


def _weight_extent(w: WeightSpec, K: int) -> Tuple[float, float, float]:
    """Interval outside which p_K^2 e^{-nV} is negligible, and the minimum of nV on the support.

    Envelope f(x) = nV(x) - 2K log(1+|x|); the interval is where f - min f < LOG_FLOOR.
    """
    V = w.potential
    crit = V.dpoly.roots()
    crit = crit[np.abs(crit.imag) < 1e-12].real
    if not w.full_line:
        crit = np.append(crit[crit <= w.c], w.c)
    vmin = float(np.min(w.n * V(crit)))

    def env(x):
        return w.n * V(x) - 2 * K * np.log1p(np.abs(x))

    # locate the envelope minimum on a coarse grid, then walk outwards
    R = 1.0
    while env(R) < env(R / 2) or env(-R) < env(-R / 2):
        R *= 2
    grid = np.linspace(-R, R if w.full_line else min(R, w.c), 4001)
    if not w.full_line and w.c < -R:
        grid = np.linspace(w.c - 2 * R, w.c, 4001)
    vals = env(grid)
    x0 = float(grid[np.argmin(vals)])
    fmin = float(np.min(vals))

    def walk(direction):
        step = 0.1
        t = step
        while env(x0 + direction * t) - fmin < LOG_FLOOR:
            step *= 1.5
            t += step
        lo, hi = 0.0, t
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if env(x0 + direction * mid) - fmin < LOG_FLOOR:
                lo = mid
            else:
                hi = mid
        return x0 + direction * hi

    left = walk(-1.0)
    right = walk(1.0) if w.full_line else w.c
    if left >= right:
        left = right - 1.0
    return left, right, vmin


def default_panels(w: WeightSpec, K: int, m_per_panel: int = 20) -> int:
    left, right, _ = _weight_extent(w, K)
    per = K + np.sqrt(w.n) * (right - left) + 8
    return int(max(4, ceil(2.0 * per / m_per_panel)))


def discretization(w: WeightSpec, K: int, panels: Optional[int] = None,
                   m_per_panel: int = 20) -> Tuple[QuadratureRule, np.ndarray, float]:
    """Composite Gauss-Legendre rule on the weight's extent.

    Returns (rule, log of rule weight times e^{-n(V - Vmin)}, n*Vmin); logs because
    the weight underflows long before its square root does.
    """
    left, right, vmin = _weight_extent(w, K)
    if panels is None:
        panels = default_panels(w, K, m_per_panel)
    edges = np.linspace(left, right, panels + 1)
    rule = composite_rule(gauss_legendre(m_per_panel), list(zip(edges[:-1], edges[1:])))
    log_wts = np.log(rule.weights) + w.log_weight(rule.nodes) + vmin
    return rule, log_wts, vmin


def _build(w: WeightSpec, K: int, panels: Optional[int], m_per_panel: int) -> RecurrenceTable:
    rule, log_wts, vmin = discretization(w, K + 1, panels, m_per_panel)
    x = rule.nodes
    if x.size < 2 * (K + 2):
        raise ResolutionError("too few quadrature nodes for the requested degree")
    mu0 = float(np.sum(np.exp(log_wts)))
    Q = np.zeros((x.size, K + 1))
    q = np.exp(0.5 * (log_wts - np.log(mu0)))
    alpha = np.zeros(K + 1)
    beta = np.zeros(K + 1)
    beta[0] = mu0
    prev = np.zeros_like(q)
    bk = 0.0
    for k in range(K + 1):
        Q[:, k] = q
        v = x * q
        alpha[k] = q @ v
        if k == K:
            break
        v = v - alpha[k] * q - bk * prev
        for _ in range(2):
            v -= Q[:, :k + 1] @ (Q[:, :k + 1].T @ v)
        bnext = float(np.linalg.norm(v))
        if not bnext > 0 or not np.isfinite(bnext):
            raise ResolutionError(f"recurrence lost positivity at k={k + 1}")
        beta[k + 1] = bnext ** 2
        prev, q, bk = q, v / bnext, bnext
    log_h = np.log(mu0) - vmin + np.concatenate([[0.0], np.cumsum(np.log(beta[1:]))])
    if w.potential.is_even and w.full_line:
        alpha = np.where(np.abs(alpha) < 1e-12 * (1 + np.sqrt(beta[1:]).max(initial=0.0)), 0.0, alpha)
    for arr in (alpha, beta, log_h):
        arr.setflags(write=False)
    return RecurrenceTable(w, alpha, beta, log_h)


def _drift(t1: RecurrenceTable, t2: RecurrenceTable) -> float:
    if t1.K == 0:
        return float(abs(t1.alpha[0] - t2.alpha[0]) / max(1.0, abs(t1.alpha[0])))
    scale = np.sqrt(t1.beta[1:]).max()
    da = np.max(np.abs(t1.alpha - t2.alpha)) / scale
    db = np.max(np.abs(t1.beta[1:] - t2.beta[1:]) / t1.beta[1:])
    return float(max(da, db))


def build_recurrence(w: WeightSpec, K: int, panels: Optional[int] = None,
                     m_per_panel: int = 20, tol: float = 1e-12, max_panels: int = 4096) -> RecurrenceTable:
    """Recurrence coefficients alpha_0..alpha_K, beta_0..beta_K (Lanczos, full reorthogonalization).

    With panels=None the composite rule is refined by doubling until consecutive
    tables agree to tol; an explicit panel count is used as given.
    """
    if K < 0:
        raise DomainError("K must be nonnegative")
    if panels is not None:
        return _build(w, K, panels, m_per_panel)
    p = default_panels(w, K + 1, m_per_panel)
    prev = None
    while p <= max_panels:
        try:
            cur = _build(w, K, p, m_per_panel)
        except ResolutionError:
            cur = None
        if prev is not None and cur is not None and _drift(prev, cur) <= tol:
            return cur
        prev = cur
        p *= 2
    raise ResolutionError(f"recurrence not stable under refinement up to {max_panels} panels")


def recurrence_drift(w: WeightSpec, K: int, panels: int, m_per_panel: int = 20) -> float:
    """Max relative change of (alpha, beta) when the panel count is doubled."""
    return _drift(_build(w, K, panels, m_per_panel), _build(w, K, 2 * panels, m_per_panel))


# ------------------------------------------------------------ evaluation

_BIG = 1e100


def _phi_run(table: RecurrenceTable, k: int, x, derivative: bool = False):
    """Mantissas of phi_{k-1}, phi_k (and derivatives of p times the same scale) and a shared log10 scale."""
    if k > table.K or k < 0:
        raise DomainError(f"k={k} exceeds the table degree {table.K}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = table.weight
    b = table.b
    a = table.alpha
    log_scale = (-0.5 * table.log_h[0] + 0.5 * w.log_weight(x)) / LN10
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    d_prev = np.zeros_like(x)
    d = np.zeros_like(x)
    for j in range(k):
        p_next = ((x - a[j]) * p - b[j] * p_prev) / b[j + 1]
        if derivative:
            d_next = ((x - a[j]) * d + p - b[j] * d_prev) / b[j + 1]
            d_prev, d = d, d_next
        p_prev, p = p, p_next
        mag = np.maximum(np.abs(p), np.abs(p_prev))
        resc = (mag > _BIG) | ((mag < 1 / _BIG) & (mag > 0))
        if np.any(resc):
            e = np.where(resc, np.floor(np.log10(np.where(mag > 0, mag, 1.0))), 0.0)
            f = 10.0 ** -e
            p, p_prev, d, d_prev = p * f, p_prev * f, d * f, d_prev * f
            log_scale = log_scale + e
    return p_prev, p, d_prev, d, log_scale


def eval_phi(table: RecurrenceTable, k: int, x):
    """phi_k(x) as (mantissa in [0.1, 10) by magnitude, integer log10 exponent)."""
    _, p, _, _, ls = _phi_run(table, k, x)
    with np.errstate(divide="ignore"):
        lg = np.log10(np.abs(p)) + ls
    e = np.where(p != 0, np.floor(lg), 0).astype(np.int64)
    mant = np.where(p != 0, np.sign(p) * 10.0 ** (lg - e), 0.0)
    x = np.asarray(x)
    if x.ndim == 0:
        return float(mant[0]), int(e[0])
    return mant, e


def phi_value(table: RecurrenceTable, k: int, x):
    """phi_k(x) as a plain float (may underflow to 0)."""
    mant, e = eval_phi(table, k, x)
    return mant * 10.0 ** np.asarray(e, dtype=float)


def phi_matrix(table: RecurrenceTable, kmax: int, x) -> np.ndarray:
    """Rows phi_0..phi_{kmax-1} at x as plain floats (for direct sums and Gram checks)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((kmax, x.size))
    for j in range(kmax):
        out[j] = phi_value(table, j, x)
    return out


def _cd_parts(table: RecurrenceTable, n: int, x):
    if n < 1 or n > table.K:
        raise DomainError(f"CD kernel of order n={n} needs a table with K >= n (K={table.K})")
    return _phi_run(table, n, x, derivative=True)


def cd_kernel(table: RecurrenceTable, n: int, x, y):
    """K_n(x, y) = sum_{k<n} phi_k(x) phi_k(y) in the Christoffel-Darboux ratio form."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    pm_x, p_x, dm_x, d_x, s_x = _cd_parts(table, n, x)
    pm_y, p_y, dm_y, d_y, s_y = _cd_parts(table, n, y)
    bn = table.b[n]
    diff = x - y
    same = diff == 0
    num = p_x * pm_y - pm_x * p_y
    off = bn * num / np.where(same, 1.0, diff)
    # phi_n' phi_{n-1} - phi_{n-1}' phi_n = w (p_n' p_{n-1} - p_{n-1}' p_n)
    diag = bn * (d_x * pm_x - dm_x * p_x)
    val = np.where(same, diag, off) * 10.0 ** (s_x + s_y)
    return val if val.size > 1 else float(val[0])


def cd_kernel_sum(table: RecurrenceTable, n: int, x, y):
    """Direct sum form of K_n (oracle for the ratio form)."""
    Px = phi_matrix(table, n, x)
    Py = phi_matrix(table, n, y)
    val = np.sum(Px * Py, axis=0)
    return val if val.size > 1 else float(val[0])


def l_kernel_cd(tilde_table: RecurrenceTable, n: int, x, y):
    """Janossy kernel L of the window [c, inf): CD kernel of the system orthonormal on (-inf, c]."""
    c = tilde_table.weight.c
    if c is None:
        raise DomainError("l_kernel_cd needs a half-line table")
    if np.any(np.asarray(x) < c) or np.any(np.asarray(y) < c):
        raise DomainError("L kernel is evaluated on the window [c, inf)")
    return cd_kernel(tilde_table, n, x, y)


def kernel_matrix(table: RecurrenceTable, n: int, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    M = np.asarray(cd_kernel(table, n, X.ravel(), Y.ravel())).reshape(X.shape)
    return 0.5 * (M + M.T)


def correlation_k(table: RecurrenceTable, n: int, points) -> float:
    """rho^{(k)}(x_1..x_k) = det[K_n(x_i, x_j)]."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if pts.size > n:
        raise DomainError("correlation order exceeds n")
    if pts.size == 0:
        return 1.0
    return float(np.linalg.det(kernel_matrix(table, n, pts)))


def janossy_k(tilde_table: RecurrenceTable, n: int, points, D: float) -> float:
    """Janossy density D(Gamma) det[L(x_i, x_j)] on the window [c, inf)."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    c = tilde_table.weight.c
    if c is None:
        raise DomainError("janossy_k needs a half-line table")
    if np.any(pts < c):
        raise DomainError("points must lie in the window [c, inf)")
    if pts.size == 0:
        return float(D)
    return float(D * np.linalg.det(kernel_matrix(tilde_table, n, pts)))
