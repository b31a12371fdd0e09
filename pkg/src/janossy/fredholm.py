"""Nystrom discretization of symmetric kernels: Fredholm determinants, resolvents, gap counts.

With M_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j) and eigenvalues lambda_i of M,
    det(1 - theta K) ~ prod(1 - theta lambda_i),
    P(exactly m points) = prod(1 - lambda_i) e_m(mu),  mu_i = lambda_i / (1 - lambda_i).
"""
from __future__ import annotations

import threading
from typing import Callable, Optional

import numpy as np

from .errors import ConditioningError, DomainError
from .numcore import QuadratureRule, SymmetricSpectrum, check_symmetric, sym_eigs

GATE = 1e-8


class NystromOperator:
    """Quadrature discretization of a symmetric kernel; the spectrum is computed once, on demand."""

    def __init__(self, kernel: Callable, rule: QuadratureRule, matrix: np.ndarray):
        self.kernel = kernel
        self.rule = rule
        self.sqrt_w = np.sqrt(rule.weights)
        self.sqrt_w.setflags(write=False)
        matrix.setflags(write=False)
        self.matrix = matrix
        self._spectrum: Optional[SymmetricSpectrum] = None
        self._lock = threading.Lock()

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def spectrum(self) -> SymmetricSpectrum:
        if self._spectrum is None:
            with self._lock:
                if self._spectrum is None:
                    self._spectrum = sym_eigs(self.matrix)
        return self._spectrum

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    def __len__(self):
        return self.matrix.shape[0]


def discretize(kernel: Callable, rule: QuadratureRule, sym_tol: float = 1e-10) -> NystromOperator:
    """kernel(X, Y) must accept broadcast arrays."""
    x = rule.nodes
    X, Y = np.meshgrid(x, x, indexing="ij")
    Kxy = np.asarray(kernel(X, Y), dtype=float)
    sw = np.sqrt(rule.weights)
    M = sw[:, None] * Kxy * sw[None, :]
    M = check_symmetric(M, rtol=sym_tol)
    return NystromOperator(kernel, rule, 0.5 * (M + M.T))


def det1m(op: NystromOperator, theta: float = 1.0) -> float:
    return float(np.prod(1.0 - theta * op.eigenvalues))


def _gate(op: NystromOperator, gate: float = GATE):
    lam_max = float(op.eigenvalues[0]) if len(op) else 0.0
    if 1.0 - lam_max <= gate:
        raise ConditioningError(f"1 - lambda_max = {1 - lam_max:.3e} is below the gate {gate:.0e}")


def resolvent(op: NystromOperator, x, y, gate: float = GATE):
    """R = K(1 - K)^{-1} at (x, y) by the Nystrom interpolation formula."""
    _gate(op, gate)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    nodes = op.nodes
    kx = op.kernel(x[:, None], nodes[None, :]) * op.sqrt_w[None, :]
    ky = op.kernel(y[:, None], nodes[None, :]) * op.sqrt_w[None, :]
    spec = op.spectrum
    V = spec.eigenvectors
    scale = 1.0 / (1.0 - spec.eigenvalues)
    ax = kx @ V
    ay = ky @ V
    corr = np.sum(ax * ay * scale[None, :], axis=1)
    val = np.asarray(op.kernel(x, y), dtype=float) + corr
    return val.reshape(shape) if val.size > 1 else float(val[0])


def elementary_symmetric(mu: np.ndarray, m_max: int) -> np.ndarray:
    """e_0..e_{m_max} of mu by Newton's identities (mu sorted descending first)."""
    mu = np.sort(np.asarray(mu, dtype=float))[::-1]
    p = np.array([np.sum(mu ** k) for k in range(1, m_max + 1)])
    e = np.zeros(m_max + 1)
    e[0] = 1.0
    for m in range(1, m_max + 1):
        s = 0.0
        for i in range(1, m + 1):
            s += (-1) ** (i - 1) * e[m - i] * p[i - 1]
        e[m] = s / m
    return e


def elementary_symmetric_product(mu: np.ndarray, m_max: int) -> np.ndarray:
    """e_0..e_{m_max} of mu as coefficients of prod(1 + mu_i t)."""
    c = np.zeros(m_max + 1)
    c[0] = 1.0
    for v in np.asarray(mu, dtype=float):
        c[1:] = c[1:] + v * c[:-1]
    return c


def gap_probs(op: NystromOperator, m_max: int, gate: float = GATE, method: str = "product") -> np.ndarray:
    """P(exactly m points in the operator's domain), m = 0..m_max.

    e_m(mu) comes from the expansion of prod(1 + mu_i t) (all terms positive, no
    cancellation). method="newton" uses Newton's identities on the power sums
    instead; those lose accuracy once e_m is far below p_1^m.
    """
    if m_max < 0:
        raise DomainError("m_max must be nonnegative")
    _gate(op, gate)
    lam = op.eigenvalues
    mu = lam / (1.0 - lam)
    if method == "product":
        e = elementary_symmetric_product(mu, m_max)
    elif method == "newton":
        e = elementary_symmetric(mu, m_max)
    else:
        raise DomainError(f"unknown method {method!r}")
    return float(np.prod(1.0 - lam)) * e
