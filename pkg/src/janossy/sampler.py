"""Monte Carlo eigenvalues of the unitary ensemble with weight e^{-2n x^2} (V = 2x^2).

Tridiagonal model (beta = 2): diagonal N(0, 1), off-diagonal chi_{2(n-k)}/sqrt(2),
k = 1..n-1. Its eigenvalues have joint density prop. to prod|l_i - l_j|^2 e^{-sum l^2/2};
dividing by 2 sqrt(n) gives weight e^{-2n x^2}, whose density tends to (2/pi) sqrt(1 - x^2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .numcore import tridiag_eigvals


@dataclass(frozen=True)
class SpectrumSample:
    n: int
    eigenvalues: np.ndarray  # descending
    seed: int
    index: int = 0


def _generator(seed: int, index: int) -> np.random.Generator:
    # independent substream per (seed, draw index)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def scale_factor(n: int) -> float:
    return 1.0 / (2.0 * np.sqrt(n))


def sample_spectrum(n: int, seed: int, index: int = 0, top: Optional[int] = None) -> SpectrumSample:
    """One draw; ``top`` keeps only the largest eigenvalues (faster for edge statistics)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0 <= seed < 2 ** 64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    rng = _generator(seed, index)
    diag = rng.standard_normal(n)
    dof = 2.0 * np.arange(n - 1, 0, -1)
    off = np.sqrt(rng.chisquare(dof)) / np.sqrt(2.0) if n > 1 else np.zeros(0)
    lam = tridiag_eigvals(diag, off, top) * scale_factor(n)
    lam.setflags(write=False)
    return SpectrumSample(n, lam, int(seed), int(index))


def scale_statistic(sample: SpectrumSample, m: int, c_V: float) -> float:
    """c_V n^{2/3} (lambda_m - 1)."""
    if m < 1 or m > sample.eigenvalues.size:
        raise DomainError("m out of range for this sample")
    return float(c_V * sample.n ** (2.0 / 3.0) * (sample.eigenvalues[m - 1] - 1.0))


def edge_statistics(n: int, draws: int, seed: int, m_max: int = 2, c_V: float = 2.0) -> np.ndarray:
    """Array (draws, m_max) of scaled top-m statistics."""
    out = np.empty((draws, m_max))
    for i in range(draws):
        s = sample_spectrum(n, seed, i, top=m_max)
        out[i] = c_V * n ** (2.0 / 3.0) * (s.eigenvalues[:m_max] - 1.0)
    return out


class EmpiricalLaw:
    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=float))
        v.setflags(write=False)
        self.values = v

    @property
    def N(self) -> int:
        return self.values.size

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.searchsorted(self.values, x, side="right") / self.N
        return float(out) if out.ndim == 0 else out

    __call__ = cdf

    def quantile(self, p: float) -> float:
        return float(np.quantile(self.values, p))


def ks_distance(emp: EmpiricalLaw, theory: Callable) -> float:
    """sup |F_emp - F| at every sample point and at its left limit.

    Left limits of F are taken at the next float below, so a step-function theory
    (e.g. another empirical law) is compared correctly; for continuous F this is the
    classical two-sided KS statistic.
    """
    v = emp.values
    F = np.asarray(theory(v), dtype=float)
    F_left = np.asarray(theory(np.nextafter(v, -np.inf)), dtype=float)
    E = emp.cdf(v)
    E_left = emp.cdf(np.nextafter(v, -np.inf))
    return float(min(1.0, max(np.max(np.abs(E - F)), np.max(np.abs(E_left - F_left)))))
