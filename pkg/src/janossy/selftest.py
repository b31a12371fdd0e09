"""Acceptance checks (numbered 1-11), shared by ``janossy selftest`` and the test suite.

Each check returns a CheckResult; none of them raises on a numerical miss.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import edge_laws as el
from .equilibrium import Potential, g_phi, gue_potential, solve_constrained, solve_full_line
from .fredholm import discretize, gap_probs, resolvent
from .numcore import halfline_rule
from .orthopoly import WeightSpec, build_recurrence, cd_kernel, l_kernel_cd
from .sampler import EmpiricalLaw, edge_statistics, ks_distance
from .specfun import (
    TWO_THIRDS_PI, bessel_Q, bessel_asymptotic_matrix, jump_residual, model_PB,
)


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    values: Dict[str, float] = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f} s)"


# wall-clock budgets (seconds) stated with some criteria
RUNTIME_LIMITS = {1: 60.0, 4: 120.0, 5: 600.0, 10: 300.0}


def _timed(fn):
    def run(*a, **k) -> CheckResult:
        t0 = time.perf_counter()
        res = fn(*a, **k)
        res.seconds = time.perf_counter() - t0
        limit = RUNTIME_LIMITS.get(res.number)
        if limit is not None:
            res.detail += f", runtime limit {limit:g} s"
            if res.seconds > limit:
                res.passed = False
                res.detail += " EXCEEDED"
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def tw_cross_method() -> CheckResult:
    alphas = np.linspace(-6.0, 3.0, 20)
    worst = max(abs(el.tw_fredholm(a) - el.tw_painleve(a)) for a in alphas)
    return CheckResult(1, "Tracy-Widom Fredholm vs Painleve", worst <= 1e-6,
                       f"max diff {worst:.2e} (tol 1e-6)", values={"max_diff": worst})


def _dlogF(alpha: float, h: float = 1e-2) -> float:
    # Richardson on central differences, O(h^4)
    def c(hh):
        return (math.log(el.tw_fredholm(alpha + hh)) - math.log(el.tw_fredholm(alpha - hh))) / (2 * hh)
    return (4 * c(h / 2) - c(h)) / 3


@_timed
def log_derivative_identity() -> CheckResult:
    worst = 0.0
    parts = []
    for a in (-2.0, 0.0, 1.0):
        d = _dlogF(a)
        m = float(el.limit_kernel(a)(a, a))
        u = el.u2_integral(a)
        spread = max(abs(d - m), abs(d - u), abs(m - u))
        worst = max(worst, spread)
        parts.append(f"a={a:g}: {spread:.1e}")
    return CheckResult(2, "d/da log F = M_a(a,a) = int u^2", worst <= 1e-5,
                       f"max pairwise {worst:.2e} (tol 1e-5); " + ", ".join(parts), values={"max_spread": worst})


@_timed
def janossy_gap_equivalence() -> CheckResult:
    worst_route = 0.0
    worst_mass = 0.0
    for a in (-3.0, -1.0, 0.0, 1.0):
        for m in range(1, 5):
            ra, rb = el.mth_law_limit(m, a, both=True, check=1.0)
            worst_route = max(worst_route, abs(ra - rb))
        P = gap_probs(el.airy_window(a).operator, 60)
        worst_mass = max(worst_mass, abs(P.sum() - 1.0))
    ok = worst_route <= 1e-8 and worst_mass <= 1e-10
    return CheckResult(3, "Janossy sum vs gap counts", ok,
                       f"route diff {worst_route:.2e} (tol 1e-8), |sum P - 1| {worst_mass:.2e} (tol 1e-10)",
                       values={"route": worst_route, "mass": worst_mass})


def _nystrom_L(V: Potential, n: int, c: float):
    T = build_recurrence(WeightSpec(V, n), n + 1)

    def kern(X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X, float), np.asarray(Y, float))
        return np.asarray(cd_kernel(T, n, X.ravel(), Y.ravel())).reshape(X.shape)

    d0 = cd_kernel(T, n, c, c)
    rule = halfline_rule(c, "right", 0.5 / math.sqrt(n), 20, envelope=lambda x: cd_kernel(T, n, x, x) / d0)
    return discretize(kern, rule)


@_timed
def finite_n_identity() -> CheckResult:
    V = gue_potential()
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for n in (8, 12, 20):
        for c in (0.95, 1.0, 1.05):
            op = _nystrom_L(V, n, c)
            Tt = build_recurrence(WeightSpec(V, n, c), n + 1)
            pts = c + rng.uniform(0.01, 0.5, (10, 2))
            L = np.array([l_kernel_cd(Tt, n, x, y) for x, y in pts])
            R = np.array([resolvent(op, x, y) for x, y in pts])
            worst = max(worst, float(np.max(np.abs(L - R) / np.abs(R))))
    return CheckResult(4, "CD-form L vs Nystrom resolvent of K_n", worst <= 1e-6,
                       f"max relative {worst:.2e} (tol 1e-6)", values={"max_rel": worst})


@_timed
def universality_rate() -> CheckResult:
    V = gue_potential()
    slopes = {}
    for a in (0.0, 1.0):
        slopes[a] = el.convergence_rate(V, a, [16, 32, 64, 128], point=(2.0, 3.0)).slope
    ok = all(-0.85 <= s <= -0.50 for s in slopes.values())
    txt = ", ".join(f"a={a:g}: {s:.3f}" for a, s in slopes.items())
    return CheckResult(5, "finite-n kernel -> M_a rate", ok, f"slopes {txt} (window [-0.85, -0.50])",
                       values={f"slope_{a:g}": s for a, s in slopes.items()})


def airy_side_sup(alpha: float, k: int = 16) -> float:
    g = np.linspace(alpha + 0.5, alpha + 2.0, k)
    X, Y = np.meshgrid(g, g)
    M = el.limit_kernel(alpha)(X.ravel(), Y.ravel())
    return float(np.max(np.abs(M - el.airy_kernel(X.ravel(), Y.ravel()))))


@_timed
def airy_side() -> CheckResult:
    sups = [airy_side_sup(a) for a in (3.0, 4.0, 5.0)]
    ok = sups[1] <= 1e-3 and sups[0] > sups[1] > sups[2]
    return CheckResult(6, "M_a -> K_Airy as a -> +inf", ok,
                       "sup " + ", ".join(f"{s:.2e}" for s in sups) + " at a=3,4,5 (a=4 tol 1e-3, decreasing)",
                       values={"sup_3": sups[0], "sup_4": sups[1], "sup_5": sups[2]})


BESSEL_PAIRS = ((0.5, 1.0), (0.3, 0.6))


def bessel_deviation(alpha: float, offset) -> float:
    K, _ = el.fitted_bessel_kernel(alpha)
    M = el.limit_kernel(alpha)
    x, y = alpha + offset[0], alpha + offset[1]
    return abs(K(x, y) - M(x, y)) / abs(M(x, y))


@_timed
def bessel_side() -> CheckResult:
    ratios = []
    for p in BESSEL_PAIRS:
        ratios.append(bessel_deviation(-3.0, p) / bessel_deviation(-5.0, p))
    # the gate: 1 - lambda_max of the alpha=-5 window stays above the resolvent gate
    lam = float(el.airy_window(-5.0).operator.eigenvalues[0])
    ok = all(r >= 1.2 for r in ratios) and 1 - lam > 1e-8
    return CheckResult(7, "Bessel-form kernel trend a=-3 -> -5", ok,
                       "ratios " + ", ".join(f"{r:.2f}" for r in ratios) + f" (need >= 1.2), 1-lam_max {1 - lam:.1e}",
                       values={f"ratio_{i}": r for i, r in enumerate(ratios)})


@_timed
def continuity() -> CheckResult:
    d2 = el.continuity_at_zero(1e-2, 1.0, 2.0)
    d3 = el.continuity_at_zero(1e-3, 1.0, 2.0)
    ok = d3 < d2 <= 5e-3
    return CheckResult(8, "continuity of M_a at a=0", ok, f"{d2:.2e} (1e-2), {d3:.2e} (1e-3)",
                       values={"d2": d2, "d3": d3})


def contour_points(model: str, count: int = 20) -> List[complex]:
    """Points on the jump contours of a model, spread over radii 0.3..30."""
    if model == "PA":
        rays = [0.0, TWO_THIRDS_PI, -TWO_THIRDS_PI, math.pi]
    else:
        rays = [TWO_THIRDS_PI, -TWO_THIRDS_PI, math.pi]
    radii = np.geomspace(0.3, 30.0, -(-count // len(rays)))
    pts = []
    for i in range(count):
        ang = rays[i % len(rays)]
        r = float(radii[i // len(rays)])
        if ang == 0.0:
            pts.append(complex(r, 0.0))
        elif ang == math.pi:
            pts.append(complex(-r, 0.0))
        else:
            pts.append(r * complex(math.cos(ang), math.sin(ang)))
    return pts


def parametrix_report(count: int = 20):
    rows = []
    for model in ("Q", "PA", "PB"):
        for z in contour_points(model, count):
            rows.append((model, z, jump_residual(model, z)))
    dets = [complex(np.linalg.det(bessel_Q(z))) for z in (1.0, 4.0 + 2.0j, -3.0 + 1.0j)]
    det_spread = max(abs(d - dets[0]) for d in dets)
    z = 100.0
    asym = float(np.max(np.abs(np.linalg.solve(bessel_asymptotic_matrix(z), model_PB(z)) - np.eye(2))))
    return rows, det_spread, asym


@_timed
def parametrix_suite() -> CheckResult:
    rows, det_spread, asym = parametrix_report()
    worst = {m: max(r for mm, _, r in rows if mm == m) for m in ("Q", "PA", "PB")}
    ok = max(worst.values()) <= 1e-8 and det_spread <= 1e-10 and asym <= 0.15
    txt = ", ".join(f"{m} {v:.1e}" for m, v in worst.items())
    return CheckResult(9, "parametrix jumps / det / asymptotics", ok,
                       f"jumps {txt} (tol 1e-8), det Q spread {det_spread:.1e}, P_B asym {asym:.3f} (tol 0.15)",
                       values={"det_spread": det_spread, "asym": asym, **{f"jump_{m}": v for m, v in worst.items()}})


@_timed
def monte_carlo(n: int = 200, draws: int = 10_000, seed: int = 2024) -> CheckResult:
    c_V = solve_full_line(gue_potential()).c_V
    stats = edge_statistics(n, draws, seed, m_max=2, c_V=c_V)
    ks1 = ks_distance(EmpiricalLaw(stats[:, 0]), el.order_law_cdf(1))
    ks2 = ks_distance(EmpiricalLaw(stats[:, 1]), el.order_law_cdf(2))
    ok = ks1 <= 0.03 and ks2 <= 0.04
    return CheckResult(10, "Monte Carlo edge laws", ok, f"KS lambda1 {ks1:.4f} (tol 0.03), lambda2 {ks2:.4f} (tol 0.04)",
                       values={"ks1": ks1, "ks2": ks2})


def gue_b(c: float) -> float:
    return (c - 2.0 * math.sqrt(c * c + 3.0)) / 3.0


@_timed
def equilibrium_checks() -> CheckResult:
    V = gue_potential()
    free = solve_full_line(V)
    band_err = max(abs(free.left + 1.0), abs(free.right - 1.0))
    b_err = max(abs(solve_constrained(V, c).left - gue_b(c)) for c in (0.95, 0.9, 0.7, 0.5, 0.2))
    quartic = solve_full_line(Potential([0, 0, 0, 0, 1]))
    mass_err = max(abs(free.mass() - 1.0), abs(quartic.mass() - 1.0))
    el_eq = 0.0
    el_ineq = -np.inf
    for meas in (free, quartic):
        x = np.linspace(meas.left, meas.right, 12)[1:-1]
        el_eq = max(el_eq, float(np.max(np.abs(meas.el_residual(x)))))
        el_ineq = max(el_ineq, float(np.max(meas.el_residual(meas.right + np.array([0.1, 1.0])))))
        el_ineq = max(el_ineq, float(np.max(meas.el_residual(meas.left - np.array([0.1, 1.0])))))
    gp = g_phi(quartic)
    z = quartic.right + np.array([0.1, 0.5, 1.0])
    phi_err = float(np.max(np.abs(gp.el_residual(z) + gp.phi(z))))
    ok = band_err <= 1e-10 and b_err <= 1e-10 and mass_err <= 1e-10 and el_eq <= 1e-8 \
        and el_ineq < -1e-6 and phi_err <= 1e-8
    return CheckResult(11, "equilibrium measures", ok,
                       f"band {band_err:.1e}, b(c) {b_err:.1e}, mass {mass_err:.1e}, E-L eq {el_eq:.1e}, "
                       f"E-L ineq max {el_ineq:.2e}, phi identity {phi_err:.1e}",
                       values={"band": band_err, "b": b_err, "mass": mass_err, "el_eq": el_eq,
                               "el_ineq": el_ineq, "phi": phi_err})


CHECKS: Dict[int, Callable[[], CheckResult]] = {
    1: tw_cross_method, 2: log_derivative_identity, 3: janossy_gap_equivalence, 4: finite_n_identity,
    5: universality_rate, 6: airy_side, 7: bessel_side, 8: continuity, 9: parametrix_suite,
    10: monte_carlo, 11: equilibrium_checks,
}
