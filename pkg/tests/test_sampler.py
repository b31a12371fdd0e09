import numpy as np
import pytest
from scipy.optimize import brentq

from janossy import edge_laws as el
from janossy.errors import DomainError
from janossy.sampler import (
    EmpiricalLaw, edge_statistics, ks_distance, sample_spectrum, scale_factor, scale_statistic,
)


@pytest.fixture(scope="module")
def edge_stats():
    return edge_statistics(200, 10_000, seed=7, m_max=2)


def test_reproducible_and_sorted():
    a = sample_spectrum(50, 123, 4)
    b = sample_spectrum(50, 123, 4)
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert not np.array_equal(a.eigenvalues, sample_spectrum(50, 123, 5).eigenvalues)
    assert not np.array_equal(a.eigenvalues, sample_spectrum(50, 124, 4).eigenvalues)
    assert a.eigenvalues.size == 50 and np.all(np.diff(a.eigenvalues) < 0)
    top = sample_spectrum(50, 123, 4, top=3)
    np.testing.assert_allclose(top.eigenvalues, a.eigenvalues[:3], atol=1e-13)


def test_seed_validation():
    with pytest.raises(DomainError):
        sample_spectrum(10, -1)
    with pytest.raises(DomainError):
        sample_spectrum(10, 2 ** 64)
    with pytest.raises(DomainError):
        sample_spectrum(0, 1)
    sample_spectrum(3, 2 ** 64 - 1)


def test_n1_variance():
    x = np.array([sample_spectrum(1, 99, i).eigenvalues[0] for i in range(100_000)])
    assert 0.24 <= x.var() <= 0.26
    assert scale_factor(1) == 0.5


def test_second_moment_n400():
    m2 = [np.mean(sample_spectrum(400, 5, i).eigenvalues ** 2) for i in range(200)]
    assert 0.24 <= np.mean(m2) <= 0.26


def test_bulk_histogram_n400():
    lam = np.concatenate([sample_spectrum(400, 11, i).eigenvalues for i in range(200)])
    edges = np.linspace(-1.1, 1.1, 51)
    h, _ = np.histogram(lam, bins=edges, density=True)
    # exact bin averages of (2/pi) sqrt(1 - x^2)
    def cum(x):
        x = np.clip(x, -1, 1)
        return (x * np.sqrt(1 - x * x) + np.arcsin(x)) / np.pi + 0.5
    ref = (cum(edges[1:]) - cum(edges[:-1])) / np.diff(edges)
    assert np.max(np.abs(h - ref)) <= 0.02


def test_scale_statistic():
    s = sample_spectrum(20, 1)
    lam = s.eigenvalues
    shifted = type(s)(s.n, lam - lam[0] + 1.0, s.seed)
    assert scale_statistic(shifted, 1, 2.0) == 0.0
    a = scale_statistic(s, 2, 2.0)
    assert a == pytest.approx(2.0 * 20 ** (2 / 3) * (lam[1] - 1.0), rel=1e-15)
    assert scale_statistic(s, 2, 4.0) == pytest.approx(2 * a, rel=1e-15)
    with pytest.raises(DomainError):
        scale_statistic(s, 21, 2.0)


def test_median_matches_tw(edge_stats):
    med_tw = brentq(lambda s: el.tw_fredholm(s) - 0.5, -3, 0)
    assert abs(np.median(edge_stats[:, 0]) - med_tw) <= 0.15


def test_edge_ks(edge_stats):
    assert ks_distance(EmpiricalLaw(edge_stats[:, 0]), el.order_law_cdf(1)) <= 0.03
    assert ks_distance(EmpiricalLaw(edge_stats[:, 1]), el.order_law_cdf(2)) <= 0.04


def test_edge_constant_choice(edge_stats):
    # c_V = 2 vs the alternative (sqrt2/pi)^{2/3} ~ 0.766: only the former fits F_TW
    lam1 = edge_stats[:, 0] / 2.0
    alt = (np.sqrt(2) / np.pi) ** (2 / 3)
    F = el.order_law_cdf(1)
    good = ks_distance(EmpiricalLaw(2.0 * lam1), F)
    bad = ks_distance(EmpiricalLaw(alt * lam1), F)
    assert good <= 0.03 < bad


def test_empirical_law():
    e = EmpiricalLaw([3.0, 1.0, 2.0])
    assert e.N == 3 and e.values.tolist() == [1.0, 2.0, 3.0]
    assert e.cdf(0.5) == 0.0 and e.cdf(2.0) == pytest.approx(2 / 3) and e(10.0) == 1.0
    v = e.cdf(np.linspace(0, 4, 30))
    assert np.all(np.diff(v) >= 0) and v.min() >= 0 and v.max() <= 1
    assert e.quantile(0.5) == 2.0


def test_ks_distance_examples():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(200)
    e = EmpiricalLaw(x)
    assert ks_distance(e, e.cdf) == 0.0
    # classical two-sided statistic for a continuous CDF
    from scipy.stats import kstest, norm
    assert ks_distance(e, norm.cdf) == pytest.approx(kstest(x, norm.cdf).statistic, abs=1e-12)
    u = rng.uniform(0, 1, 50)
    shifted = lambda s: np.clip(s - 1.0, 0, 1)  # noqa: E731  uniform on [1, 2], disjoint support
    assert ks_distance(EmpiricalLaw(u), shifted) == 1.0


def test_ks_uniform_dkw():
    rng = np.random.default_rng(8)
    d = [ks_distance(EmpiricalLaw(rng.uniform(size=10_000)), lambda s: np.clip(s, 0, 1)) for _ in range(50)]
    assert np.mean(np.array(d) <= 0.02) >= 0.98
