import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from gausskuzmin import DomainError
from gausskuzmin.cfrac_core import orbit
from gausskuzmin.constants import digit_probability, gauss_cdf
from gausskuzmin.mc_verify import (
    MCConfig,
    digit_histogram,
    empirical_cdf_distance,
    ks_distance,
    ks_quantile_99,
    push_cell,
    run_samples,
    sample_orbit_uniform,
    uniform_cdf,
    uniform_variate,
)


@pytest.fixture(scope="module")
def report_n10():
    return empirical_cdf_distance(MCConfig(n=10, samples=100_000, seed=42))


def test_config():
    assert MCConfig(n=10).bits == 104
    assert MCConfig(n=10, precision_bits=200).bits == 200
    with pytest.raises(DomainError):
        MCConfig(precision_bits=32)
    with pytest.raises(DomainError):
        MCConfig(seed=-1)
    with pytest.raises(DomainError):
        MCConfig(samples=0)


def test_n0_returns_raw_variate():
    cfg = MCConfig(n=0, samples=10, seed=7)
    for idx in range(10):
        xi = uniform_variate(cfg, idx)
        assert 0 <= xi < 1 and xi.denominator <= 2**cfg.bits
        assert sample_orbit_uniform(cfg, idx).value == float(xi)


def test_injected_rational():
    assert sample_orbit_uniform(MCConfig(n=2), 0, xi=Fraction(5, 12)).value == 0.5
    r = sample_orbit_uniform(MCConfig(n=3), 0, xi=Fraction(5, 12))
    assert r.value == 0.0 and not r.rejected and r.next_digit is None


def test_orbit_matches_exact_iteration():
    cfg = MCConfig(n=7, samples=50, seed=3)
    for idx in range(50):
        xi = uniform_variate(cfg, idx)
        r = sample_orbit_uniform(cfg, idx)
        exact = orbit(xi, cfg.n)[-1]
        assert not r.rejected
        assert r.value == float(exact)


def test_index_bounds():
    with pytest.raises(DomainError):
        sample_orbit_uniform(MCConfig(samples=5), 5)


def test_push_cell_rejects_straddling_cells():
    # [0.45, 0.55] contains 1/2, where the first digit switches from 2 to 1
    assert push_cell(Fraction(45, 100), Fraction(55, 100), 1).rejected
    assert not push_cell(Fraction(40, 100), Fraction(45, 100), 1).rejected


def test_ks_distance_matches_scipy():
    rng = np.random.default_rng(5)
    x = rng.random(2000) ** 1.3
    ours = ks_distance(x, gauss_cdf)
    ref = stats.kstest(x, lambda z: np.log1p(z) / np.log(2)).statistic
    assert ours == pytest.approx(ref, abs=1e-14)


def test_n0_distances():
    rep = empirical_cdf_distance(MCConfig(n=0, samples=100_000, seed=11))
    x_star = 1 / math.log(2) - 1
    gap = x_star - math.log1p(x_star) / math.log(2)
    assert abs(rep.ks_distance - abs(gap)) <= 0.005
    values, _, _ = run_samples(MCConfig(n=0, samples=100_000, seed=11))
    assert ks_distance(values, uniform_cdf) <= 0.0061


def test_n10_ks(report_n10):
    assert report_n10.ks_distance <= 0.007
    assert report_n10.ks_distance <= ks_quantile_99(100_000) + 0.0018
    assert report_n10.rejected == 0


def test_n10_first_digit(report_n10):
    freq = report_n10.digit_histogram[0] / report_n10.samples
    assert abs(freq - digit_probability(1)) <= 0.006


def test_histogram_invariants(report_n10):
    assert sum(report_n10.digit_histogram) == report_n10.samples
    assert len(report_n10.digit_histogram) == 11
    assert 0.0 <= report_n10.ks_distance <= 1.0


def test_digit_histogram_buckets():
    assert digit_histogram([1, 2, 2, 11, None, 10], max_digit=10) == [1, 2, 0, 0, 0, 0, 0, 0, 0, 1, 2]


def test_reproducible_across_workers():
    cfg = MCConfig(n=6, samples=20_000, seed=99)
    a = empirical_cdf_distance(cfg, workers=1)
    b = empirical_cdf_distance(cfg, workers=3)
    assert a == b
    va, _, _ = run_samples(cfg, chunk=777)
    vb, _, _ = run_samples(cfg, chunk=20_000)
    assert va == vb


def test_single_sample_agrees_with_bulk():
    cfg = MCConfig(n=4, samples=300, seed=5)
    bulk, _, _ = run_samples(cfg, chunk=64)
    single = [sample_orbit_uniform(cfg, i).value for i in range(300)]
    assert bulk == single


@pytest.mark.parametrize("n", [1, 5, 15, 30])
def test_auto_precision_never_rejects(n):
    rep = empirical_cdf_distance(MCConfig(n=n, samples=100_000, seed=42))
    assert rep.rejected == 0


def test_starved_precision_rejects_and_counts():
    rep = empirical_cdf_distance(MCConfig(n=30, samples=5000, seed=1, precision_bits=64))
    assert rep.rejected > 0
    assert rep.samples + rep.rejected == 5000
    assert sum(rep.digit_histogram) == rep.samples


def test_all_rejected():
    rep = empirical_cdf_distance(MCConfig(n=200, samples=50, seed=1, precision_bits=64))
    assert rep.samples == 0 and rep.rejected == 50
    assert rep.ks_distance is None and rep.status != "ok"


def test_convergence_direction():
    for seed in range(10):
        d0 = empirical_cdf_distance(MCConfig(n=0, samples=10_000, seed=seed)).ks_distance
        d5 = empirical_cdf_distance(MCConfig(n=5, samples=10_000, seed=seed)).ks_distance
        assert d5 < d0
