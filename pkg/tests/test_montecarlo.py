"""Simulation layer: determinism, empirical statistics, CLT and tails.

Sample counts here are kept modest; the full-size stochastic gates live in
the acceptance suite.
"""

import numpy as np
import pytest

from sftreturns import (
    ConfigurationError,
    DomainError,
    ReturnOperator,
    SimConfig,
    empirical_clt,
    empirical_scgf,
    empirical_tail_rate,
    exact_return_distribution,
    first_return_law,
    gibbs_chain,
    normal_cdf,
    sample_return_times,
    visit_counts,
)


@pytest.fixture(scope="module")
def full2_chain(full2_recoded):
    return gibbs_chain(full2_recoded)


@pytest.fixture(scope="module")
def golden_chain(golden_recoded):
    return gibbs_chain(golden_recoded)


class TestDeterminism:
    def test_same_seed_identical(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=123, n_returns=3, n_samples=500)
        a = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        b = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        assert np.array_equal(a.samples, b.samples)

    def test_single_sample_reproducible(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=9, n_returns=1, n_samples=1)
        a = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        b = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        assert a.samples[0] == b.samples[0]

    def test_worker_hint_invariance(self, golden_chain, golden_recoded):
        base = dict(seed=77, n_returns=4, n_samples=70000)
        a = sample_return_times(golden_chain, golden_recoded.target_blocks, SimConfig(workers=1, **base))
        b = sample_return_times(golden_chain, golden_recoded.target_blocks, SimConfig(workers=3, **base))
        assert np.array_equal(a.samples, b.samples)

    def test_visit_counts_worker_invariance(self, full2_chain, full2_recoded):
        base = dict(seed=5, n_samples=40000, horizon=50)
        a, va = visit_counts(full2_chain, full2_recoded.target_blocks, SimConfig(workers=1, **base))
        b, vb = visit_counts(full2_chain, full2_recoded.target_blocks, SimConfig(workers=4, **base))
        assert np.array_equal(a, b)
        assert va == vb

    def test_different_seeds_differ(self, full2_chain, full2_recoded):
        cfg1 = SimConfig(seed=1, n_returns=3, n_samples=200)
        cfg2 = SimConfig(seed=2, n_returns=3, n_samples=200)
        a = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg1)
        b = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg2)
        assert not np.array_equal(a.samples, b.samples)

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            SimConfig(seed=-1)
        with pytest.raises(ConfigurationError):
            SimConfig(seed=0, n_samples=0)


class TestSampleLaw:
    def test_full2_single_return_frequency(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=101, n_returns=1, n_samples=100_000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        freq1 = stats.histogram.get(1, 0) / stats.samples.size
        assert freq1 == pytest.approx(0.5, abs=0.005)

    def test_golden_never_returns_in_one_step(self, golden_chain, golden_recoded):
        cfg = SimConfig(seed=55, n_returns=1, n_samples=50_000)
        stats = sample_return_times(golden_chain, golden_recoded.target_blocks, cfg)
        assert stats.samples.min() >= 2

    def test_samples_at_least_n(self, golden_chain, golden_recoded):
        cfg = SimConfig(seed=3, n_returns=6, n_samples=5000)
        stats = sample_return_times(golden_chain, golden_recoded.target_blocks, cfg)
        assert stats.samples.min() >= 6

    def test_histogram_matches_oracle_in_total_variation(self, golden_chain, golden_recoded):
        n, n_samples = 4, 120_000
        cfg = SimConfig(seed=29, n_returns=n, n_samples=n_samples)
        stats = sample_return_times(golden_chain, golden_recoded.target_blocks, cfg)
        law = first_return_law(golden_chain, golden_recoded.target_blocks, tol=1e-12)
        dist = exact_return_distribution(law, n)
        exact = {int(d): float(p) for d, p in zip(dist.durations, dist.probs)}
        support = set(exact) | set(stats.histogram)
        tv = 0.5 * sum(
            abs(exact.get(k, 0.0) - stats.histogram.get(k, 0) / n_samples) for k in support
        )
        assert tv <= 5.0 / np.sqrt(n_samples)

    def test_mean_flag_fires_on_wrong_target(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=31, n_returns=10, n_samples=20_000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        assert stats.flags == ()


class TestEmpiricalScgf:
    def test_zero_alpha_is_zero(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=41, n_returns=5, n_samples=2000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        value, ess = empirical_scgf(stats, 0.0)
        assert value == 0.0
        assert ess == pytest.approx(2000.0, rel=1e-12)

    def test_matches_spectral_at_negative_alpha(self, full2_chain, full2_recoded):
        n, n_samples = 10, 200_000
        cfg = SimConfig(seed=43, n_returns=n, n_samples=n_samples)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        op = ReturnOperator(full2_recoded)
        alpha = -0.5
        value, ess = empirical_scgf(stats, alpha)
        assert ess > 100.0
        # C/n finite-size bias plus three standard errors of the estimator
        psi = op.scgf(alpha)
        bias = 0.5 / n
        weights = np.exp(alpha * stats.samples - alpha * stats.samples.max())
        se = weights.std() / (weights.mean() * np.sqrt(n_samples) * n)
        assert abs(value - psi) <= bias + 3.0 * se

    def test_large_negative_alpha_high_ess(self, full2_chain, full2_recoded):
        n = 3
        cfg = SimConfig(seed=47, n_returns=n, n_samples=50_000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        value, ess = empirical_scgf(stats, -5.0)
        assert ess > 100.0
        # bounded weights: close to the spectral value up to the C/n bias
        op = ReturnOperator(full2_recoded)
        assert abs(value - op.scgf(-5.0)) <= 1.0 / n


class TestTailRate:
    def test_zero_frequency_reports_infinite_rate(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=51, n_returns=30, n_samples=1000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        rate, count = empirical_tail_rate(stats, 0.5, 50.0, "upper")
        assert rate == float("inf") and count == 0

    def test_sides_validated(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=53, n_returns=2, n_samples=100)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        with pytest.raises(DomainError):
            empirical_tail_rate(stats, 0.5, 3.0, "lower")
        with pytest.raises(DomainError):
            empirical_tail_rate(stats, 0.5, -1.0, "upper")

    def test_typical_event_rate_near_zero(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=57, n_returns=50, n_samples=20_000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        rate, count = empirical_tail_rate(stats, 0.5, 1e-6, "upper")
        assert count > 5000
        assert rate <= 0.02


class TestCltAndVisits:
    def test_normal_cdf_reference_values(self):
        assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-12)
        assert normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-9)
        assert normal_cdf(-8.0) == pytest.approx(6.22096057e-16, rel=1e-6)

    def test_ks_moderate_n(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=61, n_returns=400, n_samples=20_000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        ks_good = empirical_clt(stats, np.sqrt(2.0), 0.5)
        ks_bad = empirical_clt(stats, np.sqrt(2.0) / 2.0, 0.5)
        assert ks_good < 0.08
        assert ks_bad > 0.12

    def test_lattice_n1_is_far_from_normal(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=63, n_returns=1, n_samples=20_000)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        assert empirical_clt(stats, np.sqrt(2.0), 0.5) > 0.15

    def test_sigma_must_be_positive(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=65, n_returns=2, n_samples=50)
        stats = sample_return_times(full2_chain, full2_recoded.target_blocks, cfg)
        with pytest.raises(DomainError):
            empirical_clt(stats, 0.0, 0.5)

    def test_horizon_one_bernoulli_variance(self, full2_chain, full2_recoded):
        cfg = SimConfig(seed=67, n_samples=200_000, horizon=1)
        counts, var_rate = visit_counts(full2_chain, full2_recoded.target_blocks, cfg)
        assert set(np.unique(counts)) <= {0, 1}
        assert var_rate == pytest.approx(0.25, abs=0.01)

    def test_visit_variance_rate_moderate_horizon(self, golden_chain, golden_recoded):
        cfg = SimConfig(seed=69, n_samples=30_000, horizon=2000)
        _, var_rate = visit_counts(golden_chain, golden_recoded.target_blocks, cfg)
        rho = (1 + np.sqrt(5)) / 2
        predicted = rho**3 * (1 / (rho**2 + 1)) ** 3
        assert var_rate == pytest.approx(predicted, rel=0.08)
