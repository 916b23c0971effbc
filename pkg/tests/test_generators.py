import math

import numpy as np
import pytest
from scipy import stats

from profitscape.errors import ConfigError
from profitscape.generators import (
    FbmParams,
    GbmParams,
    LevyParams,
    MsmParams,
    Seed,
    as_generator,
    circulant_eigenvalues,
    fgn_autocovariance,
    gen_fbm_price,
    gen_fgn,
    gen_gbm,
    gen_levy_price,
    gen_msm_price,
    levy_scale_for_sigma,
    msm_multipliers,
    msm_returns,
    sample_stable,
    stationary_gaussian,
)
from profitscape.series import to_returns

BIG = 10**6


def hill(x, frac=0.01):
    a = np.sort(np.abs(x))[::-1]
    k = int(a.size * frac)
    return 1.0 / np.mean(np.log(a[:k] / a[k]))


def autocorr(x, lag):
    x = x - x.mean()
    return float(np.dot(x[:-lag], x[lag:]) / np.dot(x, x))


def gamma_fgn(H, k):
    return 0.5 * (abs(k + 1) ** (2 * H) - 2 * abs(k) ** (2 * H) + abs(k - 1) ** (2 * H))


# --- seeding ---------------------------------------------------------------


def test_seed_streams_are_independent_of_ensemble_size():
    a = Seed(5, 3).generator().standard_normal(4)
    b = Seed(5, 3).generator().standard_normal(4)
    c = Seed(5, 4).generator().standard_normal(4)
    assert a.tobytes() == b.tobytes()
    assert a.tobytes() != c.tobytes()


def test_seed_validation():
    with pytest.raises(ConfigError):
        Seed(-1)
    with pytest.raises(ConfigError):
        Seed(0, 2**64)
    Seed(2**64 - 1, 2**64 - 1).generator()
    with pytest.raises(TypeError):
        as_generator("x")


@pytest.mark.parametrize(
    "make",
    [
        lambda s: gen_gbm(GbmParams(sigma=0.02, T=300), s),
        lambda s: gen_fbm_price(FbmParams(H=0.7, sigma=0.02, T=300), s),
        lambda s: gen_levy_price(LevyParams(alpha=1.5, c=0.01, T=300), s),
        lambda s: gen_msm_price(MsmParams(T=300), s),
    ],
)
def test_generators_deterministic_and_positive(make):
    a, b = make(Seed(1, 2)), make(Seed(1, 2))
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.tobytes() != make(Seed(1, 3)).values.tobytes()
    assert np.all(a.values > 0) and a.T == 300


# --- GBM -------------------------------------------------------------------


def test_gbm_degenerate():
    s = gen_gbm(GbmParams(mu=0, sigma=0, s0=42, T=5), Seed())
    np.testing.assert_array_equal(s.values, [42] * 5)
    s = gen_gbm(GbmParams(mu=0.001, sigma=0, s0=100, T=3), Seed())
    np.testing.assert_allclose(s.values, [100, 100 * math.exp(0.001), 100 * math.exp(0.002)], rtol=1e-14)


def test_gbm_volatility():
    r = to_returns(gen_gbm(GbmParams(sigma=0.02, T=BIG), Seed(2))).values
    se = 0.02 / math.sqrt(2 * r.size)
    assert abs(r.std(ddof=1) - 0.02) < 3 * se


@pytest.mark.parametrize("bad", [dict(sigma=-1), dict(s0=0), dict(T=1)])
def test_gbm_param_validation(bad):
    with pytest.raises(ConfigError):
        GbmParams(**bad)


# --- fGn / FBM -----------------------------------------------------------------


def test_fgn_autocovariance_formula():
    g = fgn_autocovariance(0.7, 6)
    assert g[0] == 1.0
    assert g[1] == pytest.approx(2**0.4 - 1)
    assert g[5] == pytest.approx(0.5 * (6**1.4 - 2 * 5**1.4 + 4**1.4))
    assert g[5] == pytest.approx(0.10695, abs=5e-5)
    np.testing.assert_allclose(fgn_autocovariance(0.5, 5), [1, 0, 0, 0, 0], atol=1e-15)


def test_fgn_white_noise_at_half():
    x = gen_fgn(0.5, BIG, Seed(3)).values
    assert abs(autocorr(x, 1)) < 0.01


@pytest.mark.parametrize("lag, target", [(1, 2**0.4 - 1), (5, gamma_fgn(0.7, 5))])
def test_fgn_correlations(lag, target):
    x = gen_fgn(0.7, BIG, Seed(4)).values
    assert autocorr(x, lag) == pytest.approx(target, abs=0.03)


def sample_acov_sd(H, n, lag=0):
    """Exact sd of the zero-mean sample autocovariance at ``lag`` (Gaussian case)."""
    g = fgn_autocovariance(H, n + lag + 1)
    k = np.arange(1, n)
    terms = g[k] ** 2 + g[np.abs(k - lag)] * g[k + lag]
    var = (g[0] ** 2 + g[lag] ** 2 + 2 * np.sum((1 - k / n) * terms)) / n
    return math.sqrt(var)


@pytest.mark.parametrize("H", [0.6, 0.7])
def test_fgn_autocovariance_lags_0_to_10(H):
    n = BIG
    x = gen_fgn(H, n, Seed(5)).values
    for k in range(11):
        emp = np.dot(x[: n - k], x[k:]) / n
        assert abs(emp - gamma_fgn(H, k)) < 4 / math.sqrt(n)


def test_fgn_strong_memory_autocovariance():
    # at H = 0.8 the sample autocovariance converges like n**(2H - 2), slower than 1/sqrt(n)
    n = BIG
    x = gen_fgn(0.8, n, Seed(5)).values
    for k in (0, 1, 5, 10):
        emp = np.dot(x[: n - k], x[k:]) / n
        assert abs(emp - gamma_fgn(0.8, k)) < 4 * sample_acov_sd(0.8, n, k)


def test_fgn_ensemble_autocovariance():
    # many short paths: the average sample covariance is unbiased for gamma(k)
    n, reps = 256, 4000
    rng = Seed(21).generator()
    X = np.array([gen_fgn(0.8, n, rng).values for _ in range(reps)])
    for k in (0, 1, 2, 5, 20, 100):
        emp = np.mean(np.sum(X[:, : n - k] * X[:, k:], axis=1) / (n - k))
        assert emp == pytest.approx(gamma_fgn(0.8, k), abs=0.04)


def test_fgn_short_and_edge_cases():
    assert gen_fgn(0.3, 1, Seed()).values.shape == (1,)
    x = gen_fgn(1.0, 50, Seed(1)).values
    # H = 1 is perfectly correlated: every increment is the same draw
    np.testing.assert_allclose(x, x[0], atol=1e-10)
    with pytest.raises(ConfigError):
        gen_fgn(0.0, 10, Seed())
    with pytest.raises(ConfigError):
        gen_fgn(1.2, 10, Seed())


def test_dense_fallback_matches_covariance():
    # squared-exponential covariance: positive definite but its minimal
    # circulant embedding has clearly negative eigenvalues
    k = np.arange(30)
    acov = np.exp(-((k / 15.0) ** 2))
    assert circulant_eigenvalues(acov).min() < -1e-3
    rng = np.random.default_rng(0)
    draws = np.array([stationary_gaussian(acov, rng) for _ in range(20000)])
    emp = draws.T @ draws / draws.shape[0]
    from scipy.linalg import toeplitz

    np.testing.assert_allclose(emp, toeplitz(acov), atol=0.05)


def test_fgn_embedding_is_nonnegative():
    for H in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
        lam = circulant_eigenvalues(fgn_autocovariance(H, 1024))
        assert lam.min() > -1e-10


def test_fbm_deterministic_growth():
    s = gen_fbm_price(FbmParams(H=0.7, mu=0.002, sigma=0, s0=10, T=6), Seed())
    np.testing.assert_allclose(s.values, 10 * np.exp(0.002 * np.arange(6)), rtol=1e-13)


def test_fbm_half_matches_gbm_moments():
    sigma, mu, T = 0.02, 0.001, 10**5
    f = to_returns(gen_fbm_price(FbmParams(0.5, mu - sigma**2 / 2, sigma, 100, T), Seed(6))).values
    g = to_returns(gen_gbm(GbmParams(mu, sigma, 100, T), Seed(7))).values
    n = T - 1
    assert abs(f.mean() - g.mean()) < 3 * sigma * math.sqrt(2 / n)
    assert abs(f.std() - g.std()) < 3 * sigma * math.sqrt(1 / n)


def test_fbm_return_memory():
    r = to_returns(gen_fbm_price(FbmParams(0.7, 0.0, 0.02, 100, BIG), Seed(8))).values
    assert autocorr(r, 1) == pytest.approx(0.3195, abs=0.03)


# --- stable ----------------------------------------------------------------------


def test_stable_gaussian_limit():
    x = sample_stable(2.0, Seed(9), BIG)
    se = math.sqrt(2.0 / (x.size - 1)) * 2.0
    assert abs(x.var(ddof=1) - 2.0) < 3 * se
    assert abs(stats.kurtosis(x)) < 0.05


def test_stable_cauchy_quartiles():
    x = sample_stable(1.0, Seed(10), BIG)
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    assert abs(med) < 0.01
    assert abs((q3 - q1) - 2.0) < 0.02


def test_stable_tail_index():
    assert hill(sample_stable(1.5, Seed(11), BIG)) == pytest.approx(1.5, abs=0.1)


def test_stable_scalar_and_validation():
    assert isinstance(sample_stable(1.3, Seed()), float)
    with pytest.raises(ConfigError):
        sample_stable(0.0, Seed())
    with pytest.raises(ConfigError):
        sample_stable(2.1, Seed())


def test_stable_matches_reference_cdf():
    x = sample_stable(1.5, Seed(12), 5000)
    assert stats.kstest(x, lambda v: stats.levy_stable.cdf(v, 1.5, 0)).pvalue > 0.01


# --- Levy prices -------------------------------------------------------------------


def test_levy_degenerate_scale():
    s = gen_levy_price(LevyParams(alpha=1.5, c=0.0, s0=3.0, T=10), Seed())
    np.testing.assert_array_equal(s.values, [3.0] * 10)


def test_levy_gaussian_volatility():
    sigma = 0.02
    r = to_returns(gen_levy_price(LevyParams(2.0, sigma / math.sqrt(2), 100, BIG), Seed(0))).values
    assert abs(r.std(ddof=1) - sigma) < 3 * sigma / math.sqrt(2 * r.size)


# Expected value of the top-1% Hill estimator under the exact alpha = 1.7 law,
# from numerically integrating the levy_stable survival function:
# 1 / E[ln(|X|/u) | |X| > u] with u the 99% quantile of |X|. The estimator's
# second-order bias puts it about 0.10 above alpha itself.
HILL_TOP1_ALPHA_1_7 = 1.8007


def test_levy_returns_tail():
    r = to_returns(gen_levy_price(LevyParams(1.7, 0.01, 100, BIG), Seed(14))).values
    assert hill(r) == pytest.approx(HILL_TOP1_ALPHA_1_7, abs=0.05)


def test_levy_starts_at_s0_and_survives_huge_jumps():
    s = gen_levy_price(LevyParams(alpha=0.5, c=1.0, s0=7.0, T=3000), Seed(1))
    assert s.values[0] == 7.0
    assert np.all(np.isfinite(s.log_values))


def test_levy_scale_matches_interquartile_range():
    for alpha in (2.0, 1.85, 1.5, 1.2, 1.0):
        c = levy_scale_for_sigma(alpha, 0.03)
        x = c * sample_stable(alpha, Seed(15), 200_000)
        iqr = np.subtract(*np.quantile(x, [0.75, 0.25]))
        assert iqr == pytest.approx(2 * 0.6744897501960817 * 0.03, rel=0.02)


# --- MSM ----------------------------------------------------------------------------


def test_msm_switch_probabilities():
    p = MsmParams(K=3, gammaK=0.5, b=2.0)
    np.testing.assert_allclose(
        p.switch_probabilities(), [1 - 0.5**0.25, 1 - 0.5**0.5, 0.5]
    )


def test_msm_degenerate_multiplier():
    _, r = msm_returns(MsmParams(m0=1.0, sigma_bar=0.02, T=BIG), Seed(16))
    assert abs(r.std(ddof=1) - 0.02) < 3 * 0.02 / math.sqrt(2 * r.size)


def test_msm_variance_identity():
    # variance of r^2 is estimated from the draws themselves
    _, r = msm_returns(MsmParams(m0=1.4, sigma_bar=0.02, T=BIG), Seed(17))
    r2 = r**2
    # squared returns cluster, so use a batch-means standard error
    batches = r2[: (r2.size // 1000) * 1000].reshape(1000, -1).mean(axis=1)
    se = batches.std(ddof=1) / math.sqrt(batches.size)
    assert abs(r2.mean() - 0.02**2) < 3 * se


def test_msm_volatility_clustering():
    _, r = msm_returns(MsmParams(m0=1.4, K=8, sigma_bar=0.02, T=10**5), Seed(18))
    assert autocorr(r**2, 1) > 0.05


def test_msm_multiplier_marginals():
    p = MsmParams(m0=1.4, K=8)
    M = msm_multipliers(p, Seed(19).generator(), BIG)
    assert set(np.unique(M)) == {1.4, 2 - 1.4}
    frac = (M == 1.4).mean(axis=0)
    np.testing.assert_allclose(frac, 0.5, atol=0.01)


def test_msm_switch_rates():
    p = MsmParams(m0=1.4, K=4, gammaK=0.5, b=2.0)
    M = msm_multipliers(p, Seed(20).generator(), 200_000)
    # a redraw keeps the value half the time, so visible changes occur at gamma_k / 2
    change = (M[1:] != M[:-1]).mean(axis=0)
    np.testing.assert_allclose(change, p.switch_probabilities() / 2, rtol=0.05)


@pytest.mark.parametrize(
    "bad", [dict(m0=2.0), dict(m0=0.9), dict(K=0), dict(gammaK=1.0), dict(b=1.0), dict(sigma_bar=0)]
)
def test_msm_param_validation(bad):
    with pytest.raises(ConfigError):
        MsmParams(**bad)
