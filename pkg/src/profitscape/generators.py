"""Artificial daily price series: GBM, FBM, symmetric Levy-stable and binomial MSM.

Every generator is a pure function of its parameters and a :class:`Seed`.
Randomness comes from numpy's PCG64 seeded by ``SeedSequence(master,
spawn_key=(stream,))``, so stream ``k`` of a master seed is the same no matter
how many other streams exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from profitscape.errors import ConfigError
from profitscape.series import PriceSeries, ReturnSeries

_U64 = 2**64


@dataclass(frozen=True)
class Seed:
    """(master, stream) pair; ``stream`` is the realization index in ensembles."""

    master: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            v = getattr(self, name)
            if not 0 <= v < _U64:
                raise ConfigError(f"seed {name} must be an unsigned 64-bit integer, got {v}")

    def generator(self, *substream: int) -> np.random.Generator:
        """PCG64 keyed by ``(master, spawn_key=(stream, *substream))``."""
        ss = np.random.SeedSequence(self.master, spawn_key=(self.stream, *substream))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "Seed":
        return Seed(self.master, stream)


def as_generator(seed) -> np.random.Generator:
    """Accept a Seed, a bare int (master seed, stream 0) or a ready Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, Seed):
        return seed.generator()
    if isinstance(seed, (int, np.integer)):
        return Seed(int(seed)).generator()
    raise TypeError(f"cannot derive a random generator from {type(seed).__name__}")


# --- parameter sets --------------------------------------------------------


def _check_common(s0, T):
    if not s0 > 0:
        raise ConfigError("s0 must be > 0")
    if int(T) != T or T < 2:
        raise ConfigError("T must be an integer >= 2")


@dataclass(frozen=True)
class GbmParams:
    mu: float = 0.0
    sigma: float = 0.02
    s0: float = 100.0
    T: int = 2918

    def __post_init__(self):
        _check_common(self.s0, self.T)
        if not self.sigma >= 0:
            raise ConfigError("sigma must be >= 0")


@dataclass(frozen=True)
class FbmParams:
    H: float = 0.5
    mu: float = 0.0
    sigma: float = 0.02
    s0: float = 100.0
    T: int = 2918

    def __post_init__(self):
        _check_common(self.s0, self.T)
        if not 0 < self.H <= 1:
            raise ConfigError("Hurst exponent must lie in (0, 1]")
        if not self.sigma >= 0:
            raise ConfigError("sigma must be >= 0")


@dataclass(frozen=True)
class LevyParams:
    alpha: float = 2.0
    c: float = 0.02 / math.sqrt(2)
    s0: float = 100.0
    T: int = 2918

    def __post_init__(self):
        _check_common(self.s0, self.T)
        if not 0 < self.alpha <= 2:
            raise ConfigError("stability index must lie in (0, 2]")
        # c == 0 is accepted as the degenerate constant path
        if not self.c >= 0:
            raise ConfigError("scale c must be >= 0")


@dataclass(frozen=True)
class MsmParams:
    m0: float = 1.4
    K: int = 8
    gammaK: float = 0.5
    b: float = 2.0
    sigma_bar: float = 0.02
    s0: float = 100.0
    T: int = 2918

    def __post_init__(self):
        _check_common(self.s0, self.T)
        if not 1 <= self.m0 < 2:
            raise ConfigError("m0 must lie in [1, 2)")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError("K must be a positive integer")
        if not 0 < self.gammaK < 1:
            raise ConfigError("gammaK must lie in (0, 1)")
        if not self.b > 1:
            raise ConfigError("b must be > 1")
        if not self.sigma_bar > 0:
            raise ConfigError("sigma_bar must be > 0")

    def switch_probabilities(self) -> np.ndarray:
        """gamma_k = 1 - (1 - gammaK)**(b**(k - K)), k = 1..K."""
        k = np.arange(1, self.K + 1)
        return 1.0 - (1.0 - self.gammaK) ** (self.b ** (k - self.K))


def _prices(s0: float, log_increments: np.ndarray, label: str) -> PriceSeries:
    logs = np.concatenate(([0.0], np.cumsum(log_increments))) + math.log(s0)
    return PriceSeries.from_log(logs, label, s0)


# --- GBM -------------------------------------------------------------------


def gen_gbm(p: GbmParams, seed, label: str = "gbm") -> PriceSeries:
    """Exact log-Euler GBM with one-day steps."""
    z = as_generator(seed).standard_normal(p.T - 1)
    return _prices(p.s0, (p.mu - 0.5 * p.sigma**2) + p.sigma * z, label)


# --- fractional Gaussian noise ----------------------------------------------

NEGATIVE_EIGEN_TOL = 1e-10


def fgn_autocovariance(H: float, n: int) -> np.ndarray:
    """gamma(k) for k = 0..n-1 of unit-variance fractional Gaussian noise."""
    k = np.arange(n, dtype=np.float64)
    h2 = 2.0 * H
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def circulant_eigenvalues(acov: np.ndarray) -> np.ndarray:
    """Eigenvalues of the minimal circulant embedding of a Toeplitz covariance."""
    n = acov.size
    if n == 1:
        return acov.astype(np.float64).copy()
    row = np.concatenate((acov, acov[-2:0:-1]))
    return np.fft.rfft(row).real if False else np.fft.fft(row).real


def stationary_gaussian(acov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw a zero-mean stationary Gaussian vector with autocovariance ``acov``.

    Uses circulant embedding (Davies-Harte). Eigenvalues in
    ``[-NEGATIVE_EIGEN_TOL, 0)`` are clamped to zero; anything more negative
    switches to a dense square-root factorization of the Toeplitz matrix.
    """
    acov = np.asarray(acov, dtype=np.float64)
    n = acov.size
    if n == 1:
        return math.sqrt(acov[0]) * rng.standard_normal(1)
    lam = circulant_eigenvalues(acov)
    if lam.min() < -NEGATIVE_EIGEN_TOL * max(1.0, lam.max()):
        return _dense_gaussian(acov, rng)
    lam = np.clip(lam, 0.0, None)
    m = lam.size
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(lam / m) * w)
    return y.real[:n]


def _dense_gaussian(acov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # symmetric square root tolerates semidefinite matrices where Cholesky fails
    C = linalg.toeplitz(acov)
    vals, vecs = linalg.eigh(C)
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return root @ rng.standard_normal(acov.size)


def gen_fgn(H: float, n: int, seed) -> ReturnSeries:
    """Unit-variance fractional Gaussian noise of length ``n``."""
    if not 0 < H <= 1:
        raise ConfigError("Hurst exponent must lie in (0, 1]")
    if n < 1:
        raise ConfigError("n must be >= 1")
    return ReturnSeries(stationary_gaussian(fgn_autocovariance(H, n), as_generator(seed)), 1)


def gen_fbm_price(p: FbmParams, seed, label: str = "fbm") -> PriceSeries:
    """S_{t+1} = S_t exp(mu + sigma * dB^H_t) with unit-variance fGn increments."""
    if p.sigma == 0:
        return _prices(p.s0, np.full(p.T - 1, p.mu), label)
    noise = gen_fgn(p.H, p.T - 1, seed).values
    return _prices(p.s0, p.mu + p.sigma * noise, label)


# --- symmetric alpha-stable ---------------------------------------------------


def sample_stable(alpha: float, seed, size=None):
    """Standard symmetric alpha-stable draws (Chambers-Mallows-Stuck).

    Unit scale: alpha=2 gives Normal(0, 2), alpha=1 the standard Cauchy.
    Returns a float when ``size`` is None.
    """
    if not 0 < alpha <= 2:
        raise ConfigError("stability index must lie in (0, 2]")
    rng = as_generator(seed)
    U = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    E = rng.standard_exponential(size)
    X = _cms(alpha, U, E)
    return float(X) if size is None else X


def _cms(alpha, U, E):
    if alpha == 1.0:
        return np.tan(U)
    return (
        np.sin(alpha * U)
        / np.cos(U) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * U) / E) ** ((1.0 - alpha) / alpha)
    )


@lru_cache(maxsize=64)
def stable_quartile(alpha: float) -> float:
    """Upper quartile of the standard symmetric alpha-stable law."""
    if alpha == 2.0:
        return math.sqrt(2.0) * 0.6744897501960817
    if alpha == 1.0:
        return 1.0
    from scipy.stats import levy_stable

    return float(levy_stable.ppf(0.75, alpha, 0.0))


def levy_scale_for_sigma(alpha: float, sigma: float) -> float:
    """Scale c whose one-day returns have the interquartile range of Normal(0, sigma**2)."""
    return sigma * 0.6744897501960817 / stable_quartile(alpha)


def gen_levy_price(p: LevyParams, seed, label: str = "levy") -> PriceSeries:
    """S_t = s0 exp(X_t - X_1), X a random walk with c * stable increments."""
    if p.c == 0:
        return _prices(p.s0, np.zeros(p.T - 1), label)
    steps = p.c * sample_stable(p.alpha, seed, size=p.T - 1)
    return _prices(p.s0, steps, label)


# --- binomial MSM -------------------------------------------------------------


def msm_multipliers(p: MsmParams, rng: np.random.Generator, steps: int) -> np.ndarray:
    """Component multiplier paths, shape (steps, K), values in {m0, 2 - m0}.

    Row 0 is the state after the first update from a uniform initial draw.
    """
    K = p.K
    gam = p.switch_probabilities()
    init = rng.random(K) < 0.5
    switch = rng.random((steps, K)) < gam
    fresh = rng.random((steps, K)) < 0.5
    # a component's state is the draw made at its most recent switch
    idx = np.where(switch, np.arange(1, steps + 1)[:, None], 0)
    np.maximum.accumulate(idx, axis=0, out=idx)
    high = np.concatenate((init[None, :], fresh), axis=0)
    state = np.take_along_axis(high, idx, axis=0)
    return np.where(state, p.m0, 2.0 - p.m0)


def msm_returns(p: MsmParams, seed, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return (volatility, log-return) paths of length ``n`` (default T - 1)."""
    rng = as_generator(seed)
    n = p.T - 1 if n is None else n
    M = msm_multipliers(p, rng, n)
    vol = p.sigma_bar * np.sqrt(np.prod(M, axis=1))
    eps = rng.standard_normal(n)
    return vol, vol * eps


def gen_msm_price(p: MsmParams, seed, label: str = "msm") -> PriceSeries:
    _, r = msm_returns(p, seed)
    return _prices(p.s0, r, label)
