"""Profit-landscape fractality: threshold backtests, landscape maxima and scaling exponents."""

from profitscape.backtest import ProfitResult, StrategyParams, profit_at, run_strategy
from profitscape.generators import (
    FbmParams,
    GbmParams,
    LevyParams,
    MsmParams,
    Seed,
    gen_fbm_price,
    gen_fgn,
    gen_gbm,
    gen_levy_price,
    gen_msm_price,
    sample_stable,
)
from profitscape.landscape import (
    Neighborhood,
    ProfitGrid,
    SweepResult,
    build_landscape,
    count_local_maxima,
    ensemble_mean_M,
    sweep_resolutions,
)
from profitscape.scaling import ScalingFit, compare_exponents, fit_exponent
from profitscape.series import (
    DriftVol,
    PriceSeries,
    ReturnSeries,
    estimate_drift_vol,
    from_returns,
    load_prices,
    log_return,
    shuffle_returns,
    to_returns,
)

__version__ = "0.1.0"
