"""Two-threshold trading strategies on a single price series.

S1 sells when the lag-d log-return exceeds p and buys when it falls below -q;
S2 swaps the two actions. Profit is the marked-to-market gain relative to
the initial cash.

The engine tracks cash and the *market value* of the share position rather
than the share count, so it only ever needs log-price differences. This keeps
it exact for price paths whose levels overflow a double (heavy-tailed Levy
walks), while agreeing with the textbook share-count bookkeeping to rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from profitscape.errors import ConfigError
from profitscape.series import PriceSeries

DEFAULT_FEE = 0.001
DEFAULT_CASH = 1e9

# wealth outside [1/_RESCALE_AT, _RESCALE_AT], or a one-day log move beyond
# _LOG_RESCALE_AT, is folded into the kernel's log-scale register
_RESCALE_AT = 1e150
_LOG_RESCALE_AT = 300.0


class Strategy(str, enum.Enum):
    S1 = "S1"  # contrarian: sell on rises, buy on drops
    S2 = "S2"  # momentum: buy on rises, sell on drops


@dataclass(frozen=True)
class StrategyParams:
    kind: Strategy = Strategy.S1
    p: float = 0.1
    q: float = 0.1
    d: int = 1
    f_b: float = 0.5
    f_s: float = 0.5
    fee: float = DEFAULT_FEE

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", Strategy(self.kind))
        except ValueError:
            raise ConfigError(f"unknown strategy kind {self.kind!r}") from None
        if not (self.p >= 0 and self.q >= 0):
            raise ConfigError("thresholds p, q must be >= 0")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError("lag d must be an integer >= 1")
        object.__setattr__(self, "d", int(self.d))
        if not (0 <= self.f_b <= 1 and 0 <= self.f_s <= 1):
            raise ConfigError("fractions f_b, f_s must lie in [0, 1]")
        if not self.fee >= 0:
            raise ConfigError("fee must be >= 0")

    def with_thresholds(self, p: float, q: float) -> "StrategyParams":
        return replace(self, p=p, q=q)

    def describe(self) -> str:
        return f"{self.kind.value}_d{self.d}_fb{self.f_b:g}_fs{self.f_s:g}_fee{self.fee:g}"


@dataclass(frozen=True)
class ProfitResult:
    pi: float
    final_cash: float
    final_shares: float
    trade_count: int
    # per-day post-trade state, filled only when run_strategy(record=True)
    cash_path: np.ndarray | None = field(default=None, repr=False)
    shares_path: np.ndarray | None = field(default=None, repr=False)


@numba.njit(cache=True)
def _logaddexp(a, b):
    hi = max(a, b)
    if hi == -np.inf:
        return hi
    return hi + math.log1p(math.exp(-abs(a - b)))


@numba.njit(cache=True)
def _grow(m, w, scale, x):
    """Move the position value by a log-price change ``x``, keeping m + w sane."""
    if x < _LOG_RESCALE_AT and -_LOG_RESCALE_AT < x:
        w *= math.exp(x)
    else:
        # renormalise total wealth to 1 and move its size into ``scale``
        lw = math.log(w) + x
        lt = _logaddexp(math.log(m) if m > 0.0 else -np.inf, lw)
        scale += lt
        m = math.exp(math.log(m) - lt) if m > 0.0 else 0.0
        w = math.exp(lw - lt)
    total = m + w
    if total > _RESCALE_AT or 0.0 < total < 1.0 / _RESCALE_AT:
        scale += math.log(total)
        m /= total
        w /= total
    return m, w, scale


@numba.njit(cache=True)
def _fill(cash_rec, value_rec, logs, lo, hi, m, w, scale, last):
    lm = math.log(m) + scale if m > 0.0 else -np.inf
    for u in range(lo, hi):
        cash_rec[u] = lm
        value_rec[u] = math.log(w) + scale + (logs[u] - logs[last]) if w > 0.0 else -np.inf


@numba.njit(cache=True)
def _simulate(logs, d, up, down, momentum, fb, fs, fee, cash_rec, value_rec):
    """Run one strategy; returns (cash, position value, log scale, trades).

    ``logs`` are 0-based log prices. ``up`` / ``down`` hold, in increasing
    order, the days t >= d whose lag-d log-return is above p / below -q; no
    other day can trade, so the state only changes there. Cash starts at 1;
    true amounts are ``exp(scale) * (cash, value)``. Non-empty
    ``cash_rec``/``value_rec`` receive the log of the post-trade state for
    every day.
    """
    m = 1.0
    w = 0.0
    scale = 0.0
    trades = 0
    T = logs.size
    record = cash_rec.size > 0
    if record:
        for t in range(d):
            cash_rec[t] = 0.0
            value_rec[t] = -np.inf
    last = 0  # day at which w is valued
    filled = d
    i = 0
    j = 0
    while i < up.size or j < down.size:
        if j >= down.size or (i < up.size and up[i] < down[j]):
            t = up[i]
            i += 1
            buy = momentum
        else:
            t = down[j]
            j += 1
            buy = not momentum
        if record:
            _fill(cash_rec, value_rec, logs, filled, t, m, w, scale, last)
            filled = t + 1
        if w > 0.0:
            m, w, scale = _grow(m, w, scale, logs[t] - logs[last])
        last = t
        if buy:
            dm = fb * m
            if dm > 0.0:
                m -= dm
                w += dm / (1.0 + fee)
                trades += 1
        else:
            dw = fs * w
            if dw > 0.0:
                w -= dw
                m += dw * (1.0 - fee)
                trades += 1
        if record:
            cash_rec[t] = math.log(m) + scale if m > 0.0 else -np.inf
            value_rec[t] = math.log(w) + scale if w > 0.0 else -np.inf
    if record:
        _fill(cash_rec, value_rec, logs, filled, T, m, w, scale, last)
    if w > 0.0:
        m, w, scale = _grow(m, w, scale, logs[T - 1] - logs[last])
    return m, w, scale, trades


@numba.njit(cache=True)
def _profit(logs, d, up, down, momentum, fb, fs, fee, no_rec):
    m, w, scale, _ = _simulate(logs, d, up, down, momentum, fb, fs, fee, no_rec, no_rec)
    return _pi(m, w, scale)


@numba.njit(cache=True)
def _pi(m, w, scale):
    if m + w == 0.0:
        return -1.0
    if scale == 0.0:
        return m + w - 1.0
    return math.exp(scale) * (m + w) - 1.0


@numba.njit(cache=True)
def _profit_grid(logs, d, up_days, up_ofs, down_days, down_ofs, momentum, fb, fs, fee):
    n_p = up_ofs.size - 1
    n_q = down_ofs.size - 1
    out = np.empty((n_p, n_q))
    no_rec = np.empty(0)
    for i in range(n_p):
        up = up_days[up_ofs[i] : up_ofs[i + 1]]
        for j in range(n_q):
            down = down_days[down_ofs[j] : down_ofs[j + 1]]
            out[i, j] = _profit(logs, d, up, down, momentum, fb, fs, fee, no_rec)
    return out


def _prepare(s: PriceSeries, sp: StrategyParams):
    if sp.d >= s.T:
        raise ConfigError(f"lag d={sp.d} needs a series longer than {sp.d} days (T={s.T})")
    logs = s.log_values
    return logs, logs[sp.d :] - logs[: -sp.d]


def _up_days(lagged: np.ndarray, d: int, p: float) -> np.ndarray:
    return np.flatnonzero(lagged > p) + d


def _down_days(lagged: np.ndarray, d: int, q: float) -> np.ndarray:
    return np.flatnonzero(lagged < -q) + d


def _stack(lists):
    ofs = np.zeros(len(lists) + 1, dtype=np.int64)
    ofs[1:] = np.cumsum([len(x) for x in lists])
    flat = np.concatenate(lists) if lists else np.empty(0, dtype=np.int64)
    return flat.astype(np.int64), ofs


def run_strategy(
    s: PriceSeries, sp: StrategyParams, m1: float = DEFAULT_CASH, record: bool = False
) -> ProfitResult:
    """Trade ``sp`` over ``s`` from day d+1 to T starting with cash ``m1``.

    With ``record=True`` the result also carries m(t) and n(t) after each day's
    trade (t = 1..T).
    """
    if not m1 > 0:
        raise ConfigError("initial cash must be > 0")
    logs, lagged = _prepare(s, sp)
    rec = np.empty(s.T if record else 0)
    rec_w = np.empty(s.T if record else 0)
    m, w, scale, trades = _simulate(
        logs, sp.d, _up_days(lagged, sp.d, sp.p), _down_days(lagged, sp.d, sp.q),
        sp.kind is Strategy.S2, sp.f_b, sp.f_s, sp.fee, rec, rec_w,
    )
    pi = float(_pi(m, w, scale))
    with np.errstate(over="ignore"):
        log_m1 = math.log(m1)
        final_cash = float(np.exp(math.log(m) + scale + log_m1)) if m > 0 else 0.0
        final_shares = (
            float(np.exp(math.log(w) + scale + log_m1 - s.log_values[-1])) if w > 0 else 0.0
        )
    cash_path = shares_path = None
    if record:
        with np.errstate(over="ignore"):
            cash_path = np.exp(rec + log_m1)
            cash_path[: sp.d] = m1
            shares_path = np.exp(rec_w + log_m1 - s.log_values)
    return ProfitResult(
        pi=pi,
        final_cash=final_cash,
        final_shares=final_shares,
        trade_count=int(trades),
        cash_path=cash_path,
        shares_path=shares_path,
    )


def profit_at(s: PriceSeries, template: StrategyParams, p: float, q: float) -> float:
    """Normalized profit for thresholds (p, q) on top of ``template``."""
    sp = template.with_thresholds(p, q)
    logs, lagged = _prepare(s, sp)
    return float(
        _profit(
            logs, sp.d, _up_days(lagged, sp.d, sp.p), _down_days(lagged, sp.d, sp.q),
            sp.kind is Strategy.S2, sp.f_b, sp.f_s, sp.fee, np.empty(0),
        )
    )


def profit_grid(s: PriceSeries, template: StrategyParams, ps, qs) -> np.ndarray:
    """Profit on the outer product of threshold vectors ``ps`` x ``qs``.

    Each cell is computed by the same kernel as :func:`profit_at`, so the two
    agree bit for bit.
    """
    logs, lagged = _prepare(s, template)
    ps = np.ascontiguousarray(ps, dtype=np.float64)
    qs = np.ascontiguousarray(qs, dtype=np.float64)
    if np.any(ps < 0) or np.any(qs < 0):
        raise ConfigError("thresholds p, q must be >= 0")
    d = template.d
    up_days, up_ofs = _stack([_up_days(lagged, d, p) for p in ps])
    down_days, down_ofs = _stack([_down_days(lagged, d, q) for q in qs])
    return _profit_grid(
        logs, d, up_days, up_ofs, down_days, down_ofs,
        template.kind is Strategy.S2, template.f_b, template.f_s, template.fee,
    )
