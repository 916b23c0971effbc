"""Price and log-return series: ingestion, conversion, shuffling and calibration."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from profitscape.errors import ParseError, ValidationError

CSV_HEADER = ("DATE", "CLOSE")
SYNTHETIC_START = dt.date(1999, 1, 4)


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Strictly positive daily closing prices indexed by trading day 1..T.

    Log-prices are the canonical representation. Heavy-tailed generators can
    produce paths whose prices overflow a double; such series are still valid
    because every computation in the package works from ``log_values``.
    """

    values: np.ndarray
    label: str = ""
    log_values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.log_values is not None and self.values is not None:
            v = np.array(self.values, dtype=np.float64)
            logs = np.array(self.log_values, dtype=np.float64)
        elif self.log_values is None:
            v = np.array(self.values, dtype=np.float64)
            if v.ndim != 1:
                raise ValidationError(f"series {self.label!r}: prices must be one-dimensional")
            if not np.all(np.isfinite(v)) or np.any(v <= 0):
                raise ValidationError(f"series {self.label!r}: prices must be finite and > 0")
            logs = np.log(v)
        else:
            logs = np.array(self.log_values, dtype=np.float64)
            if logs.ndim != 1 or not np.all(np.isfinite(logs)):
                raise ValidationError(f"series {self.label!r}: log-prices must be finite")
            with np.errstate(over="ignore", under="ignore"):
                v = np.exp(logs)
        self._check_length(v.size)
        v.setflags(write=False)
        logs.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "log_values", logs)

    def _check_length(self, n: int) -> None:
        if n < 2:
            raise ValidationError(f"series {self.label!r}: need at least 2 prices, got {n}")

    @classmethod
    def from_log(cls, log_values, label: str = "", s0: float | None = None) -> "PriceSeries":
        """Build from log-prices; ``s0`` pins the first price exactly."""
        if s0 is None:
            return cls(None, label, log_values)
        logs = np.asarray(log_values, dtype=np.float64)
        if not np.all(np.isfinite(logs)):
            raise ValidationError(f"series {label!r}: log-prices must be finite")
        with np.errstate(over="ignore", under="ignore"):
            values = s0 * np.exp(logs - logs[0])
        values[0] = s0
        return cls(values, label, logs)

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, t: int) -> float:
        """1-based day index, matching S_1..S_T."""
        if not 1 <= t <= self.values.size:
            raise IndexError(f"day {t} outside 1..{self.values.size}")
        return float(self.values[t - 1])

    @property
    def T(self) -> int:
        return self.values.size

    def with_label(self, label: str) -> "PriceSeries":
        return PriceSeries(self.values, label, self.log_values)


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    values: np.ndarray
    lag: int = 1

    def __post_init__(self):
        if self.lag < 1:
            raise ValidationError("lag must be >= 1")
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class DriftVol:
    mu: float
    sigma: float = field(default=0.0)

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError("sigma must be >= 0")


def log_return(s: PriceSeries, t: int, d: int) -> float:
    """ln(S_t / S_{t-d}) with 1-based t."""
    if d < 1 or not d < t <= s.T:
        raise IndexError(f"need 1 <= d < t <= T, got d={d}, t={t}, T={s.T}")
    return float(s.log_values[t - 1] - s.log_values[t - 1 - d])


def lagged_returns(log_prices: np.ndarray, d: int) -> np.ndarray:
    """Vectorised ln S_{k+d} - ln S_k on a log-price array."""
    return log_prices[d:] - log_prices[:-d]


def to_returns(s: PriceSeries, d: int = 1) -> ReturnSeries:
    if d < 1 or d >= s.T:
        raise IndexError(f"lag d={d} needs 1 <= d < T={s.T}")
    return ReturnSeries(lagged_returns(s.log_values, d), d)


def from_returns(s0: float, r: ReturnSeries | Sequence[float] | np.ndarray, label: str = "") -> PriceSeries:
    """Rebuild prices from one-day log-returns, starting at ``s0``."""
    if not s0 > 0:
        raise ValidationError("s0 must be > 0")
    if isinstance(r, ReturnSeries):
        if r.lag != 1:
            raise ValidationError("from_returns needs lag-1 returns")
        r = r.values
    r = np.asarray(r, dtype=np.float64)
    logs = np.empty(r.size + 1)
    logs[0] = math.log(s0)
    np.cumsum(r, out=logs[1:])
    logs[1:] += logs[0]
    if logs.size < 2:
        return _SinglePrice.from_log(logs, label, s0)
    return PriceSeries.from_log(logs, label, s0)


class _SinglePrice(PriceSeries):
    """Degenerate one-price path; only produced by ``from_returns`` on empty input."""

    def _check_length(self, n: int) -> None:
        if n < 1:
            raise ValidationError("empty price path")


def shuffle_returns(s: PriceSeries, seed) -> PriceSeries:
    """Uniformly permute the one-day log-returns in time and rebuild the path.

    The multiset of returns is unchanged, so the first and last prices are
    kept (up to floating-point summation order).
    """
    from profitscape.generators import as_generator

    if s.T < 3:
        raise ValidationError("shuffling needs T >= 3")
    r = lagged_returns(s.log_values, 1)
    perm = as_generator(seed).permutation(r.size)
    logs = np.empty(s.T)
    logs[0] = s.log_values[0]
    np.cumsum(r[perm], out=logs[1:])
    logs[1:] += logs[0]
    return PriceSeries.from_log(logs, s.label, s.values[0])


def estimate_drift_vol(s: PriceSeries) -> DriftVol:
    """GBM-consistent drift and volatility from one-day log-returns.

    sigma is the n-1 sample standard deviation; mu adds back sigma**2/2 so that
    ``gen_gbm`` with these parameters reproduces the sample log-return mean.
    """
    if s.T < 3:
        raise ValidationError("drift/vol estimation needs T >= 3")
    return _drift_vol(lagged_returns(s.log_values, 1))


def estimate_pooled_drift_vol(series: Iterable[PriceSeries]) -> DriftVol:
    """Same estimator applied to the concatenated returns of an ensemble."""
    rs = [lagged_returns(s.log_values, 1) for s in series]
    if not rs or sum(r.size for r in rs) < 2:
        raise ValidationError("pooled estimate needs at least 2 returns")
    return _drift_vol(np.concatenate(rs))


def _drift_vol(r: np.ndarray) -> DriftVol:
    sigma = float(np.std(r, ddof=1))
    # exact-exponential paths leave rounding-level dispersion
    if sigma < 1e-12 * max(1.0, float(np.max(np.abs(r)))):
        sigma = 0.0
    return DriftVol(mu=float(np.mean(r)) + 0.5 * sigma**2, sigma=sigma)


# --- CSV ingestion -------------------------------------------------------


def read_price_csv(path: str | Path) -> list[PriceSeries]:
    """Read one CSV file.

    The first column must be ``DATE``. A ``DATE,CLOSE`` file yields one series
    labelled by the file stem; any other column names are treated as tickers.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, row) for i, row in enumerate(rows) if any(c.strip() for c in row)]
    if not rows:
        raise ParseError("empty file", path=path)
    lineno, header = rows[0]
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0].upper() != "DATE":
        raise ParseError(f"expected header DATE,CLOSE, got {','.join(header)}", lineno, path)
    tickers = header[1:]
    if len(tickers) == 1 and tickers[0].upper() == "CLOSE":
        labels = [path.stem]
    else:
        labels = tickers
    if len(rows) < 2:
        raise ParseError("no data rows", lineno, path)

    dates: list[dt.date] = []
    table: list[list[float]] = []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno, path)
        try:
            date = dt.date.fromisoformat(row[0].strip()[:10])
        except ValueError:
            raise ParseError(f"bad date {row[0]!r}", lineno, path) from None
        vals = []
        for cell in row[1:]:
            cell = cell.strip()
            if not cell:
                raise ValidationError(f"{path}:{lineno}: missing price")
            try:
                x = float(cell)
            except ValueError:
                raise ParseError(f"bad price {cell!r}", lineno, path) from None
            if not (math.isfinite(x) and x > 0):
                raise ValidationError(f"{path}:{lineno}: non-positive price {cell}")
            vals.append(x)
        dates.append(date)
        table.append(vals)

    order = sorted(range(len(dates)), key=dates.__getitem__)
    if any(dates[a] == dates[b] for a, b in zip(order, order[1:])):
        raise ParseError("duplicate dates", path=path)
    data = np.array([table[k] for k in order], dtype=np.float64)
    return [PriceSeries(data[:, j], labels[j]) for j in range(data.shape[1])]


def load_prices(path: str | Path) -> list[PriceSeries]:
    """Load a CSV file or every ``*.csv`` in a directory (sorted by name)."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".csv")
        out: list[PriceSeries] = []
        for f in files:
            out.extend(read_price_csv(f))
        return out
    return read_price_csv(path)


def write_price_csv(s: PriceSeries, path: str | Path, start: dt.date = SYNTHETIC_START) -> None:
    """Write ``DATE,CLOSE`` with synthetic consecutive calendar dates."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for k, x in enumerate(s.values):
            w.writerow([(start + dt.timedelta(days=k)).isoformat(), repr(float(x))])
