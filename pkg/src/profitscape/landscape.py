"""Profit landscapes on the (p, q) square and their local maxima."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from profitscape.backtest import StrategyParams, profit_grid
from profitscape.errors import ConfigError, ParseError
from profitscape.series import PriceSeries

DEFAULT_NS = (8, 16, 32, 64, 128, 256)


class Neighborhood(str, enum.Enum):
    VON_NEUMANN = "von_neumann"
    MOORE = "moore"


_OFFSETS = {
    Neighborhood.VON_NEUMANN: ((-1, 0), (1, 0), (0, -1), (0, 1)),
    Neighborhood.MOORE: tuple(
        (di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)
    ),
}


def cell_centers(N: int, domain_scale: float = 1.0) -> np.ndarray:
    """Centers (i - 1/2) / N of the N cells of [0, domain_scale]."""
    return domain_scale * (np.arange(1, N + 1) - 0.5) / N


@dataclass(frozen=True, eq=False)
class ProfitGrid:
    """Profit at cell centers; ``values[i, j]`` is Pi(p_i, q_j)."""

    N: int
    values: np.ndarray
    domain_scale: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if self.N < 2 or v.shape != (self.N, self.N):
            raise ConfigError(f"grid must be N x N with N >= 2, got N={self.N}, shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def p_centers(self) -> np.ndarray:
        return cell_centers(self.N, self.domain_scale)

    q_centers = p_centers


def build_landscape(
    s: PriceSeries, template: StrategyParams, N: int, domain_scale: float = 1.0
) -> ProfitGrid:
    if N < 2:
        raise ConfigError("resolution N must be >= 2")
    if not domain_scale > 0:
        raise ConfigError("domain_scale must be > 0")
    c = cell_centers(N, domain_scale)
    return ProfitGrid(N, profit_grid(s, template, c, c), domain_scale)


def count_local_maxima(g: ProfitGrid | np.ndarray, nb: Neighborhood = Neighborhood.VON_NEUMANN) -> int:
    """Cells strictly greater than every in-grid neighbor.

    Edge and corner cells only compare against neighbors that exist.
    """
    v = g.values if isinstance(g, ProfitGrid) else np.asarray(g, dtype=np.float64)
    nb = Neighborhood(nb)
    n0, n1 = v.shape
    padded = np.full((n0 + 2, n1 + 2), -np.inf)
    padded[1:-1, 1:-1] = v
    peak = np.ones(v.shape, dtype=bool)
    for di, dj in _OFFSETS[nb]:
        peak &= v > padded[1 + di : 1 + di + n0, 1 + dj : 1 + dj + n1]
    return int(peak.sum())


@dataclass
class SweepResult:
    points: list[tuple[int, int]]
    series_label: str = ""
    strategy: str = ""
    grids: dict[int, ProfitGrid] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        Ns = [n for n, _ in self.points]
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ConfigError("sweep resolutions must be strictly increasing")

    @property
    def Ns(self) -> list[int]:
        return [n for n, _ in self.points]

    @property
    def Ms(self) -> list[int]:
        return [m for _, m in self.points]


def _check_ladder(Ns: Sequence[int]) -> list[int]:
    Ns = [int(n) for n in Ns]
    if not Ns:
        raise ConfigError("resolution list is empty")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ConfigError("resolutions must be strictly increasing")
    if Ns[0] < 2:
        raise ConfigError("resolutions must be >= 2")
    return Ns


def sweep_resolutions(
    s: PriceSeries,
    template: StrategyParams,
    Ns: Sequence[int] = DEFAULT_NS,
    nb: Neighborhood = Neighborhood.VON_NEUMANN,
    domain_scale: float = 1.0,
    builder: Callable[[int], ProfitGrid | np.ndarray] | None = None,
    keep_grids: bool = False,
) -> SweepResult:
    """Count maxima of the landscape at every resolution in ``Ns``.

    ``builder`` replaces the backtest-based landscape with any N -> grid map,
    which is how tests drive the counter with synthetic surfaces.
    """
    Ns = _check_ladder(Ns)
    if builder is None:
        builder = lambda N: build_landscape(s, template, N, domain_scale)  # noqa: E731
    points, grids = [], {}
    for N in Ns:
        g = builder(N)
        points.append((N, count_local_maxima(g, nb)))
        if keep_grids:
            grids[N] = g if isinstance(g, ProfitGrid) else ProfitGrid(N, g, domain_scale)
    label = s.label if s is not None else ""
    desc = template.describe() if template is not None else ""
    return SweepResult(points, label, desc, grids)


def ensemble_mean_M(sweeps: Sequence[SweepResult], mode: str = "arithmetic") -> list[tuple[int, float]]:
    """Mean maxima count per resolution across series, summed in index order.

    ``mode="geometric"`` averages log M instead (zeros give a zero mean).
    """
    if not sweeps:
        raise ConfigError("no sweeps to average")
    Ns = sweeps[0].Ns
    for sw in sweeps[1:]:
        if sw.Ns != Ns:
            raise ConfigError(f"mismatched resolution ladders: {Ns} vs {sw.Ns} ({sw.series_label})")
    M = np.array([sw.Ms for sw in sweeps], dtype=np.float64)
    if mode == "arithmetic":
        mean = M.mean(axis=0)
    elif mode == "geometric":
        with np.errstate(divide="ignore"):
            mean = np.exp(np.log(M).mean(axis=0))
    else:
        raise ConfigError(f"unknown averaging mode {mode!r}")
    return [(int(n), float(m)) for n, m in zip(Ns, mean)]


# --- CSV -----------------------------------------------------------------------


def write_grid_csv(g: ProfitGrid, path: str | Path) -> None:
    """``N,<N>`` header line, then N rows of N values (row i is p_i)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", g.N])
        for row in g.values:
            w.writerow([repr(float(x)) for x in row])


def read_grid_csv(path: str | Path, domain_scale: float = 1.0) -> ProfitGrid:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0][0] != "N":
        raise ParseError("missing N header", 1, path)
    N = int(rows[0][1])
    if len(rows) != N + 1:
        raise ParseError(f"expected {N} grid rows, got {len(rows) - 1}", path=path)
    return ProfitGrid(N, np.array(rows[1:], dtype=np.float64), domain_scale)


def write_points_csv(points: Sequence[tuple[int, float]], path: str | Path, header=("N", "M")) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for n, m in points:
            w.writerow([int(n), repr(float(m)) if not float(m).is_integer() else int(m)])


def read_points_csv(path: str | Path) -> list[tuple[int, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or [h.strip().upper() for h in rows[0][:2]] != ["N", "M"]:
        raise ParseError("expected header N,M", 1, path)
    out = []
    for i, r in enumerate(rows[1:], start=2):
        try:
            out.append((int(r[0]), float(r[1])))
        except (ValueError, IndexError):
            raise ParseError(f"bad row {r!r}", i, path) from None
    return out
