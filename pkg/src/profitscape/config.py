"""Declarative experiment configuration (JSON, schema version 1)."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from profitscape.backtest import StrategyParams
from profitscape.errors import ConfigError
from profitscape.generators import (
    FbmParams,
    GbmParams,
    LevyParams,
    MsmParams,
    gen_fbm_price,
    gen_gbm,
    gen_levy_price,
    gen_msm_price,
    levy_scale_for_sigma,
)
from profitscape.landscape import DEFAULT_NS, Neighborhood
from profitscape.series import DriftVol, PriceSeries, estimate_pooled_drift_vol, load_prices

SCHEMA_VERSION = 1

# Stand-in for the pooled daily volatility of a market dataset when none is
# supplied. Zero mean log-return, so mu = sigma**2 / 2.
REFERENCE_SIGMA = 0.1
REFERENCE_CALIBRATION = DriftVol(mu=REFERENCE_SIGMA**2 / 2, sigma=REFERENCE_SIGMA)

_MODELS = {
    "gbm": (GbmParams, gen_gbm),
    "fbm": (FbmParams, gen_fbm_price),
    "levy": (LevyParams, gen_levy_price),
    "msm": (MsmParams, gen_msm_price),
}


@dataclass(frozen=True)
class GeneratorConfig:
    """One of the four models plus explicit parameter overrides.

    Parameters not given explicitly are filled from a (mu, sigma) calibration:
    GBM takes both; FBM takes the log-drift mu - sigma**2/2 and sigma; Levy
    takes the scale whose interquartile range matches Normal(0, sigma**2);
    MSM takes sigma_bar = sigma.
    """

    model: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ConfigError(f"unknown generator model {self.model!r}; choose from {sorted(_MODELS)}")
        known = {f.name for f in fields(_MODELS[self.model][0])}
        unknown = set(self.params) - known
        if unknown:
            raise ConfigError(f"unknown {self.model} parameters: {sorted(unknown)}")

    def resolve(self, cal: DriftVol = REFERENCE_CALIBRATION):
        cls, _ = _MODELS[self.model]
        kw = dict(self.params)
        if self.model == "gbm":
            kw.setdefault("mu", cal.mu)
            kw.setdefault("sigma", cal.sigma)
        elif self.model == "fbm":
            kw.setdefault("mu", cal.mu - 0.5 * cal.sigma**2)
            kw.setdefault("sigma", cal.sigma)
        elif self.model == "levy":
            if "c" not in kw:
                kw["c"] = levy_scale_for_sigma(kw.get("alpha", LevyParams.alpha), cal.sigma)
        elif self.model == "msm":
            kw.setdefault("sigma_bar", cal.sigma)
        return cls(**kw)

    def generate(self, seed, cal: DriftVol = REFERENCE_CALIBRATION, label: str = "") -> PriceSeries:
        return _MODELS[self.model][1](self.resolve(cal), seed, label or self.model)

    def with_param(self, name: str, value) -> "GeneratorConfig":
        return GeneratorConfig(self.model, {**self.params, name: value})


@dataclass(frozen=True)
class ParamSweep:
    """Vary one parameter, e.g. ``generator.alpha`` or ``strategy.d``."""

    param: str
    values: tuple

    def __post_init__(self):
        scope, _, name = self.param.partition(".")
        if scope not in ("generator", "strategy") or not name:
            raise ConfigError("sweep param must look like 'generator.<name>' or 'strategy.<name>'")
        if not self.values:
            raise ConfigError("sweep needs at least one value")

    @property
    def name(self) -> str:
        return self.param.partition(".")[2]


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig | None = None
    realizations: int = 1
    data_dir: str | None = None
    strategies: tuple[StrategyParams, ...] = (StrategyParams(),)
    Ns: tuple[int, ...] = DEFAULT_NS
    neighborhood: Neighborhood = Neighborhood.VON_NEUMANN
    domain_scale: float = 1.0
    master_seed: int = 0
    shuffle: bool = False
    output_dir: str = "out"
    fit_window: Any = None
    averaging: str = "arithmetic"
    calibration: DriftVol | None = None
    calibration_dir: str | None = None
    keep_landscapes: int = 0
    sweep: ParamSweep | None = None

    def __post_init__(self):
        if (self.generator is None) == (self.data_dir is None):
            raise ConfigError("source must be exactly one of 'data_dir' or 'generator'")
        if self.generator is not None and self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        Ns = tuple(int(n) for n in self.Ns)
        if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])) or Ns[0] < 2:
            raise ConfigError("Ns must be a non-empty, strictly increasing list of integers >= 2")
        object.__setattr__(self, "Ns", Ns)
        object.__setattr__(self, "neighborhood", Neighborhood(self.neighborhood))
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        if not self.domain_scale > 0:
            raise ConfigError("domain_scale must be > 0")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.averaging not in ("arithmetic", "geometric"):
            raise ConfigError("averaging must be 'arithmetic' or 'geometric'")
        if self.sweep is not None and self.sweep.param.startswith("generator") and self.generator is None:
            raise ConfigError("a generator sweep needs a generator source")

    # --- JSON --------------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = copy.deepcopy(raw)
        version = raw.pop("schema", None)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {version!r}; expected {SCHEMA_VERSION}")
        kw: dict[str, Any] = {}
        source = raw.pop("source", None)
        if not isinstance(source, dict):
            raise ConfigError("missing 'source' object")
        if "data_dir" in source:
            kw["data_dir"] = str(source["data_dir"])
        if "generator" in source:
            gen = dict(source["generator"])
            model = gen.pop("model", None)
            kw["generator"] = GeneratorConfig(model, gen)
            kw["realizations"] = int(source.get("realizations", 1))
        strat = raw.pop("strategy", {})
        strat = strat if isinstance(strat, list) else [strat]
        try:
            kw["strategies"] = tuple(StrategyParams(**s) for s in strat)
        except TypeError as exc:
            raise ConfigError(f"bad strategy entry: {exc}") from None
        cal = raw.pop("calibration", None)
        if isinstance(cal, dict) and "data_dir" in cal:
            kw["calibration_dir"] = str(cal["data_dir"])
        elif isinstance(cal, dict):
            kw["calibration"] = DriftVol(float(cal["mu"]), float(cal["sigma"]))
        elif cal is not None:
            raise ConfigError("calibration must be an object")
        sw = raw.pop("sweep", None)
        if sw is not None:
            kw["sweep"] = ParamSweep(sw["param"], tuple(sw["values"]))
        if "Ns" in raw:
            raw["Ns"] = tuple(raw["Ns"])
        allowed = {f.name for f in fields(cls)} - set(kw)
        unknown = set(raw) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw.update(raw)
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"schema": SCHEMA_VERSION}
        if self.generator is not None:
            d["source"] = {
                "generator": {"model": self.generator.model, **self.generator.params},
                "realizations": self.realizations,
            }
        else:
            d["source"] = {"data_dir": self.data_dir}
        d["strategy"] = [
            {**asdict(s), "kind": s.kind.value} for s in self.strategies
        ]
        d["Ns"] = list(self.Ns)
        d["neighborhood"] = self.neighborhood.value
        d["domain_scale"] = self.domain_scale
        d["master_seed"] = self.master_seed
        d["shuffle"] = self.shuffle
        d["output_dir"] = self.output_dir
        d["fit_window"] = self.fit_window
        d["averaging"] = self.averaging
        if self.calibration_dir is not None:
            d["calibration"] = {"data_dir": self.calibration_dir}
        elif self.calibration is not None:
            d["calibration"] = {"mu": self.calibration.mu, "sigma": self.calibration.sigma}
        d["keep_landscapes"] = self.keep_landscapes
        if self.sweep is not None:
            d["sweep"] = {"param": self.sweep.param, "values": list(self.sweep.values)}
        return d

    # --- helpers ----------------------------------------------------------------

    def resolved_calibration(self) -> DriftVol:
        if self.calibration is not None:
            return self.calibration
        if self.calibration_dir is not None:
            return estimate_pooled_drift_vol(load_prices(self.calibration_dir))
        return REFERENCE_CALIBRATION

    def single(self, strategy: StrategyParams) -> "ExperimentConfig":
        return replace(self, strategies=(strategy,), sweep=None)
