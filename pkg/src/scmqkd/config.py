"""Experiment configuration: flat ``key=value`` files plus CLI overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .intermod import MAX_TAYLOR_INDEX, MIN_TRIALS, ModulationConfig
from .security import PRESETS, DetectorModel, LinkModel, ProtocolParams
from .spectrum import ChannelPlan, plan_from_name

DEFAULT_DISTANCE_GRID = (0.0, 120.0, 1.0)
DEFAULT_MBAR_GRID = (0.001, 0.02, 0.0005)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    plans: tuple[str, ...] = ("low", "medium", "high")
    mbar: float = 0.01
    va: float = 10.0
    mlo: float = 0.01
    preset: str = "paper-sec6"
    beta: float | None = None
    eps: float | None = None
    eta: float | None = None
    vel: float | None = None
    frep: float | None = None
    sweep: str | None = None
    start: float | None = None
    stop: float | None = None
    step: float | None = None
    distance: float = 50.0
    out: Path | None = None
    seed: int = 20140101
    trials: int = 1_000_000
    svg: bool = False
    workers: int = 1
    extra: dict = field(default_factory=dict)

    # -- resolution -----------------------------------------------------
    def channel_plans(self) -> list[ChannelPlan]:
        return [plan_from_name(p) for p in self.plans]

    def modulation(self, mbar: float | None = None) -> ModulationConfig:
        return ModulationConfig(self.mbar if mbar is None else mbar, self.va, self.mlo)

    def protocol(self) -> ProtocolParams:
        base = PRESETS[self.preset].params
        return ProtocolParams(
            mod_variance=self.va,
            reconciliation_efficiency=base.reconciliation_efficiency if self.beta is None else self.beta,
            rep_rate_hz=base.rep_rate_hz if self.frep is None else self.frep,
        )

    def detector(self) -> DetectorModel:
        base = PRESETS[self.preset].detector
        return DetectorModel(
            efficiency=base.efficiency if self.eta is None else self.eta,
            electronic_noise=base.electronic_noise if self.vel is None else self.vel,
        )

    def excess_noise(self) -> float:
        return PRESETS[self.preset].excess_noise if self.eps is None else self.eps

    def link(self, distance_km: float) -> LinkModel:
        return LinkModel.from_distance(distance_km, self.excess_noise())

    def grid(self) -> np.ndarray:
        """Sweep axis values, endpoints inclusive."""
        default = DEFAULT_DISTANCE_GRID if self.sweep == "distance" else DEFAULT_MBAR_GRID
        start = default[0] if self.start is None else self.start
        stop = default[1] if self.stop is None else self.stop
        step = default[2] if self.step is None else self.step
        # points past `stop` are dropped; the 1e-9 absorbs rounding in the ratio
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(n), 12)

    def resolved(self) -> dict:
        """Every effective setting, for provenance comments."""
        out = {
            "plans": ",".join(self.plans),
            "mbar": self.mbar, "va": self.va, "mlo": self.mlo, "preset": self.preset,
            "beta": self.protocol().reconciliation_efficiency,
            "eps": self.excess_noise(),
            "eta": self.detector().efficiency,
            "vel": self.detector().electronic_noise,
            "frep": self.protocol().rep_rate_hz,
            "sweep": self.sweep,
            "distance": self.distance,
            "seed": self.seed, "trials": self.trials,
        }
        if self.sweep is not None:
            g = self.grid()
            out.update({"from": float(g[0]), "to": float(g[-1]), "step": self._step()})
        return out

    def _step(self):
        default = DEFAULT_DISTANCE_GRID if self.sweep == "distance" else DEFAULT_MBAR_GRID
        return default[2] if self.step is None else self.step

    # -- validation -----------------------------------------------------
    def validate(self) -> "ExperimentConfig":
        """Check every field against the model invariants; raises ConfigError."""
        if self.extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(self.extra))}")
        if not self.plans:
            raise ConfigError("at least one plan is required")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; known: {', '.join(PRESETS)}")
        if self.sweep not in (None, "distance", "mbar"):
            raise ConfigError(f"sweep must be 'distance' or 'mbar', got {self.sweep!r}")
        if self.sweep is None and any(v is not None for v in (self.start, self.stop, self.step)):
            raise ConfigError("--from/--to/--step need a --sweep axis")
        try:
            self.channel_plans()
            self.protocol()
            self.detector()
            if not 0 < self.mbar <= MAX_TAYLOR_INDEX:
                raise ConfigError(f"mbar must lie in (0, {MAX_TAYLOR_INDEX}], got {self.mbar}")
            if not 0 < self.mlo <= 0.1:
                raise ConfigError(f"mlo must lie in (0, 0.1], got {self.mlo}")
            self.modulation()
            if self.excess_noise() < 0:
                raise ConfigError(f"eps must be >= 0, got {self.excess_noise()}")
            if self.distance < 0:
                raise ConfigError(f"distance must be >= 0, got {self.distance}")
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if self.trials < MIN_TRIALS:
            raise ConfigError(f"trials must be >= {MIN_TRIALS}, got {self.trials}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.svg and self.out is None:
            raise ConfigError("--svg needs --out to name the figure file")
        if self.sweep is not None:
            step = self._step()
            if not step > 0:
                raise ConfigError(f"step must be positive, got {step}")
            g = self.grid()
            if g.size < 1 or g[-1] < g[0]:
                raise ConfigError("sweep range is empty")
            if self.sweep == "distance" and g[0] < 0:
                raise ConfigError("distances must be >= 0")
            if self.sweep == "mbar" and (g[0] <= 0 or g[-1] > MAX_TAYLOR_INDEX + 1e-12):
                raise ConfigError(f"mbar sweep must stay within (0, {MAX_TAYLOR_INDEX}]")
        return self


_FLOAT_KEYS = {"mbar", "va", "mlo", "beta", "eps", "eta", "vel", "frep",
               "start", "stop", "step", "distance"}
_INT_KEYS = {"seed", "trials", "workers"}
_ALIASES = {"from": "start", "to": "stop", "plan": "plans"}


def coerce(key: str, value):
    """Convert a raw string setting to the field's type."""
    key = _ALIASES.get(key, key)
    if value is None:
        return key, None
    try:
        if key in _FLOAT_KEYS:
            return key, float(value)
        if key in _INT_KEYS:
            return key, int(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as a number") from None
    if key == "plans":
        if isinstance(value, str):
            value = tuple(p.strip() for p in value.split(",") if p.strip())
        return key, tuple(value)
    if key == "svg":
        if isinstance(value, bool):
            return key, value
        return key, str(value).strip().lower() in ("1", "true", "yes", "on")
    if key == "out":
        return key, Path(value)
    return key, value


def read_config_file(path: Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    settings = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key.replace("-", "_")] = value
    return settings


def build_config(file_settings: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge file settings with CLI overrides (overrides win) and validate."""
    names = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"extra"}
    values, extra = {}, {}
    for source in (file_settings or {}, overrides or {}):
        for raw_key, raw_value in source.items():
            if raw_value is None:
                continue
            key, value = coerce(raw_key, raw_value)
            if key in names:
                values[key] = value
            else:
                extra[key] = value
    return ExperimentConfig(**values, extra=extra).validate()
