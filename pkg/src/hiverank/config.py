"""Run configuration: one JSON file describing a whole experiment.

Three sections (model, pretrain, train) plus a master seed.  The seed
flows into every seeded component unless a section pins its own.  The
canonical-JSON hash of the whole config is stamped into checkpoints and
CSV artifacts so outputs stay traceable to the settings that made them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .bees import ColonyConfig
from .errors import ConfigError
from .params import ModelConfig
from .rl import TrainConfig


@dataclass
class PretrainSettings:
    """Colony settings minus the dimension, which the model determines."""

    colony_size: int = 100
    limit: int | None = None
    max_evaluations: int = 3000
    max_iterations: int | None = None
    factor: float = 1.5
    mode: str = "mutual"
    weight_bound: float = 1.0
    subsample: int = 256

    def __post_init__(self):
        if self.weight_bound <= 0:
            raise ConfigError(f"weight_bound must be > 0, got {self.weight_bound}")
        if self.subsample < 1:
            raise ConfigError(f"subsample must be >= 1, got {self.subsample}")

    def colony_config(self, dim: int, seed: int) -> ColonyConfig:
        return ColonyConfig(
            dim=dim,
            lower=-self.weight_bound,
            upper=self.weight_bound,
            colony_size=self.colony_size,
            limit=self.limit,
            max_iterations=self.max_iterations,
            max_evaluations=self.max_evaluations,
            factor=self.factor,
            mode=self.mode,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "colony_size", "limit", "max_evaluations", "max_iterations",
            "factor", "mode", "weight_bound", "subsample")}


def _apply(cls, defaults, overrides: dict, section: str):
    known = set(defaults.to_dict())
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(
            f"unknown key(s) in '{section}' section: {', '.join(sorted(unknown))}")
    merged = {**defaults.to_dict(), **overrides}
    return cls(**merged)


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    pretrain: PretrainSettings = field(default_factory=PretrainSettings)
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "pretrain": self.pretrain.to_dict(),
            "train": self.train.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - {"model", "pretrain", "train", "seed"}
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        model_d = {**ModelConfig().to_dict(), **d.get("model", {})}
        extra = set(d.get("model", {})) - set(ModelConfig().to_dict())
        if extra:
            raise ConfigError(
                f"unknown key(s) in 'model' section: {', '.join(sorted(extra))}")
        cfg = cls(
            model=ModelConfig.from_dict(model_d),
            pretrain=_apply(PretrainSettings, PretrainSettings(),
                            d.get("pretrain", {}), "pretrain"),
            train=_apply(TrainConfig, TrainConfig(), d.get("train", {}), "train"),
            seed=int(d.get("seed", 0)),
        )
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})")
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(raw)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
