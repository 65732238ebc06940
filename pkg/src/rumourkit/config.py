"""Run configuration: one structured file, flag overrides, stable hash.

Every experiment is reproducible from a config plus its seeds, so all
command-line entry points load defaults, optionally merge a JSON config
file, then apply explicit flag overrides in that order. The short hash of
the resolved configuration is printed with every result block so outputs
can be traced back to the exact settings that produced them.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .evaluation import ModelSpec
from .features import FeatureConfig

# overrides the resource directory without touching config files
RESOURCE_ENV = "RUMOURKIT_RESOURCES"


@dataclass
class RunConfig:
    """Everything a pipeline run depends on besides the data itself."""

    # paths
    data_dir: str = "data/dast"
    resource_dir: str = "data/resources"
    pheme_sequences: str = "data/pheme_like/pheme_sequences.jsonl"
    output_dir: str = "out"

    # shared randomness
    seed: int = 0
    folds: int = 5

    # feature segments
    text: bool = True
    lexicon: bool = True
    sentiment: bool = True
    reddit: bool = True
    most_frequent: bool = True
    bow: bool = True
    pos: bool = True
    embeddings: bool = True
    variance_threshold: float | None = 0.001

    # stance model
    model: str = "svm"
    C: float = 10.0
    class_weight: str = "uniform"

    # sampling experiments
    placement: str = "co_located"
    split_seed: int = 5

    # veracity experiments
    structure: str = "bas"
    variant: str = "lambda"
    unverified: str = "false"
    protocol: str = "cv3"
    n_min: int = 1
    n_max: int = 15
    restarts: int = 5
    hmm_max_iter: int = 50
    hmm_tol: float = 1e-3
    time_norm: str = "sequence"

    def __post_init__(self):
        if self.time_norm not in ("sequence", "dataset"):
            raise ConfigError(
                f"time_norm must be 'sequence' or 'dataset', got {self.time_norm!r}")
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError(
                f"state range must satisfy 1 <= n_min <= n_max, got "
                f"{self.n_min}..{self.n_max}")

    # ------------------------------------------------------------------
    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(
            text=self.text, lexicon=self.lexicon, sentiment=self.sentiment,
            reddit=self.reddit, most_frequent=self.most_frequent,
            bow=self.bow, pos=self.pos, embeddings=self.embeddings,
            variance_threshold=self.variance_threshold)

    def model_spec(self) -> ModelSpec:
        params: dict = {"seed": self.seed}
        if self.model in ("svm", "logit"):
            params["C"] = self.C
            params["class_weight"] = self.class_weight
        return ModelSpec(self.model, params)

    def n_range(self) -> range:
        return range(self.n_min, self.n_max + 1)

    def hash(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value):
    """Best-effort cast of a raw file/flag value onto a config field."""
    f = _FIELDS[name]
    if value is None:
        return None
    if f.type in ("bool", bool):
        if isinstance(value, bool):
            return value
        if str(value).lower() in ("1", "true", "yes", "on"):
            return True
        if str(value).lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key {name!r} expects a boolean, got {value!r}")
    if f.type in ("int", int):
        return int(value)
    if f.type in ("float", float):
        return float(value)
    if f.type == "float | None":
        return None if value in (None, "none", "null") else float(value)
    return str(value)


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> RunConfig:
    """Defaults, then the config file, then explicit overrides.

    Unknown keys fail loudly rather than being ignored, and the resource
    directory can additionally be overridden by environment variable.
    """
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {p} must hold a JSON object")
        for key, value in raw.items():
            if key not in _FIELDS:
                raise ConfigError(f"unknown config key {key!r} in {p}")
            values[key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config override {key!r}")
        if value is not None:
            values[key] = _coerce(key, value)
    if RESOURCE_ENV in os.environ and "resource_dir" not in (overrides or {}):
        values["resource_dir"] = os.environ[RESOURCE_ENV]
    return RunConfig(**values)
