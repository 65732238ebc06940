"""Saving and loading fitted stance models.

A trained stance predictor is a fitted feature space (vocabulary, frequent
word lists, count scales, variance mask) plus linear model weights. Both
halves serialize into one compressed npz archive so the resolver can label
new posts without refitting; split-independent state (normalization ranges,
embedding context) is rebuilt from the data directory at load time.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Post
from .errors import ConfigError, DataError
from .evaluation import ModelSpec
from .features import (EncodingContext, FeatureConfig, FeatureSpace,
                       MostFrequentWords)

FORMAT = "stance-model"
VERSION = 1


@dataclass
class StanceBundle:
    """A fitted feature space and classifier, ready to label posts."""

    space: FeatureSpace
    model: object
    spec: ModelSpec
    config_hash: str = ""

    def predict(self, posts: list[Post]) -> np.ndarray:
        return self.model.predict(self.space.transform(posts))


def fit_bundle(ctx: EncodingContext, fcfg: FeatureConfig, spec: ModelSpec,
               posts: list[Post], y: np.ndarray,
               config_hash: str = "") -> StanceBundle:
    space = FeatureSpace(ctx, fcfg).fit(posts)
    model = spec.build().fit(space.transform(posts), np.asarray(y))
    return StanceBundle(space=space, model=model, spec=spec,
                        config_hash=config_hash)


def save_stance_model(bundle: StanceBundle, path: str | Path) -> None:
    model = bundle.model
    if not hasattr(model, "to_state"):
        raise ConfigError(
            f"only linear stance models can be saved, not {bundle.spec.kind!r}")
    space = bundle.space
    if space.keep_mask is None:
        raise ConfigError("feature space is not fitted")
    state = model.to_state()
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "kind": bundle.spec.kind,
        "params": bundle.spec.params,
        "config_hash": bundle.config_hash,
        "feature_config": dataclasses.asdict(space.config),
        "vocabulary": sorted(space.vocabulary, key=space.vocabulary.get),
        "mfw_per_class": ([list(t) for t in space.mfw.per_class]
                          if space.mfw is not None else None),
    }
    arrays = {
        "meta": np.array(json.dumps(meta)),
        "W": np.asarray(state["W"], dtype=np.float64),
        "b": np.asarray(state["b"], dtype=np.float64),
        "keep_mask": space.keep_mask,
        "mfw_scale": (space.mfw_scale if space.mfw_scale is not None
                      else np.zeros(0)),
        "bow_scale": (space.bow_scale if space.bow_scale is not None
                      else np.zeros(0)),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)


def load_stance_model(path: str | Path, ctx: EncodingContext) -> StanceBundle:
    path = Path(path)
    if not path.exists():
        raise DataError(f"stance model not found: {path}")
    with np.load(path, allow_pickle=False) as npz:
        try:
            meta = json.loads(str(npz["meta"]))
        except (KeyError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: not a stance model archive") from exc
        if meta.get("format") != FORMAT:
            raise DataError(f"{path}: not a stance model archive")
        fcfg = FeatureConfig(**meta["feature_config"])
        space = FeatureSpace(ctx, fcfg)
        space.vocabulary = {w: i for i, w in enumerate(meta["vocabulary"])}
        if meta["mfw_per_class"] is not None:
            per_class = tuple(tuple(ws) for ws in meta["mfw_per_class"])
            words = tuple(w for ws in per_class for w in ws)
            space.mfw = MostFrequentWords(words=words, per_class=per_class)
        space._build_names()
        space.keep_mask = npz["keep_mask"].astype(bool)
        if len(space.keep_mask) != len(space.names):
            raise DataError(
                f"{path}: stored mask width {len(space.keep_mask)} does not "
                f"match rebuilt layout {len(space.names)}; the data or "
                f"resource directory differs from the one used at save time")
        space.mfw_scale = npz["mfw_scale"] if npz["mfw_scale"].size else None
        space.bow_scale = npz["bow_scale"] if npz["bow_scale"].size else None
        spec = ModelSpec(meta["kind"], dict(meta["params"]))
        model = spec.build()
        model.load_state({"W": npz["W"], "b": npz["b"]})
    return StanceBundle(space=space, model=model, spec=spec,
                        config_hash=meta.get("config_hash", ""))
