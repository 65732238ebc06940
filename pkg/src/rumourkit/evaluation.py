"""Metrics, splits, cross-validation, parameter search, and ablation.

Every run here is driven by (seed, config) and nothing else, so repeated
invocations produce identical reports. Fold aggregation sums confusion
counts before deriving per-class metrics; headline scores are means over
folds with population standard deviation.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers import make_classifier
from .corpus import STANCE_NAMES, Post
from .errors import ConfigError, DataError
from .features import EncodingContext, FeatureConfig, FeatureSpace

log = logging.getLogger(__name__)

N_CLASSES = 4


# ---------------------------------------------------------------------------
# Confusion matrix and metrics
# ---------------------------------------------------------------------------


@dataclass
class ConfusionMatrix:
    """Square counts; rows are actual classes, columns predicted.

    Stance evaluation uses the 4x4 default; veracity experiments build
    2- or 3-class matrices over their label set.
    """

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if (self.counts.ndim != 2
                or self.counts.shape[0] != self.counts.shape[1]
                or self.counts.shape[0] < 1):
            raise DataError(f"confusion matrix must be square, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise DataError("confusion matrix counts must be non-negative")

    @classmethod
    def from_predictions(cls, y_true: np.ndarray, y_pred: np.ndarray,
                         n_classes: int = N_CLASSES) -> "ConfusionMatrix":
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        if y_true.shape != y_pred.shape:
            raise DataError("prediction and truth lengths differ")
        counts = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(counts, (y_true, y_pred), 1)
        return cls(counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    @property
    def size(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self, names: list[str] | None = None) -> str:
        if names is None:
            names = STANCE_NAMES if self.size == N_CLASSES else [
                str(k) for k in range(self.size)]
        header = "actual\\predicted," + ",".join(names)
        rows = [header]
        for klass, name in enumerate(names):
            rows.append(name + "," + ",".join(str(int(c)) for c in self.counts[klass]))
        return "\n".join(rows) + "\n"


def accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise DataError("cannot compute accuracy of an empty confusion matrix")
    return float(np.trace(cm.counts)) / total


def precision_recall_f1(cm: ConfusionMatrix, klass: int) -> tuple[float, float, float]:
    """Per-class precision, recall, F1; every 0/0 resolves to 0."""
    if not 0 <= klass < cm.size:
        raise ConfigError(f"class must be 0..{cm.size - 1}, got {klass}")
    tp = float(cm.counts[klass, klass])
    fp = float(cm.counts[:, klass].sum() - tp)
    fn = float(cm.counts[klass, :].sum() - tp)
    p = tp / (tp + fp) if tp + fp > 0 else 0.0
    r = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def macro_f1(cm: ConfusionMatrix) -> float:
    return float(np.mean([precision_recall_f1(cm, k)[2] for k in range(cm.size)]))


@dataclass
class MetricsReport:
    """Evaluation summary; fold statistics are present only for CV runs."""

    confusion: ConfusionMatrix
    accuracy: float
    macro_f1: float
    per_class: list[tuple[float, float, float]]
    accuracy_std: float | None = None
    macro_f1_std: float | None = None
    fold_accuracy: list[float] = field(default_factory=list)
    fold_macro_f1: list[float] = field(default_factory=list)
    labels: list[str] | None = None

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix,
                       labels: list[str] | None = None) -> "MetricsReport":
        return cls(
            confusion=cm,
            accuracy=accuracy(cm),
            macro_f1=macro_f1(cm),
            per_class=[precision_recall_f1(cm, k) for k in range(cm.size)],
            labels=labels,
        )

    @classmethod
    def from_folds(cls, cms: list[ConfusionMatrix],
                   labels: list[str] | None = None) -> "MetricsReport":
        pooled = cms[0]
        for cm in cms[1:]:
            pooled = pooled + cm
        accs = [accuracy(cm) for cm in cms]
        f1s = [macro_f1(cm) for cm in cms]
        return cls(
            confusion=pooled,
            accuracy=float(np.mean(accs)),
            macro_f1=float(np.mean(f1s)),
            per_class=[precision_recall_f1(pooled, k) for k in range(pooled.size)],
            accuracy_std=float(np.std(accs)),
            macro_f1_std=float(np.std(f1s)),
            fold_accuracy=accs,
            fold_macro_f1=f1s,
            labels=labels,
        )

    def class_names(self) -> list[str]:
        if self.labels is not None:
            return list(self.labels)
        if len(self.per_class) == N_CLASSES:
            return list(STANCE_NAMES)
        return [str(k) for k in range(len(self.per_class))]

    def per_class_recall(self) -> list[float]:
        return [r for _, r, _ in self.per_class]

    def render(self) -> str:
        def headline(value: float, std: float | None) -> str:
            return f"{value:.4f}" + (f" (+/- {std:.2f})" if std is not None else "")

        names = self.class_names()
        lines = [
            f"accuracy   {headline(self.accuracy, self.accuracy_std)}",
            f"macro F1   {headline(self.macro_f1, self.macro_f1_std)}",
            "",
            f"{'class':<12} {'precision':>9} {'recall':>9} {'F1':>9}",
        ]
        for name, (p, r, f1) in zip(names, self.per_class):
            lines.append(f"{name:<12} {p:>9.4f} {r:>9.4f} {f1:>9.4f}")
        recalls = " ".join(f"{name[0].upper()}={r:.4f}"
                           for name, r in zip(names, self.per_class_recall()))
        lines.append("")
        lines.append(f"per-class recall (paper: accuracy per class): {recalls}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["metric,class,value"]
        rows.append(f"accuracy,,{self.accuracy:.6f}")
        if self.accuracy_std is not None:
            rows.append(f"accuracy_std,,{self.accuracy_std:.6f}")
        rows.append(f"macro_f1,,{self.macro_f1:.6f}")
        if self.macro_f1_std is not None:
            rows.append(f"macro_f1_std,,{self.macro_f1_std:.6f}")
        for name, (p, r, f1) in zip(self.class_names(), self.per_class):
            rows.append(f"precision,{name},{p:.6f}")
            rows.append(f"recall,{name},{r:.6f}")
            rows.append(f"f1,{name},{f1:.6f}")
        return "\n".join(rows) + "\n"


def evaluate_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> MetricsReport:
    return MetricsReport.from_confusion(ConfusionMatrix.from_predictions(y_true, y_pred))


# ---------------------------------------------------------------------------
# Stratified splitting
# ---------------------------------------------------------------------------


def stratified_split(y: np.ndarray, test_fraction: float = 0.2, seed: int = 0
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-class split into (train, test) index arrays."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    train: list[np.ndarray] = []
    test: list[np.ndarray] = []
    for klass in range(N_CLASSES):
        idx = np.nonzero(y == klass)[0]
        if len(idx) == 0:
            continue
        if len(idx) < 2:
            raise DataError(
                f"class {STANCE_NAMES[klass]} has {len(idx)} samples, need at least 2")
        rng.shuffle(idx)
        n_test = round(test_fraction * len(idx))
        test.append(idx[:n_test])
        train.append(idx[n_test:])
    train_idx = np.sort(np.concatenate(train))
    test_idx = np.sort(np.concatenate(test)) if test else np.asarray([], dtype=np.int64)
    if len(test_idx) == 0:
        raise DataError("stratified split produced an empty test set")
    return train_idx, test_idx


def stratified_kfold(y: np.ndarray, k: int, seed: int = 0) -> list[np.ndarray]:
    """Partition indices into k folds with per-class counts differing by <= 1."""
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    for klass in range(N_CLASSES):
        idx = np.nonzero(y == klass)[0]
        if len(idx) == 0:
            continue
        if len(idx) < k:
            raise DataError(
                f"class {STANCE_NAMES[klass]} has {len(idx)} samples, fewer than k={k}")
        rng.shuffle(idx)
        for i in idx:
            folds[cursor % k].append(int(i))
            cursor += 1
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


# ---------------------------------------------------------------------------
# Cross-validated experiments
# ---------------------------------------------------------------------------


@dataclass
class ModelSpec:
    """Classifier kind plus constructor parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def build(self):
        return make_classifier(self.kind, **self.params)


def _fit_predict(ctx: EncodingContext, fcfg: FeatureConfig, spec: ModelSpec,
                 train_posts: list[Post], train_y: np.ndarray,
                 test_posts: list[Post]) -> np.ndarray:
    space = FeatureSpace(ctx, fcfg).fit(train_posts)
    X_train = space.transform(train_posts)
    model = spec.build().fit(X_train, train_y)
    del X_train
    return model.predict(space.transform(test_posts))


def cross_validate(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
                   fcfg: FeatureConfig, spec: ModelSpec,
                   k: int = 5, seed: int = 0) -> MetricsReport:
    """k-fold CV with the feature space refitted on each training split."""
    y = np.asarray(y)
    folds = stratified_kfold(y, k, seed)
    log.info("cross-validate %s k=%d seed=%d", spec.kind, k, seed)
    cms: list[ConfusionMatrix] = []
    for fold_idx, test_idx in enumerate(folds):
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[test_idx] = False
        train_idx = np.nonzero(train_mask)[0]
        y_pred = _fit_predict(
            ctx, fcfg, spec,
            [posts[i] for i in train_idx], y[train_idx],
            [posts[i] for i in test_idx])
        cms.append(ConfusionMatrix.from_predictions(y[test_idx], y_pred))
        log.debug("fold %d/%d done", fold_idx + 1, k)
    return MetricsReport.from_folds(cms)


def train_test_report(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
                      fcfg: FeatureConfig, spec: ModelSpec,
                      train_idx: np.ndarray, test_idx: np.ndarray) -> MetricsReport:
    y = np.asarray(y)
    y_pred = _fit_predict(
        ctx, fcfg, spec,
        [posts[i] for i in train_idx], y[train_idx],
        [posts[i] for i in test_idx])
    return evaluate_predictions(y[test_idx], y_pred)


# ---------------------------------------------------------------------------
# Parameter search
# ---------------------------------------------------------------------------

# grid keys routed to the feature configuration instead of the classifier
_FEATURE_PARAMS = ("variance_threshold",)


@dataclass
class SearchResult:
    best_params: dict
    best_score: float
    n_iterations: int
    holdout_report: MetricsReport
    scores: list[tuple[dict, float]]


def _apply_params(fcfg: FeatureConfig, spec: ModelSpec, params: dict
                  ) -> tuple[FeatureConfig, ModelSpec]:
    feature_kw = {k: v for k, v in params.items() if k in _FEATURE_PARAMS}
    model_kw = {k: v for k, v in params.items() if k not in _FEATURE_PARAMS}
    if feature_kw:
        fcfg = replace(fcfg, **feature_kw)
    merged = dict(spec.params)
    merged.update(model_kw)
    return fcfg, ModelSpec(spec.kind, merged)


def _enumerate_grid(grid: dict) -> list[dict]:
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigError("parameter grid must have at least one value per parameter")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*grid.values())]


def _search(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
            fcfg: FeatureConfig, spec: ModelSpec, candidates: list[dict],
            inner_k: int, seed: int) -> SearchResult:
    y = np.asarray(y)
    train_idx, test_idx = stratified_split(y, 0.2, seed)
    train_posts = [posts[i] for i in train_idx]
    train_y = y[train_idx]

    scores: list[tuple[dict, float]] = []
    best_params: dict | None = None
    best_score = -1.0
    for params in candidates:
        run_fcfg, run_spec = _apply_params(fcfg, spec, params)
        report = cross_validate(train_posts, train_y, ctx, run_fcfg, run_spec,
                                k=inner_k, seed=seed)
        scores.append((params, report.macro_f1))
        log.info("searched %s -> inner macro F1 %.4f", params, report.macro_f1)
        if report.macro_f1 > best_score:
            best_score = report.macro_f1
            best_params = params

    run_fcfg, run_spec = _apply_params(fcfg, spec, best_params)
    holdout = train_test_report(posts, y, ctx, run_fcfg, run_spec, train_idx, test_idx)
    return SearchResult(
        best_params=best_params,
        best_score=best_score,
        n_iterations=len(candidates) * inner_k,
        holdout_report=holdout,
        scores=scores,
    )


def grid_search(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
                fcfg: FeatureConfig, spec: ModelSpec, grid: dict,
                inner_k: int = 3, seed: int = 0) -> SearchResult:
    """Exhaustive search: outer 0.2 holdout, inner stratified k-fold per
    configuration, selection by inner macro F1, first candidate wins ties."""
    return _search(posts, y, ctx, fcfg, spec, _enumerate_grid(grid), inner_k, seed)


def random_search(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
                  fcfg: FeatureConfig, spec: ModelSpec, grid: dict,
                  n: int = 10, inner_k: int = 3, seed: int = 0) -> SearchResult:
    """Like grid_search but over n configurations sampled from the grid."""
    if n < 1:
        raise ConfigError(f"random search needs n >= 1, got {n}")
    full = _enumerate_grid(grid)
    rng = np.random.default_rng(seed)
    candidates = [full[i] for i in rng.integers(0, len(full), size=n)]
    return _search(posts, y, ctx, fcfg, spec, candidates, inner_k, seed)


# ---------------------------------------------------------------------------
# Ablation and learning curves
# ---------------------------------------------------------------------------


def ablation(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
             fcfg: FeatureConfig, spec: ModelSpec,
             k: int = 5, seed: int = 0) -> dict[str, MetricsReport]:
    """Hold out one enabled feature segment at a time.

    Returns a report per held-out segment plus the all-features reference
    under the key "all"."""
    enabled = fcfg.enabled_segments()
    if len(enabled) < 2:
        raise ConfigError("ablation needs at least 2 enabled feature segments")
    reports = {"all": cross_validate(posts, y, ctx, fcfg, spec, k=k, seed=seed)}
    for segment in enabled:
        reports[segment] = cross_validate(
            posts, y, ctx, fcfg.without(segment), spec, k=k, seed=seed)
    return reports


def _stratified_fraction(y: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    if fraction >= 1.0:
        return np.arange(len(y))
    rng = np.random.default_rng(seed)
    picks: list[np.ndarray] = []
    for klass in range(N_CLASSES):
        idx = np.nonzero(y == klass)[0]
        if len(idx) == 0:
            continue
        rng.shuffle(idx)
        n_pick = max(1, round(fraction * len(idx)))
        picks.append(idx[:n_pick])
    return np.sort(np.concatenate(picks))


def learning_curve(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
                   fcfg: FeatureConfig, spec: ModelSpec,
                   fractions: list[float], k: int = 5, seed: int = 0
                   ) -> list[tuple[float, MetricsReport]]:
    """CV score at stratified subsamples of increasing size."""
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ConfigError(f"fractions must be in (0, 1], got {f}")
    y = np.asarray(y)
    out: list[tuple[float, MetricsReport]] = []
    for f in fractions:
        idx = _stratified_fraction(y, f, seed)
        report = cross_validate([posts[i] for i in idx], y[idx], ctx, fcfg, spec,
                                k=k, seed=seed)
        out.append((f, report))
    return out
