"""Veracity prediction over stance sequences with per-label Gaussian HMMs.

Rumour submissions become observation sequences under three structures
(whole submission, conversation tree, single branch), each post contributing
its stance code and optionally a normalized timestamp. One hidden Markov
model with diagonal-Gaussian emissions is trained per veracity label; a
sequence is classified by which label's model assigns it the greater
likelihood. A distribution-distance baseline and the experiment protocols
(in-set cross-validation, cross-dataset transfer, mixed-set CV, automatic
stance labeling) live here too.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import (STANCE_NAMES, Dataset, SequenceRecord, Submission,
                     VERACITY_VALUES, rumour_subset)
from .errors import ConfigError, DataError
from .evaluation import (ConfusionMatrix, MetricsReport, ModelSpec,
                         _fit_predict, stratified_kfold)
from .features import EncodingContext, FeatureConfig, encode_labels

log = logging.getLogger(__name__)

STRUCTURES = ("sas", "tcas", "bas")
VARIANTS = ("lambda", "omega")
UNVERIFIED_MODES = ("false", "true", "3way")

# tie precedence for equal likelihoods / distances
PRECEDENCE = ("false", "true", "unverified")

VARIANCE_FLOOR = 1e-3


# ---------------------------------------------------------------------------
# Sequence construction and encoding
# ---------------------------------------------------------------------------


def to_sequences(dataset: Dataset, structure: str) -> list[SequenceRecord]:
    """Turn the rumour subset into stance sequences under a structure mode.

    `sas` flattens each submission to one time-sorted sequence; `tcas`
    emits one per top-level conversation tree; `bas` emits one per branch,
    so posts on a shared trunk appear in every branch that passes through
    them.
    """
    if structure not in STRUCTURES:
        raise ConfigError(f"structure must be one of {STRUCTURES}, got {structure!r}")
    records: list[SequenceRecord] = []
    for sub in rumour_subset(dataset).submissions:
        veracity = (sub.truth_status or "unverified").lower()
        if veracity not in VERACITY_VALUES:
            raise DataError(
                f"submission {sub.submission_id} has unusable truth status "
                f"{sub.truth_status!r}")

        def record(rumour_id: str, posts) -> SequenceRecord:
            return SequenceRecord(
                dataset="dast",
                event=sub.event,
                rumour_id=rumour_id,
                veracity=veracity,
                items=[(p.sdqc_submission, p.created) for p in posts],
            )

        if structure == "sas":
            posts = sorted(sub.unique_posts(), key=lambda p: (p.created, p.comment_id))
            records.append(record(sub.submission_id, posts))
        elif structure == "tcas":
            for conv_id, branches in sub.conversations().items():
                seen: set[str] = set()
                posts = []
                for branch in branches:
                    for p in branch.posts:
                        if p.comment_id not in seen:
                            seen.add(p.comment_id)
                            posts.append(p)
                posts.sort(key=lambda p: (p.created, p.comment_id))
                records.append(record(f"{sub.submission_id}/{conv_id}", posts))
        else:
            for i, branch in enumerate(sub.branches):
                records.append(
                    record(f"{sub.submission_id}/b{i}", branch.posts))
    return records


def encode(record: SequenceRecord, variant: str = "lambda",
           time_span: tuple[float, float] | None = None) -> np.ndarray:
    """Observation matrix for one sequence: stance codes, plus a
    min-max normalized time column for the `omega` variant.

    Normalization is per sequence by default (a single post, or identical
    timestamps, normalize to 0). Passing `time_span` switches to a shared
    scale, e.g. the whole dataset's time range from `dataset_time_span`.
    """
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if not record.items:
        raise DataError(f"sequence {record.rumour_id} has no observations")
    stances = np.asarray([s for s, _ in record.items], dtype=np.float64)
    if variant == "lambda":
        return stances[:, None]
    times = np.asarray([t for _, t in record.items], dtype=np.float64)
    lo, hi = (times.min(), times.max()) if time_span is None else time_span
    span = hi - lo
    norm = np.clip((times - lo) / span, 0.0, 1.0) if span > 0 \
        else np.zeros_like(times)
    return np.column_stack([stances, norm])


def dataset_time_span(records: list[SequenceRecord]) -> tuple[float, float]:
    """Overall time range of a sequence set, for shared-scale encoding."""
    times = [t for rec in records for _, t in rec.items]
    if not times:
        raise DataError("no observations to take a time range over")
    return (min(times), max(times))


# ---------------------------------------------------------------------------
# Gaussian HMM: training and inference
# ---------------------------------------------------------------------------


@dataclass
class GaussianHmm:
    """Hidden Markov model with per-state diagonal Gaussian emissions."""

    start: np.ndarray
    trans: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    history: list[float] = field(default_factory=list)

    @property
    def n_states(self) -> int:
        return int(self.start.shape[0])

    @property
    def width(self) -> int:
        return int(self.means.shape[1])

    def validate(self) -> None:
        if abs(self.start.sum() - 1.0) > 1e-9:
            raise DataError("start probabilities do not sum to 1")
        if np.abs(self.trans.sum(axis=1) - 1.0).max() > 1e-9:
            raise DataError("transition rows do not sum to 1")
        if (self.variances <= 0).any():
            raise DataError("variances must be positive")


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.squeeze(m, axis=axis) + np.log(
        np.sum(np.exp(a - m), axis=axis))


def _log_emissions(X: np.ndarray, means: np.ndarray,
                   variances: np.ndarray) -> np.ndarray:
    """Log density of each observation row under each state.

    X has shape (..., w); the result appends a state axis: (..., N).
    """
    diff = X[..., None, :] - means
    return -0.5 * np.sum(
        np.log(2.0 * np.pi * variances) + diff * diff / variances, axis=-1)


def _check_matrix(model: GaussianHmm, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"observation matrix must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0:
        raise DataError("cannot score an empty sequence")
    if X.shape[1] != model.width:
        raise DataError(
            f"observation width {X.shape[1]} does not match model width "
            f"{model.width}")
    return X


def log_likelihood(model: GaussianHmm, X: np.ndarray) -> float:
    """Log probability of a sequence under the model (log-space forward)."""
    X = _check_matrix(model, X)
    le = _log_emissions(X, model.means, model.variances)
    log_a = np.log(model.trans + 1e-300)
    alpha = np.log(model.start + 1e-300) + le[0]
    for t in range(1, X.shape[0]):
        alpha = le[t] + _logsumexp(alpha[:, None] + log_a, axis=0)
    return float(_logsumexp(alpha, axis=0))


def viterbi(model: GaussianHmm, X: np.ndarray) -> tuple[list[int], float]:
    """Most likely state path and its log score.

    Among equally likely paths the lexicographically smallest is returned,
    chosen greedily from the front using exact suffix maxima.
    """
    X = _check_matrix(model, X)
    T = X.shape[0]
    le = _log_emissions(X, model.means, model.variances)
    log_a = np.log(model.trans + 1e-300)
    # suffix[t][s]: best continuation score after emitting in state s at t
    suffix = np.zeros((T, model.n_states))
    for t in range(T - 2, -1, -1):
        suffix[t] = np.max(log_a + le[t + 1] + suffix[t + 1], axis=1)
    head = np.log(model.start + 1e-300) + le[0]
    total = float(np.max(head + suffix[0]))
    eps = 1e-9 * max(1.0, abs(total))
    path = [int(np.nonzero(head + suffix[0] >= total - eps)[0][0])]
    acc = float(head[path[0]])
    for t in range(1, T):
        scores = acc + log_a[path[-1]] + le[t] + suffix[t]
        nxt = int(np.nonzero(scores >= total - eps)[0][0])
        acc += float(log_a[path[-1], nxt] + le[t, nxt])
        path.append(nxt)
    return path, total


def _init_model(rng: np.random.Generator, pooled: np.ndarray, n_states: int,
                var_floor: float) -> GaussianHmm:
    n, w = pooled.shape
    start = rng.dirichlet(np.ones(n_states))
    trans = np.vstack([rng.dirichlet(np.ones(n_states))
                       for _ in range(n_states)])
    means = pooled[rng.choice(n, size=n_states, replace=n < n_states)].copy()
    variances = np.tile(np.maximum(pooled.var(axis=0), var_floor), (n_states, 1))
    return GaussianHmm(start=start, trans=trans, means=means,
                       variances=variances)


def _em_pass(model: GaussianHmm, groups: dict[int, np.ndarray],
             var_floor: float) -> tuple[float, GaussianHmm]:
    """One E+M step over all sequences, batched by sequence length.

    Returns the log-likelihood of the data under the *incoming* model and
    the re-estimated model.
    """
    n = model.n_states
    log_pi = np.log(model.start + 1e-300)
    log_a = np.log(model.trans + 1e-300)
    total_ll = 0.0
    n_seqs = 0
    start_acc = np.zeros(n)
    trans_acc = np.zeros((n, n))
    w_acc = np.zeros(n)
    xw_acc = np.zeros((n, model.width))
    xx_acc = np.zeros((n, model.width))
    for length, batch in groups.items():
        le = _log_emissions(batch, model.means, model.variances)  # (S, L, N)
        s_count = batch.shape[0]
        alpha = np.empty_like(le)
        alpha[:, 0] = log_pi + le[:, 0]
        for t in range(1, length):
            alpha[:, t] = le[:, t] + _logsumexp(
                alpha[:, t - 1][:, :, None] + log_a[None], axis=1)
        beta = np.zeros_like(le)
        for t in range(length - 2, -1, -1):
            beta[:, t] = _logsumexp(
                log_a[None] + (le[:, t + 1] + beta[:, t + 1])[:, None, :],
                axis=2)
        ll = _logsumexp(alpha[:, length - 1], axis=1)  # (S,)
        total_ll += float(ll.sum())
        n_seqs += s_count
        gamma = np.exp(alpha + beta - ll[:, None, None])  # (S, L, N)
        start_acc += gamma[:, 0].sum(axis=0)
        if length > 1:
            trans_acc += np.exp(
                alpha[:, :-1][:, :, :, None] + log_a[None, None]
                + (le[:, 1:] + beta[:, 1:])[:, :, None, :]
                - ll[:, None, None, None]).sum(axis=(0, 1))
        w_acc += gamma.sum(axis=(0, 1))
        xw_acc += np.einsum("stn,stw->nw", gamma, batch)
        xx_acc += np.einsum("stn,stw->nw", gamma, batch * batch)
    start = start_acc / n_seqs
    start = start / start.sum()
    rows = trans_acc.sum(axis=1, keepdims=True)
    trans = np.where(rows > 0, trans_acc / np.where(rows > 0, rows, 1.0),
                     1.0 / n)
    trans = trans / trans.sum(axis=1, keepdims=True)
    means = np.where(w_acc[:, None] > 0, xw_acc / np.maximum(w_acc[:, None], 1e-300),
                     model.means)
    variances = np.where(
        w_acc[:, None] > 0,
        xx_acc / np.maximum(w_acc[:, None], 1e-300) - means * means,
        model.variances)
    variances = np.maximum(variances, var_floor)
    return total_ll, GaussianHmm(start=start, trans=trans, means=means,
                                 variances=variances)


def baum_welch(matrices: list[np.ndarray], n_states: int, seed=0,
               max_iter: int = 50, tol: float = 1e-3, restarts: int = 5,
               var_floor: float = VARIANCE_FLOOR) -> GaussianHmm:
    """Expectation-maximization fit, best of several random restarts.

    The per-iteration data log-likelihood is recorded on the returned
    model's `history` and never decreases. Each restart draws start and
    transition rows from a symmetric Dirichlet and seeds state means from
    random observations; variances start at the pooled data variance and
    are floored throughout so constant observations cannot collapse them.
    """
    if n_states < 1:
        raise ConfigError(f"state count must be >= 1, got {n_states}")
    if var_floor <= 0:
        raise ConfigError("variance floor must be positive")
    if not matrices:
        raise DataError("no training sequences")
    mats = [np.asarray(m, dtype=np.float64) for m in matrices]
    width = mats[0].shape[1] if mats[0].ndim == 2 else -1
    for m in mats:
        if m.ndim != 2 or m.shape[0] == 0:
            raise DataError("every training sequence must be a non-empty matrix")
        if m.shape[1] != width:
            raise DataError("training sequences have mixed observation widths")
    pooled = np.concatenate(mats, axis=0)
    if n_states > pooled.shape[0]:
        raise DataError(
            f"{n_states} states cannot be estimated from {pooled.shape[0]} "
            f"observations")
    by_len: dict[int, list[np.ndarray]] = {}
    for m in mats:
        by_len.setdefault(m.shape[0], []).append(m)
    groups = {length: np.stack(ms) for length, ms in by_len.items()}

    best: GaussianHmm | None = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r] if np.ndim(seed) == 0
                                    else list(np.ravel(seed)) + [r])
        model = _init_model(rng, pooled, n_states, var_floor)
        history: list[float] = []
        for _ in range(max_iter):
            ll, model = _em_pass(model, groups, var_floor)
            if history and ll - history[-1] < tol:
                history.append(ll)
                break
            history.append(ll)
        model.history = history
        if best is None or model.history[-1] > best.history[-1]:
            best = model
    assert best is not None
    best.validate()
    return best


# ---------------------------------------------------------------------------
# Per-label classifier
# ---------------------------------------------------------------------------


def map_veracity(label: str, unverified: str) -> str:
    """Collapse the unverified label per experiment mode."""
    if unverified not in UNVERIFIED_MODES:
        raise ConfigError(
            f"unverified mode must be one of {UNVERIFIED_MODES}, got {unverified!r}")
    if label not in VERACITY_VALUES:
        raise DataError(f"unknown veracity label {label!r}")
    if label == "unverified" and unverified != "3way":
        return unverified
    return label


def label_set(unverified: str) -> list[str]:
    """The labels in play for a mode, in tie-precedence order."""
    if unverified not in UNVERIFIED_MODES:
        raise ConfigError(
            f"unverified mode must be one of {UNVERIFIED_MODES}, got {unverified!r}")
    return list(PRECEDENCE) if unverified == "3way" else ["false", "true"]


@dataclass
class HmmClassifier:
    """One Gaussian HMM per veracity label, sharing state count and width."""

    models: dict[str, GaussianHmm]
    n_states: int
    width: int

    def labels(self) -> list[str]:
        return [lab for lab in PRECEDENCE if lab in self.models]

    def to_json(self) -> str:
        payload = {
            "format": "hmm-classifier",
            "version": 1,
            "n_states": self.n_states,
            "width": self.width,
            "labels": {
                lab: {
                    "start": m.start.tolist(),
                    "trans": m.trans.tolist(),
                    "means": m.means.tolist(),
                    "vars": m.variances.tolist(),
                }
                for lab, m in self.models.items()
            },
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "HmmClassifier":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid classifier JSON: {exc}") from exc
        if payload.get("format") != "hmm-classifier":
            raise DataError("not a serialized veracity classifier")
        models = {}
        for lab, p in payload["labels"].items():
            models[lab] = GaussianHmm(
                start=np.asarray(p["start"], dtype=np.float64),
                trans=np.asarray(p["trans"], dtype=np.float64),
                means=np.asarray(p["means"], dtype=np.float64),
                variances=np.asarray(p["vars"], dtype=np.float64),
            )
        return cls(models=models, n_states=int(payload["n_states"]),
                   width=int(payload["width"]))


def save_classifier(clf: HmmClassifier, path: str | Path) -> None:
    Path(path).write_text(clf.to_json() + "\n", encoding="utf-8")


def load_classifier(path: str | Path) -> HmmClassifier:
    return HmmClassifier.from_json(Path(path).read_text(encoding="utf-8"))


def predict_veracity(clf: HmmClassifier, sequence) -> str:
    """Label whose model scores the sequence highest; ties resolve
    false > true > unverified."""
    if isinstance(sequence, SequenceRecord):
        sequence = encode(sequence, "lambda" if clf.width == 1 else "omega")
    best_label = None
    best_ll = -np.inf
    for lab in clf.labels():
        ll = log_likelihood(clf.models[lab], sequence)
        if ll > best_ll:
            best_label, best_ll = lab, ll
    assert best_label is not None
    return best_label


def _grouped(records: list[SequenceRecord], variant: str,
             unverified: str) -> dict[str, list[np.ndarray]]:
    groups: dict[str, list[np.ndarray]] = {lab: [] for lab in label_set(unverified)}
    for rec in records:
        groups[map_veracity(rec.veracity, unverified)].append(
            encode(rec, variant))
    return groups


def fit_classifier(records: list[SequenceRecord], variant: str = "lambda",
                   unverified: str = "false", n_range=None, seed: int = 0,
                   max_iter: int = 50, tol: float = 1e-3, restarts: int = 5,
                   var_floor: float = VARIANCE_FLOOR) -> HmmClassifier:
    """Train per-label models, selecting the state count by inner CV.

    Every candidate N trains one model per label; candidates are scored by
    macro F1 of 3-fold cross-validation inside the training data, and ties
    go to the smallest N.
    """
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {variant!r}")
    labels = label_set(unverified)
    if n_range is None:
        n_range = range(1, 16)
    candidates = sorted(set(int(n) for n in n_range))
    if not candidates or candidates[0] < 1:
        raise ConfigError(f"state counts must be >= 1, got {candidates}")
    groups = _grouped(records, variant, unverified)
    for lab in labels:
        if not groups[lab]:
            raise DataError(f"no training sequences for label {lab!r}")
    width = groups[labels[0]][0].shape[1]

    mapped = [map_veracity(r.veracity, unverified) for r in records]
    y = np.asarray([labels.index(lab) for lab in mapped])
    mats = [encode(r, variant) for r in records]

    best_n = candidates[0]
    best_score = -np.inf
    if len(candidates) > 1:
        folds = stratified_kfold(y, 3, seed)
        usable = []
        for fold in folds:
            test = set(fold.tolist())
            train_idx = [i for i in range(len(records)) if i not in test]
            if all(any(y[i] == k for i in train_idx) for k in range(len(labels))):
                usable.append((train_idx, sorted(test)))
        for n_states in candidates:
            scores = []
            for f, (train_idx, test_idx) in enumerate(usable):
                try:
                    models = {
                        lab: baum_welch(
                            [mats[i] for i in train_idx if y[i] == k],
                            n_states, seed=[seed, n_states, f, k],
                            max_iter=max_iter, tol=tol, restarts=restarts,
                            var_floor=var_floor)
                        for k, lab in enumerate(labels)
                    }
                except DataError:
                    scores = []
                    break
                clf = HmmClassifier(models=models, n_states=n_states, width=width)
                preds = [labels.index(predict_veracity(clf, mats[i]))
                         for i in test_idx]
                cm = ConfusionMatrix.from_predictions(
                    y[test_idx], np.asarray(preds), n_classes=len(labels))
                scores.append(
                    float(np.mean([_f1(cm, k) for k in range(len(labels))])))
            if scores:
                score = float(np.mean(scores))
                if score > best_score:
                    best_score, best_n = score, n_states
        log.debug("state search picked N=%d (inner F1 %.4f)", best_n, best_score)

    final = {
        lab: baum_welch(groups[lab], best_n, seed=[seed, best_n, k],
                        max_iter=max_iter, tol=tol, restarts=restarts,
                        var_floor=var_floor)
        for k, lab in enumerate(labels)
    }
    return HmmClassifier(models=final, n_states=best_n, width=width)


def _f1(cm: ConfusionMatrix, k: int) -> float:
    tp = float(cm.counts[k, k])
    fp = float(cm.counts[:, k].sum() - tp)
    fn = float(cm.counts[k, :].sum() - tp)
    p = tp / (tp + fp) if tp + fp > 0 else 0.0
    r = tp / (tp + fn) if tp + fn > 0 else 0.0
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


# ---------------------------------------------------------------------------
# Stance-distribution baseline
# ---------------------------------------------------------------------------


@dataclass
class VbBaseline:
    """Mean per-label stance distribution; nearest tuple wins."""

    tuples: dict[str, np.ndarray]

    def labels(self) -> list[str]:
        return [lab for lab in PRECEDENCE if lab in self.tuples]


def _stance_distribution(record: SequenceRecord) -> np.ndarray:
    counts = np.zeros(len(STANCE_NAMES))
    for s, _ in record.items:
        counts[s] += 1
    return counts / counts.sum()


def vb_fit(records: list[SequenceRecord],
           unverified: str = "false") -> VbBaseline:
    labels = label_set(unverified)
    sums: dict[str, list[np.ndarray]] = {lab: [] for lab in labels}
    for rec in records:
        sums[map_veracity(rec.veracity, unverified)].append(
            _stance_distribution(rec))
    for lab in labels:
        if not sums[lab]:
            raise DataError(f"no training sequences for label {lab!r}")
    return VbBaseline(tuples={lab: np.mean(sums[lab], axis=0)
                              for lab in labels})


def vb_predict(baseline: VbBaseline, record: SequenceRecord) -> str:
    dist = _stance_distribution(record)
    best_label = None
    best_d = np.inf
    for lab in baseline.labels():
        d = float(np.linalg.norm(dist - baseline.tuples[lab]))
        if d < best_d:
            best_label, best_d = lab, d
    assert best_label is not None
    return best_label


# ---------------------------------------------------------------------------
# Experiment protocols
# ---------------------------------------------------------------------------


def _evaluate_split(train: list[SequenceRecord], test: list[SequenceRecord],
                    variant: str, unverified: str, baseline: bool,
                    n_range, seed: int, **hmm_kwargs) -> ConfusionMatrix:
    labels = label_set(unverified)
    truth = [labels.index(map_veracity(r.veracity, unverified)) for r in test]
    if baseline:
        vb = vb_fit(train, unverified)
        preds = [labels.index(vb_predict(vb, r)) for r in test]
    else:
        clf = fit_classifier(train, variant=variant, unverified=unverified,
                             n_range=n_range, seed=seed, **hmm_kwargs)
        preds = [labels.index(predict_veracity(clf, encode(r, variant)))
                 for r in test]
    return ConfusionMatrix.from_predictions(
        np.asarray(truth), np.asarray(preds), n_classes=len(labels))


def protocol_cv3(records: list[SequenceRecord], variant: str = "lambda",
                 unverified: str = "false", k: int = 3, seed: int = 0,
                 baseline: bool = False, n_range=None,
                 **hmm_kwargs) -> MetricsReport:
    """Stratified k-fold (default 3) cross-validation over one sequence set."""
    labels = label_set(unverified)
    y = np.asarray([labels.index(map_veracity(r.veracity, unverified))
                    for r in records])
    folds = stratified_kfold(y, k, seed)
    cms = []
    for t, fold in enumerate(folds):
        test_set = set(fold.tolist())
        train = [records[i] for i in range(len(records)) if i not in test_set]
        test = [records[i] for i in sorted(test_set)]
        cms.append(_evaluate_split(train, test, variant, unverified,
                                   baseline, n_range, seed, **hmm_kwargs))
        log.debug("veracity fold %d/%d done", t + 1, len(folds))
    return MetricsReport.from_folds(cms, labels=labels)


def protocol_transfer(train_records: list[SequenceRecord],
                      test_records: list[SequenceRecord],
                      variant: str = "lambda", unverified: str = "false",
                      seed: int = 0, baseline: bool = False, n_range=None,
                      **hmm_kwargs) -> MetricsReport:
    """Fit on one sequence set, evaluate on all of another."""
    if not train_records:
        raise DataError("missing training sequences")
    cm = _evaluate_split(train_records, test_records, variant, unverified,
                         baseline, n_range, seed, **hmm_kwargs)
    return MetricsReport.from_confusion(cm, labels=label_set(unverified))


def protocol_mix(first: list[SequenceRecord], second: list[SequenceRecord],
                 variant: str = "lambda", unverified: str = "false",
                 k: int = 3, seed: int = 0, baseline: bool = False,
                 n_range=None, **hmm_kwargs) -> MetricsReport:
    """Cross-validation over the union of two sequence sets."""
    return protocol_cv3(list(first) + list(second), variant=variant,
                        unverified=unverified, k=k, seed=seed,
                        baseline=baseline, n_range=n_range, **hmm_kwargs)


# ---------------------------------------------------------------------------
# Automatic stance labels for the end-to-end pipeline
# ---------------------------------------------------------------------------


TUNED_STANCE_SPEC = ModelSpec("svm", {"C": 10.0, "class_weight": "uniform"})
TUNED_STANCE_FEATURES = dict(lexicon=False, reddit=False, most_frequent=False,
                             variance_threshold=None)


def auto_label(dataset: Dataset, ctx: EncodingContext,
               spec: ModelSpec | None = None,
               fcfg: FeatureConfig | None = None,
               seed: int = 0) -> tuple[Dataset, MetricsReport]:
    """Replace gold stances on rumour posts with model predictions.

    Leave-one-submission-out: each rumour submission's posts are labeled
    by a stance model trained on every other submission's posts. Returns
    the relabeled dataset and the combined stance metrics over all rumour
    posts.
    """
    if spec is None:
        spec = dataclasses.replace(TUNED_STANCE_SPEC,
                                   params={**TUNED_STANCE_SPEC.params,
                                           "seed": seed})
    if fcfg is None:
        fcfg = FeatureConfig(**TUNED_STANCE_FEATURES)
    predicted: dict[str, int] = {}
    truths: list[int] = []
    preds: list[int] = []
    rumour_ids = [s.submission_id for s in dataset.submissions if s.is_rumour]
    for held in rumour_ids:
        train_posts = [p for s in dataset.submissions
                       if s.submission_id != held for p in s.unique_posts()]
        held_sub = next(s for s in dataset.submissions
                        if s.submission_id == held)
        test_posts = held_sub.unique_posts()
        y_train = encode_labels(train_posts)
        y_pred = _fit_predict(ctx, fcfg, spec, train_posts, y_train, test_posts)
        for post, label in zip(test_posts, y_pred):
            predicted[post.comment_id] = int(label)
            truths.append(post.sdqc_submission)
            preds.append(int(label))
        log.debug("auto-labeled %s (%d posts)", held, len(test_posts))

    relabeled = _apply_labels(dataset, predicted)
    report = MetricsReport.from_confusion(
        ConfusionMatrix.from_predictions(np.asarray(truths), np.asarray(preds)))
    return relabeled, report


def _apply_labels(dataset: Dataset, labels: dict[str, int]) -> Dataset:
    """Copy of the dataset with the given posts' stances replaced; post
    identity sharing across branches is preserved."""
    new_subs: list[Submission] = []
    for sub in dataset.submissions:
        if not any(p.comment_id in labels for p in sub.unique_posts()):
            new_subs.append(sub)
            continue
        copies = {}
        for p in sub.unique_posts():
            if p.comment_id in labels:
                copies[p.comment_id] = dataclasses.replace(
                    p, sdqc_submission=labels[p.comment_id])
            else:
                copies[p.comment_id] = p
        new_branches = [
            dataclasses.replace(b, posts=[copies[p.comment_id] for p in b.posts])
            for b in sub.branches
        ]
        new_subs.append(dataclasses.replace(sub, branches=new_branches))
    return Dataset(submissions=new_subs, norm_stats=dataset.norm_stats)
