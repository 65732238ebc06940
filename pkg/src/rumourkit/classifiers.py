"""Stance classifiers.

All models share one small interface: `fit(X, y)`, `predict(X)`, and a JSON
state round-trip through `save_model` / `load_model`. The linear models
(logistic regression and a linear hinge-loss machine) train one-vs-rest with
a deterministic full-batch descent, so a given (matrix, labels, params)
triple always produces the same weights. Tree models use entropy splits with
fixed tie-breaking. Serialized models remember the width and a digest of the
feature space they were trained in and refuse to predict in a different one.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

N_CLASSES = 4
FORMAT_VERSION = 1

# line-search knobs for the linear models
_MAX_HALVINGS = 30
_STEP_REGROWTH = 1.3


def _class_counts(y: np.ndarray) -> np.ndarray:
    return np.bincount(y, minlength=N_CLASSES)


def _sample_weights(y: np.ndarray, class_weight: str) -> np.ndarray:
    """Per-sample weights; 'balanced' gives each class equal total mass."""
    if class_weight == "uniform":
        return np.ones(len(y))
    if class_weight != "balanced":
        raise ConfigError(f"class_weight must be 'balanced' or 'uniform', got {class_weight!r}")
    counts = _class_counts(y)
    per_class = np.zeros(N_CLASSES)
    present = counts > 0
    per_class[present] = len(y) / (N_CLASSES * counts[present])
    return per_class[y]


class Model:
    """Interface shared by every classifier."""

    KIND = ""

    def fit(self, X: np.ndarray, y: np.ndarray) -> "Model":
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def to_state(self) -> dict:
        raise NotImplementedError

    def load_state(self, state: dict) -> None:
        raise NotImplementedError

    # set at fit time; the fingerprint is attached by callers that know the
    # feature space (see save_model)
    feature_width: int | None = None
    feature_fingerprint: str | None = None

    def _check_width(self, X: np.ndarray) -> None:
        if self.feature_width is not None and X.shape[1] != self.feature_width:
            raise DataError(
                f"model was trained on {self.feature_width} features, "
                f"got {X.shape[1]}")


# ---------------------------------------------------------------------------
# Linear one-vs-rest models
# ---------------------------------------------------------------------------


class _LinearModel(Model):
    """Shared machinery for the one-vs-rest linear models.

    Minimizes, summed over the four rest-vs-class problems,

        0.5 ||w_k||^2 + C * sum_i s_i * loss(y_ik * (x_i . w_k + b_k))

    with optional balanced sample weights. The reference solver is plain
    full-batch descent with an unregularized bias: one gradient per epoch, a
    backtracking line search that halves the step until the objective does
    not increase, and a modest step regrowth after every accepted epoch. Its
    objective history is non-increasing by construction. The hinge subclass
    replaces this with a dual coordinate solver by default (see LinearSVM).
    """

    def __init__(self, C: float = 1.0, class_weight: str = "balanced",
                 penalty: str = "l2", dual: bool | None = None,
                 max_epochs: int = 200, tol: float = 1e-4, seed: int = 0):
        if C <= 0:
            raise ConfigError(f"C must be positive, got {C}")
        if penalty == "l1":
            raise ConfigError("l1 regularization is not implemented; use l2")
        if penalty != "l2":
            raise ConfigError(f"unknown penalty {penalty!r}")
        if class_weight not in ("balanced", "uniform"):
            raise ConfigError(
                f"class_weight must be 'balanced' or 'uniform', got {class_weight!r}")
        self.C = float(C)
        self.class_weight = class_weight
        self.penalty = penalty
        self.dual = dual
        self.max_epochs = int(max_epochs)
        self.tol = float(tol)
        self.seed = int(seed)
        self.W: np.ndarray | None = None
        self.b: np.ndarray | None = None
        self.objective_history: list[float] = []

    # subclasses define the margin loss and its derivative
    def _loss(self, M: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _dloss(self, M: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fit(self, X: np.ndarray, y: np.ndarray) -> "_LinearModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        n, d = X.shape
        self.feature_width = d
        S = _sample_weights(y, self.class_weight)
        Y = np.full((n, N_CLASSES), -1.0)
        Y[np.arange(n), y] = 1.0
        CS = self.C * S[:, None]

        W = np.zeros((d, N_CLASSES))
        b = np.zeros(N_CLASSES)
        P = np.zeros((n, N_CLASSES))  # cached X @ W

        def objective(P_: np.ndarray, b_: np.ndarray, W_: np.ndarray) -> float:
            M = (P_ + b_) * Y
            return float(0.5 * np.sum(W_ * W_) + np.sum(CS * self._loss(M)))

        obj = objective(P, b, W)
        self.objective_history = [obj]
        step = 1.0
        for _ in range(self.max_epochs):
            M = (P + b) * Y
            G = CS * Y * self._dloss(M)  # d(objective)/d(score), n x K
            grad_W = W + X.T @ G
            grad_b = G.sum(axis=0)
            if math.sqrt(np.sum(grad_W * grad_W) + np.sum(grad_b * grad_b)) < 1e-12:
                break
            D = -grad_W
            XD = X @ D
            db = -grad_b
            accepted = None
            for _ in range(_MAX_HALVINGS):
                cand = objective(P + step * XD, b + step * db, W + step * D)
                if cand <= obj:
                    accepted = cand
                    break
                step *= 0.5
            if accepted is None:
                break  # no non-increasing step exists at this scale
            W += step * D
            b += step * db
            P += step * XD
            prev, obj = obj, accepted
            self.objective_history.append(obj)
            if prev - obj <= self.tol * max(1.0, abs(prev)):
                break
            step *= _STEP_REGROWTH
        self.W, self.b = W, b
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        if self.W is None:
            raise ConfigError("model is not fitted")
        self._check_width(X)
        return np.asarray(X, dtype=np.float64) @ self.W + self.b

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax takes the lowest class code on exact ties
        return np.argmax(self.decision_function(X), axis=1)

    def params(self) -> dict:
        return {
            "C": self.C, "class_weight": self.class_weight,
            "penalty": self.penalty, "dual": self.dual,
            "max_epochs": self.max_epochs, "tol": self.tol, "seed": self.seed,
        }

    def to_state(self) -> dict:
        if self.W is None:
            raise ConfigError("model is not fitted")
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    def load_state(self, state: dict) -> None:
        self.W = np.asarray(state["W"], dtype=np.float64)
        self.b = np.asarray(state["b"], dtype=np.float64)
        self.feature_width = self.W.shape[0]


class LogisticRegression(_LinearModel):
    KIND = "logistic"

    def _loss(self, M: np.ndarray) -> np.ndarray:
        # log(1 + exp(-m)), stable on both tails
        return np.where(M >= 0, np.log1p(np.exp(-np.abs(M))),
                        -M + np.log1p(np.exp(-np.abs(M))))

    def _dloss(self, M: np.ndarray) -> np.ndarray:
        # -sigmoid(-m)
        e = np.exp(-np.abs(M))
        return np.where(M >= 0, -e / (1.0 + e), -1.0 / (1.0 + e))


class LinearSVM(_LinearModel):
    """One-vs-rest linear hinge machine.

    By default (`dual` unset or True) each rest-vs-class problem is solved in
    the dual by coordinate ascent over the box 0 <= a_i <= C*s_i, sweeping
    samples in a seeded random order until the largest projected-gradient gap
    falls under `tol` (default 0.1, the customary gap threshold for dual
    coordinate solvers). The bias rides along as an extra always-one feature,
    so it is regularized on this path. `dual=False` selects the full-batch
    descent from the base class instead, with an unregularized bias and `tol`
    read as a relative objective decrease; pass a much smaller value there,
    and expect it to converge far too slowly for wide inputs.
    """

    KIND = "svm"

    def __init__(self, C: float = 1.0, class_weight: str = "balanced",
                 penalty: str = "l2", dual: bool | None = None,
                 max_epochs: int = 200, tol: float = 0.1, seed: int = 0):
        super().__init__(C=C, class_weight=class_weight, penalty=penalty,
                         dual=dual, max_epochs=max_epochs, tol=tol, seed=seed)

    def _loss(self, M: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, 1.0 - M)

    def _dloss(self, M: np.ndarray) -> np.ndarray:
        return np.where(M < 1.0, -1.0, 0.0)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LinearSVM":
        if self.dual is False:
            return super().fit(X, y)
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y)
        n, d = X.shape
        self.feature_width = d
        U = self.C * _sample_weights(y, self.class_weight)  # per-sample box caps
        Y = np.full((n, N_CLASSES), -1.0)
        Y[np.arange(n), y] = 1.0
        q = np.einsum("ij,ij->i", X, X) + 1.0  # squared row norms, bias included

        W = np.zeros((d, N_CLASSES))
        b = np.zeros(N_CLASSES)
        alpha = np.zeros((n, N_CLASSES))
        rng = np.random.default_rng(self.seed)

        def objective() -> float:
            M = (X @ W + b) * Y
            reg = 0.5 * (np.sum(W * W) + np.sum(b * b))
            return float(reg + np.sum(U[:, None] * np.maximum(0.0, 1.0 - M)))

        self.objective_history = [objective()]
        gap = math.inf
        for _ in range(self.max_epochs):
            gap = 0.0
            for k in range(N_CLASSES):
                yk = Y[:, k]
                wk = np.ascontiguousarray(W[:, k])
                ak = alpha[:, k]
                bk = b[k]
                pg_lo, pg_hi = 0.0, 0.0
                for i in rng.permutation(n):
                    g = yk[i] * (X[i] @ wk + bk) - 1.0
                    a = ak[i]
                    if a <= 0.0:
                        pg = min(g, 0.0)
                    elif a >= U[i]:
                        pg = max(g, 0.0)
                    else:
                        pg = g
                    pg_lo = min(pg_lo, pg)
                    pg_hi = max(pg_hi, pg)
                    if pg != 0.0:
                        a_new = min(max(a - g / q[i], 0.0), U[i])
                        delta = a_new - a
                        if delta != 0.0:
                            wk += (delta * yk[i]) * X[i]
                            bk += delta * yk[i]
                            ak[i] = a_new
                W[:, k] = wk
                b[k] = bk
                gap = max(gap, pg_hi - pg_lo)
            self.objective_history.append(objective())
            if gap < self.tol:
                break
        else:
            log.debug("dual solver hit the epoch cap with optimality gap %.3g", gap)
        self.W, self.b = W, b
        return self


# ---------------------------------------------------------------------------
# Entropy decision tree and forest
# ---------------------------------------------------------------------------


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _best_split(X: np.ndarray, y: np.ndarray, feature_ids: np.ndarray
                ) -> tuple[float, int, float]:
    """Highest-information-gain (gain, feature, threshold) over the given
    features; ties keep the earliest feature and the smallest threshold."""
    n = len(y)
    onehot = np.zeros((n, N_CLASSES))
    onehot[np.arange(n), y] = 1.0
    parent = _entropy(onehot.sum(axis=0))
    best = (0.0, -1, 0.0)
    for j in feature_ids:
        xs = X[:, j]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        cum = np.cumsum(onehot[order], axis=0)
        boundaries = np.nonzero(xs[:-1] < xs[1:])[0]
        if boundaries.size == 0:
            continue
        left = cum[boundaries]
        total = cum[-1]
        right = total - left
        nl = left.sum(axis=1)
        nr = n - nl
        with np.errstate(divide="ignore", invalid="ignore"):
            pl = left / nl[:, None]
            pr = right / nr[:, None]
            hl = -np.nansum(np.where(pl > 0, pl * np.log2(pl), 0.0), axis=1)
            hr = -np.nansum(np.where(pr > 0, pr * np.log2(pr), 0.0), axis=1)
        gains = parent - (nl / n) * hl - (nr / n) * hr
        k = int(np.argmax(gains))  # first (smallest threshold) on ties
        if gains[k] > best[0]:
            thr = float((xs[boundaries[k]] + xs[boundaries[k] + 1]) / 2.0)
            best = (float(gains[k]), int(j), thr)
    return best


class DecisionTree(Model):
    """Entropy decision tree with exhaustive threshold search.

    Leaves predict their majority class, lowest class code on ties. With
    `max_features` set, each split considers a random feature subset drawn
    from the tree's own generator, which is what the forest uses.
    """

    KIND = "tree"

    def __init__(self, max_depth: int | None = None, min_samples_split: int = 2,
                 max_features: str | None = None, seed: int = 0):
        if max_features not in (None, "sqrt"):
            raise ConfigError(f"max_features must be None or 'sqrt', got {max_features!r}")
        if min_samples_split < 2:
            raise ConfigError("min_samples_split must be at least 2")
        self.max_depth = max_depth
        self.min_samples_split = int(min_samples_split)
        self.max_features = max_features
        self.seed = int(seed)
        self.root: dict | None = None

    def _leaf(self, y: np.ndarray) -> dict:
        counts = _class_counts(y)
        return {"label": int(np.argmax(counts))}

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        X = np.asarray(X)
        y = np.asarray(y)
        self.feature_width = X.shape[1]
        d = X.shape[1]
        rng = np.random.default_rng(self.seed)
        if self.max_features == "sqrt":
            m = max(1, math.isqrt(d) + (0 if math.isqrt(d) ** 2 == d else 1))
        else:
            m = d

        self.root = {}
        stack = [(self.root, np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            y_node = y[idx]
            counts = _class_counts(y_node)
            if (np.count_nonzero(counts) <= 1
                    or len(idx) < self.min_samples_split
                    or (self.max_depth is not None and depth >= self.max_depth)):
                node.update(self._leaf(y_node))
                continue
            if m < d:
                feats = np.sort(rng.choice(d, size=m, replace=False))
            else:
                feats = np.arange(d)
            gain, feature, threshold = _best_split(X[idx], y_node, feats)
            if feature < 0 or gain <= 1e-12:
                node.update(self._leaf(y_node))
                continue
            mask = X[idx, feature] <= threshold
            left: dict = {}
            right: dict = {}
            node.update({"f": feature, "t": threshold, "l": left, "r": right})
            stack.append((right, idx[~mask], depth + 1))
            stack.append((left, idx[mask], depth + 1))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.root is None:
            raise ConfigError("model is not fitted")
        self._check_width(X)
        X = np.asarray(X)
        out = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(X):
            node = self.root
            while "label" not in node:
                node = node["l"] if row[node["f"]] <= node["t"] else node["r"]
            out[i] = node["label"]
        return out

    def params(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "max_features": self.max_features,
            "seed": self.seed,
        }

    def to_state(self) -> dict:
        if self.root is None:
            raise ConfigError("model is not fitted")
        return {"root": self.root, "feature_width": self.feature_width}

    def load_state(self, state: dict) -> None:
        self.root = state["root"]
        self.feature_width = state.get("feature_width")


class RandomForest(Model):
    """Bootstrap ensemble of entropy trees voting by majority.

    Tree t uses `seed + t` for both its bootstrap draw and its per-split
    feature subsets, so the forest is reproducible tree by tree. Vote ties
    go to the lowest class code.
    """

    KIND = "forest"

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_split: int = 2, max_features: str | None = "sqrt",
                 bootstrap: bool = True, seed: int = 0):
        if n_trees < 1:
            raise ConfigError("n_trees must be at least 1")
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.min_samples_split = int(min_samples_split)
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.seed = int(seed)
        self.trees: list[DecisionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        X = np.asarray(X)
        y = np.asarray(y)
        self.feature_width = X.shape[1]
        n = len(y)
        self.trees = []
        for t in range(self.n_trees):
            tree = DecisionTree(
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                max_features=self.max_features,
                seed=self.seed + t,
            )
            if self.bootstrap:
                idx = np.random.default_rng(self.seed + t).integers(0, n, size=n)
                tree.fit(X[idx], y[idx])
            else:
                tree.fit(X, y)
            self.trees.append(tree)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise ConfigError("model is not fitted")
        self._check_width(X)
        votes = np.zeros((len(X), N_CLASSES), dtype=np.int64)
        for tree in self.trees:
            votes[np.arange(len(X)), tree.predict(X)] += 1
        return np.argmax(votes, axis=1)

    def params(self) -> dict:
        return {
            "n_trees": self.n_trees, "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap, "seed": self.seed,
        }

    def to_state(self) -> dict:
        return {
            "feature_width": self.feature_width,
            "trees": [t.to_state() for t in self.trees],
        }

    def load_state(self, state: dict) -> None:
        self.trees = []
        for tree_state in state["trees"]:
            tree = DecisionTree(max_depth=self.max_depth,
                                min_samples_split=self.min_samples_split,
                                max_features=self.max_features)
            tree.load_state(tree_state)
            self.trees.append(tree)
        self.feature_width = state.get("feature_width")


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


class MajorityClass(Model):
    """Predicts the most frequent training class for everything."""

    KIND = "majority"

    def __init__(self):
        self.label: int | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "MajorityClass":
        self.feature_width = X.shape[1] if X.ndim == 2 else None
        self.label = int(np.argmax(_class_counts(np.asarray(y))))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.label is None:
            raise ConfigError("model is not fitted")
        return np.full(len(X), self.label, dtype=np.int64)

    def to_state(self) -> dict:
        return {"label": self.label, "feature_width": self.feature_width}

    def load_state(self, state: dict) -> None:
        self.label = state["label"]
        self.feature_width = state.get("feature_width")


class StratifiedRandom(Model):
    """Draws predictions from the training class distribution."""

    KIND = "stratified"

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.distribution: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "StratifiedRandom":
        self.feature_width = X.shape[1] if X.ndim == 2 else None
        counts = _class_counts(np.asarray(y))
        self.distribution = counts / counts.sum()
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.distribution is None:
            raise ConfigError("model is not fitted")
        rng = np.random.default_rng(self.seed)
        return rng.choice(N_CLASSES, size=len(X), p=self.distribution)

    def params(self) -> dict:
        return {"seed": self.seed}

    def to_state(self) -> dict:
        return {"distribution": self.distribution.tolist(),
                "feature_width": self.feature_width}

    def load_state(self, state: dict) -> None:
        self.distribution = np.asarray(state["distribution"])
        self.feature_width = state.get("feature_width")


# ---------------------------------------------------------------------------
# Factory and serialization
# ---------------------------------------------------------------------------

MODEL_KINDS = {
    cls.KIND: cls
    for cls in (LogisticRegression, LinearSVM, DecisionTree, RandomForest,
                MajorityClass, StratifiedRandom)
}


def make_classifier(kind: str, **params) -> Model:
    cls = MODEL_KINDS.get(kind)
    if cls is None:
        raise ConfigError(
            f"unknown classifier {kind!r}, expected one of {sorted(MODEL_KINDS)}")
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind!r}: {exc}") from exc


def save_model(model: Model, path: str | Path,
               feature_fingerprint: str | None = None) -> None:
    if feature_fingerprint is not None:
        model.feature_fingerprint = feature_fingerprint
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": model.KIND,
        "params": model.params(),
        "feature_width": model.feature_width,
        "feature_fingerprint": model.feature_fingerprint,
        "state": model.to_state(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")
    log.debug("saved %s model to %s", model.KIND, path)


def load_model(path: str | Path) -> Model:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid model file: {exc}") from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported model format version {version!r}")
    kind = payload.get("kind")
    if kind not in MODEL_KINDS:
        raise DataError(f"{path}: unknown model kind {kind!r}")
    model = make_classifier(kind, **payload.get("params", {}))
    model.load_state(payload["state"])
    if payload.get("feature_width") is not None:
        model.feature_width = payload["feature_width"]
    model.feature_fingerprint = payload.get("feature_fingerprint")
    return model


def ensure_compatible(model: Model, width: int, fingerprint: str | None) -> None:
    """Refuse to apply a model to a feature space it was not trained in."""
    if model.feature_width is not None and model.feature_width != width:
        raise DataError(
            f"model expects {model.feature_width} features, feature space has {width}")
    if (model.feature_fingerprint is not None and fingerprint is not None
            and model.feature_fingerprint != fingerprint):
        raise DataError("model feature fingerprint does not match this feature space")
