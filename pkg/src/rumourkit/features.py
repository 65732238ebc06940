"""Feature extraction for stance classification.

A post is encoded as a fixed-order concatenation of eight segments:

    text(13) | lexicon(4) | sentiment(1) | reddit(10) | most_frequent(132)
    | bow(|vocabulary|) | pos(17) | embeddings(303)

The bag-of-words vocabulary and the per-class most-frequent-word lists are
fitted on training posts only, so the total width depends on the training
split; fitted on the full bundled corpus it is 14,143. Scalar features are
min-max normalized with dataset-level statistics collected at load time and
clamped to [0, 1] at encoding time; count-valued word features are scaled by
their training-split maximum. Embedding dimensions are passed through
untouched and are exempt from variance-based removal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .corpus import QUOTE_TOKEN, URL_TOKEN, Dataset, Post
from .errors import ConfigError
from .resources import POS_TAGS, ResourceBundle

SEGMENTS = ("text", "lexicon", "sentiment", "reddit", "most_frequent",
            "bow", "pos", "embeddings")

TEXT_FEATURES = (
    "has_period", "has_exclamation", "asks_question", "has_ellipsis",
    "url_count", "question_count", "exclamation_count", "ellipsis_count",
    "char_length", "word_count", "avg_word_length", "capital_ratio",
    "max_capital_run",
)
LEXICON_FEATURES = ("positive_smileys", "negative_smileys", "negation_words", "swear_words")
REDDIT_FEATURES = (
    "user_karma", "user_gold", "user_is_employee", "user_verified_email",
    "upvotes", "is_submitter", "reply_count", "sarcasm_marker",
    "edit_marker", "quote_count",
)

# scalar features that get dataset-level min-max normalization
NORMALIZED_SCALARS = frozenset({
    "url_count", "question_count", "exclamation_count", "ellipsis_count",
    "char_length", "word_count", "avg_word_length", "capital_ratio",
    "max_capital_run",
    "positive_smileys", "negative_smileys", "negation_words", "swear_words",
    "sentiment",
    "user_karma", "upvotes", "reply_count", "quote_count",
})

EMBEDDING_DIM = 300
EMBEDDING_WIDTH = EMBEDDING_DIM + 3  # mean vector + parent/source/branch cosines

# layout of the vocabulary-independent row cached per post
_N_TEXT = len(TEXT_FEATURES)
_N_LEX = len(LEXICON_FEATURES)
_N_REDDIT = len(REDDIT_FEATURES)
_N_SCALAR = _N_TEXT + _N_LEX + 1 + _N_REDDIT
_POS_SLICE = slice(_N_SCALAR, _N_SCALAR + len(POS_TAGS))
_EMB_SLICE = slice(_N_SCALAR + len(POS_TAGS), _N_SCALAR + len(POS_TAGS) + EMBEDDING_WIDTH)
STATIC_WIDTH = _N_SCALAR + len(POS_TAGS) + EMBEDDING_WIDTH


@dataclass(frozen=True)
class NormalizationStats:
    """Dataset-level [min, max] ranges for scalar features."""

    ranges: dict[str, tuple[float, float]]

    def scale(self, name: str, value: float) -> float:
        lo, hi = self.ranges[name]
        if hi <= lo:
            return 0.0
        x = (value - lo) / (hi - lo)
        # values outside the collection range clamp to the unit interval
        return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class FeatureConfig:
    text: bool = True
    lexicon: bool = True
    sentiment: bool = True
    reddit: bool = True
    most_frequent: bool = True
    bow: bool = True
    pos: bool = True
    embeddings: bool = True
    variance_threshold: float | None = 0.001

    def __post_init__(self):
        if self.variance_threshold is not None and self.variance_threshold < 0:
            raise ConfigError("variance threshold must be >= 0")

    def enabled_segments(self) -> tuple[str, ...]:
        return tuple(s for s in SEGMENTS if getattr(self, s))

    def without(self, segment: str) -> "FeatureConfig":
        if segment not in SEGMENTS:
            raise ConfigError(f"unknown feature segment: {segment!r}")
        return replace(self, **{segment: False})


# ---------------------------------------------------------------------------
# Raw per-post measurements
# ---------------------------------------------------------------------------


def _max_capital_run(raw: str) -> int:
    best = run = 0
    for ch in raw:
        if ch.isalpha() and ch.isupper():
            run += 1
            if run > best:
                best = run
        else:
            run = 0
    return best


def _capital_ratio(raw: str) -> float:
    letters = upper = 0
    for ch in raw:
        if ch.isalpha():
            letters += 1
            if ch.isupper():
                upper += 1
    return upper / letters if letters else 0.0


def text_measurements(post: Post) -> dict[str, float]:
    raw = post.raw_text
    tokens = post.tokens
    n_words = len(tokens)
    asks = "?" in raw or any(t.startswith("hv") for t in tokens)
    return {
        "has_period": 1.0 if "." in raw else 0.0,
        "has_exclamation": 1.0 if "!" in raw else 0.0,
        "asks_question": 1.0 if asks else 0.0,
        "has_ellipsis": 1.0 if "..." in raw else 0.0,
        "url_count": float(tokens.count(URL_TOKEN)),
        "question_count": float(raw.count("?")),
        "exclamation_count": float(raw.count("!")),
        "ellipsis_count": float(raw.count("...")),
        "char_length": float(len(raw)),
        "word_count": float(n_words),
        "avg_word_length": (sum(len(t) for t in tokens) / n_words) if n_words else 0.0,
        "capital_ratio": _capital_ratio(raw),
        "max_capital_run": float(_max_capital_run(raw)),
    }


def _entry_set(resources: ResourceBundle, kind: str) -> set[str]:
    wl = resources.wordlist(kind)
    return wl.entry_set if wl is not None else set()


def lexicon_measurements(post: Post, resources: ResourceBundle) -> dict[str, float]:
    # smileys are surface chunks of the raw text; word lists match tokens
    chunks = post.raw_text.lower().split()
    pos_set = _entry_set(resources, "positive_smiley")
    neg_set = _entry_set(resources, "negative_smiley")
    neg_words = _entry_set(resources, "negation")
    swear = _entry_set(resources, "swear")
    return {
        "positive_smileys": float(sum(1 for c in chunks if c in pos_set)),
        "negative_smileys": float(sum(1 for c in chunks if c in neg_set)),
        "negation_words": float(sum(1 for t in post.tokens if t in neg_words)),
        "swear_words": float(sum(1 for t in post.tokens if t in swear)),
    }


def sentiment_measurement(post: Post, resources: ResourceBundle) -> float:
    table = resources.sentiment
    return float(sum(table.get(t, 0.0) for t in post.tokens))


def reddit_measurements(post: Post) -> dict[str, float]:
    user = post.user
    chunks = post.raw_text.lower().split()
    return {
        "user_karma": float(user.karma),
        "user_gold": 1.0 if user.gold_status else 0.0,
        "user_is_employee": 1.0 if user.is_employee else 0.0,
        "user_verified_email": 1.0 if user.has_verified_email else 0.0,
        "upvotes": float(post.upvotes),
        "is_submitter": 1.0 if post.is_submitter else 0.0,
        "reply_count": float(post.reply_count),
        "sarcasm_marker": 1.0 if "/s" in chunks else 0.0,
        "edit_marker": 1.0 if any(c.startswith("edit:") for c in chunks) else 0.0,
        "quote_count": float(post.tokens.count(QUOTE_TOKEN)),
    }


def compute_normalization(dataset: Dataset, resources: ResourceBundle) -> NormalizationStats:
    """Collect min-max ranges for every scalar feature over the whole dataset."""
    lows: dict[str, float] = {}
    highs: dict[str, float] = {}

    def see(name: str, value: float) -> None:
        if name not in lows or value < lows[name]:
            lows[name] = value
        if name not in highs or value > highs[name]:
            highs[name] = value

    for post in dataset.posts():
        for name, v in text_measurements(post).items():
            if name in NORMALIZED_SCALARS:
                see(name, v)
        for name, v in lexicon_measurements(post, resources).items():
            see(name, v)
        see("sentiment", sentiment_measurement(post, resources))
        for name, v in reddit_measurements(post).items():
            if name in NORMALIZED_SCALARS:
                see(name, v)
    return NormalizationStats(ranges={k: (lows[k], highs[k]) for k in lows})


# ---------------------------------------------------------------------------
# Most frequent words per stance class
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MostFrequentWords:
    """Concatenated per-class frequent-word lists with shared words removed.

    `words` keeps the concatenation order (classes 0..3). Only words frequent
    for all four classes are dropped, so a word frequent for two or three
    classes appears once per such class.
    """

    words: tuple[str, ...]
    per_class: tuple[tuple[str, ...], ...]


def build_mfw(posts: list[Post], top_n: int = 100) -> MostFrequentWords:
    counts: list[dict[str, int]] = [{}, {}, {}, {}]
    for post in posts:
        d = counts[post.sdqc_submission]
        for t in post.tokens:
            d[t] = d.get(t, 0) + 1
    tops: list[list[str]] = []
    for klass in range(4):
        ranked = sorted(counts[klass].items(), key=lambda kv: (-kv[1], kv[0]))
        tops.append([w for w, _ in ranked[:top_n]])
    shared = set(tops[0])
    for top in tops[1:]:
        shared &= set(top)
    per_class = tuple(tuple(w for w in top if w not in shared) for top in tops)
    words = tuple(w for top in per_class for w in top)
    return MostFrequentWords(words=words, per_class=per_class)


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------


def mean_vector(tokens: list[str], resources: ResourceBundle) -> np.ndarray:
    """Average vector of the tokens found in the table; zeros when none are."""
    acc = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    table = resources.vectors
    if table is None:
        return acc
    hit = 0
    for t in tokens:
        vec = table.get(t)
        if vec is not None:
            acc += vec
            hit += 1
    if hit:
        acc /= hit
    return acc


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class _EmbeddingContext:
    """Mean vectors plus conversational cosines, computed once per dataset.

    Each post gets three context cosines: against its parent (the preceding
    post in the branch, or the submission text for top-level comments),
    against the submission text, and against the mean of its first containing
    branch.
    """

    def __init__(self, dataset: Dataset, resources: ResourceBundle):
        self.resources = resources
        self.post_mean: dict[str, np.ndarray] = {}
        self.context: dict[str, np.ndarray] = {}
        for sub in dataset.submissions:
            source_vec = mean_vector(sub.tokens, resources)
            for branch in sub.branches:
                for post in branch.posts:
                    if post.comment_id not in self.post_mean:
                        self.post_mean[post.comment_id] = mean_vector(
                            post.tokens, resources)
                branch_vec = np.mean(
                    [self.post_mean[p.comment_id] for p in branch.posts], axis=0)
                for i, post in enumerate(branch.posts):
                    if post.comment_id in self.context:
                        continue
                    parent_vec = (source_vec if i == 0
                                  else self.post_mean[branch.posts[i - 1].comment_id])
                    mean = self.post_mean[post.comment_id]
                    self.context[post.comment_id] = np.array([
                        cosine(mean, parent_vec),
                        cosine(mean, source_vec),
                        cosine(mean, branch_vec),
                    ])

    def encode(self, post: Post) -> np.ndarray:
        key = post.comment_id
        if key in self.post_mean:
            return np.concatenate(
                [self.post_mean[key], self.context.get(key, np.zeros(3))])
        # synthetic copies embed their own tokens but keep the origin's context
        origin = post.synthetic_of
        if origin is not None and origin in self.context:
            return np.concatenate(
                [mean_vector(post.tokens, self.resources), self.context[origin]])
        return np.zeros(EMBEDDING_WIDTH)


# ---------------------------------------------------------------------------
# Dataset-level encoding state shared across folds
# ---------------------------------------------------------------------------


class EncodingContext:
    """Everything about encoding that does not depend on the training split.

    Holds the scalar normalization ranges, the embedding context, and a cache
    of the vocabulary-independent part of each post's row (scalars, POS tags,
    embeddings). One instance serves every fold and every segment subset.
    """

    def __init__(self, dataset: Dataset, resources: ResourceBundle,
                 stats: NormalizationStats | None = None):
        self.dataset = dataset
        self.resources = resources
        if stats is None:
            stats = getattr(dataset, "norm_stats", None)
        if stats is None:
            stats = compute_normalization(dataset, resources)
        self.stats = stats
        self._embed: _EmbeddingContext | None = None
        self._rows: dict[str, np.ndarray] = {}

    def _pos_row(self, post: Post) -> np.ndarray:
        row = np.zeros(len(POS_TAGS))
        table = self.resources.pos_tags
        if table is None:
            return row
        tags = table.get(post.comment_id)
        if tags is None and post.synthetic_of is not None:
            tags = table.get(post.synthetic_of)
        if tags:
            for t in tags:
                row[POS_TAGS.index(t)] = 1.0
        return row

    def static_row(self, post: Post) -> np.ndarray:
        cached = self._rows.get(post.comment_id)
        if cached is not None:
            return cached
        stats = self.stats
        row = np.empty(STATIC_WIDTH, dtype=np.float64)
        m = text_measurements(post)
        for i, name in enumerate(TEXT_FEATURES):
            v = m[name]
            row[i] = stats.scale(name, v) if name in NORMALIZED_SCALARS else v
        m = lexicon_measurements(post, self.resources)
        for i, name in enumerate(LEXICON_FEATURES):
            row[_N_TEXT + i] = stats.scale(name, m[name])
        row[_N_TEXT + _N_LEX] = stats.scale(
            "sentiment", sentiment_measurement(post, self.resources))
        m = reddit_measurements(post)
        for i, name in enumerate(REDDIT_FEATURES):
            v = m[name]
            row[_N_TEXT + _N_LEX + 1 + i] = (
                stats.scale(name, v) if name in NORMALIZED_SCALARS else v)
        row[_POS_SLICE] = self._pos_row(post)
        if self._embed is None:
            self._embed = _EmbeddingContext(self.dataset, self.resources)
        row[_EMB_SLICE] = self._embed.encode(post)
        self._rows[post.comment_id] = row
        return row


# ---------------------------------------------------------------------------
# The fitted feature space
# ---------------------------------------------------------------------------


class FeatureSpace:
    """Feature encoder fitted on a training split.

    The vocabulary, frequent-word lists, count scaling, and the low-variance
    removal mask come from the training posts; everything split-independent
    comes from the shared context. After `fit`, `transform` maps any post
    list to a float32 matrix.
    """

    def __init__(self, ctx: EncodingContext, config: FeatureConfig | None = None):
        self.ctx = ctx
        self.config = config if config is not None else FeatureConfig()
        self.vocabulary: dict[str, int] = {}
        self.mfw: MostFrequentWords | None = None
        self.mfw_scale: np.ndarray | None = None
        self.bow_scale: np.ndarray | None = None
        self.names: list[str] = []
        self.keep_mask: np.ndarray | None = None

    # -- fitting ------------------------------------------------------------

    def fit(self, train_posts: list[Post]) -> "FeatureSpace":
        cfg = self.config
        if cfg.bow:
            seen: set[str] = set()
            for post in train_posts:
                seen.update(post.tokens)
            self.vocabulary = {w: i for i, w in enumerate(sorted(seen))}
        if cfg.most_frequent:
            self.mfw = build_mfw(train_posts)
        self._build_names()

        X = self._encode_raw(train_posts, fitting=True)
        if cfg.variance_threshold is not None:
            self.keep_mask = variance_select(
                X, cfg.variance_threshold, protected=self._protected_mask())
        else:
            self.keep_mask = np.ones(X.shape[1], dtype=bool)
        return self

    def _build_names(self) -> None:
        cfg = self.config
        names: list[str] = []
        if cfg.text:
            names += [f"text:{n}" for n in TEXT_FEATURES]
        if cfg.lexicon:
            names += [f"lexicon:{n}" for n in LEXICON_FEATURES]
        if cfg.sentiment:
            names.append("sentiment:valence")
        if cfg.reddit:
            names += [f"reddit:{n}" for n in REDDIT_FEATURES]
        if cfg.most_frequent and self.mfw is not None:
            names += [f"mfw:{i}:{w}" for i, w in enumerate(self.mfw.words)]
        if cfg.bow:
            ordered = sorted(self.vocabulary, key=self.vocabulary.get)
            names += [f"bow:{w}" for w in ordered]
        if cfg.pos:
            names += [f"pos:{t}" for t in POS_TAGS]
        if cfg.embeddings:
            names += [f"embed:mean{i}" for i in range(EMBEDDING_DIM)]
            names += ["embed:cos_parent", "embed:cos_source", "embed:cos_branch"]
        self.names = names

    def _protected_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.names), dtype=bool)
        if self.config.embeddings:
            mask[-EMBEDDING_WIDTH:] = True
        return mask

    # -- encoding -----------------------------------------------------------

    def _layout(self) -> tuple[list[int], list[int], int, int]:
        """Static-row column picks plus (mfw, bow) widths for this config."""
        cfg = self.config
        head: list[int] = []
        if cfg.text:
            head.extend(range(0, _N_TEXT))
        if cfg.lexicon:
            head.extend(range(_N_TEXT, _N_TEXT + _N_LEX))
        if cfg.sentiment:
            head.append(_N_TEXT + _N_LEX)
        if cfg.reddit:
            head.extend(range(_N_TEXT + _N_LEX + 1, _N_SCALAR))
        tail: list[int] = []
        if cfg.pos:
            tail.extend(range(_POS_SLICE.start, _POS_SLICE.stop))
        if cfg.embeddings:
            tail.extend(range(_EMB_SLICE.start, _EMB_SLICE.stop))
        n_mfw = len(self.mfw.words) if (cfg.most_frequent and self.mfw) else 0
        n_bow = len(self.vocabulary) if cfg.bow else 0
        return head, tail, n_mfw, n_bow

    def _encode_raw(self, posts: list[Post], fitting: bool) -> np.ndarray:
        head, tail, n_mfw, n_bow = self._layout()
        n_head = len(head)
        width = n_head + n_mfw + n_bow + len(tail)
        if width != len(self.names):
            raise ConfigError("feature layout does not match fitted names")
        X = np.zeros((len(posts), width), dtype=np.float32)
        tail_off = n_head + n_mfw + n_bow

        mfw_index: dict[str, list[int]] = {}
        if n_mfw:
            for i, w in enumerate(self.mfw.words):
                mfw_index.setdefault(w, []).append(i)

        for r, post in enumerate(posts):
            static = self.ctx.static_row(post)
            if n_head:
                X[r, :n_head] = static[head]
            if tail:
                X[r, tail_off:] = static[tail]
            if n_mfw or n_bow:
                tok_counts: dict[str, int] = {}
                for t in post.tokens:
                    tok_counts[t] = tok_counts.get(t, 0) + 1
                for w, c in tok_counts.items():
                    if n_mfw:
                        for i in mfw_index.get(w, ()):
                            X[r, n_head + i] = c
                    if n_bow:
                        j = self.vocabulary.get(w)
                        if j is not None:
                            X[r, n_head + n_mfw + j] = c

        # count features scale by the training maximum and clamp to [0, 1]
        if n_mfw:
            sl = slice(n_head, n_head + n_mfw)
            if fitting:
                self.mfw_scale = np.maximum(X[:, sl].max(axis=0), 1.0)
            X[:, sl] = np.clip(X[:, sl] / self.mfw_scale, 0.0, 1.0)
        if n_bow:
            sl = slice(n_head + n_mfw, n_head + n_mfw + n_bow)
            if fitting:
                self.bow_scale = np.maximum(X[:, sl].max(axis=0), 1.0)
            X[:, sl] = np.clip(X[:, sl] / self.bow_scale, 0.0, 1.0)
        return X

    def transform(self, posts: list[Post]) -> np.ndarray:
        if self.keep_mask is None:
            raise ConfigError("feature space is not fitted")
        X = self._encode_raw(posts, fitting=False)
        return X[:, self.keep_mask]

    def kept_names(self) -> list[str]:
        if self.keep_mask is None:
            raise ConfigError("feature space is not fitted")
        return [n for n, keep in zip(self.names, self.keep_mask) if keep]

    def width(self) -> int:
        if self.keep_mask is None:
            raise ConfigError("feature space is not fitted")
        return int(self.keep_mask.sum())

    def segment_widths(self) -> dict[str, int]:
        """Kept dimensions per segment, in segment order."""
        out = {s: 0 for s in self.config.enabled_segments()}
        for name in self.kept_names():
            seg = name.split(":", 1)[0]
            if seg == "embed":
                seg = "embeddings"
            elif seg == "mfw":
                seg = "most_frequent"
            out[seg] += 1
        return out


def variance_select(X: np.ndarray, threshold: float,
                    protected: np.ndarray | None = None) -> np.ndarray:
    """Boolean keep-mask for columns whose population variance strictly
    exceeds `threshold`; protected columns are always kept."""
    if threshold < 0:
        raise ConfigError("variance threshold must be >= 0")
    var = X.var(axis=0, dtype=np.float64)
    mask = var > threshold
    if protected is not None:
        mask = mask | protected
    return mask


def encode_labels(posts: list[Post]) -> np.ndarray:
    return np.asarray([p.sdqc_submission for p in posts], dtype=np.int64)


def feature_fingerprint(names: list[str]) -> str:
    """Digest of the kept feature names, stored with serialized models so a
    model is never applied to a differently laid-out feature space."""
    import hashlib

    return hashlib.sha256("\n".join(names).encode("utf-8")).hexdigest()
