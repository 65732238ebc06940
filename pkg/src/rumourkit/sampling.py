"""Class-balance manipulation for stance training.

Two complementary moves: dropping reply branches that carry nothing but
commenting labels, and cloning minority-stance posts with a fraction of
their words swapped for dictionary synonyms. Synthetic posts keep a back
reference to their source so cross-validation can keep each pair together
(or keep synthetics out of test folds entirely).
"""

from __future__ import annotations

import dataclasses
import logging
import re
import zlib

import numpy as np

from .corpus import Dataset, Post, QUOTE_TOKEN, URL_TOKEN
from .errors import DataError
from .evaluation import ConfusionMatrix, MetricsReport, ModelSpec, _fit_predict, stratified_kfold
from .features import EncodingContext, FeatureConfig

log = logging.getLogger(__name__)

MARKER_TOKENS = frozenset({URL_TOKEN, QUOTE_TOKEN})
SYNTHETIC_SUFFIX = "-syn"

PLACEMENTS = ("co_located", "train_only")


def sub_sample(dataset: Dataset) -> Dataset:
    """Drop every branch whose posts are all Commenting toward the source.

    Branches with at least one S/D/Q post survive untouched, so the minority
    class counts cannot change. Submissions left with no branches disappear.
    Normalization statistics ride along from the input dataset: the feature
    scales stay those of the full corpus.
    """
    subs = []
    for sub in dataset.submissions:
        kept = [b for b in sub.branches
                if any(p.sdqc_submission != 3 for p in b.posts)]
        if kept:
            subs.append(dataclasses.replace(sub, branches=kept))
    out = Dataset(submissions=subs, norm_stats=dataset.norm_stats)
    log.info("sub-sample: %d -> %d posts", len(dataset.posts()), len(out.posts()))
    return out


def _match_case(surface: str, replacement: str) -> str:
    if surface.isupper() and len(surface) > 1:
        return replacement.upper()
    if surface[:1].isupper():
        return replacement.capitalize()
    return replacement


def _rewrite_raw(raw: str, queues: dict[str, list[str]]) -> str:
    """Swap word occurrences in the display text, preserving case shape.

    `queues` maps a lowercase token to its replacements in occurrence order;
    surface matches beyond the queued count are left alone.
    """
    if not queues:
        return raw
    pattern = re.compile(
        r"\b(" + "|".join(re.escape(w) for w in sorted(queues, key=len, reverse=True)) + r")\b",
        re.IGNORECASE,
    )

    def swap(match: re.Match) -> str:
        queue = queues.get(match.group(0).lower())
        if not queue:
            return match.group(0)
        return _match_case(match.group(0), queue.pop(0))

    return pattern.sub(swap, raw)


def _post_rng(seed: int, comment_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(comment_id.encode("utf-8"))])


def super_sample(train_posts: list[Post], synonyms: dict[str, list[str]],
                 replace_fraction: float = 0.375, seed: int = 0) -> list[Post]:
    """Augment a training split with synonym-substituted minority clones.

    Every S/D/Q post whose dictionary-covered share of tokens reaches
    `replace_fraction` gains one synthetic twin: covered occurrences are
    replaced by a uniformly drawn synonym, the display text is rewritten to
    match, and the clone records its source id. Posts below the threshold,
    and all Commenting posts, pass through unchanged. Originals are never
    mutated; the result is the input list plus the clones.
    """
    if not synonyms:
        log.warning("empty synonym dictionary: no candidates can pass")
        return list(train_posts)
    out = list(train_posts)
    made = 0
    for post in train_posts:
        if post.sdqc_submission == 3 or not post.tokens:
            continue
        covered = [t for t in post.tokens if t in synonyms and t not in MARKER_TOKENS]
        if len(covered) / len(post.tokens) < replace_fraction:
            continue
        rng = _post_rng(seed, post.comment_id)
        new_tokens: list[str] = []
        queues: dict[str, list[str]] = {}
        for tok in post.tokens:
            if tok in synonyms and tok not in MARKER_TOKENS:
                options = synonyms[tok]
                pick = options[int(rng.integers(0, len(options)))]
                new_tokens.append(pick)
                queues.setdefault(tok, []).append(pick)
            else:
                new_tokens.append(tok)
        clone = dataclasses.replace(
            post,
            comment_id=post.comment_id + SYNTHETIC_SUFFIX,
            raw_text=_rewrite_raw(post.raw_text, queues),
            tokens=new_tokens,
            synthetic_of=post.comment_id,
        )
        out.append(clone)
        made += 1
    log.info("super-sample: %d posts pass the %.1f%% gate", made, 100 * replace_fraction)
    return out


def pair_constraint(folds: list[list[str]], pairs: list[tuple[str, str]],
                    placement: str = "co_located") -> list[list[str]]:
    """Validate fold placement of original/synthetic pairs.

    In `co_located` placement both members of a pair must sit in the same
    fold. In `train_only` placement no synthetic id may appear in any fold
    (folds enumerate test memberships; synthetics live on the training side
    of every split). Returns the folds unchanged when valid.
    """
    if placement not in PLACEMENTS:
        raise DataError(f"placement must be one of {PLACEMENTS}, got {placement!r}")
    where = {pid: i for i, fold in enumerate(folds) for pid in fold}
    for orig, syn in pairs:
        if placement == "co_located":
            if where.get(orig) != where.get(syn):
                raise DataError(
                    f"pair ({orig}, {syn}) split across folds "
                    f"{where.get(orig)} and {where.get(syn)}")
        else:
            if syn in where:
                raise DataError(
                    f"synthetic {syn} (of {orig}) placed in test fold {where[syn]}")
    return folds


def cross_validate_pairs(posts: list[Post], y: np.ndarray, ctx: EncodingContext,
                         fcfg: FeatureConfig, spec: ModelSpec, k: int = 5,
                         seed: int = 0, placement: str = "co_located") -> MetricsReport:
    """k-fold CV over an augmented post list honouring pair placement.

    With `co_located` placement folds are stratified over the original
    posts and each synthetic joins its source's fold, so a pair is always
    entirely inside or entirely outside the training split. With
    `train_only` placement every augmented pair, source and clone alike,
    lives on the training side of every split; folds are stratified over
    the posts that were never augmented, and those make up the test sets.
    """
    if placement not in PLACEMENTS:
        raise DataError(f"placement must be one of {PLACEMENTS}, got {placement!r}")
    y = np.asarray(y)
    children: dict[str, list[int]] = {}
    for i, p in enumerate(posts):
        if p.synthetic_of is not None:
            children.setdefault(p.synthetic_of, []).append(i)

    if placement == "co_located":
        base = [i for i, p in enumerate(posts) if p.synthetic_of is None]
    else:
        base = [i for i, p in enumerate(posts)
                if p.synthetic_of is None and p.comment_id not in children]
    base_folds = stratified_kfold(y[base], k, seed)
    fold_indices: list[np.ndarray] = []
    for fold in base_folds:
        idx = [base[j] for j in fold]
        if placement == "co_located":
            for j in list(idx):
                idx.extend(children.get(posts[j].comment_id, []))
        fold_indices.append(np.asarray(sorted(idx)))

    pairs = [(posts[i].synthetic_of, posts[i].comment_id)
             for i in range(len(posts)) if posts[i].synthetic_of is not None]
    pair_constraint([[posts[i].comment_id for i in fold] for fold in fold_indices],
                    pairs, placement)

    cms: list[ConfusionMatrix] = []
    for t, test_idx in enumerate(fold_indices):
        test_set = set(test_idx.tolist())
        train_idx = [i for i in range(len(posts)) if i not in test_set]
        y_pred = _fit_predict(
            ctx, fcfg, spec,
            [posts[i] for i in train_idx], y[train_idx],
            [posts[i] for i in test_idx])
        cms.append(ConfusionMatrix.from_predictions(y[test_idx], y_pred))
        log.debug("pair fold %d/%d done", t + 1, k)
    return MetricsReport.from_folds(cms)
