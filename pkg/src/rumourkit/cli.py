"""Command-line surface for the whole pipeline.

One executable with subcommands for loading and validating the corpus,
exporting features and augmented datasets, running the stance and veracity
experiment tables, resolving a single submission end to end, and (behind a
network gate) fetching a live Reddit thread into the corpus JSON shape.

Every command resolves its settings as defaults < config file < flags and
prints the short hash of the resolved configuration, so any output can be
reproduced from the hash's config alone. Exit codes: 0 success, 1 usage or
configuration problem, 2 data problem.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import veracity as V
from .config import RunConfig, load_config
from .corpus import (STANCE_NAMES, Dataset, load_dataset, load_sequences,
                     load_submission, rumour_subset, save_sequences)
from .errors import ConfigError, DataError
from .evaluation import (ModelSpec, ablation, cross_validate, grid_search)
from .features import EncodingContext, FeatureSpace, encode_labels
from .persistence import (StanceBundle, fit_bundle, load_stance_model,
                          save_stance_model)
from .resources import load_resources
from .sampling import cross_validate_pairs, sub_sample, super_sample

log = logging.getLogger(__name__)

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; usage problems are exit 1 here
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    p = _Parser(prog="rumourkit",
                description="Stance and veracity experiments on Reddit "
                            "conversation trees.")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--data-dir", dest="data_dir", help="corpus directory")
    p.add_argument("--resource-dir", dest="resource_dir",
                   help="resource directory")
    p.add_argument("--out-dir", dest="output_dir", help="output directory")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="validate a corpus and print stats")
    sp.add_argument("directory", nargs="?", default=None)

    sp = sub.add_parser("extract", help="write the feature matrix to CSV")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("train-stance", help="fit a stance model and save it")
    sp.add_argument("--model-out", default=None)

    sp = sub.add_parser("eval-stance", help="stance experiment tables")
    sp.add_argument("--ablation", action="store_true",
                    help="leave-one-segment-out table")
    sp.add_argument("--grid", action="store_true",
                    help="C / class-weight grid search")
    sp.add_argument("--augmented", action="store_true",
                    help="balanced-training CV with clone placement rules")

    sp = sub.add_parser("sample", help="export a re-balanced dataset")
    sp.add_argument("--sub", action="store_true",
                    help="strip posts from the majority class")
    sp.add_argument("--super", action="store_true", dest="super_",
                    help="add synonym-rewritten minority clones")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("sequences", help="export veracity sequences")
    sp.add_argument("--structure", choices=V.STRUCTURES, default=None)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("train-veracity",
                        help="fit per-label sequence models and save them")
    sp.add_argument("--model-out", default=None)

    sp = sub.add_parser("eval-veracity", help="veracity experiment tables")
    sp.add_argument("--protocol", choices=("cv3", "transfer", "mix"),
                    default=None)
    sp.add_argument("--unverified", choices=V.UNVERIFIED_MODES, default=None)
    sp.add_argument("--variant", choices=("lambda", "omega"), default=None)
    sp.add_argument("--structure", choices=V.STRUCTURES, default=None)
    sp.add_argument("--baseline", action="store_true",
                    help="distribution-distance baseline instead of HMMs")
    sp.add_argument("--stance", choices=("gold", "auto"), default="gold",
                    help="gold annotations or automatic stance labels")

    sp = sub.add_parser("resolve",
                        help="stance-label one submission and predict veracity")
    sp.add_argument("--submission", required=True,
                    help="submission JSON file or id in the corpus")
    sp.add_argument("--stance-model", default=None)
    sp.add_argument("--veracity-model", default=None)

    sp = sub.add_parser("fetch-reddit",
                        help="download a live submission (network-gated)")
    sp.add_argument("submission_id")
    sp.add_argument("--out", default=None)
    sp.add_argument("--allow-network", action="store_true")
    return p


def _resolve_config(args) -> RunConfig:
    overrides = {}
    for key in ("seed", "data_dir", "resource_dir", "output_dir"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    for key in ("structure", "variant", "unverified", "protocol"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return load_config(args.config, overrides)


def _load_corpus(cfg: RunConfig, directory: str | None = None):
    res = load_resources(cfg.resource_dir)
    ds = load_dataset(directory or cfg.data_dir, resources=res)
    return ds, res


def _out_path(cfg: RunConfig, name: str, override: str | None) -> Path:
    path = Path(override) if override else Path(cfg.output_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(cfg: RunConfig, args) -> int:
    ds, _ = _load_corpus(cfg, args.directory)
    stats = ds.stats()
    print(f"{stats.n_submissions} submissions, {stats.n_branches} branches, "
          f"{stats.n_posts} posts")
    counts = Counter(p.sdqc_submission for p in ds.posts())
    print("stance counts: " + "  ".join(
        f"{name}={counts.get(code, 0)}"
        for code, name in enumerate(STANCE_NAMES)))
    rum = rumour_subset(ds)
    n_conv = sum(len(s.conversations()) for s in rum.submissions)
    n_branch = sum(len(s.branches) for s in rum.submissions)
    print(f"rumour subset: {len(rum.submissions)} submissions, "
          f"{n_conv} conversations, {n_branch} branches")
    return 0


def cmd_extract(cfg: RunConfig, args) -> int:
    ds, res = _load_corpus(cfg)
    ctx = EncodingContext(ds, res)
    posts = ds.posts()
    space = FeatureSpace(ctx, cfg.feature_config()).fit(posts)
    X = space.transform(posts)
    path = _out_path(cfg, "features.csv", args.out)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("comment_id," + ",".join(space.kept_names()) + "\n")
        for post, row in zip(posts, X):
            fh.write(post.comment_id + ","
                     + ",".join(f"{v:.6g}" for v in row) + "\n")
    print(f"wrote {X.shape[0]} x {X.shape[1]} feature matrix to {path}")
    return 0


def cmd_train_stance(cfg: RunConfig, args) -> int:
    ds, res = _load_corpus(cfg)
    ctx = EncodingContext(ds, res)
    posts = ds.posts()
    bundle = fit_bundle(ctx, cfg.feature_config(), cfg.model_spec(),
                        posts, encode_labels(posts), config_hash=cfg.hash())
    path = _out_path(cfg, "stance_model.npz", args.model_out)
    save_stance_model(bundle, path)
    train_acc = float(np.mean(bundle.predict(posts) == encode_labels(posts)))
    print(f"saved {cfg.model} stance model to {path} "
          f"({bundle.space.width()} features, training accuracy {train_acc:.4f})")
    return 0


def cmd_eval_stance(cfg: RunConfig, args) -> int:
    ds, res = _load_corpus(cfg)
    if args.augmented:
        sub = sub_sample(ds)
        ctx = EncodingContext(sub, res)
        aug = super_sample(sub.posts(), res.synonyms, seed=cfg.seed)
        rep = cross_validate_pairs(
            aug, encode_labels(aug), ctx, cfg.feature_config(),
            cfg.model_spec(), k=cfg.folds, seed=cfg.split_seed,
            placement=cfg.placement)
        print(f"balanced training, clone placement {cfg.placement}:")
        print(rep.render())
        return 0
    ctx = EncodingContext(ds, res)
    posts = ds.posts()
    y = encode_labels(posts)
    if args.grid:
        grid = ({"C": [0.1, 1.0, 10.0, 100.0],
                 "class_weight": ["uniform", "balanced"]}
                if cfg.model in ("svm", "logit") else {})
        if not grid:
            raise ConfigError(f"no search grid defined for model {cfg.model!r}")
        result = grid_search(posts, y, ctx, cfg.feature_config(),
                             cfg.model_spec(), grid, k=cfg.folds,
                             seed=cfg.seed)
        print(f"grid search over {cfg.model}: best {result.best_params} "
              f"(macro F1 {result.best_score:.4f})")
        for params, score in result.trials:
            print(f"  {params} -> {score:.4f}")
        return 0
    if args.ablation:
        rows = ablation(posts, y, ctx, cfg.feature_config(), cfg.model_spec(),
                        k=cfg.folds, seed=cfg.seed)
        print(f"segment ablation for {cfg.model}:")
        for name, rep in rows.items():
            print(f"  without {name:<14} accuracy {rep.accuracy:.4f} "
                  f"macro F1 {rep.macro_f1:.4f}")
        return 0
    rep = cross_validate(posts, y, ctx, cfg.feature_config(),
                         cfg.model_spec(), k=cfg.folds, seed=cfg.seed)
    print(f"{cfg.folds}-fold cross-validation of {cfg.model}:")
    print(rep.render())
    return 0


def cmd_sample(cfg: RunConfig, args) -> int:
    ds, res = _load_corpus(cfg)
    if not args.sub and not args.super_:
        raise ConfigError("nothing to do: pass --sub and/or --super")
    work: Dataset = sub_sample(ds) if args.sub else ds
    posts = work.posts()
    if args.super_:
        posts = super_sample(posts, res.synonyms, seed=cfg.seed)
    path = _out_path(cfg, "sampled_posts.jsonl", args.out)
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(json.dumps({
                "comment_id": p.comment_id,
                "submission_id": p.submission_id,
                "text": p.raw_text,
                "sdqc_submission": STANCE_NAMES[p.sdqc_submission],
                "sdqc_parent": STANCE_NAMES[p.sdqc_parent],
                "synthetic_of": p.synthetic_of,
            }, ensure_ascii=False) + "\n")
    counts = Counter(p.sdqc_submission for p in posts)
    print(f"wrote {len(posts)} posts to {path} (" + " ".join(
        f"{name}={counts.get(code, 0)}"
        for code, name in enumerate(STANCE_NAMES)) + ")")
    return 0


def cmd_sequences(cfg: RunConfig, args) -> int:
    ds, _ = _load_corpus(cfg)
    records = V.to_sequences(ds, cfg.structure)
    path = _out_path(cfg, f"sequences_{cfg.structure}.jsonl", args.out)
    save_sequences(records, path)
    print(f"wrote {len(records)} {cfg.structure} sequences to {path}")
    return 0


def _dast_records(cfg: RunConfig) -> list:
    ds, _ = _load_corpus(cfg)
    return V.to_sequences(ds, cfg.structure)


def cmd_train_veracity(cfg: RunConfig, args) -> int:
    records = _dast_records(cfg)
    clf = V.fit_classifier(records, variant=cfg.variant,
                           unverified=cfg.unverified, n_range=cfg.n_range(),
                           seed=cfg.seed, max_iter=cfg.hmm_max_iter,
                           tol=cfg.hmm_tol, restarts=cfg.restarts)
    path = _out_path(cfg, "veracity_model.json", args.model_out)
    V.save_classifier(clf, path)
    print(f"saved veracity model to {path} (structure {cfg.structure}, "
          f"variant {cfg.variant}, {clf.n_states} states per label)")
    return 0


def _pheme_records(cfg: RunConfig) -> list:
    path = Path(cfg.pheme_sequences)
    if not path.exists():
        raise DataError(f"missing training sequences: {path} not found; "
                        f"fetch the external corpus and run the converter")
    return load_sequences(path)


def cmd_eval_veracity(cfg: RunConfig, args) -> int:
    ds, res = _load_corpus(cfg)
    if args.stance == "auto":
        ctx = EncodingContext(ds, res)
        ds, stance_rep = V.auto_label(ds, ctx, seed=cfg.seed)
        print(f"automatic stance labels: accuracy {stance_rep.accuracy:.4f}, "
              f"macro F1 {stance_rep.macro_f1:.4f}")
    records = V.to_sequences(ds, cfg.structure)
    kw = dict(variant=cfg.variant, unverified=cfg.unverified, seed=cfg.seed,
              baseline=args.baseline, n_range=cfg.n_range(),
              max_iter=cfg.hmm_max_iter, tol=cfg.hmm_tol,
              restarts=cfg.restarts)
    if cfg.protocol == "cv3":
        rep = V.protocol_cv3(records, **kw)
    elif cfg.protocol == "transfer":
        rep = V.protocol_transfer(_pheme_records(cfg), records, **kw)
    else:
        rep = V.protocol_mix(_pheme_records(cfg), records, **kw)
    head = "VB baseline" if args.baseline else "per-label sequence models"
    print(f"{cfg.protocol} / {cfg.structure} / {cfg.variant} / "
          f"unverified-as-{cfg.unverified} ({head}):")
    print(rep.render())
    return 0


def cmd_resolve(cfg: RunConfig, args) -> int:
    ds, res = _load_corpus(cfg)
    ctx = EncodingContext(ds, res)
    sub_path = Path(args.submission)
    if sub_path.exists():
        submission = load_submission(sub_path)
    else:
        matches = [s for s in ds.submissions
                   if s.submission_id == args.submission]
        if not matches:
            raise DataError(f"submission {args.submission!r} is neither a "
                            f"file nor an id in {cfg.data_dir}")
        submission = matches[0]

    stance_path = _out_path(cfg, "stance_model.npz", args.stance_model)
    bundle = load_stance_model(stance_path, ctx)
    veracity_path = _out_path(cfg, "veracity_model.json", args.veracity_model)
    if not veracity_path.exists():
        raise DataError(f"veracity model not found: {veracity_path}")
    clf = V.load_classifier(veracity_path)

    posts = submission.unique_posts()
    if not posts:
        raise DataError(f"submission {submission.submission_id} has no "
                        f"usable comments")
    stances = bundle.predict(posts)
    print(f"submission {submission.submission_id}: {submission.title}")
    for post, code in zip(posts, stances):
        print(f"  {post.comment_id}  {STANCE_NAMES[int(code)]}")

    pred_map = {p.comment_id: int(c) for p, c in zip(posts, stances)}
    relabeled = V._apply_labels(
        Dataset(submissions=[dataclasses.replace(
            submission, is_rumour=True,
            truth_status=submission.truth_status or "unverified")],
            norm_stats=ds.norm_stats),
        pred_map)
    variant = "lambda" if clf.width == 1 else "omega"
    records = V.to_sequences(relabeled, cfg.structure)
    votes = Counter(V.predict_veracity(clf, V.encode(r, variant))
                    for r in records)
    verdict = max(V.PRECEDENCE, key=lambda lab: (votes.get(lab, 0),
                                                 -V.PRECEDENCE.index(lab)))
    tally = " ".join(f"{lab}={votes.get(lab, 0)}" for lab in V.PRECEDENCE)
    print(f"verdict: {verdict} (over {len(records)} {cfg.structure} "
          f"sequences: {tally})")
    return 0


def cmd_fetch_reddit(cfg: RunConfig, args) -> int:
    import os
    if not args.allow_network or os.environ.get(
            "RUMOURKIT_ALLOW_NETWORK") != "1":
        print("fetch-reddit is disabled: pass --allow-network and set "
              "RUMOURKIT_ALLOW_NETWORK=1 to permit network access",
              file=sys.stderr)
        return USAGE_EXIT
    from . import reddit_fetch
    path = _out_path(cfg, f"{args.submission_id}.json", args.out)
    try:
        payload = reddit_fetch.fetch_submission(args.submission_id)
    except reddit_fetch.FetchError as exc:
        print(f"fetch failed: {exc}", file=sys.stderr)
        return DATA_EXIT
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=1),
                    encoding="utf-8")
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "extract": cmd_extract,
    "train-stance": cmd_train_stance,
    "eval-stance": cmd_eval_stance,
    "sample": cmd_sample,
    "sequences": cmd_sequences,
    "train-veracity": cmd_train_veracity,
    "eval-veracity": cmd_eval_veracity,
    "resolve": cmd_resolve,
    "fetch-reddit": cmd_fetch_reddit,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=(logging.DEBUG if args.verbose > 1
               else logging.INFO if args.verbose else logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve_config(args)
        print(f"config {cfg.hash()}")
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
