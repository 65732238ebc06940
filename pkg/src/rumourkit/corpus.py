"""Conversation-tree corpus model and loaders.

A dataset directory holds one JSON file per Reddit submission (see
docs/dast_schema.md for the exact field list). Each submission carries a list
of branches; a branch is a root-to-leaf path through the comment tree, so
branches of the same conversation share their trunk posts. Posts are
deduplicated by comment id when counting.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import DataError

# Stance codes, fixed order. Veracity strings are lowercased internally.
SUPPORTING, DENYING, QUERYING, COMMENTING = 0, 1, 2, 3
STANCE_NAMES = ("Supporting", "Denying", "Querying", "Commenting")
STANCE_CODES = {name: code for code, name in enumerate(STANCE_NAMES)}

TRUTH_VALUES = ("False", "True", "Unverified")

URL_TOKEN = "urlurlurl"
QUOTE_TOKEN = "refrefref"

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_ALNUM = "abcdefghijklmnopqrstuvwxyz0123456789æøå"
_NUM_RE = re.compile(r"^\d+(?:[.,]\d+)+")
_ABBR_RE = re.compile(r"^(?:[a-z0-9æøå]{1,3}\.)+")
_TIME_FMT = "%Y-%m-%d %H:%M:%S"


def _clean_token(tok: str) -> str | None:
    if _URL_RE.search(tok):
        return URL_TOKEN
    t = tok.lower()
    start = 0
    while start < len(t) and t[start] not in _ALNUM:
        start += 1
    t = t[start:]
    if not t:
        return None
    m = _NUM_RE.match(t) or _ABBR_RE.match(t)
    if m:
        return m.group(0)
    core = "".join(c for c in t if c in _ALNUM)
    return core or None


def preprocess(raw_text: str) -> list[str]:
    """Tokenize raw post text.

    Lowercases and splits on whitespace; strips punctuation except inside
    decimal numbers ("3,5") and abbreviation-shaped tokens ("mio.", "bl.a.").
    URLs collapse to a marker token, and every quoted line ('>' prefix)
    collapses to a single quote marker. Idempotent on its own output.
    """
    tokens: list[str] = []
    for line in raw_text.split("\n"):
        if line.lstrip().startswith(">"):
            tokens.append(QUOTE_TOKEN)
            continue
        for tok in line.split():
            cleaned = _clean_token(tok)
            if cleaned is not None:
                tokens.append(cleaned)
    return tokens


def parse_created(value: str, where: str) -> float:
    try:
        dt = datetime.strptime(value, _TIME_FMT)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: created not 'YYYY-MM-DD HH:MM:SS': {value!r}") from exc
    return dt.replace(tzinfo=timezone.utc).timestamp()


@dataclass
class UserInfo:
    id: str
    karma: int
    created: str
    gold_status: bool
    is_employee: bool
    has_verified_email: bool


@dataclass
class Post:
    comment_id: str
    submission_id: str
    parent_id: str
    raw_text: str
    tokens: list[str]
    sdqc_submission: int
    sdqc_parent: int
    created: float
    created_str: str
    upvotes: int
    is_submitter: bool
    reply_count: int
    user: UserInfo
    # Filled by the loader once branches exist.
    parent_post: "Post | None" = None
    synthetic_of: str | None = None


@dataclass
class Branch:
    posts: list[Post]

    def __len__(self) -> int:
        return len(self.posts)

    @property
    def conversation_id(self) -> str:
        return self.posts[0].comment_id


@dataclass
class Submission:
    submission_id: str
    title: str
    text: str
    event: str
    created: float
    created_str: str
    upvotes: int
    num_comments: int
    url: str
    text_url: str
    is_video: bool
    subreddit: str
    user: UserInfo
    is_rumour: bool
    truth_status: str | None
    branches: list[Branch] = field(default_factory=list)
    tokens: list[str] = field(default_factory=list)

    def conversations(self) -> dict[str, list[Branch]]:
        """Branches grouped by top-level comment, insertion-ordered by time."""
        groups: dict[str, list[Branch]] = {}
        for branch in self.branches:
            groups.setdefault(branch.conversation_id, []).append(branch)
        return groups

    def unique_posts(self) -> list[Post]:
        seen: set[str] = set()
        out: list[Post] = []
        for branch in self.branches:
            for post in branch.posts:
                if post.comment_id not in seen:
                    seen.add(post.comment_id)
                    out.append(post)
        return out


@dataclass
class DatasetStats:
    n_submissions: int
    n_conversations: int
    n_branches: int
    n_posts: int
    sdqc_counts: tuple[int, int, int, int]

    def summary(self) -> str:
        return (
            f"{self.n_submissions} submissions, "
            f"{self.n_branches} branches, {self.n_posts} posts"
        )


@dataclass
class Dataset:
    submissions: list[Submission]
    norm_stats: "object | None" = None

    def posts(self) -> list[Post]:
        """Unique posts in deterministic order (submission, branch, position)."""
        out: list[Post] = []
        for sub in self.submissions:
            out.extend(sub.unique_posts())
        return out

    def branches(self) -> list[Branch]:
        return [b for sub in self.submissions for b in sub.branches]

    def stats(self) -> DatasetStats:
        posts = self.posts()
        counts = [0, 0, 0, 0]
        for p in posts:
            counts[p.sdqc_submission] += 1
        n_conv = sum(len(sub.conversations()) for sub in self.submissions)
        return DatasetStats(
            n_submissions=len(self.submissions),
            n_conversations=n_conv,
            n_branches=sum(len(sub.branches) for sub in self.submissions),
            n_posts=len(posts),
            sdqc_counts=tuple(counts),
        )


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise DataError(f"{where}: missing field '{key}'")
    return obj[key]


def _parse_user(obj: dict, where: str) -> UserInfo:
    if not isinstance(obj, dict):
        raise DataError(f"{where}: user is not an object")
    return UserInfo(
        id=str(_require(obj, "id", where + ".user")),
        karma=int(_require(obj, "karma", where + ".user")),
        created=str(_require(obj, "created", where + ".user")),
        gold_status=bool(_require(obj, "gold_status", where + ".user")),
        is_employee=bool(_require(obj, "is_employee", where + ".user")),
        has_verified_email=bool(_require(obj, "has_verified_email", where + ".user")),
    )


def _parse_comment(obj: dict, where: str) -> tuple[Post | None, bool]:
    """Returns (post, is_deleted). Deleted or unannotated comments give post=None."""
    if not isinstance(obj, dict):
        raise DataError(f"{where}: comment is not an object")
    comment_id = str(_require(obj, "comment_id", where))
    where = f"{where}({comment_id})"
    if bool(obj.get("is_deleted", False)):
        return None, True
    sdqc_sub = obj.get("SDQC_Submission")
    sdqc_par = obj.get("SDQC_Parent")
    if sdqc_sub is None or sdqc_par is None:
        return None, False
    if sdqc_sub not in STANCE_CODES:
        raise DataError(f"{where}: SDQC_Submission not in {STANCE_NAMES}: {sdqc_sub!r}")
    if sdqc_par not in STANCE_CODES:
        raise DataError(f"{where}: SDQC_Parent not in {STANCE_NAMES}: {sdqc_par!r}")
    raw_text = str(_require(obj, "text", where))
    created_str = str(_require(obj, "created", where))
    post = Post(
        comment_id=comment_id,
        submission_id=str(_require(obj, "submission_id", where)),
        parent_id=str(_require(obj, "parent_id", where)),
        raw_text=raw_text,
        tokens=preprocess(raw_text),
        sdqc_submission=STANCE_CODES[sdqc_sub],
        sdqc_parent=STANCE_CODES[sdqc_par],
        created=parse_created(created_str, where),
        created_str=created_str,
        upvotes=int(_require(obj, "upvotes", where)),
        is_submitter=bool(_require(obj, "is_submitter", where)),
        reply_count=int(_require(obj, "replies", where)),
        user=_parse_user(_require(obj, "user", where), where),
    )
    return post, False


def load_submission(path: str | Path) -> Submission:
    """Load one submission file, truncating branches at deleted posts."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    where = str(path)
    sub_obj = _require(data, "redditSubmission", where)
    user = _parse_user(_require(sub_obj, "user", where), where)
    truth = sub_obj.get("TruthStatus")
    if truth is not None and truth not in TRUTH_VALUES:
        raise DataError(f"{where}: TruthStatus not in {TRUTH_VALUES}: {truth!r}")
    created_str = str(_require(sub_obj, "created", where))
    title = str(_require(sub_obj, "title", where))
    text = str(sub_obj.get("text") or "")
    submission = Submission(
        submission_id=str(_require(sub_obj, "submission_id", where)),
        title=title,
        text=text,
        event=str(_require(sub_obj, "event", where)),
        created=parse_created(created_str, where),
        created_str=created_str,
        upvotes=int(_require(sub_obj, "upvotes", where)),
        num_comments=int(_require(sub_obj, "num_comments", where)),
        url=str(sub_obj.get("url") or ""),
        text_url=str(sub_obj.get("text_url") or ""),
        is_video=bool(sub_obj.get("is_video", False)),
        subreddit=str(sub_obj.get("subreddit") or ""),
        user=user,
        is_rumour=bool(_require(sub_obj, "IsRumour", where)),
        truth_status=truth,
        tokens=preprocess(title + " " + text),
    )

    by_id: dict[str, Post] = {}
    branches_raw = _require(data, "branches", where)
    if not isinstance(branches_raw, list):
        raise DataError(f"{where}: branches is not a list")
    for bi, branch_raw in enumerate(branches_raw):
        bwhere = f"{where}: branches[{bi}]"
        if not isinstance(branch_raw, list):
            raise DataError(f"{bwhere}: branch is not a list")
        posts: list[Post] = []
        seen_ids: set[str] = set()
        for ci, comment_obj in enumerate(branch_raw):
            post, deleted = _parse_comment(comment_obj, f"{bwhere}[{ci}]")
            if deleted:
                break  # everything below a deleted post is unusable
            if post is None:
                continue
            if post.comment_id in seen_ids:
                raise DataError(f"{bwhere}: duplicate comment_id {post.comment_id}")
            seen_ids.add(post.comment_id)
            # Share one Post object per comment id across branches.
            post = by_id.setdefault(post.comment_id, post)
            posts.append(post)
        if posts:
            submission.branches.append(Branch(posts=posts))

    submission.branches.sort(key=lambda b: (b.posts[0].created, b.posts[0].comment_id))
    for branch in submission.branches:
        prev: Post | None = None
        for post in branch.posts:
            if post.parent_post is None and prev is not None:
                post.parent_post = prev
            prev = post
    return submission


def load_dataset(directory: str | Path, resources=None) -> Dataset:
    """Load every submission JSON under a directory (recursively).

    When a resource bundle is passed, normalization statistics are recorded
    over the full dataset as part of loading.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"{directory}: not a directory")
    paths = sorted(directory.rglob("*.json"))
    if not paths:
        raise DataError(f"{directory}: no submission JSON files found")
    submissions = [load_submission(p) for p in paths]
    submissions.sort(key=lambda s: (s.event, s.submission_id))
    dataset = Dataset(submissions=submissions)
    if resources is not None:
        from . import features  # deferred: features depends on corpus

        dataset.norm_stats = features.compute_normalization(dataset, resources)
    return dataset


def rumour_subset(dataset: Dataset) -> Dataset:
    """Submissions annotated as rumourous, with their full branch structure."""
    subs = [s for s in dataset.submissions if s.is_rumour]
    return Dataset(submissions=subs, norm_stats=dataset.norm_stats)


# ---------------------------------------------------------------------------
# Stance/veracity sequence records (JSONL interchange format)
# ---------------------------------------------------------------------------

VERACITY_VALUES = ("false", "true", "unverified")


@dataclass
class SequenceRecord:
    dataset: str
    event: str
    rumour_id: str
    veracity: str
    items: list[tuple[int, float]]  # (stance code, epoch seconds)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dataset": self.dataset,
                "event": self.event,
                "rumour_id": self.rumour_id,
                "veracity": self.veracity,
                "items": [{"stance": s, "t": t} for s, t in self.items],
            },
            ensure_ascii=False,
        )


def load_sequences(path: str | Path) -> list[SequenceRecord]:
    path = Path(path)
    records: list[SequenceRecord] = []
    with path.open(encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{ln}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: invalid JSON: {exc}") from exc
            veracity = _require(obj, "veracity", where)
            if veracity not in VERACITY_VALUES:
                raise DataError(f"{where}: veracity not in {VERACITY_VALUES}: {veracity!r}")
            items_raw = _require(obj, "items", where)
            if not isinstance(items_raw, list) or not items_raw:
                raise DataError(f"{where}: items must be a non-empty list")
            items: list[tuple[int, float]] = []
            for ii, item in enumerate(items_raw):
                stance = _require(item, "stance", f"{where}.items[{ii}]")
                if stance not in (0, 1, 2, 3):
                    raise DataError(f"{where}.items[{ii}]: stance not in 0..3: {stance!r}")
                items.append((int(stance), float(_require(item, "t", f"{where}.items[{ii}]"))))
            records.append(
                SequenceRecord(
                    dataset=str(_require(obj, "dataset", where)),
                    event=str(_require(obj, "event", where)),
                    rumour_id=str(_require(obj, "rumour_id", where)),
                    veracity=veracity,
                    items=items,
                )
            )
    return records


def save_sequences(records: list[SequenceRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def filter_pheme(
    records: list[SequenceRecord], min_items: int = 5, min_rumours: int = 5
) -> list[SequenceRecord]:
    """Keep well-populated rumours from well-populated events.

    A rumour survives when it has at least `min_items` items and its event has
    at least `min_rumours` such rumours.
    """
    populated = [r for r in records if len(r.items) >= min_items]
    per_event: dict[str, int] = {}
    for rec in populated:
        per_event[rec.event] = per_event.get(rec.event, 0) + 1
    return [r for r in populated if per_event[r.event] >= min_rumours]
