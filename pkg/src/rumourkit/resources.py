"""Loaders for the external resource files the feature extractors consume.

All formats are line-oriented text, documented in docs/resources.md. Loaders
validate eagerly and raise DataError naming file and line on malformed input.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

WORDLIST_KINDS = ("negation", "swear", "positive_smiley", "negative_smiley")

# Universal-style tag inventory; SYM is legal input even if a corpus never uses it.
POS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)


def load_sentiment(path: str | Path) -> dict[str, float]:
    """Word -> valence score from a TSV file; later duplicates win."""
    path = Path(path)
    scores: dict[str, float] = {}
    with path.open(encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{ln}: expected 'word<TAB>score', got {line!r}")
            word, score_s = parts
            try:
                score = float(score_s)
            except ValueError as exc:
                raise DataError(f"{path}:{ln}: score not numeric: {score_s!r}") from exc
            scores[word.strip().lower()] = score
    return scores


@dataclass
class WordList:
    kind: str
    entries: list[str]

    def __post_init__(self):
        if self.kind not in WORDLIST_KINDS:
            raise DataError(f"unknown wordlist kind {self.kind!r}, expected one of {WORDLIST_KINDS}")
        self.entry_set = set(self.entries)

    def __contains__(self, item: str) -> bool:
        return item in self.entry_set


def load_wordlist(path: str | Path, kind: str) -> WordList:
    path = Path(path)
    entries: list[str] = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            entry = line.strip()
            if entry:
                entries.append(entry.lower())
    if not entries:
        raise DataError(f"{path}: empty wordlist")
    return WordList(kind=kind, entries=entries)


def load_synonyms(path: str | Path) -> dict[str, list[str]]:
    """word -> candidate substitutes, from 'word<TAB>syn1,syn2,...' lines."""
    path = Path(path)
    table: dict[str, list[str]] = {}
    with path.open(encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[1].strip():
                raise DataError(f"{path}:{ln}: expected 'word<TAB>syn1,syn2,...', got {line!r}")
            word = parts[0].strip().lower()
            syns = [s.strip().lower() for s in parts[1].split(",") if s.strip()]
            if not syns:
                raise DataError(f"{path}:{ln}: no substitutes for {word!r}")
            table[word] = syns
    return table


@dataclass
class VectorTable:
    words: dict[str, int]
    matrix: np.ndarray  # (n_words, dim) float32

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def get(self, word: str) -> np.ndarray | None:
        idx = self.words.get(word)
        return None if idx is None else self.matrix[idx]


def load_vectors(path: str | Path) -> VectorTable:
    """Text vector table: optional 'count dim' header, then 'word v1 .. vd' lines."""
    path = Path(path)
    words: dict[str, int] = {}
    rows: list[np.ndarray] = []
    dim: int | None = None
    with path.open(encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if ln == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            word, vals = parts[0], parts[1:]
            if dim is None:
                dim = len(vals)
                if dim == 0:
                    raise DataError(f"{path}:{ln}: vector line with no values")
            elif len(vals) != dim:
                raise DataError(
                    f"{path}:{ln}: expected {dim} values, got {len(vals)} for {word!r}"
                )
            try:
                vec = np.asarray([float(v) for v in vals], dtype=np.float32)
            except ValueError as exc:
                raise DataError(f"{path}:{ln}: non-numeric vector value") from exc
            if word not in words:  # first occurrence wins for vectors
                words[word] = len(rows)
                rows.append(vec)
    if not rows:
        raise DataError(f"{path}: no vectors found")
    return VectorTable(words=words, matrix=np.vstack(rows))


def load_pos_sidecar(path: str | Path) -> dict[str, list[str]]:
    """comment_id -> POS tag sequence from a JSONL sidecar."""
    path = Path(path)
    tags_by_id: dict[str, list[str]] = {}
    valid = set(POS_TAGS)
    with path.open(encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{ln}: invalid JSON: {exc}") from exc
            if "comment_id" not in obj or "tags" not in obj:
                raise DataError(f"{path}:{ln}: need 'comment_id' and 'tags' fields")
            tags = obj["tags"]
            if not isinstance(tags, list):
                raise DataError(f"{path}:{ln}: tags must be a list")
            for tag in tags:
                if tag not in valid:
                    raise DataError(f"{path}:{ln}: unknown POS tag {tag!r}")
            tags_by_id[str(obj["comment_id"])] = [str(t) for t in tags]
    return tags_by_id


@dataclass
class ResourceBundle:
    """Everything the feature extractors may need, loaded once."""

    sentiment: dict[str, float] = field(default_factory=dict)
    negation: WordList | None = None
    swear: WordList | None = None
    positive_smiley: WordList | None = None
    negative_smiley: WordList | None = None
    synonyms: dict[str, list[str]] = field(default_factory=dict)
    vectors: VectorTable | None = None
    pos_tags: dict[str, list[str]] | None = None

    def wordlist(self, kind: str) -> WordList | None:
        return {
            "negation": self.negation,
            "swear": self.swear,
            "positive_smiley": self.positive_smiley,
            "negative_smiley": self.negative_smiley,
        }[kind]


DEFAULT_FILENAMES = {
    "sentiment": "afinn.txt",
    "negation": "negation.txt",
    "swear": "swear.txt",
    "positive_smiley": "smileys_positive.txt",
    "negative_smiley": "smileys_negative.txt",
    "synonyms": "synonyms.tsv",
    "vectors": "vectors.txt",
    "pos": "pos_tags.jsonl",
}


def load_resources(directory: str | Path) -> ResourceBundle:
    """Load whatever resource files exist under a directory.

    A missing POS sidecar only logs a warning (POS features then emit zeros);
    other missing files leave their slot empty and the corresponding feature
    extractor will complain if actually used.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"{directory}: not a directory")
    bundle = ResourceBundle()
    p = directory / DEFAULT_FILENAMES["sentiment"]
    if p.exists():
        bundle.sentiment = load_sentiment(p)
    for kind, attr in (
        ("negation", "negation"),
        ("swear", "swear"),
        ("positive_smiley", "positive_smiley"),
        ("negative_smiley", "negative_smiley"),
    ):
        p = directory / DEFAULT_FILENAMES[kind]
        if p.exists():
            setattr(bundle, attr, load_wordlist(p, kind))
    p = directory / DEFAULT_FILENAMES["synonyms"]
    if p.exists():
        bundle.synonyms = load_synonyms(p)
    p = directory / DEFAULT_FILENAMES["vectors"]
    if p.exists():
        bundle.vectors = load_vectors(p)
    p = directory / DEFAULT_FILENAMES["pos"]
    if p.exists():
        bundle.pos_tags = load_pos_sidecar(p)
    else:
        log.warning("POS sidecar %s missing; POS features will be zero vectors", p)
    return bundle
