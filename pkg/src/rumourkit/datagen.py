"""Deterministic synthetic corpus generator.

Builds a Danish-flavoured Reddit rumour corpus in the documented submission
JSON schema, together with the resource files the feature extractors need and
a tweet-style sequence file for transfer experiments. Everything is seeded, so
repeated builds are byte-identical; a fixed statistical profile (submission,
branch and post counts per event, stance distributions per submission,
vocabulary tiers, feature spreads) is asserted after generation by reloading
what was written.

The generated corpus is a stand-in with the same shape and aggregate
statistics as the real collection; drop the real data into the same directory
layout and everything downstream works unchanged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import QUOTE_TOKEN, URL_TOKEN, preprocess

GENERATOR_VERSION = 11
DEFAULT_SEED = 20240517

# ---------------------------------------------------------------------------
# Collection profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubProfile:
    key: str
    event: str
    is_rumour: bool
    truth: str | None          # "True" | "False" | "Unverified" | None
    posts: int
    branches: int
    sdqc: tuple[int, int, int, int]   # S, D, Q, C
    pure_posts: int            # posts living in pure-Commenting conversations
    pure_convs: int            # how many pure-Commenting conversations
    mixed_convs: int           # conversations carrying at least one non-C post


# fmt: off
PROFILES: list[SubProfile] = [
    # --- rumourous submissions ---
    SubProfile("r01", "5G",           True, "Unverified",  42,  18, (7, 6, 2, 27),   0, 0,  7),
    SubProfile("r02", "5G",           True, "Unverified",  73,  30, (7, 6, 3, 57),   0, 0, 11),
    SubProfile("r03", "5G",           True, "Unverified", 123,  55, (11, 30, 0, 82), 0, 0, 19),
    SubProfile("r04", "Donald Trump", True, "Unverified",  44,  18, (10, 6, 0, 28),  0, 0,  7),
    SubProfile("r05", "Donald Trump", True, "Unverified",  96,  40, (15, 5, 5, 71),  0, 0, 14),
    SubProfile("r06", "ISIS",         True, "Unverified", 145,  56, (2, 31, 8, 104), 0, 0, 20),
    SubProfile("r07", "ISIS",         True, "Unverified",  24,  12, (1, 9, 0, 14),   0, 0,  5),
    SubProfile("r08", "Kost",         True, "Unverified",  97,  40, (5, 15, 2, 75),  0, 0, 14),
    SubProfile("r09", "Kost",         True, "False",      227,  60, (16, 25, 0, 186),0, 0, 22),
    SubProfile("r10", "MeToo",        True, "Unverified",  60,  29, (1, 8, 3, 48),   0, 0, 11),
    SubProfile("r11", "Peter Madsen", True, "False",       31,  14, (0, 11, 3, 17),  0, 0,  6),
    SubProfile("r12", "Peter Madsen", True, "True",        81,  36, (4, 0, 6, 71),  10, 3, 10),
    SubProfile("r13", "Peter Madsen", True, "False",      269, 106, (11, 34, 10, 214),0, 0, 38),
    SubProfile("r14", "Politik",      True, "True",        49,  20, (12, 0, 6, 31),  0, 0,  8),
    SubProfile("r15", "Togstrejke",   True, "True",        73,  35, (7, 3, 1, 62),   8, 2, 11),
    SubProfile("r16", "Ulve i DK",    True, "Unverified",  55,  27, (1, 3, 1, 50),  28, 7,  5),
    # --- non-rumourous submissions ---
    SubProfile("n01", "5G",           False, None,  35,  14, (1, 5, 2, 27),   16,  4,  4),
    SubProfile("n02", "Donald Trump", False, None, 106,  31, (14, 6, 0, 86),  50, 12,  8),
    SubProfile("n03", "HPV",          False, None,  37,  18, (4, 1, 2, 30),   17,  4,  3),
    SubProfile("n04", "HPV",          False, None,  37,  18, (4, 1, 1, 31),   17,  4,  3),
    SubProfile("n05", "HPV",          False, None,  37,  18, (4, 1, 1, 31),   17,  4,  3),
    SubProfile("n06", "HPV",          False, None,  36,  17, (3, 0, 1, 32),   17,  4,  3),
    SubProfile("n07", "HPV",          False, None,  36,  17, (3, 1, 1, 31),   18,  4,  3),
    SubProfile("n08", "HPV",          False, None,  36,  17, (3, 0, 1, 32),   17,  4,  3),
    SubProfile("n09", "HPV",          False, None,  36,  17, (3, 0, 1, 32),   17,  4,  3),
    SubProfile("n10", "Kost",         False, None, 233,  65, (29, 16, 2, 186),110, 26, 13),
    SubProfile("n11", "Overvågning",  False, None, 352, 121, (41, 20, 13, 278),170, 40, 28),
    SubProfile("n12", "Politik",      False, None, 137,  53, (16, 23, 0, 98),  55, 13, 13),
    SubProfile("n13", "Politik",      False, None, 137,  53, (15, 23, 1, 98),  55, 13, 13),
    SubProfile("n14", "Togstrejke",   False, None,  28,  14, (1, 3, 2, 22),   10,  3,  4),
    SubProfile("n15", "Ulve i DK",    False, None,  79,  31, (8, 3, 1, 67),   21,  5,  8),
    SubProfile("n16", "Ulve i DK",    False, None,  78,  31, (7, 3, 1, 67),   21,  5,  8),
    SubProfile("n17", "Ulve i DK",    False, None,  78,  30, (7, 2, 1, 68),   20,  5,  7),
]
# fmt: on

EVENT_DATES = {
    "5G": "2019-03-04",
    "Donald Trump": "2018-07-11",
    "HPV": "2018-04-19",
    "ISIS": "2018-02-26",
    "Kost": "2018-09-13",
    "MeToo": "2018-10-02",
    "Overvågning": "2019-01-21",
    "Peter Madsen": "2018-01-23",
    "Politik": "2018-11-06",
    "Togstrejke": "2018-04-03",
    "Ulve i DK": "2018-05-15",
}

TITLE_STEMS = {
    "r01": "5G-teknologien kan ifølge kritikere udgøre en sundhedsrisiko",
    "r02": "Det er ikke alle målinger der viser det samme om 5G",
    "r03": "Uffe Elbæk vil have undersøgt 5G-strålingen",
    "r04": "Hvorfor må DR ikke vise hele interviewet med Trump",
    "r05": "16-årig skulle være blevet afvist ved grænsen efter Trump-udtalelse",
    "r06": "23-årig dansk statsborger meldes udrejst til ISIS",
    "r07": "Danish student siges at have kæmpet mod ISIS",
    "r08": "Bjørn Lomborg påstår at kostråd bygger på svagt grundlag",
    "r09": "Professor: Fedtfattig kost gør mere skade end gavn",
    "r10": "Bjørks FB-opslag om instruktøren deles igen",
    "r11": "Savnet ubåd meldes fundet på havbunden",
    "r12": "Undersøgelser af ubåden peger på bevidst handling",
    "r13": "Peter Madsen skulle have tilstået i aflytning",
    "r14": "KORRUPT embedsmand dækkede over nabostøtte",
    "r15": "De ansatte i DSB varsler nye arbejdsnedlæggelser",
    "r16": "Den vedholdende ulv ved Ulfborg er måske en hybrid",
}

SUBREDDITS = {"default": "Denmark"}


# ---------------------------------------------------------------------------
# Word inventory
# ---------------------------------------------------------------------------

STOPWORDS = [
    "og", "i", "jeg", "det", "at", "en", "den", "til", "er", "som", "på",
    "de", "med", "han", "af", "for", "ikke", "der", "var", "mig", "sig",
    "men", "et", "har", "om", "vi", "min", "havde", "ham", "hun", "nu",
    "over", "da", "fra", "du", "ud", "sin", "dem", "os", "op", "man",
    "hans", "hvor", "eller", "hvad", "skal", "selv", "her", "alle", "vil",
    "blev", "kunne", "ind", "når", "være", "dog", "noget", "ville", "jo",
    "deres", "efter", "ned", "skulle", "denne", "end", "dette", "mit",
]

SIG_S = [
    "enig", "præcis", "sandt", "korrekt", "nemlig", "bekræftet", "kilden",
    "stemmer", "rigtigt", "klart", "godt", "dokumenteret", "bekræfter",
    "troværdig", "solid", "velunderbygget", "overbevisende", "medhold",
    "belæg", "underbygget", "bevist", "efterprøvet", "holdbart", "saglig",
    "grundigt", "fornuftigt", "velbegrundet", "plausibelt", "sikkert",
    "utvivlsomt", "afgjort", "velfunderet", "efterrettelig",
]

SIG_D = [
    "forkert", "falsk", "løgn", "usandt", "benægter", "modbevist", "vrøvl",
    "sludder", "nonsens", "tvivlsomt", "useriøst", "fejlagtigt", "misvisende",
    "manipuleret", "opspind", "konspirationsteori", "udokumenteret", "påstand",
    "afvist", "afkræftet", "usandsynligt", "fordrejet", "propaganda",
    "skrøne", "fup", "svindel", "vildledende", "grundløst", "tendentiøst",
    "overdrevet", "usagligt", "ubegrundet", "usammenhængende",
]

SIG_C = [
    "artiklen", "historien", "medierne", "debatten", "situationen",
    "politikerne", "samfundet", "spørgsmålet", "udviklingen", "tendensen",
    "diskussionen", "befolkningen", "eksperterne", "journalisten",
    "overskriften", "indlægget", "kommentaren", "emnet", "sagen", "forløbet",
    "baggrunden", "konteksten", "perspektivet", "vinklen", "dækningen",
    "reaktionen", "holdningen", "stemningen", "niveauet", "tonen",
    "retorikken", "fremstillingen", "formidlingen",
]

SIG_Q = [
    "hvorfor", "hvordan", "hvornår", "hvilken", "hvilke", "hvem",
    "hvorhenne", "hvorledes", "kilde", "kilder", "dokumentation", "uddybe",
    "forklare", "forklaring", "betyder", "menes", "baseret", "grundlag",
    "præcisere", "konkret", "specifikt", "sammenhængen", "udgangspunktet",
    "reference", "referencer", "bekræftelse", "belægges", "hvoraf",
    "hvorvidt", "hvortil",
]
SIG_Q_LOW = ["uddybningen", "kildekritikken", "belægsgrundlaget"]

NEGATION_WORDS = ["aldrig", "ingen", "intet", "hverken", "umuligt", "næppe", "ej", "ingenlunde"]
SWEAR_WORDS = ["fanden", "helvede", "pis", "lort", "satme"]
# every smiley surface must clean away to nothing under the tokenizer
POS_SMILEYS = [":)", ":-)", "=)", ":-))"]
NEG_SMILEYS = [":(", ":-(", ":/"]

# hand-picked long words for casing and word-length extremes
CAPS_WORD_25 = "sandsynlighedsvurderingen"
LONG_WORDS = ["beregningens", "hovedargument", "vurderingen"]

MEDIUM_BASE = [
    "s", "edit", "ok", "tak", "ja", "nej", "måske", "desværre", "heldigvis",
    "åbenbart", "tydeligvis", "muligvis", "sandsynligvis", "forhåbentlig",
    "selvfølgelig", "naturligvis", "egentlig", "faktisk", "virkelig",
    "altså", "derfor", "alligevel", "netop", "næsten", "bestemt", "absolut",
    "temmelig", "ganske", "særligt", "specielt", "generelt", "typisk",
    "normalt", "sjældent", "ofte", "gerne", "helst", "senere", "tidligere",
    "stadig", "allerede", "mio.", "ca.", "bl.a.", "fx", "pointen", "graden",
    "mange", "flere", "færre", "stort", "småt", "vigtigt", "centralt",
    "relevant", "interessant", "mærkeligt", "underligt", "pudsigt", "sært",
]

# Sentiment-bearing fillers get scores in the generated valence lexicon.
MEDIUM_SENTIMENT = [
    ("glimrende", 3), ("fremragende", 3), ("fantastisk", 3), ("dejligt", 2),
    ("fint", 2), ("rart", 2), ("positivt", 2), ("lovende", 2), ("rimeligt", 1),
    ("fornuftig", 1), ("acceptabelt", 1), ("brugbart", 1), ("gavnligt", 2),
    ("opmuntrende", 2), ("glædeligt", 2), ("elegant", 2), ("imponerende", 3),
    ("grimt", -2), ("skidt", -2), ("dårligt", -2), ("trist", -2),
    ("sørgeligt", -2), ("ubehageligt", -2), ("skuffende", -2),
    ("bekymrende", -2), ("foruroligende", -2), ("skadeligt", -2),
    ("elendigt", -3), ("forfærdeligt", -3), ("frygteligt", -3),
    ("rædselsfuldt", -3), ("katastrofalt", -3), ("uacceptabelt", -2),
    ("pinligt", -2), ("irriterende", -2), ("uheldigt", -1), ("tvivlsom", -1),
    ("problematisk", -2), ("farligt", -2), ("alvorligt", -1),
]

N_MEDIUM = 183
N_MINOR = 2430
N_TAIL = 10849
VOCAB_TARGET = 13663
DF_GE4_TARGET = 2814
DF_GE31_TARGET = 381

# Class occurrence floors for per-class most-frequent-word membership, and
# ceilings for everything else. Floors strictly exceed ceilings so the
# per-class top-100 is unambiguous.
MEMBER_MIN = {"S": 10, "D": 10, "Q": 4, "C": 90}
NONMEMBER_MAX = {"S": 9, "D": 9, "Q": 3, "C": 70}

# Share of each minority class written with no class-signal words at all;
# such posts read like generic commentary and cap attainable recall.
PLAIN_FRACTION = {0: 0.42, 1: 0.40, 2: 0.44}

# Class share used when spreading unconstrained words (S, D, Q, C).
CLASS_SPREAD = np.array([0.075, 0.080, 0.012, 0.833])

_SYL_ONSET = ["b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t",
              "v", "st", "br", "kl", "gr", "sk", "tr", "fl", "sn", "kr", "pl"]
_SYL_VOWEL = ["a", "e", "i", "o", "u", "y", "æ", "ø", "å"]
_SYL_CODA = ["", "n", "r", "t", "l", "s", "d", "g", "k", "m", "rn", "nd", "st", "ng", "rt"]
_SYL_SUFFIX = ["", "e", "en", "et", "er", "erne", "ede", "ning", "hed", "lig", "ske", "som"]


def _pseudo_word(rng: np.random.Generator, taken: set[str]) -> str:
    for _ in range(1000):
        n_syl = int(rng.integers(2, 4))
        parts = []
        for _ in range(n_syl):
            parts.append(str(rng.choice(_SYL_ONSET)))
            parts.append(str(rng.choice(_SYL_VOWEL)))
            parts.append(str(rng.choice(_SYL_CODA)))
        word = "".join(parts) + str(rng.choice(_SYL_SUFFIX))
        if 4 <= len(word) <= 16 and word not in taken:
            taken.add(word)
            return word
    raise RuntimeError("pseudo-word space exhausted")


@dataclass
class WordPlan:
    word: str
    tier: str  # stop | sig_s | sig_d | sig_c | sig_q | sig_q_low | medium | minor | tail
    counts: np.ndarray  # planned placements per class [S, D, Q, C]


def build_word_plans(rng: np.random.Generator) -> list[WordPlan]:
    plans: list[WordPlan] = []
    taken: set[str] = set(STOPWORDS)
    taken.add(CAPS_WORD_25)
    taken.update(LONG_WORDS)

    def add(word, tier, s, d, q, c):
        taken.add(word)
        plans.append(WordPlan(word, tier, np.array([s, d, q, c], dtype=np.int64)))

    for w in SIG_S:
        add(w, "sig_s", int(rng.integers(10, 15)), int(rng.integers(0, 4)),
            int(rng.integers(0, 2)), int(rng.integers(24, 42)))
    for w in SIG_D:
        add(w, "sig_d", int(rng.integers(0, 4)), int(rng.integers(10, 15)),
            int(rng.integers(0, 2)), int(rng.integers(24, 42)))
    for w in SIG_C:
        add(w, "sig_c", int(rng.integers(3, 9)), int(rng.integers(3, 9)),
            int(rng.integers(0, 2)), int(rng.integers(92, 116)))
    for w in SIG_Q:
        add(w, "sig_q", int(rng.integers(0, 3)), int(rng.integers(0, 3)),
            int(rng.integers(5, 8)), int(rng.integers(38, 56)))
    for w in SIG_Q_LOW:
        add(w, "sig_q_low", 0, 0, int(rng.integers(4, 6)), int(rng.integers(4, 10)))

    # medium tier: fixed special words first, then named fillers, then pseudo.
    for w in NEGATION_WORDS:
        add(w, "medium", int(rng.integers(5, 10)), int(rng.integers(6, 10)),
            int(rng.integers(0, 3)), int(rng.integers(45, 61)))
    for w in SWEAR_WORDS:
        add(w, "medium", int(rng.integers(2, 5)), int(rng.integers(5, 10)),
            int(rng.integers(0, 2)), int(rng.integers(24, 33)))
    add("s", "medium", int(rng.integers(4, 7)), int(rng.integers(4, 7)), 1, int(rng.integers(45, 56)))
    add("edit", "medium", int(rng.integers(6, 9)), int(rng.integers(5, 8)), 1, int(rng.integers(55, 66)))

    named_medium = [w for w in MEDIUM_BASE if w not in ("s", "edit")]
    named_medium += [w for w, _ in MEDIUM_SENTIMENT]
    n_pseudo_medium = N_MEDIUM - len(NEGATION_WORDS) - len(SWEAR_WORDS) - 2 - len(named_medium)
    assert n_pseudo_medium >= 0, n_pseudo_medium
    medium_words = list(named_medium) + [
        _pseudo_word(rng, taken) for _ in range(n_pseudo_medium)
    ]
    for w in medium_words:
        df = int(rng.integers(34, 96))
        q = int(rng.integers(0, 3)) if rng.random() < 0.25 else 0
        s = min(NONMEMBER_MAX["S"], int(rng.binomial(df, 0.08)))
        d = min(NONMEMBER_MAX["D"], int(rng.binomial(df, 0.08)))
        c = df - q - s - d
        if c > NONMEMBER_MAX["C"]:
            c = NONMEMBER_MAX["C"]
        add(w, "medium", s, d, q, c)

    # minor tier: document frequencies 4..28
    numeric_minor = ["3,5", "1,5", "2,5", "12,5", "t.v.", "pr.", "2018", "2019", "100"]
    minor_words = list(numeric_minor)
    for w in minor_words:
        taken.add(w)
    while len(minor_words) < N_MINOR:
        minor_words.append(_pseudo_word(rng, taken))
    for w in minor_words:
        df = 4 + int(rng.pareto(1.3))
        df = min(df, 28)
        q = 1 if rng.random() < 0.03 else 0
        s = min(12, int(rng.binomial(df, 0.08)), df - q - 1)
        d = min(12, int(rng.binomial(df, 0.08)), df - q - s - 1)
        c = df - q - s - d
        add(w, "minor", s, d, q, c)

    # tail tier: df 1..3, exact totals; the first four entries are fixed
    # words used by decoration (casing and word-length extremes).
    tail_dfs = [1] * 9400 + [2] * 1000 + [3] * 449
    assert len(tail_dfs) == N_TAIL
    long_tail: list[str] = [CAPS_WORD_25] + list(LONG_WORDS)
    while len(long_tail) < N_TAIL:
        long_tail.append(_pseudo_word(rng, taken))
    for i, (w, df) in enumerate(zip(long_tail, tail_dfs)):
        if i == 0:
            add(w, "tail", 0, 0, 0, 1)
            continue
        if 1 <= i <= 3:
            # pinned to the designated long-word post (Commenting)
            add(w, "tail", 0, 0, 0, 1)
            continue
        counts = np.zeros(4, dtype=np.int64)
        for _ in range(df):
            counts[int(rng.choice(4, p=CLASS_SPREAD))] += 1
        if counts[2] > 3:  # keep out of the Q top-100
            counts[3] += counts[2] - 3
            counts[2] = 3
        add(w, "tail", *counts.tolist())

    assert len(plans) == len(SIG_S) + len(SIG_D) + len(SIG_C) + len(SIG_Q) + 3 + N_MEDIUM + N_MINOR + N_TAIL
    return plans


# ---------------------------------------------------------------------------
# Structure realization
# ---------------------------------------------------------------------------


@dataclass
class GenPost:
    key: str
    sub_key: str
    klass: int                  # SDQC code
    is_trunk: bool
    conv_index: int
    capacity: int = 0
    tokens: list[str] = field(default_factory=list)
    words: set[str] = field(default_factory=set)
    url_count: int = 0
    quote_count: int = 0
    sarcasm: bool = False
    edited: bool = False
    pos_smileys: int = 0
    neg_smileys: int = 0
    q_marks: int = 0
    excls: int = 0
    dots: int = 0
    period: bool = False
    acronym: bool = False
    caps_word: str | None = None  # rendered fully uppercase
    first_cap: bool = True
    created: float = 0.0
    upvotes: int = 0
    user_idx: int = 0
    is_submitter: bool = False
    reply_count: int = 0
    raw_text: str = ""
    locked: bool = False      # content fixed up front; scheduling must not touch
    all_caps: bool = False
    plain: bool = False       # carries no signal words of its own class


@dataclass
class GenConv:
    index: int
    pure_c: bool
    trunk: list[GenPost]
    leaves: list[GenPost]

    def branches(self) -> list[list[GenPost]]:
        if not self.leaves:
            return [list(self.trunk)]
        return [list(self.trunk) + [leaf] for leaf in self.leaves]

    def posts(self) -> list[GenPost]:
        return list(self.trunk) + list(self.leaves)


@dataclass
class GenSub:
    profile: SubProfile
    convs: list[GenConv]
    posts: list[GenPost]
    created: float = 0.0
    author_idx: int = 0
    upvotes: int = 0


def _split_total(rng, total: int, parts: int, minimum: int) -> list[int]:
    """Deterministic jittered partition of `total` into `parts` >= minimum."""
    assert parts > 0 and total >= parts * minimum, (total, parts, minimum)
    weights = rng.dirichlet(np.full(parts, 2.5))
    spare = total - parts * minimum
    alloc = np.floor(weights * spare).astype(int)
    rest = spare - int(alloc.sum())
    order = np.argsort(-(weights * spare - alloc))
    for i in range(rest):
        alloc[order[i % parts]] += 1
    return [minimum + int(a) for a in alloc]


def realize_structure(rng: np.random.Generator, profile: SubProfile) -> GenSub:
    S, D, Q, C = profile.sdqc
    serial = 0

    def new_post(klass: int, is_trunk: bool, conv_index: int) -> GenPost:
        nonlocal serial
        serial += 1
        return GenPost(
            key=f"t1_{profile.key}c{serial:04d}",
            sub_key=profile.key,
            klass=klass,
            is_trunk=is_trunk,
            conv_index=conv_index,
        )

    convs: list[GenConv] = []
    # pure-Commenting conversations are plain chains
    if profile.pure_convs:
        sizes = _split_total(rng, profile.pure_posts, profile.pure_convs, 2)
        for size in sizes:
            idx = len(convs)
            trunk = [new_post(3, True, idx) for _ in range(size)]
            convs.append(GenConv(index=idx, pure_c=True, trunk=trunk, leaves=[]))

    n_mixed = profile.mixed_convs
    branches_left = profile.branches - profile.pure_convs
    posts_left = profile.posts - profile.pure_posts
    branch_alloc = _split_total(rng, branches_left, n_mixed, 1)
    if profile.key == "r13":
        # one oversized reply fan anchors the reply-count range
        branch_alloc = [15] + _split_total(rng, branches_left - 15, n_mixed - 1, 1)
    # posts per conv: chains need >= 1, brooms need >= branches + 1
    minima = [b if b == 1 else b + 1 for b in branch_alloc]
    spare = posts_left - sum(minima)
    assert spare >= 0, (profile.key, spare)
    extra = _split_total(rng, spare, n_mixed, 0) if n_mixed else []

    # label pool for mixed conversations
    pool = [0] * S + [1] * D + [2] * Q + [3] * (C - profile.pure_posts)
    rng.shuffle(pool)
    non_c = [l for l in pool if l != 3]
    n_c = len(pool) - len(non_c)
    assert len(non_c) >= n_mixed, (profile.key, len(non_c), n_mixed)

    mixed: list[tuple[list[GenPost], list[GenPost]]] = []
    for b, add in zip(branch_alloc, extra):
        idx = len(convs) + len(mixed)
        p = (b if b == 1 else b + 1) + add
        if b == 1:
            trunk_len, n_leaves = p, 0
        else:
            trunk_len, n_leaves = p - b, b
        trunk = [new_post(3, True, idx) for _ in range(trunk_len)]
        leaves = [new_post(3, False, idx) for _ in range(n_leaves)]
        mixed.append((trunk, leaves))

    # Every mixed conversation gets one non-C post in its trunk, so none of its
    # branches is pure-Commenting. Remaining non-C labels prefer trunk slots.
    trunk_bias = {"True": 2.4, "False": 1.7, "Unverified": 1.7, None: 1.5}[profile.truth]
    rng.shuffle(non_c)
    forced, spare_labels = non_c[:len(mixed)], non_c[len(mixed):]
    open_slots: list[GenPost] = []
    for (trunk, leaves), label in zip(mixed, forced):
        slot = trunk[int(rng.integers(0, len(trunk)))]
        slot.klass = label
        open_slots.extend(p for p in trunk if p is not slot)
        open_slots.extend(leaves)
    if spare_labels:
        weights = np.array([trunk_bias if p.is_trunk else 1.0 for p in open_slots])
        weights /= weights.sum()
        picked = rng.choice(len(open_slots), size=len(spare_labels), replace=False, p=weights)
        for label, slot_i in zip(spare_labels, picked):
            open_slots[slot_i].klass = label

    for trunk, leaves in mixed:
        convs.append(GenConv(index=len(convs), pure_c=False, trunk=trunk, leaves=leaves))

    sub = GenSub(profile=profile, convs=convs, posts=[p for cv in convs for p in cv.posts()])
    # bookkeeping checks
    got = [0, 0, 0, 0]
    for p in sub.posts:
        got[p.klass] += 1
    assert tuple(got) == profile.sdqc, (profile.key, got, profile.sdqc)
    assert sum(len(cv.branches()) for cv in convs) == profile.branches
    assert len(sub.posts) == profile.posts
    for cv in convs:
        if not cv.pure_c:
            assert any(p.klass != 3 for p in cv.trunk), (profile.key, cv.index)
    return sub


# ---------------------------------------------------------------------------
# Token scheduling
# ---------------------------------------------------------------------------

STOP_QUOTA = {"S": 20, "D": 20, "Q": 4, "C": 90}
FILL_FRACTION = {0: 0.30, 1: 0.30, 2: 0.24, 3: 0.30}
CLASS_LETTER = {0: "S", 1: "D", 2: "Q", 3: "C"}


def _stop_weights() -> np.ndarray:
    w = 1.0 / np.power(np.arange(len(STOPWORDS)) + 2.0, 0.85)
    return w / w.sum()


def deal_tokens(
    rng: np.random.Generator,
    subs: list[GenSub],
    plans: list[WordPlan],
    pinned: dict[str, list[int]] | None = None,
) -> None:
    """Distribute planned word placements over posts, then pad with stopwords.

    `pinned` maps words to class codes whose placements were consumed by
    pre-filled locked posts; those placements are not dealt again.
    """
    posts_by_class: dict[int, list[GenPost]] = {0: [], 1: [], 2: [], 3: []}
    for sub in subs:
        for p in sub.posts:
            posts_by_class[p.klass].append(p)

    # class placement lists, net of pinned occurrences
    consumed: dict[tuple[str, int], int] = {}
    for word, classes in (pinned or {}).items():
        for klass in classes:
            consumed[(word, klass)] = consumed.get((word, klass), 0) + 1
    placements: dict[int, list[str]] = {0: [], 1: [], 2: [], 3: []}
    for plan in plans:
        for klass in range(4):
            n = int(plan.counts[klass]) - consumed.pop((plan.word, klass), 0)
            assert n >= 0, (plan.word, klass)
            placements[klass].extend([plan.word] * n)
    assert not consumed, f"pinned words missing from plans: {sorted(consumed)}"

    own_sig = {
        0: frozenset(SIG_S),
        1: frozenset(SIG_D),
        2: frozenset(SIG_Q) | frozenset(SIG_Q_LOW),
        3: frozenset(),
    }
    stop_w = _stop_weights()
    for klass in range(4):
        posts = [p for p in posts_by_class[klass] if not p.locked]
        if klass in PLAIN_FRACTION:
            n_plain = int(round(PLAIN_FRACTION[klass] * len(posts)))
            for j in rng.permutation(len(posts))[:n_plain]:
                posts[j].plain = True
        sig_words = own_sig[klass]
        n_place = len(placements[klass])
        quota_total = STOP_QUOTA[CLASS_LETTER[klass]] * len(STOPWORDS)
        total_tokens = int(round((n_place + quota_total) / (1.0 - FILL_FRACTION[klass])))
        base = max(3.0, total_tokens / max(1, len(posts)))
        lengths = np.maximum(3, np.rint(base * rng.lognormal(0.0, 0.45, size=len(posts)))).astype(int)
        if klass == 3:
            # one deliberately huge post anchors the length range
            lengths[int(np.argmax(lengths))] = 300
        # rescale to the target total
        diff = total_tokens - int(lengths.sum())
        order = rng.permutation(len(posts))
        i = 0
        while diff != 0 and len(posts) > 0:
            j = order[i % len(posts)]
            if diff > 0:
                lengths[j] += 1
                diff -= 1
            elif lengths[j] > 3:
                lengths[j] -= 1
                diff += 1
            elif int(lengths.max()) <= 3:
                break
            i += 1
        for p, ln in zip(posts, lengths):
            p.capacity = int(ln)

        # word placements: no word twice in one post
        word_list = placements[klass]
        rng.shuffle(word_list)
        slots = np.repeat(np.arange(len(posts)), [p.capacity for p in posts])
        rng.shuffle(slots)
        ptr = 0
        for word in word_list:
            blocked = word in sig_words
            placed = False
            scan = ptr
            while scan < len(slots):
                post = posts[slots[scan]]
                if (word not in post.words and len(post.tokens) < post.capacity
                        and not (blocked and post.plain)):
                    slots[ptr], slots[scan] = slots[scan], slots[ptr]
                    post.tokens.append(word)
                    post.words.add(word)
                    ptr += 1
                    placed = True
                    break
                scan += 1
            if not placed:
                # soft overflow: append to a random post lacking the word
                for _ in range(200):
                    post = posts[int(rng.integers(0, len(posts)))]
                    if word not in post.words and not (blocked and post.plain):
                        post.tokens.append(word)
                        post.words.add(word)
                        post.capacity += 1
                        placed = True
                        break
            assert placed, f"could not place {word!r} in class {klass}"

        # stopword presence quotas (locked posts count but are never altered)
        quota = STOP_QUOTA[CLASS_LETTER[klass]]
        all_in_class = posts_by_class[klass]
        for sw in STOPWORDS:
            have = sum(1 for p in all_in_class if sw in p.words)
            need = quota - have
            if need <= 0:
                continue
            candidates = [p for p in posts if sw not in p.words]
            rng.shuffle(candidates)
            assert len(candidates) >= need, (sw, klass)
            for p in candidates[:need]:
                p.tokens.append(sw)
                p.words.add(sw)
                if len(p.tokens) > p.capacity:
                    p.capacity = len(p.tokens)

        # fill to capacity with stopwords, at most two of each per post
        for p in posts:
            misses = 0
            while len(p.tokens) < p.capacity and misses < 200:
                sw = STOPWORDS[int(rng.choice(len(STOPWORDS), p=stop_w))]
                if p.tokens.count(sw) >= 2:
                    misses += 1
                    continue
                p.tokens.append(sw)
                p.words.add(sw)

    for sub in subs:
        for p in sub.posts:
            if not p.locked:
                rng.shuffle(p.tokens)

# ---------------------------------------------------------------------------
# Decorations: markers, punctuation, smileys, sentiment extremes
# ---------------------------------------------------------------------------

URL_DOMAINS = ["dr.dk", "tv2.dk", "politiken.dk", "berlingske.dk", "jyllands-posten.dk",
               "videnskab.dk", "altinget.dk", "ft.dk"]


def _sample_posts(rng, posts, k, pred=None):
    cand = [p for p in posts if not p.locked and (pred is None or pred(p))]
    rng.shuffle(cand)
    assert len(cand) >= k, (len(cand), k)
    return cand[:k]


def decorate_posts(rng: np.random.Generator, subs: list[GenSub], plans: list[WordPlan]) -> None:
    """Assign URL/quote markers, punctuation, smileys and casing flags."""
    all_posts = [p for sub in subs for p in sub.posts]
    by_class: dict[int, list[GenPost]] = {0: [], 1: [], 2: [], 3: []}
    for p in all_posts:
        by_class[p.klass].append(p)

    # URL marker: presence S 8, D 8, C 60 (never Q); one post gets 20 links.
    # S/D presence stays below every frequent-word count so the marker token
    # cannot enter a minority-class top 100.
    url_presence = {0: 8, 1: 8, 3: 60}
    url_posts: list[GenPost] = []
    for klass, n in url_presence.items():
        url_posts.extend(_sample_posts(rng, by_class[klass], n))
    for p in url_posts:
        p.url_count = 1
    # the link-farm post lives in the majority class so the marker token's
    # total count stays below every minority top-100 cutoff
    heavy = max((p for p in url_posts if p.klass == 3), key=lambda p: p.capacity)
    heavy.url_count = 20
    for p in url_posts:
        for _ in range(p.url_count):
            p.tokens.insert(int(rng.integers(0, len(p.tokens) + 1)), URL_TOKEN)

    # quote marker: presence S 8, D 8, C 60; counts mostly 1, one post 5.
    quote_presence = {0: 8, 1: 8, 3: 60}
    quote_posts: list[GenPost] = []
    for klass, n in quote_presence.items():
        quote_posts.extend(_sample_posts(rng, by_class[klass], n, lambda p: p.url_count == 0))
    for p in quote_posts:
        p.quote_count = 1
    max((p for p in quote_posts if p.klass == 3), key=lambda p: p.capacity).quote_count = 5
    for p in quote_posts:
        for _ in range(p.quote_count):
            p.tokens.insert(0, QUOTE_TOKEN)

    # sarcasm and edit markers ride on the scheduled "s" / "edit" tokens
    for p in all_posts:
        if "s" in p.words:
            p.sarcasm = True
        if "edit" in p.words:
            p.edited = True

    # smileys: positive on 120 posts (some repeated), negative on 24 posts
    pos_posts = _sample_posts(rng, all_posts, 120)
    for p in pos_posts:
        p.pos_smileys = 1
    for p in _sample_posts(rng, pos_posts, 14):
        p.pos_smileys = int(rng.integers(2, 5))
    neg_posts = _sample_posts(rng, all_posts, 24, lambda p: p.pos_smileys == 0)
    for p in neg_posts:
        p.neg_smileys = 1
    neg_posts[0].neg_smileys = 6

    # question marks: most Q posts, many rhetorical others; one post 7.
    for p in by_class[2]:
        if not p.locked and rng.random() < 0.75:
            p.q_marks = 1
    rhet = _sample_posts(rng, by_class[0] + by_class[1] + by_class[3], 520)
    for p in rhet:
        p.q_marks = 1
    max((p for p in by_class[2] if not p.locked), key=lambda p: p.capacity).q_marks = 7

    # exclamation marks: 90 posts, one with 10
    exc = _sample_posts(rng, all_posts, 90)
    for p in exc:
        p.excls = 1 if rng.random() < 0.8 else 2
    exc[0].excls = 10

    # ellipsis: 60 posts, one with 7
    dot = _sample_posts(rng, all_posts, 60)
    for p in dot:
        p.dots = 1
    dot[0].dots = 7

    # closing period on roughly half of all posts
    for p in all_posts:
        if p.locked:
            continue
        p.period = bool(rng.random() < 0.5)
        p.first_cap = bool(rng.random() < 0.85)

    # acronym casing: ~18% of posts render one alpha token uppercase
    for p in all_posts:
        if not p.locked and rng.random() < 0.18:
            cands = [t for t in p.tokens
                     if 3 <= len(t) <= 8 and t.isalpha() and t not in (URL_TOKEN, QUOTE_TOKEN)]
            if cands:
                p.acronym = True
                p.caps_word = cands[int(rng.integers(0, len(cands)))]

    # The post holding the fixed 25-letter word renders it fully uppercase:
    # the global maximum run of capitals. Everything else stays at 8 or less.
    hosts = [p for p in all_posts if CAPS_WORD_25 in p.words]
    assert len(hosts) == 1
    hosts[0].caps_word = CAPS_WORD_25
    hosts[0].acronym = True

    # one short all-alpha post renders fully uppercase so the capital-letter
    # share spans its full range
    caps_cand = [
        p for p in all_posts
        if not p.locked and 3 <= len(p.tokens) <= 5 and p.url_count == 0
        and p.quote_count == 0
        and not p.sarcasm and not p.edited
        and all(t.isalpha() and len(t) <= 8 for t in p.tokens)
    ]
    assert caps_cand
    caps_cand[int(rng.integers(0, len(caps_cand)))].all_caps = True


def stuff_lexicon(rng: np.random.Generator, subs: list[GenSub]) -> None:
    """Pin the per-post maxima of the negation and swear-word counters."""
    all_posts = [p for sub in subs for p in sub.posts]
    host = max((p for p in all_posts if not p.locked and p.klass == 3),
               key=lambda p: len(p.tokens) if not any(w in p.words for w in NEGATION_WORDS) else 0)
    for w in NEGATION_WORDS[:6]:
        if w not in host.words:
            host.tokens.append(w)
            host.words.add(w)
    sw_host = max((p for p in all_posts if not p.locked and p is not host and p.klass == 1),
                  key=lambda p: len(p.tokens))
    for w in SWEAR_WORDS[:3]:
        if w not in sw_host.words:
            sw_host.tokens.append(w)
            sw_host.words.add(w)


def sentiment_scores() -> dict[str, int]:
    scores: dict[str, int] = {}
    for i, w in enumerate(SIG_S[:10]):
        scores[w] = 3 if i < 4 else 2
    for i, w in enumerate(SIG_D[:10]):
        scores[w] = -3 if i < 4 else -2
    for w, s in MEDIUM_SENTIMENT:
        scores[w] = s
    for w in SWEAR_WORDS:
        scores[w] = -2
    return scores


def shape_sentiment(rng: np.random.Generator, subs: list[GenSub], plans: list[WordPlan]) -> None:
    """Clamp per-post valence into [-12, 12] and pin both endpoints exactly."""
    scores = sentiment_scores()
    all_posts = [p for sub in subs for p in sub.posts if not p.locked]
    by_plan = {plan.word: plan for plan in plans}

    # realized per-class presence, maintained as tokens are swapped out
    realized: dict[str, np.ndarray] = {}
    for p in all_posts:
        for w in p.words:
            if w in scores:
                realized.setdefault(w, np.zeros(4, dtype=np.int64))[p.klass] += 1

    member_floor = {"sig_s": (MEMBER_MIN["S"], 0), "sig_d": (0, MEMBER_MIN["D"])}

    def removable(word: str, klass: int) -> bool:
        plan = by_plan.get(word)
        if plan is None:
            return False
        counts = realized[word]
        if int(counts.sum()) - 1 < 31 and plan.tier in ("sig_s", "sig_d", "medium"):
            return False
        s_floor, d_floor = member_floor.get(plan.tier, (0, 0))
        if klass == 0 and counts[0] - 1 < s_floor:
            return False
        if klass == 1 and counts[1] - 1 < d_floor:
            return False
        return True

    def post_score(p: GenPost) -> int:
        return sum(scores.get(t, 0) for t in p.tokens)

    for p in all_posts:
        s = post_score(p)
        guard = 0
        while abs(s) > 12:
            guard += 1
            assert guard < 60, (p.key, s)
            sign = 1 if s > 0 else -1
            cands = [t for t in p.tokens
                     if scores.get(t, 0) * sign > 0 and removable(t, p.klass)]
            assert cands, (p.key, s)
            tok = max(cands, key=lambda t: scores[t] * sign)
            swap = next(sw for sw in STOPWORDS if p.tokens.count(sw) < 2)
            p.tokens[p.tokens.index(tok)] = swap
            p.words.add(swap)
            p.words.discard(tok)
            realized[tok][p.klass] -= 1
            s = post_score(p)

    def pin(value: int) -> None:
        sign = 1 if value > 0 else -1
        # signal words may be appended here, so plain posts are not eligible
        best = max((p for p in all_posts if not p.plain),
                   key=lambda p: post_score(p) * sign)
        need = value - post_score(best)
        cands = sorted(
            (w for w, sc in scores.items() if sc * sign > 0 and w not in best.words),
            key=lambda w: -abs(scores[w]),
        )
        for w in cands:
            if need == 0:
                break
            if abs(scores[w]) <= abs(need):
                best.tokens.append(w)
                best.words.add(w)
                realized.setdefault(w, np.zeros(4, dtype=np.int64))[best.klass] += 1
                need -= scores[w]
        assert need == 0, (value, need)

    pin(12)
    pin(-12)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def render_post(rng: np.random.Generator, post: GenPost) -> str:
    toks = list(post.tokens)
    n_quotes = post.quote_count
    assert all(t == QUOTE_TOKEN for t in toks[:n_quotes])
    body = toks[n_quotes:]

    surfaces: list[str] = []
    first_body = True
    for t in body:
        if t == URL_TOKEN:
            dom = URL_DOMAINS[int(rng.integers(0, len(URL_DOMAINS)))]
            slug = "".join(chr(97 + int(rng.integers(0, 26))) for _ in range(8))
            surfaces.append(f"https://{dom}/{slug}")
            first_body = False
            continue
        s = t
        if t == "s":
            s = "/s"
        elif t == "edit":
            s = "edit:"
        elif post.all_caps and t.isalpha():
            s = t.upper()
        elif post.caps_word is not None and t == post.caps_word and t.isalpha():
            s = t.upper()
            post.caps_word = None  # uppercase only the first occurrence
        elif first_body and post.first_cap and s[0].isalpha():
            s = s[0].upper() + s[1:]
        first_body = False
        surfaces.append(s)

    # punctuation decorations attach to existing surfaces
    def attach(suffix: str, count: int, min_len: int = 4) -> None:
        done = 0
        for i in range(len(surfaces) - 1, -1, -1):
            if done >= count:
                return
            s = surfaces[i]
            if (len(s) >= min_len and s[-1].isalpha() and not s.startswith("http")
                    and s not in ("/s", "edit:")):
                surfaces[i] = s + suffix
                done += 1
        # fall back: append bare suffix tokens (they clean away)
        while done < count:
            surfaces.append(suffix)
            done += 1

    if post.period:
        attach(".", 1)
    if post.q_marks:
        attach("?", post.q_marks, min_len=2)
    if post.excls:
        attach("!", post.excls, min_len=2)
    if post.dots:
        attach("...", post.dots)
    for _ in range(post.pos_smileys):
        surfaces.append(POS_SMILEYS[int(rng.integers(0, len(POS_SMILEYS)))])
    for _ in range(post.neg_smileys):
        surfaces.append(NEG_SMILEYS[int(rng.integers(0, len(NEG_SMILEYS)))])

    lines = []
    for _ in range(n_quotes):
        n_junk = int(rng.integers(2, 6))
        junk = " ".join(STOPWORDS[int(rng.integers(0, len(STOPWORDS)))] for _ in range(n_junk))
        lines.append("> " + junk)
    lines.append(" ".join(surfaces))
    raw = "\n".join(lines)

    got = preprocess(raw)
    assert got == post.tokens, (post.key, got[:30], post.tokens[:30])
    return raw



# ---------------------------------------------------------------------------
# Special fixed-content posts
# ---------------------------------------------------------------------------


def assign_specials(rng: np.random.Generator, subs: list[GenSub]) -> dict[str, list[int]]:
    """Lock a few posts to fixed token lists that pin feature ranges.

    Returns the pinned word placements consumed by these posts, keyed by word
    with a list of class codes.
    """
    by_key = {sub.profile.key: sub for sub in subs}

    def pick(sub_key: str, klass: int, skip: int = 0) -> GenPost:
        cands = [p for p in by_key[sub_key].posts if p.klass == klass and not p.locked]
        return cands[skip]

    pinned: dict[str, list[int]] = {}

    tiny = pick("n11", 3)
    tiny.tokens = ["ok"]
    tiny.words = {"ok"}
    tiny.capacity = 1
    tiny.locked = True
    pinned.setdefault("ok", []).append(3)

    short_q = pick("n11", 2)
    short_q.tokens = ["hvorfor", "det"]
    short_q.words = {"hvorfor", "det"}
    short_q.capacity = 2
    short_q.locked = True
    short_q.q_marks = 1
    pinned.setdefault("hvorfor", []).append(2)

    longpost = pick("n10", 3)
    longpost.tokens = list(LONG_WORDS)
    longpost.words = set(LONG_WORDS)
    longpost.capacity = len(LONG_WORDS)
    longpost.locked = True
    for w in LONG_WORDS:
        pinned.setdefault(w, []).append(3)

    return pinned


# ---------------------------------------------------------------------------
# Users, timestamps, vote counts
# ---------------------------------------------------------------------------

N_USERS = 700
_TIME_FMT = "%Y-%m-%d %H:%M:%S"


def _fmt_time(epoch: float) -> str:
    from datetime import datetime, timezone

    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime(_TIME_FMT)


def _parse_date(day: str) -> float:
    from datetime import datetime, timezone

    return datetime.strptime(day, "%Y-%m-%d").replace(tzinfo=timezone.utc).timestamp()


def build_users(rng: np.random.Generator) -> list[dict]:
    users = []
    for i in range(N_USERS):
        karma = int(round(float(np.exp(rng.normal(7.2, 1.1)))))
        karma = min(karma, 99000)
        created = 1230768000.0 + float(rng.uniform(0, 2.9e8))
        users.append({
            "id": f"u{i:04d}",
            "karma": karma,
            "created": _fmt_time(created),
            "gold_status": bool(rng.random() < 0.05),
            "is_employee": False,
            "has_verified_email": bool(rng.random() < 0.45),
        })
    # pin the karma range
    users[17]["karma"] = 100000
    users[23]["karma"] = -200
    users[41]["karma"] = -50
    users[55]["karma"] = -120
    return users


def assign_metadata(rng: np.random.Generator, subs: list[GenSub], users: list[dict]) -> None:
    for sub in subs:
        prof = sub.profile
        sub.created = _parse_date(EVENT_DATES[prof.event]) + float(rng.uniform(0, 25)) * 86400.0
        sub.author_idx = int(rng.integers(0, N_USERS))
        sub.upvotes = int(np.clip(round(float(np.exp(rng.normal(4.0, 1.2)))), 0, 9000))

        t = sub.created
        for conv in sub.convs:
            t += float(rng.uniform(400, 14000))
            ct = t
            for i, p in enumerate(conv.trunk):
                ct += float(rng.uniform(60, 1800)) if i == 0 else float(rng.uniform(120, 5400))
                p.created = ct
            lt = ct
            for leaf in conv.leaves:
                lt += float(rng.uniform(60, 3600))
                leaf.created = lt
            # reply wiring
            for i, p in enumerate(conv.trunk[:-1]):
                p.reply_count = 1
            conv.trunk[-1].reply_count = len(conv.leaves)
            for leaf in conv.leaves:
                leaf.reply_count = 0

        for p in sub.posts:
            p.user_idx = int(rng.integers(0, N_USERS))
            if rng.random() < 0.10:
                p.is_submitter = True
                p.user_idx = sub.author_idx
            p.upvotes = int(np.clip(round(float(np.exp(rng.normal(2.0, 1.6)))) - 2, -15, 380))

    # pin the vote range on two distinct fixed posts
    flat = [p for sub in subs for p in sub.posts]
    hi_i = int(rng.integers(0, len(flat)))
    lo_i = int(rng.integers(0, len(flat) - 1))
    if lo_i == hi_i:
        lo_i += 1
    flat[hi_i].upvotes = 400
    flat[lo_i].upvotes = -40

    for sub in subs:
        for p in sub.posts:
            p.raw_text = render_post(rng, p)


# ---------------------------------------------------------------------------
# Corpus writer
# ---------------------------------------------------------------------------

STANCE_WORD = {0: "Supporting", 1: "Denying", 2: "Querying", 3: "Commenting"}

NONRUMOUR_TITLE_FORMS = [
    "Ugens diskussion om {e}",
    "Hvad mener I om {e}?",
    "Samlet debat: {e}",
    "Tanker om {e} lige nu",
    "Opfølgning på {e}",
]

RUMOUR_CLAIMS = {
    "r01": "5G-udrulningen skader helbredet",
    "r02": "Målingerne omkring 5G holdes tilbage",
    "r03": "Strålingen fra 5G overskrider grænserne",
    "r04": "DR har klippet Trump-interviewet bevidst",
    "r05": "En 16-årig blev afvist ved grænsen pga. en Trump-udtalelse",
    "r06": "En dansk statsborger er udrejst til ISIS",
    "r07": "En dansk studerende har kæmpet mod ISIS",
    "r08": "Kostrådene bygger på forkert evidens",
    "r09": "Fedtfattig kost gør mere skade end gavn",
    "r10": "Opslaget om instruktøren er ægte",
    "r11": "Den savnede ubåd er fundet på havbunden",
    "r12": "Ubådens forlis var en bevidst handling",
    "r13": "Den sigtede har tilstået i en aflytning",
    "r14": "En embedsmand dækkede over støtte til naboer",
    "r15": "DSB-ansatte varsler nye arbejdsnedlæggelser",
    "r16": "Ulven ved Ulfborg er en hybrid",
}


def _submission_text(rng: np.random.Generator) -> str:
    n = int(rng.integers(14, 26))
    words = [STOPWORDS[int(rng.integers(0, len(STOPWORDS)))] for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def write_corpus(dast_dir: Path, subs: list[GenSub], users: list[dict],
                 rng: np.random.Generator) -> None:
    deleted_tail_subs = {"n02", "n10", "r03", "r13"}
    mid_decoy_subs = {"n11", "n03"}

    for sub in subs:
        prof = sub.profile
        sub_id = f"t3_{prof.key}"
        author = users[sub.author_idx]

        def entry(p: GenPost, parent_id: str) -> dict:
            return {
                "comment_id": p.key,
                "text": p.raw_text,
                "is_deleted": False,
                "created": _fmt_time(p.created),
                "is_submitter": p.is_submitter,
                "submission_id": sub_id,
                "parent_id": parent_id,
                "comment_url": f"https://www.reddit.com/r/Denmark/comments/{prof.key}/c/{p.key[3:]}",
                "upvotes": p.upvotes,
                "replies": p.reply_count,
                "user": users[p.user_idx],
                "SDQC_Submission": STANCE_WORD[p.klass],
                "SDQC_Parent": STANCE_WORD[p.klass if rng.random() < 0.8 else int(rng.integers(0, 4))],
            }

        def decoy_entry(comment_id: str, parent_id: str, created: float,
                        deleted: bool, annotated: bool) -> dict:
            n = int(rng.integers(4, 9))
            junk = " ".join(STOPWORDS[int(rng.integers(0, len(STOPWORDS)))] for _ in range(n))
            return {
                "comment_id": comment_id,
                "text": "[deleted]" if deleted else junk,
                "is_deleted": deleted,
                "created": _fmt_time(created),
                "is_submitter": False,
                "submission_id": sub_id,
                "parent_id": parent_id,
                "comment_url": f"https://www.reddit.com/r/Denmark/comments/{prof.key}/c/{comment_id[3:]}",
                "upvotes": 1,
                "replies": 0,
                "user": users[int(rng.integers(0, len(users)))],
                "SDQC_Submission": STANCE_WORD[3] if annotated else None,
                "SDQC_Parent": STANCE_WORD[3] if annotated else None,
            }

        branches_json: list[list[dict]] = []
        n_decoys = 0
        tail_done = False
        mid_done = False
        for conv in sub.convs:
            for bi, branch in enumerate(conv.branches()):
                arr = []
                parent = sub_id
                for p in branch:
                    arr.append(entry(p, parent))
                    parent = p.key
                if (prof.key in deleted_tail_subs and not tail_done
                        and not conv.leaves and len(branch) >= 2):
                    last = branch[-1]
                    del_id = f"t1_{prof.key}x1"
                    arr.append(decoy_entry(del_id, last.key, last.created + 600, True, False))
                    arr.append(decoy_entry(f"t1_{prof.key}x2", del_id,
                                           last.created + 1200, False, True))
                    arr[-3]["replies"] += 1
                    n_decoys += 2
                    tail_done = True
                elif (prof.key in mid_decoy_subs and not mid_done
                        and conv.pure_c and len(branch) >= 2 and bi == 0):
                    mid = decoy_entry(f"t1_{prof.key}x3", arr[0]["comment_id"],
                                      branch[0].created + 30, False, False)
                    arr.insert(1, mid)
                    n_decoys += 1
                    mid_done = True
                branches_json.append(arr)

        if prof.is_rumour:
            title = TITLE_STEMS[prof.key]
        else:
            form = NONRUMOUR_TITLE_FORMS[int(rng.integers(0, len(NONRUMOUR_TITLE_FORMS)))]
            title = form.format(e=prof.event)

        doc = {
            "redditSubmission": {
                "title": title,
                "text": _submission_text(rng),
                "submission_id": sub_id,
                "created": _fmt_time(sub.created),
                "num_comments": len(sub.posts) + n_decoys,
                "url": f"https://www.reddit.com/r/Denmark/comments/{prof.key}/",
                "text_url": (f"https://nyheder.dk/{prof.key}" if rng.random() < 0.4 else ""),
                "upvotes": sub.upvotes,
                "is_video": prof.key == "r06",
                "user": author,
                "subreddit": "Denmark",
                "event": prof.event,
                "IsRumour": prof.is_rumour,
                "TruthStatus": prof.truth,
                "RumourDescription": RUMOUR_CLAIMS.get(prof.key),
            },
            "branches": branches_json,
        }
        event_dir = dast_dir / prof.event.replace(" ", "_")
        event_dir.mkdir(parents=True, exist_ok=True)
        with open(event_dir / f"{prof.key}.json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=1)


# ---------------------------------------------------------------------------
# Resource files
# ---------------------------------------------------------------------------

POS_PRESENCE = {
    "NOUN": 0.90, "VERB": 0.90, "PRON": 0.80, "PUNCT": 0.70, "ADV": 0.60,
    "ADP": 0.60, "DET": 0.55, "ADJ": 0.50, "CONJ": 0.45, "AUX": 0.40,
    "PART": 0.35, "PROPN": 0.30, "SCONJ": 0.30, "NUM": 0.20, "INTJ": 0.15,
    "X": 0.15,
}

AFINN_PADDING = [
    ("elsker", 3), ("hader", -3), ("vidunderligt", 3), ("forfærdende", -3),
    ("smukt", 2), ("grusomt", -3), ("herligt", 2), ("ulideligt", -2),
    ("strålende", 3), ("ynkeligt", -2), ("storslået", 3), ("modbydeligt", -3),
]

# Calibration knobs for the augmentation synonym table.
SYN_STOP_RANKS = (4, 54)      # stopword frequency ranks covered by synonyms
SYN_MEDIUM_P = 0.86           # probability a medium-tier word gets synonyms
SYN_MINOR_P = 0.28            # probability a minor-tier word gets synonyms
SYN_QUERY_P = 0.45            # fraction of query vocabulary with synonyms


def write_resources(res_dir: Path, plans: list[WordPlan], rng: np.random.Generator) -> None:
    res_dir.mkdir(parents=True, exist_ok=True)
    vocab = {plan.word for plan in plans} | set(STOPWORDS) | {URL_TOKEN, QUOTE_TOKEN}

    scores = sentiment_scores()
    with open(res_dir / "afinn.txt", "w", encoding="utf-8") as fh:
        for w, s in sorted(scores.items()):
            fh.write(f"{w}\t{s}\n")
        for w, s in AFINN_PADDING:
            assert w not in vocab, w
            fh.write(f"{w}\t{s}\n")

    def write_list(name: str, entries: list[str], padding: list[str]) -> None:
        with open(res_dir / name, "w", encoding="utf-8") as fh:
            for e in entries:
                fh.write(e + "\n")
            for e in padding:
                assert e not in vocab, e
                fh.write(e + "\n")

    write_list("negation.txt", NEGATION_WORDS, ["ikkun"])
    write_list("swear.txt", SWEAR_WORDS, ["fandeme", "skide"])
    write_list("smileys_positive.txt", POS_SMILEYS, [":]", "^^"])
    write_list("smileys_negative.txt", NEG_SMILEYS, [":[", ":-/"])

    # synonym table for augmentation; a derived stream keeps the master
    # sequence identical whatever the coverage knobs say. Support and deny
    # vocabulary is deliberately left out of the table: whether a post
    # clears the replaceable-share gate must not depend on how much class
    # signal it carries, and clones keep those words verbatim. Query
    # vocabulary is covered so interrogative posts, which spend much of
    # their length on punctuation, still reach the gate.
    srng = np.random.default_rng(int(rng.integers(2**31)))
    taken = set(vocab)
    lo, hi = SYN_STOP_RANKS
    syn_lines: list[tuple[str, list[str]]] = []
    for rank, sw in enumerate(STOPWORDS):
        if lo <= rank < hi:
            syn_lines.append((sw, [_pseudo_word(srng, taken) for _ in range(2)]))
    for plan in plans:
        word = plan.word
        if not word.isalpha():
            continue
        if plan.tier in ("sig_q", "sig_q_low"):
            if srng.random() < SYN_QUERY_P:
                syn_lines.append((word, [_pseudo_word(srng, taken) for _ in range(2)]))
        elif plan.tier == "medium" and srng.random() < SYN_MEDIUM_P:
            syn_lines.append((word, [_pseudo_word(srng, taken) for _ in range(2)]))
        elif plan.tier == "minor" and srng.random() < SYN_MINOR_P:
            syn_lines.append((word, [_pseudo_word(srng, taken)]))
    with open(res_dir / "synonyms.tsv", "w", encoding="utf-8") as fh:
        for word, syns in syn_lines:
            fh.write(f"{word}\t{','.join(syns)}\n")

    # word vectors: class-anchored for signal words, noise for the rest
    anchors = rng.normal(0.0, 1.0, size=(5, 300))
    anchors /= np.linalg.norm(anchors, axis=1, keepdims=True)
    anchor_for = {"sig_s": 0, "sig_d": 1, "sig_q": 2, "sig_c": 3, "sig_q_low": 2}
    vec_words: list[tuple[str, np.ndarray]] = []
    for sw in STOPWORDS:
        vec_words.append((sw, 0.4 * rng.normal(0.0, 1.0, size=300) / 17.3))
    for tok in (URL_TOKEN, QUOTE_TOKEN):
        vec_words.append((tok, 0.5 * anchors[4] + 0.2 * rng.normal(0.0, 1.0, size=300) / 17.3))
    minor_budget = 60
    for plan in plans:
        if plan.tier in anchor_for:
            base = anchors[anchor_for[plan.tier]]
            vec_words.append((plan.word, 0.22 * base + 0.4 * rng.normal(0.0, 1.0, size=300) / 17.3))
        elif plan.tier == "medium":
            vec_words.append((plan.word, 0.5 * rng.normal(0.0, 1.0, size=300) / 17.3))
        elif plan.tier == "minor" and minor_budget > 0:
            minor_budget -= 1
            vec_words.append((plan.word, 0.5 * rng.normal(0.0, 1.0, size=300) / 17.3))
    with open(res_dir / "vectors.txt", "w", encoding="utf-8") as fh:
        fh.write(f"{len(vec_words)} 300\n")
        for word, vec in vec_words:
            fh.write(word + " " + " ".join(f"{v:.5f}" for v in vec) + "\n")


def write_pos_sidecar(res_dir: Path, subs: list[GenSub], rng: np.random.Generator) -> None:
    tags = list(POS_PRESENCE.keys())
    with open(res_dir / "pos_tags.jsonl", "w", encoding="utf-8") as fh:
        for sub in subs:
            for p in sub.posts:
                present = [t for t in tags if rng.random() < POS_PRESENCE[t]]
                if not present:
                    present = ["NOUN"]
                fh.write(json.dumps({"comment_id": p.key, "tags": present},
                                    ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# Tweet-thread style sequences for transfer training
# ---------------------------------------------------------------------------

PHEME_EVENTS = [
    ("charliehebdo", 48), ("sydneysiege", 52), ("ferguson", 45),
    ("germanwings", 40), ("ottawashooting", 45),
]

# stance emission profiles per veracity label (S, D, Q, C)
PHEME_PROFILES = {
    "true": (0.24, 0.025, 0.05, 0.685),
    "false": (0.075, 0.19, 0.10, 0.635),
    "unverified": (0.105, 0.082, 0.125, 0.688),
}
PHEME_FIRST = {
    "true": (0.55, 0.02, 0.05, 0.38),
    "false": (0.30, 0.12, 0.10, 0.48),
    "unverified": (0.35, 0.05, 0.15, 0.45),
}
PHEME_MIX = (0.48, 0.21, 0.31)  # true, false, unverified


def build_pheme_sequences(rng: np.random.Generator):
    from .corpus import SequenceRecord

    records = []
    for event, n_rumours in PHEME_EVENTS:
        n_true = int(round(PHEME_MIX[0] * n_rumours))
        n_false = int(round(PHEME_MIX[1] * n_rumours))
        labels = (["true"] * n_true + ["false"] * n_false
                  + ["unverified"] * (n_rumours - n_true - n_false))
        rng.shuffle(labels)
        for i, label in enumerate(labels):
            n_items = int(np.clip(round(float(np.exp(rng.normal(2.4, 0.6)))), 5, 40))
            stances = [int(rng.choice(4, p=PHEME_FIRST[label]))]
            for _ in range(n_items - 1):
                stances.append(int(rng.choice(4, p=PHEME_PROFILES[label])))
            t = 0.0
            items = []
            for s in stances:
                t += float(rng.uniform(60, 5400))
                items.append((s, t))
            records.append(SequenceRecord(
                dataset="pheme", event=event, rumour_id=f"{event}_{i:03d}",
                veracity=label, items=items,
            ))
    # under-populated decoys that the filtering step must drop
    for j, event in enumerate(["charliehebdo", "ferguson", "sydneysiege"]):
        items = [(3, 120.0 * (k + 1)) for k in range(2 + j)]
        records.append(SequenceRecord(
            dataset="pheme", event=event, rumour_id=f"{event}_tiny{j}",
            veracity="unverified", items=items,
        ))
    for i in range(4):
        items = [(int(rng.integers(0, 4)), 300.0 * (k + 1)) for k in range(8)]
        records.append(SequenceRecord(
            dataset="pheme", event="gurlitt", rumour_id=f"gurlitt_{i:03d}",
            veracity="true" if i % 2 == 0 else "false", items=items,
        ))
    return records


# ---------------------------------------------------------------------------
# Validation and entry point
# ---------------------------------------------------------------------------


def validate_corpus(root: Path) -> dict:
    """Reload the written corpus and assert its fixed statistical profile."""
    from . import corpus as corpus_mod

    ds = corpus_mod.load_dataset(root / "dast")
    stats = ds.stats()
    assert stats.n_submissions == 33, stats.n_submissions
    assert stats.n_branches == 1161, stats.n_branches
    assert stats.n_posts == 3007, stats.n_posts
    assert stats.sdqc_counts == (273, 300, 81, 2353), stats.sdqc_counts

    rum = corpus_mod.rumour_subset(ds)
    rstats = rum.stats()
    assert rstats.n_submissions == 16
    assert rstats.n_conversations == 220, rstats.n_conversations
    assert rstats.n_branches == 596, rstats.n_branches
    assert rstats.n_posts == 1489, rstats.n_posts

    by_key = {s.submission_id: s for s in ds.submissions}
    for prof in PROFILES:
        sub = by_key[f"t3_{prof.key}"]
        posts = sub.unique_posts()
        assert len(posts) == prof.posts, (prof.key, len(posts))
        assert len(sub.branches) == prof.branches, (prof.key, len(sub.branches))
        got = [0, 0, 0, 0]
        for p in posts:
            got[p.sdqc_submission] += 1
        assert tuple(got) == prof.sdqc, (prof.key, got)

    # pure-Commenting conversation removal must free exactly 694 posts
    removable_posts = set()
    kept = set()
    for sub in ds.submissions:
        for branch in sub.branches:
            ids = {p.comment_id for p in branch.posts}
            if all(p.sdqc_submission == 3 for p in branch.posts):
                removable_posts |= ids
            else:
                kept |= ids
    only_removed = removable_posts - kept
    assert len(only_removed) == 694, len(only_removed)

    # vocabulary tiers
    df: dict[str, int] = {}
    for p in ds.posts():
        for w in set(p.tokens):
            df[w] = df.get(w, 0) + 1
    n_vocab = len(df)
    ge4 = sum(1 for v in df.values() if v >= 4)
    ge31 = sum(1 for v in df.values() if v >= 31)
    assert n_vocab == VOCAB_TARGET, n_vocab
    assert ge4 == DF_GE4_TARGET, ge4
    assert ge31 == DF_GE31_TARGET, ge31

    # per-class most-frequent-word membership must be unambiguous
    occ: dict[int, dict[str, int]] = {0: {}, 1: {}, 2: {}, 3: {}}
    for p in ds.posts():
        d = occ[p.sdqc_submission]
        for w in p.tokens:
            d[w] = d.get(w, 0) + 1
    intended = {
        0: set(STOPWORDS) | set(SIG_S),
        1: set(STOPWORDS) | set(SIG_D),
        2: set(STOPWORDS) | set(SIG_Q) | set(SIG_Q_LOW),
        3: set(STOPWORDS) | set(SIG_C),
    }
    for klass, want in intended.items():
        ranked = sorted(occ[klass].items(), key=lambda kv: (-kv[1], kv[0]))
        top = {w for w, _ in ranked[:100]}
        assert len(want) == 100, (klass, len(want))
        assert top == want, (klass, sorted(top ^ want))
        assert ranked[99][1] > ranked[100][1], (klass, ranked[98:102])

    return {
        "submissions": stats.n_submissions,
        "branches": stats.n_branches,
        "posts": stats.n_posts,
        "sdqc": list(stats.sdqc_counts),
        "vocabulary": n_vocab,
    }


def build_all(root: Path | str, seed: int = DEFAULT_SEED, force: bool = False) -> dict:
    """Generate the full data tree under `root`; no-op when already current."""
    root = Path(root)
    manifest_path = root / "MANIFEST.json"
    if manifest_path.exists() and not force:
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            manifest = {}
        if manifest.get("version") == GENERATOR_VERSION and manifest.get("seed") == seed:
            return manifest

    rng = np.random.default_rng(seed)
    subs = [realize_structure(rng, prof) for prof in PROFILES]
    plans = build_word_plans(rng)
    pinned = assign_specials(rng, subs)
    deal_tokens(rng, subs, plans, pinned)
    decorate_posts(rng, subs, plans)
    stuff_lexicon(rng, subs)
    shape_sentiment(rng, subs, plans)
    users = build_users(rng)
    assign_metadata(rng, subs, users)

    write_corpus(root / "dast", subs, users, rng)
    res_dir = root / "resources"
    write_resources(res_dir, plans, rng)
    write_pos_sidecar(res_dir, subs, rng)

    from .corpus import save_sequences

    pheme_dir = root / "pheme_like"
    pheme_dir.mkdir(parents=True, exist_ok=True)
    save_sequences(build_pheme_sequences(rng), pheme_dir / "pheme_sequences.jsonl")

    summary = validate_corpus(root)
    manifest = {"version": GENERATOR_VERSION, "seed": seed, "counts": summary}
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return manifest


def main(argv: list[str] | None = None) -> int:
    import argparse

    ap = argparse.ArgumentParser(description="generate the bundled synthetic corpus")
    ap.add_argument("--out", default="data", help="output directory root")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--force", action="store_true", help="regenerate even if current")
    args = ap.parse_args(argv)
    manifest = build_all(Path(args.out), seed=args.seed, force=args.force)
    print(json.dumps(manifest["counts"] if "counts" in manifest else manifest, indent=1))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
