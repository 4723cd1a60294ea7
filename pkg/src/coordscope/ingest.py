"""Tweet corpus ingestion: record parsing, hashtag extraction, annotations.

Input corpora are newline-delimited JSON, one post per line. Field names
default to ``DEFAULT_FIELDS`` and can be remapped (dotted paths reach into
nested objects, e.g. ``"user.id_str"``).
"""

from __future__ import annotations

import bz2
import csv
import gzip
import json
import logging
import lzma
import re
import unicodedata
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

logger = logging.getLogger(__name__)

UNLABELED = "unlabeled"


class Kind(str, Enum):
    ORIGINAL = "original"
    RETWEET = "retweet"
    REPLY = "reply"
    QUOTE = "quote"


KINDS = tuple(k.value for k in Kind)


class RecordError(ValueError):
    """A corpus line that cannot be turned into a valid record."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


class CorpusError(RuntimeError):
    pass


class AnnotationError(ValueError):
    pass


DEFAULT_FIELDS: dict[str, str] = {
    "tweet_id": "id",
    "author_id": "author",
    "created_at": "created_at",
    "kind": "kind",
    "text": "text",
    "hashtags": "hashtags",
    "retweeted_tweet_id": "retweeted_tweet_id",
    "retweeted_author_id": "retweeted_author_id",
    "retweeted_created_at": "retweeted_created_at",
    "replied_tweet_id": "replied_tweet_id",
    "quoted_tweet_id": "quoted_tweet_id",
}

_HASHTAG_RE = re.compile(r"(?<![\w#])#(\w+)")
_TWITTER_TIME = "%a %b %d %H:%M:%S %z %Y"


def extract_hashtags(text: str) -> list[str]:
    """Return lowercased hashtags in order of appearance, keeping repeats."""
    if not text:
        return []
    return [m.group(1).lower() for m in _HASHTAG_RE.finditer(text)]


def parse_timestamp(value) -> datetime:
    """Parse ISO-8601, classic Twitter API or epoch-second timestamps to UTC.

    Naive timestamps are taken as UTC. Sub-second precision is dropped.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        dt = datetime.fromtimestamp(int(value), tz=timezone.utc)
    elif isinstance(value, str):
        s = value.strip()
        if not s:
            raise ValueError("empty timestamp")
        if s.isdigit():
            dt = datetime.fromtimestamp(int(s), tz=timezone.utc)
        else:
            try:
                dt = datetime.fromisoformat(s[:-1] + "+00:00" if s.endswith(("Z", "z")) else s)
            except ValueError:
                dt = datetime.strptime(s, _TWITTER_TIME)
    else:
        raise ValueError(f"not a timestamp: {value!r}")
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True, slots=True)
class TweetRecord:
    tweet_id: str
    author_id: str
    created_at: datetime
    kind: Kind = Kind.ORIGINAL
    text: str = ""
    hashtags: tuple[str, ...] = ()
    retweeted_tweet_id: str | None = None
    retweeted_author_id: str | None = None
    replied_tweet_id: str | None = None
    quoted_tweet_id: str | None = None
    # Source creation time carried by some retweet payloads.
    retweeted_created_at: datetime | None = None

    @property
    def timestamp(self) -> int:
        return int(self.created_at.timestamp())

    @property
    def sort_key(self) -> tuple[datetime, str]:
        return (self.created_at, self.tweet_id)

    @property
    def is_retweet(self) -> bool:
        return self.kind is Kind.RETWEET

    def to_json(self) -> str:
        """Serialize with the default field names; parse_tweet_record inverts it."""
        out: dict[str, object] = {
            "id": self.tweet_id,
            "author": self.author_id,
            "created_at": format_timestamp(self.created_at),
            "kind": self.kind.value,
            "text": self.text,
            "hashtags": list(self.hashtags),
        }
        for name in ("retweeted_tweet_id", "retweeted_author_id", "replied_tweet_id", "quoted_tweet_id"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.retweeted_created_at is not None:
            out["retweeted_created_at"] = format_timestamp(self.retweeted_created_at)
        return json.dumps(out, ensure_ascii=False, separators=(",", ":"))


def _lookup(obj: Mapping, path: str):
    cur = obj
    for part in path.split("."):
        if not isinstance(cur, Mapping) or part not in cur:
            return None
        cur = cur[part]
    return cur


def _as_id(value) -> str | None:
    if value is None or value == "":
        return None
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ValueError(f"bad identifier {value!r}")
    return str(value)


def _coerce_hashtags(raw) -> tuple[str, ...]:
    if not isinstance(raw, list):
        raise ValueError("hashtags must be a list")
    tags = []
    for item in raw:
        if isinstance(item, Mapping):  # Twitter entities style {"text": ...}
            item = item.get("text") or item.get("tag")
        if not isinstance(item, str):
            raise ValueError(f"bad hashtag entry {item!r}")
        tags.append(item.lstrip("#").lower())
    return tuple(tags)


def parse_tweet_record(line: str | Mapping, lineno: int = 1, fields: Mapping[str, str] | None = None) -> TweetRecord:
    """Parse one JSON line into a validated :class:`TweetRecord`.

    When no explicit kind is given it is inferred from the linkage fields
    (retweet, then reply, then quote, else original). Hashtags come from an
    explicit hashtag field when present, otherwise from the text.

    Raises:
        RecordError: malformed JSON, missing required fields, an unparseable
            timestamp or inconsistent retweet linkage.
    """
    fmap = {**DEFAULT_FIELDS, **(fields or {})}
    if isinstance(line, Mapping):
        obj = line
    else:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"malformed JSON ({exc.msg})", lineno) from None
    if not isinstance(obj, Mapping):
        raise RecordError("expected a JSON object", lineno)

    def get(name):
        return _lookup(obj, fmap[name])

    try:
        tweet_id = _as_id(get("tweet_id"))
        author_id = _as_id(get("author_id"))
        rt_id = _as_id(get("retweeted_tweet_id"))
        rt_author = _as_id(get("retweeted_author_id"))
        reply_id = _as_id(get("replied_tweet_id"))
        quote_id = _as_id(get("quoted_tweet_id"))
    except ValueError as exc:
        raise RecordError(str(exc), lineno) from None
    for name, value in (("tweet_id", tweet_id), ("author_id", author_id)):
        if value is None:
            raise RecordError(f"missing {name}", lineno)
    raw_time = get("created_at")
    if raw_time is None:
        raise RecordError("missing created_at", lineno)
    try:
        created_at = parse_timestamp(raw_time)
        raw_rt_time = get("retweeted_created_at")
        rt_time = parse_timestamp(raw_rt_time) if raw_rt_time not in (None, "") else None
    except (ValueError, OverflowError, OSError) as exc:
        raise RecordError(f"unparseable timestamp ({exc})", lineno) from None

    raw_kind = get("kind")
    if raw_kind in (None, ""):
        if rt_id is not None or rt_author is not None:
            kind = Kind.RETWEET
        elif reply_id is not None:
            kind = Kind.REPLY
        elif quote_id is not None:
            kind = Kind.QUOTE
        else:
            kind = Kind.ORIGINAL
    else:
        try:
            kind = Kind(str(raw_kind).lower())
        except ValueError:
            raise RecordError(f"unknown kind {raw_kind!r}", lineno) from None
    if kind is Kind.RETWEET:
        if rt_id is None or rt_author is None:
            raise RecordError("retweet without retweeted_tweet_id/retweeted_author_id", lineno)
    elif rt_id is not None or rt_author is not None:
        raise RecordError(f"retweet linkage on a {kind.value} record", lineno)

    text = get("text")
    if text is None:
        text = ""
    if not isinstance(text, str):
        raise RecordError("text must be a string", lineno)
    raw_tags = get("hashtags")
    if raw_tags is not None:
        try:
            hashtags = _coerce_hashtags(raw_tags)
        except ValueError as exc:
            raise RecordError(str(exc), lineno) from None
    else:
        hashtags = tuple(extract_hashtags(text))

    return TweetRecord(
        tweet_id=tweet_id,
        author_id=author_id,
        created_at=created_at,
        kind=kind,
        text=text,
        hashtags=hashtags,
        retweeted_tweet_id=rt_id,
        retweeted_author_id=rt_author,
        replied_tweet_id=reply_id,
        quoted_tweet_id=quote_id,
        retweeted_created_at=rt_time,
    )


# Fringe hashtags grouped by narrative category.
FRINGE_HASHTAGS: dict[str, tuple[str, ...]] = {
    "US Election": (
        "hammerandscorecard", "sharpiegate", "qsnatch", "stopthesteal", "dobbs",
        "dominionsoftware", "dominion", "hammer", "scorecard",
    ),
    "QAnon": (
        "pizzagate", "qanon", "qarmy", "taketheoath", "wwg1wga",
        "projectveritas", "thegreatawakening", "civilwar", "obamagate",
    ),
    "COVID-19": ("plandemic",),
}


class HashtagVocabulary:
    """Ordered set of lowercase hashtags with stable positions."""

    def __init__(self, tags: Iterable[str], categories: Mapping[str, str] | None = None):
        self.tags: tuple[str, ...] = tuple(t.lstrip("#").lower() for t in tags)
        self.index: dict[str, int] = {}
        for i, tag in enumerate(self.tags):
            if not tag:
                raise ValueError("empty hashtag in vocabulary")
            if tag in self.index:
                raise ValueError(f"duplicate hashtag {tag!r} in vocabulary")
            self.index[tag] = i
        self.categories: dict[str, str] = {
            k.lstrip("#").lower(): v for k, v in (categories or {}).items()
        }

    @classmethod
    def default(cls) -> HashtagVocabulary:
        tags = [t for group in FRINGE_HASHTAGS.values() for t in group]
        cats = {t: cat for cat, group in FRINGE_HASHTAGS.items() for t in group}
        return cls(tags, cats)

    @classmethod
    def from_file(cls, path: str | Path) -> HashtagVocabulary:
        """One hashtag per line, optionally followed by ``,category`` or a tab."""
        tags, cats = [], {}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("//"):
                continue
            parts = re.split(r"[,\t]", line, maxsplit=1)
            tag = parts[0].strip().lstrip("#").lower()
            tags.append(tag)
            if len(parts) > 1 and parts[1].strip():
                cats[tag] = parts[1].strip()
        return cls(tags, cats)

    def __len__(self) -> int:
        return len(self.tags)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tags)

    def __contains__(self, tag: object) -> bool:
        return tag in self.index

    def category(self, tag: str) -> str | None:
        return self.categories.get(tag)

    def vector(self, hashtags: Iterable[str]) -> list[int]:
        counts = [0] * len(self.tags)
        for tag in hashtags:
            i = self.index.get(tag)
            if i is not None:
                counts[i] += 1
        return counts

    def __eq__(self, other) -> bool:
        return isinstance(other, HashtagVocabulary) and self.tags == other.tags

    def __repr__(self) -> str:
        return f"HashtagVocabulary({len(self.tags)} tags)"


class Corpus(Sequence):
    """Immutable, chronologically ordered collection of records with an id index."""

    def __init__(self, records: Iterable[TweetRecord], *, presorted: bool = False):
        recs = list(records)
        if not presorted:
            recs.sort(key=lambda r: r.sort_key)
        self.records: tuple[TweetRecord, ...] = tuple(recs)
        self._by_id = {r.tweet_id: r for r in self.records}
        if len(self._by_id) != len(self.records):
            dup = [k for k, n in Counter(r.tweet_id for r in self.records).items() if n > 1]
            raise CorpusError(f"duplicate tweet ids: {dup[:5]}")

    def __getitem__(self, i):
        return self.records[i]

    def __len__(self) -> int:
        return len(self.records)

    def get(self, tweet_id: str) -> TweetRecord | None:
        return self._by_id.get(tweet_id)

    def __contains__(self, item) -> bool:
        if isinstance(item, TweetRecord):
            return self._by_id.get(item.tweet_id) is item
        return item in self._by_id

    def effective_hashtags(self, record: TweetRecord) -> tuple[str, ...]:
        """Hashtags a record carries, resolving pure retweets to their source."""
        if record.kind is Kind.RETWEET:
            source = self._by_id.get(record.retweeted_tweet_id)
            if source is not None:
                return source.hashtags
        return record.hashtags

    def authors(self) -> set[str]:
        return {r.author_id for r in self.records}

    def non_retweets(self) -> list[TweetRecord]:
        return [r for r in self.records if r.kind is not Kind.RETWEET]


@dataclass
class CorpusStats:
    total: int
    kind_counts: dict[str, int]
    kind_fractions: dict[str, float]
    hashtag_counts: dict[str, int]
    labeled_user_fraction: float | None = None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "kind_counts": dict(self.kind_counts),
            "kind_fractions": dict(self.kind_fractions),
            "hashtag_counts": dict(self.hashtag_counts),
            "labeled_user_fraction": self.labeled_user_fraction,
        }


def compute_stats(corpus: Corpus, vocabulary: HashtagVocabulary | None = None,
                  annotations: AnnotationStore | None = None) -> CorpusStats:
    """Kind counts/fractions and per-hashtag tweet counts in one pass.

    Hashtag counts are the number of tweets embedding each vocabulary tag,
    with pure retweets contributing their source's hashtags.
    """
    vocabulary = vocabulary or HashtagVocabulary.default()
    kinds = {k: 0 for k in KINDS}
    tags = {t: 0 for t in vocabulary}
    for rec in corpus:
        kinds[rec.kind.value] += 1
        for tag in set(corpus.effective_hashtags(rec)):
            if tag in tags:
                tags[tag] += 1
    total = len(corpus)
    fractions = {k: (n / total if total else 0.0) for k, n in kinds.items()}
    coverage = None
    if annotations is not None:
        users = corpus.authors()
        coverage = (sum(1 for u in users if u in annotations.user_labels) / len(users)) if users else 0.0
    return CorpusStats(total, kinds, fractions, tags, coverage)


def _open_text(path: Path):
    suffix = path.suffix.lower()
    if suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    if suffix == ".bz2":
        return bz2.open(path, "rt", encoding="utf-8")
    if suffix in (".xz", ".lzma"):
        return lzma.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def load_corpus(path: str | Path, vocabulary: HashtagVocabulary | None = None, *,
                fields: Mapping[str, str] | None = None,
                max_bad_lines: int = 0) -> tuple[Corpus, CorpusStats]:
    """Read a (possibly compressed) JSONL corpus, sorted by (created_at, tweet_id).

    Up to ``max_bad_lines`` unparseable lines are logged and dropped; one more
    aborts the load with :class:`CorpusError`. Duplicate tweet ids count as bad
    lines.
    """
    path = Path(path)
    records: list[TweetRecord] = []
    seen: set[str] = set()
    bad = 0
    try:
        fh = _open_text(path)
    except OSError as exc:
        raise CorpusError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = parse_tweet_record(line, lineno, fields)
                if rec.tweet_id in seen:
                    raise RecordError(f"duplicate tweet_id {rec.tweet_id!r}", lineno)
            except RecordError as exc:
                bad += 1
                if bad > max_bad_lines:
                    raise CorpusError(f"{path}: {exc} (bad-line budget {max_bad_lines} exhausted)") from exc
                logger.warning("%s: skipping %s", path, exc)
                continue
            seen.add(rec.tweet_id)
            records.append(rec)
    corpus = Corpus(records)
    logger.info("loaded %d records from %s (%d bad lines)", len(corpus), path, bad)
    return corpus, compute_stats(corpus, vocabulary)


@dataclass
class AnnotationStore:
    user_labels: dict[str, str] = field(default_factory=dict)
    tweet_stories: dict[str, str] = field(default_factory=dict)

    def user_label(self, author_id: str) -> str:
        return self.user_labels.get(author_id, UNLABELED)

    def story(self, tweet_id: str) -> str:
        return self.tweet_stories.get(tweet_id, UNLABELED)


@dataclass
class AnnotationCoverage:
    users_total: int
    users_labeled: int
    tweets_total: int
    tweets_labeled: int

    @property
    def user_fraction(self) -> float:
        return self.users_labeled / self.users_total if self.users_total else 0.0

    @property
    def tweet_fraction(self) -> float:
        return self.tweets_labeled / self.tweets_total if self.tweets_total else 0.0

    def to_dict(self) -> dict:
        return {
            "users_total": self.users_total,
            "users_labeled": self.users_labeled,
            "user_fraction": self.user_fraction,
            "tweets_total": self.tweets_total,
            "tweets_labeled": self.tweets_labeled,
            "tweet_fraction": self.tweet_fraction,
        }


USER_LABELS = ("promoter", "detractor")


def _read_csv(path: str | Path, key: str, value: str) -> Iterator[tuple[int, str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return
        missing = {key, value} - set(reader.fieldnames)
        if missing:
            raise AnnotationError(f"{path}: header lacks column(s) {sorted(missing)}")
        for row in reader:
            yield reader.line_num, (row[key] or "").strip(), (row[value] or "").strip()


def join_annotations(corpus: Corpus, user_csv: str | Path | None = None,
                     story_csv: str | Path | None = None) -> tuple[AnnotationStore, AnnotationCoverage]:
    """Load user labels and story labels, and report how much of the corpus they cover."""
    store = AnnotationStore()
    if user_csv is not None:
        for lineno, uid, label in _read_csv(user_csv, "user_id", "label"):
            norm = label.lower()
            if norm not in USER_LABELS:
                raise AnnotationError(f"{user_csv}: row {lineno}: unknown label {label!r}")
            store.user_labels[uid] = norm
    if story_csv is not None:
        for lineno, tid, story in _read_csv(story_csv, "tweet_id", "story"):
            if not story:
                raise AnnotationError(f"{story_csv}: row {lineno}: empty story label")
            store.tweet_stories[tid] = unicodedata.normalize("NFC", story)
    users = corpus.authors()
    coverage = AnnotationCoverage(
        users_total=len(users),
        users_labeled=sum(1 for u in users if u in store.user_labels),
        tweets_total=len(corpus),
        tweets_labeled=sum(1 for r in corpus if r.tweet_id in store.tweet_stories),
    )
    return store, coverage
