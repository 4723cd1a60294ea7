"""Synthetic corpora with planted coordination and a ground-truth manifest.

A corpus mixes three ingredients:

* star bursts: a hub account posts a few source tweets and the same set of
  spoke accounts retweets each of them within the rapid-retweet window;
* copypasta chains: near-copies of a template text (per-character
  substitutions) posted by distinct accounts a few posts apart;
* background noise: posts of every kind with random text and hashtags.

Generation is single-threaded and driven by one seed, so the same
configuration always yields byte-identical files.
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from ._io import atomic_open, atomic_write_json
from .ingest import FRINGE_HASHTAGS, HashtagVocabulary, format_timestamp

NON_FRINGE_TAGS = ("election2020", "vote", "maga", "biden", "trump2020", "news", "covid19", "breaking", "usa", "debate")
MUTATION_ALPHABET = string.ascii_lowercase + " "
# background kind mix: retweet, reply, original, quote
NOISE_KIND_WEIGHTS = (("retweet", 0.52), ("reply", 0.19), ("original", 0.16), ("quote", 0.13))
# background timestamps sit on this grid; planted posts use offsets inside a slot
SLOT_SECONDS = 10


@dataclass
class SynthConfig:
    stars: int = 5
    spokes: int = 20
    sources_per_star: int = 3
    pastas: int = 5
    copies: int = 10
    mutation_rate: float = 0.02
    noise: int = 50_000
    authors: int = 5_000
    window_seconds: int = 60
    template_words: int = 18
    fringe_rate: float = 0.4
    noise_rapid_rate: float = 0.1
    hashtag_mode: str = "zipf"
    bridge_tag: str = "civilwar"
    bridge_rate: float = 0.15
    start: str = "2020-07-01T00:00:00Z"
    span_days: int = 190
    seed: int = 42

    def validate(self) -> None:
        for name in ("stars", "spokes", "pastas", "copies", "noise", "authors"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        if self.stars and self.spokes < 1:
            raise ValueError("stars need at least one spoke")
        if self.stars and self.sources_per_star < 2:
            raise ValueError("sources_per_star must be >= 2 so spoke edges survive the weight filter")
        if self.spokes > self.authors:
            raise ValueError(f"spokes ({self.spokes}) exceed the author pool ({self.authors})")
        if self.pastas and self.copies > self.authors:
            raise ValueError(f"copies ({self.copies}) exceed the author pool ({self.authors})")
        if (self.noise or self.pastas) and self.authors < 2:
            raise ValueError("need at least 2 authors")
        if not 0.0 <= self.mutation_rate < 1.0:
            raise ValueError(f"mutation_rate must be in [0, 1), got {self.mutation_rate}")
        if self.window_seconds < 1:
            raise ValueError("window_seconds must be positive")
        if self.hashtag_mode not in ("zipf", "blocs"):
            raise ValueError(f"hashtag_mode must be 'zipf' or 'blocs', got {self.hashtag_mode!r}")
        if self.hashtag_mode == "blocs" and self.bridge_tag not in HashtagVocabulary.default():
            raise ValueError(f"bridge_tag {self.bridge_tag!r} is not a fringe hashtag")
        if self.span_days < 1:
            raise ValueError("span_days must be positive")


@dataclass
class SynthManifest:
    seed: int
    config: dict
    stars: list[dict] = field(default_factory=list)
    pastas: list[dict] = field(default_factory=list)
    noise: dict = field(default_factory=dict)
    blocs: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> SynthManifest:
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> SynthManifest:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class _Ids:
    def __init__(self):
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"{self.n:010d}"


def _words(rng: random.Random, lexicon: list[str], k: int) -> str:
    return " ".join(rng.choice(lexicon) for _ in range(k))


def _mutate(rng: random.Random, text: str, rate: float) -> str:
    if rate == 0:
        return text
    out = []
    for ch in text:
        if rng.random() < rate:
            out.append(rng.choice([c for c in MUTATION_ALPHABET if c != ch]))
        else:
            out.append(ch)
    return "".join(out)


def _zipf_weights(n: int) -> list[float]:
    return [1.0 / (k + 1) for k in range(n)]


class _TagSampler:
    def __init__(self, rng: random.Random, config: SynthConfig):
        self.rng = rng
        self.config = config
        self.fringe = list(HashtagVocabulary.default())
        # popularity ranking for the zipf mode, most shared first
        popular = ["stopthesteal", "dobbs", "obamagate", "qanon", "wwg1wga", "dominion", "plandemic", "civilwar"]
        self.ranked = popular + [t for t in self.fringe if t not in popular]
        self.weights = _zipf_weights(len(self.ranked))
        bridge = config.bridge_tag
        election = [t for t in FRINGE_HASHTAGS["US Election"] if t != bridge]
        qanon = [t for t in FRINGE_HASHTAGS["QAnon"] + FRINGE_HASHTAGS["COVID-19"] if t != bridge]
        self.blocs = {"election": election, "qanon": qanon}

    def sample(self) -> list[str]:
        rng, cfg = self.rng, self.config
        tags: list[str] = []
        if rng.random() < cfg.fringe_rate:
            k = rng.randint(1, 3)
            if cfg.hashtag_mode == "zipf":
                tags += rng.choices(self.ranked, weights=self.weights, k=k)
            else:
                bloc = self.blocs["election" if rng.random() < 0.5 else "qanon"]
                tags += rng.sample(bloc, k=min(k + 1, len(bloc)))
                if rng.random() < cfg.bridge_rate:
                    tags.append(cfg.bridge_tag)
        if rng.random() < 0.3:
            tags.append(rng.choice(NON_FRINGE_TAGS))
        return tags


def _tweet(tid, author, ts, kind, text, **links) -> dict:
    rec = {"id": tid, "author": author, "created_at": format_timestamp(ts), "kind": kind, "text": text}
    rec.update({k: v for k, v in links.items() if v is not None})
    return rec


def generate(config: SynthConfig | None = None) -> tuple[list[dict], SynthManifest]:
    """Build the corpus (as JSON-ready dicts, chronological) and its manifest.

    Raises:
        ValueError: infeasible configuration.
    """
    config = config or SynthConfig()
    config.validate()
    rng = random.Random(config.seed)
    start = datetime.fromisoformat(config.start.replace("Z", "+00:00")).astimezone(timezone.utc)
    span = config.span_days * 86400
    n_slots = span // SLOT_SECONDS
    next_id = _Ids()
    lexicon = sorted({"".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(3, 9))) for _ in range(3000)})
    authors = [f"user{i:05d}" for i in range(config.authors)]
    tags = _TagSampler(rng, config)
    manifest = SynthManifest(seed=config.seed, config=asdict(config))
    if config.hashtag_mode == "blocs":
        manifest.blocs = {**{k: list(v) for k, v in tags.blocs.items()}, "bridge": config.bridge_tag}
    records: list[dict] = []

    def at(seconds: int) -> datetime:
        return start + timedelta(seconds=seconds)

    # planted structures get disjoint time segments so chains never interleave
    segments = config.stars + config.pastas
    seg_len = span // max(segments, 1)

    for k in range(config.stars):
        hub = f"hub{k:03d}"
        spokes = rng.sample(authors, config.spokes)
        seg0 = (config.pastas + k) * seg_len
        base = (seg0 + rng.randrange(0, max(seg_len // 2, 1))) // SLOT_SECONDS * SLOT_SECONDS
        star = {"hub": hub, "spokes": sorted(spokes), "sources": [], "retweets": []}
        for s in range(config.sources_per_star):
            src_t = base + s * 600 + 3
            sid = next_id()
            text = _words(rng, lexicon, 12) + " #stopthesteal"
            records.append(_tweet(sid, hub, at(src_t), "original", text))
            star["sources"].append(sid)
            for spoke in spokes:
                rid = next_id()
                delay = rng.randint(1, config.window_seconds)
                records.append(_tweet(rid, spoke, at(src_t + delay), "retweet", "",
                                      retweeted_tweet_id=sid, retweeted_author_id=hub))
                star["retweets"].append({"id": rid, "spoke": spoke, "source": sid,
                                         "created_at": format_timestamp(at(src_t + delay))})
        manifest.stars.append(star)

    for m in range(config.pastas):
        template = _words(rng, lexicon, config.template_words) + " #stopthesteal #" + rng.choice(NON_FRINGE_TAGS)
        seg0 = m * seg_len
        base = (seg0 + rng.randrange(0, max(seg_len // 2, 1))) // SLOT_SECONDS * SLOT_SECONDS
        posters = rng.sample(authors, config.copies)
        members = []
        for c in range(config.copies):
            tid = next_id()
            body = _mutate(rng, template, config.mutation_rate)
            url = "https://t.co/" + "".join(rng.choice(string.ascii_letters + string.digits) for _ in range(10))
            kind = rng.choice(("original", "reply", "quote", "quote"))
            records.append(_tweet(tid, posters[c], at(base + c * SLOT_SECONDS + 5), kind, f"{body} {url}"))
            members.append(tid)
        manifest.pastas.append({"template": template, "mutation_rate": config.mutation_rate, "members": members})

    kinds = [k for k, _ in NOISE_KIND_WEIGHTS]
    weights = [w for _, w in NOISE_KIND_WEIGHTS]
    plan = rng.choices(kinds, weights=weights, k=config.noise) if config.noise else []
    n_posts = sum(1 for k in plan if k != "retweet")
    posts: list[dict] = []
    slots = sorted(rng.sample(range(n_slots), n_posts)) if n_posts else []
    post_kinds = [k for k in plan if k != "retweet"]
    for slot, kind in zip(slots, post_kinds):
        tid = next_id()
        author = rng.choice(authors)
        body = _words(rng, lexicon, rng.randint(6, 20))
        hashtags = tags.sample()
        text = body + "".join(f" #{t}" for t in hashtags)
        links = {}
        if kind == "reply" and posts:
            links["replied_tweet_id"] = rng.choice(posts)["id"]
        elif kind == "quote" and posts:
            links["quoted_tweet_id"] = rng.choice(posts)["id"]
        rec = _tweet(tid, author, at(slot * SLOT_SECONDS), kind, text, **links)
        posts.append(rec)
    records.extend(posts)
    n_retweets = len(plan) - n_posts
    rt_made = 0
    if posts:
        for _ in range(n_retweets):
            src = rng.choice(posts)
            retweeter = rng.choice(authors)
            if retweeter == src["author"]:
                retweeter = authors[(authors.index(retweeter) + 1) % len(authors)]
            if rng.random() < config.noise_rapid_rate:
                delay = rng.randint(1, config.window_seconds)
            else:
                delay = rng.randint(config.window_seconds + 1, 3 * 86400)
            src_time = datetime.fromisoformat(src["created_at"].replace("Z", "+00:00"))
            records.append(_tweet(next_id(), retweeter, src_time + timedelta(seconds=delay), "retweet", "",
                                  retweeted_tweet_id=src["id"], retweeted_author_id=src["author"]))
            rt_made += 1
    manifest.noise = {
        "count": n_posts + rt_made,
        "posts": n_posts,
        "retweets": rt_made,
        "fringe_rate": config.fringe_rate,
        "hashtag_mode": config.hashtag_mode,
    }
    records.sort(key=lambda r: (r["created_at"], r["id"]))
    return records, manifest


def corpus_jsonl(records: list[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, separators=(",", ":"), sort_keys=True) + "\n" for r in records)


def write_corpus(records: list[dict], manifest: SynthManifest, corpus_path: str | Path,
                 manifest_path: str | Path | None = None) -> None:
    with atomic_open(corpus_path) as fh:
        fh.write(corpus_jsonl(records))
    if manifest_path is not None:
        atomic_write_json(manifest_path, manifest.to_dict())


def precision_recall(found: set, planted: set) -> tuple[float, float]:
    hit = len(found & planted)
    precision = hit / len(found) if found else (1.0 if not planted else 0.0)
    recall = hit / len(planted) if planted else 1.0
    return precision, recall


def hub_recovery(hubs, manifest: SynthManifest) -> dict:
    """Precision/recall of recovered hub accounts against the planted hubs."""
    found = {h.hub for h in hubs}
    planted = {s["hub"] for s in manifest.stars}
    p, r = precision_recall(found, planted)
    return {"precision": p, "recall": r, "found": sorted(found), "planted": sorted(planted)}


def cluster_recovery(clusters, manifest: SynthManifest) -> dict:
    """A planted chain counts as recovered only if some cluster has exactly its members."""
    found = {frozenset(c.members) for c in clusters}
    planted = {frozenset(p["members"]) for p in manifest.pastas}
    p, r = precision_recall(found, planted)
    return {"precision": p, "recall": r, "found": len(found), "planted": len(planted)}
