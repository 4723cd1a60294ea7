"""Shared builders for small hand-made and random corpora."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from coordscope.ingest import Corpus, HashtagVocabulary, Kind, TweetRecord

T0 = datetime(2020, 11, 3, tzinfo=timezone.utc)


def at(seconds: float) -> datetime:
    return T0 + timedelta(seconds=seconds)


def tweet(tid, author, seconds, kind="original", text="", hashtags=(), **links) -> TweetRecord:
    return TweetRecord(
        tweet_id=str(tid),
        author_id=str(author),
        created_at=at(seconds),
        kind=Kind(kind),
        text=text,
        hashtags=tuple(hashtags),
        **links,
    )


def retweet(tid, author, seconds, source: TweetRecord, embed_time=False, **kw) -> TweetRecord:
    return tweet(
        tid, author, seconds, "retweet", text=source.text, hashtags=source.hashtags,
        retweeted_tweet_id=source.tweet_id, retweeted_author_id=source.author_id,
        retweeted_created_at=source.created_at if embed_time else None, **kw,
    )


def random_rt_corpus(rng: random.Random, n_sources=None, n_users=None) -> Corpus:
    """Sources plus retweets and quotes with delays spread around a minute."""
    n_sources = n_sources or rng.randint(1, 12)
    n_users = n_users or rng.randint(2, 15)
    users = [f"u{i}" for i in range(n_users)]
    recs = []
    ids = iter(range(10**6))
    for _ in range(n_sources):
        src = tweet(next(ids), rng.choice(users), rng.randint(0, 3600), text="src")
        recs.append(src)
        for _ in range(rng.randint(0, 25)):
            delay = rng.choice([rng.randint(0, 30), rng.randint(0, 120), rng.randint(-20, 400)])
            who = rng.choice(users)
            if rng.random() < 0.25:
                recs.append(tweet(next(ids), who, src.timestamp - T0.timestamp() + delay, "quote",
                                  text="q", quoted_tweet_id=src.tweet_id))
            else:
                recs.append(retweet(next(ids), who, src.timestamp - T0.timestamp() + delay, src))
    return Corpus(recs)


WORDS = ["vote", "count", "ballots", "fraud", "steal", "stop", "now", "share", "truth", "election", "patriots",
         "rigged", "audit", "dominion", "machines", "watch", "video", "sharpie", "arizona", "georgia"]


def random_text_corpus(rng: random.Random, n: int) -> list[TweetRecord]:
    """Posts mixing fresh text, near-copies of earlier posts and a few retweets."""
    recs = []
    texts = []
    for i in range(n):
        r = rng.random()
        if texts and r < 0.35:
            base = list(rng.choice(texts))
            for k in range(len(base)):
                if rng.random() < 0.05:
                    base[k] = rng.choice("abcdefgh ")
            text = "".join(base)
        else:
            text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(0, 12)))
        texts.append(text)
        kind = rng.choice(["original", "reply", "quote", "original"])
        if recs and rng.random() < 0.1:
            recs.append(retweet(f"t{i:04d}", f"a{rng.randint(0, 30)}", i * 7, recs[0]))
            continue
        recs.append(tweet(f"t{i:04d}", f"a{rng.randint(0, 30)}", i * 7, kind, text=text))
    return recs


@pytest.fixture
def vocab() -> HashtagVocabulary:
    return HashtagVocabulary.default()


@pytest.fixture
def small_vocab() -> HashtagVocabulary:
    return HashtagVocabulary(("stopthesteal", "dominion", "qanon", "wwg1wga", "civilwar"),
                             {"stopthesteal": "US Election", "dominion": "US Election",
                              "qanon": "QAnon", "wwg1wga": "QAnon", "civilwar": "QAnon"})
