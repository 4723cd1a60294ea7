"""Copypasta detection: near-duplicate chains among non-retweet posts.

Posts are ordered chronologically and compared within a sliding window of
``window_size`` consecutive posts (stride 1). Every pair that shares at least
one window is scored exactly once, earlier post first. Pairs scoring above
the threshold become edges of an undirected tweet network whose connected
components are the copypasta clusters.
"""

from __future__ import annotations

import csv
import io
import logging
import re
import unicodedata
import warnings
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .graphcore import WeightedGraph, connected_components
from .ingest import UNLABELED, AnnotationStore, Corpus, HashtagVocabulary, Kind, TweetRecord
from .similarity import EncodedTexts, score_pairs

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.7
SHARE_KINDS = ("original", "reply", "quote")

REFERENCE_ORIGINAL_CORPUS = {
    "threshold": 0.7,
    "stopthesteal_share_of_copypasta_tweets": 0.7625,
    "clusters_with_story_label": 0.60,
    "promoter_fraction": 0.95,
}

_URL_RE = re.compile(r"(?:https?://|www\.)\S+|\bt\.co/\S+", re.IGNORECASE)
_WS_RE = re.compile(r"\s+")


class ThresholdWarning(UserWarning):
    pass


def normalize_text(text: str) -> str:
    """NFC-normalise, drop URLs and collapse whitespace. Case is kept."""
    text = unicodedata.normalize("NFC", text)
    text = _URL_RE.sub(" ", text)
    return _WS_RE.sub(" ", text).strip()


def window_pairs(n: int, window_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j), i < j, that share at least one window of the given size.

    With stride 1 these are exactly the pairs with ``j - i < window_size``.
    Ordered by j, then i.
    """
    if window_size < 2:
        raise ValueError(f"window_size must be >= 2, got {window_size}")
    left, right = [], []
    for span in range(1, min(window_size, n)):
        i = np.arange(0, n - span, dtype=np.int64)
        left.append(i)
        right.append(i + span)
    if not left:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    left = np.concatenate(left)
    right = np.concatenate(right)
    order = np.lexsort((left, right))
    return left[order], right[order]


@dataclass(frozen=True)
class SimilarityEdge:
    tweet_id_a: str
    tweet_id_b: str
    score: float


@dataclass
class SimilarityHistogram:
    edges: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_scores(cls, scores: np.ndarray, bins: int = 100) -> SimilarityHistogram:
        counts, edges = np.histogram(np.asarray(scores, dtype=float), bins=bins, range=(0.0, 1.0))
        return cls(edges, counts.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def centers(self) -> np.ndarray:
        return (self.edges[:-1] + self.edges[1:]) / 2


def histograms_csv(histograms: Mapping[str, SimilarityHistogram]) -> str:
    names = list(histograms)
    first = histograms[names[0]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_left", "bin_right", *names])
    for k in range(len(first.counts)):
        w.writerow([f"{first.edges[k]:.4f}", f"{first.edges[k + 1]:.4f}", *(int(histograms[n].counts[k]) for n in names)])
    return buf.getvalue()


@dataclass
class PairScores:
    """Every windowed pair of a scan with its score."""

    records: list[TweetRecord]
    left: np.ndarray
    right: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return self.scores.shape[0]

    def histogram(self, bins: int = 100) -> SimilarityHistogram:
        return SimilarityHistogram.from_scores(self.scores, bins)

    def edges(self, threshold: float) -> list[SimilarityEdge]:
        keep = np.nonzero(self.scores > threshold)[0]
        recs = self.records
        out = [SimilarityEdge(recs[self.left[p]].tweet_id, recs[self.right[p]].tweet_id, float(self.scores[p])) for p in keep]
        out.sort(key=lambda e: (e.tweet_id_a, e.tweet_id_b))
        return out


def _scan_population(records: Iterable[TweetRecord]) -> list[TweetRecord]:
    recs = [r for r in records if r.kind is not Kind.RETWEET]
    for prev, cur in zip(recs, recs[1:]):
        if cur.sort_key < prev.sort_key:
            raise ValueError("records must be in chronological order")
    return recs


def score_windows(records: Iterable[TweetRecord], window_size: int = 10, threads: int = 1) -> PairScores:
    """Score every pair of non-retweet posts that co-occur in a window.

    Retweets are dropped from the input: they copy their source verbatim and
    are never copypasta.
    """
    recs = _scan_population(records)
    left, right = window_pairs(len(recs), window_size)
    texts = EncodedTexts([normalize_text(r.text) for r in recs])
    scores = score_pairs(texts, left, right, threads=threads)
    return PairScores(recs, left, right, scores)


def sliding_window_scan(records: Iterable[TweetRecord], window_size: int = 10, threshold: float = DEFAULT_THRESHOLD,
                        bins: int = 100, threads: int = 1) -> tuple[list[SimilarityEdge], SimilarityHistogram]:
    pairs = score_windows(records, window_size, threads)
    return pairs.edges(threshold), pairs.histogram(bins)


def _moving_average(values: np.ndarray, width: int) -> np.ndarray:
    kernel = np.ones(width) / width
    return np.convolve(values.astype(float), kernel, mode="same")


def select_threshold(histogram: SimilarityHistogram, smoothing: int = 5, min_prominence: float = 1.0,
                     fallback: float = DEFAULT_THRESHOLD) -> float:
    """Valley between the two dominant modes of a similarity histogram.

    Counts are smoothed with a centred moving average and compared on a
    log1p scale so that a small high-similarity mode is not swamped by the
    bulk of unrelated pairs. Modes are ranked by topographic prominence; the
    second must reach ``min_prominence`` (log units) to count. The result is
    the centre of the lowest stretch of the smoothed curve between the two
    modes. Without a second mode, warns and returns ``fallback``.
    """
    if histogram.total == 0:
        raise ValueError("cannot select a threshold from an empty histogram")
    smooth = _moving_average(histogram.counts, smoothing)
    curve = np.log1p(smooth)
    padded = np.concatenate(([0.0], curve, [0.0]))
    peaks, props = find_peaks(padded, prominence=0.0)
    peaks = peaks - 1
    if len(peaks) >= 2:
        rank = np.argsort(-props["prominences"], kind="stable")
        if props["prominences"][rank[1]] >= min_prominence:
            lo, hi = sorted((int(peaks[rank[0]]), int(peaks[rank[1]])))
            segment = smooth[lo:hi + 1]
            low = np.nonzero(segment == segment.min())[0]
            # centre of the first flat run at the minimum
            run_end = low[0]
            while run_end + 1 < len(segment) and segment[run_end + 1] == segment.min():
                run_end += 1
            valley = lo + (low[0] + run_end) / 2
            centers = histogram.centers
            k0, k1 = int(np.floor(valley)), int(np.ceil(valley))
            return float((centers[k0] + centers[k1]) / 2)
    msg = f"similarity histogram is not bimodal; falling back to threshold {fallback}"
    logger.warning(msg)
    warnings.warn(msg, ThresholdWarning, stacklevel=2)
    return fallback


@dataclass
class CopypastaCluster:
    cluster_id: int
    members: tuple[str, ...]
    representative_text: str
    participants: tuple[str, ...]
    hashtag_profile: dict[str, int]
    story_profile: dict[str, int]
    kind_profile: dict[str, float]
    label_profile: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "size": len(self.members),
            "members": list(self.members),
            "representative_text": self.representative_text,
            "participants": list(self.participants),
            "hashtag_profile": self.hashtag_profile,
            "story_profile": self.story_profile,
            "kind_profile": self.kind_profile,
            "label_profile": self.label_profile,
        }


def _kind_fractions(records: Sequence[TweetRecord]) -> dict[str, float]:
    counts = Counter(r.kind.value for r in records)
    n = sum(counts[k] for k in SHARE_KINDS)
    return {k: (counts[k] / n if n else 0.0) for k in SHARE_KINDS}


def build_copypasta_network(edges: Iterable[SimilarityEdge], corpus: Corpus | None = None,
                            annotations: AnnotationStore | None = None,
                            vocabulary: HashtagVocabulary | None = None) -> tuple[WeightedGraph, list[CopypastaCluster]]:
    """Tweet graph weighted by similarity, plus one profiled cluster per component.

    Without a corpus the clusters carry membership only (profiles empty,
    members ordered by id).
    """
    annotations = annotations or AnnotationStore()
    vocabulary = vocabulary or HashtagVocabulary.default()
    graph = WeightedGraph()
    for e in sorted(edges, key=lambda e: (e.tweet_id_a, e.tweet_id_b)):
        graph.set_edge(e.tweet_id_a, e.tweet_id_b, e.score)
    clusters = []
    comps = [c for c in connected_components(graph) if len(c) >= 2]
    profiled = []
    for comp in comps:
        if corpus is not None:
            recs = sorted((corpus.get(t) for t in comp), key=lambda r: r.sort_key)
            profiled.append((recs[0].sort_key, [r.tweet_id for r in recs], recs))
        else:
            ids = sorted(comp)
            profiled.append(((ids[0],), ids, None))
    profiled.sort(key=lambda p: p[0])
    for cid, (_, ids, recs) in enumerate(profiled):
        if recs is None:
            clusters.append(CopypastaCluster(cid, tuple(ids), "", (), {}, {}, {}, {}))
            continue
        authors = sorted({r.author_id for r in recs})
        tags = Counter(t for r in recs for t in set(r.hashtags) if t in vocabulary)
        stories = Counter(annotations.story(r.tweet_id) for r in recs)
        stories.pop(UNLABELED, None)
        labels = Counter(annotations.user_label(a) for a in authors)
        clusters.append(CopypastaCluster(
            cluster_id=cid,
            members=tuple(ids),
            representative_text=recs[0].text,
            participants=tuple(authors),
            hashtag_profile={t: tags[t] for t in vocabulary if tags.get(t)},
            story_profile=dict(sorted(stories.items(), key=lambda kv: (-kv[1], kv[0]))),
            kind_profile=_kind_fractions(recs),
            label_profile={k: labels.get(k, 0) / len(authors) for k in ("promoter", "detractor", UNLABELED)},
        ))
    return graph, clusters


def is_fringe(record: TweetRecord, vocabulary: HashtagVocabulary) -> bool:
    return any(t in vocabulary for t in record.hashtags)


def sharing_activity_proportions(sets: Mapping[str, Iterable[TweetRecord]]) -> dict[str, dict[str, float]]:
    """Original / reply / quote shares for each named tweet set (retweets ignored)."""
    out = {}
    for name, records in sets.items():
        recs = [r for r in records if r.kind is not Kind.RETWEET]
        if not recs:
            raise ValueError(f"tweet set {name!r} is empty once retweets are excluded")
        out[name] = _kind_fractions(recs)
    return out


def activity_sets(corpus: Corpus, vocabulary: HashtagVocabulary,
                  clusters: Iterable[CopypastaCluster]) -> dict[str, list[TweetRecord]]:
    """Generic (no fringe hashtag), fringe, and fringe-copypasta tweet sets."""
    members = {t for c in clusters for t in c.members}
    generic, fringe, pasta = [], [], []
    for r in corpus:
        if r.kind is Kind.RETWEET:
            continue
        if is_fringe(r, vocabulary):
            fringe.append(r)
            if r.tweet_id in members:
                pasta.append(r)
        else:
            generic.append(r)
    return {"generic": generic, "fringe": fringe, "copypasta": pasta}


def population_histograms(corpus: Corpus, vocabulary: HashtagVocabulary, window_size: int = 10, bins: int = 100,
                          seed: int = 0, threads: int = 1) -> dict[str, SimilarityHistogram]:
    """Windowed score histograms of fringe posts and of an equal-size random generic sample.

    Each population is scanned on its own chronological sequence.
    """
    pool = corpus.non_retweets()
    fringe = [r for r in pool if is_fringe(r, vocabulary)]
    generic = [r for r in pool if not is_fringe(r, vocabulary)]
    rng = np.random.default_rng(seed)
    if len(generic) > len(fringe):
        pick = np.sort(rng.choice(len(generic), size=len(fringe), replace=False))
        generic = [generic[i] for i in pick]
    return {
        "fringe": score_windows(fringe, window_size, threads).histogram(bins),
        "generic": score_windows(generic, window_size, threads).histogram(bins),
    }


def copypasta_summary(clusters: Sequence[CopypastaCluster], vocabulary: HashtagVocabulary) -> dict:
    """Corpus-level figures across all clusters."""
    n_tweets = sum(len(c.members) for c in clusters)
    tag_tweets = Counter()
    for c in clusters:
        tag_tweets.update(c.hashtag_profile)
    users = {u for c in clusters for u in c.participants}
    return {
        "clusters": len(clusters),
        "tweets": n_tweets,
        "users": len(users),
        "hashtag_share_of_tweets": {t: tag_tweets[t] / n_tweets for t in vocabulary if tag_tweets.get(t)} if n_tweets else {},
        "clusters_with_story_label": (sum(1 for c in clusters if c.story_profile) / len(clusters)) if clusters else 0.0,
        "reference_original_corpus": REFERENCE_ORIGINAL_CORPUS,
    }
