"""Rapid-retweet coordination networks.

A rapid retweet is a retweet published at most ``window_seconds`` after its
source tweet. Each rapid retweet adds one unit of weight to the edge
retweeter -> source author; edges below ``min_edge_weight`` are dropped as
chance co-occurrences, and nodes left without edges go with them.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from .graphcore import WeightedDigraph
from .ingest import UNLABELED, AnnotationStore, Corpus, HashtagVocabulary, Kind

logger = logging.getLogger(__name__)

# Published values on the original 568M-tweet election corpus. Reports carry
# them for comparison only; they cannot be reproduced on other data.
REFERENCE_ORIGINAL_CORPUS = {
    "window_seconds": 60,
    "promoter_fraction": 0.83,
    "hashtag_shares": {"stopthesteal": 0.4308, "dobbs": 0.314, "obamagate": 0.1412, "qanon": 0.036},
    "story_tweet_counts": {"Stop the Steal": 15285, "Dominion": 8663, "Hammer and Scorecard": 1111},
}


@dataclass(frozen=True)
class RapidRetweetConfig:
    window_seconds: int = 60
    min_edge_weight: int = 2

    def __post_init__(self):
        if not isinstance(self.window_seconds, int) or self.window_seconds <= 0:
            raise ValueError(f"window_seconds must be a positive integer, got {self.window_seconds!r}")
        if not isinstance(self.min_edge_weight, int) or self.min_edge_weight < 1:
            raise ValueError(f"min_edge_weight must be >= 1, got {self.min_edge_weight!r}")


@dataclass(frozen=True)
class RapidRetweet:
    retweet_id: str
    source_id: str
    retweeter: str
    author: str
    delay_seconds: int


@dataclass
class RapidRetweetNetwork:
    graph: WeightedDigraph
    config: RapidRetweetConfig
    events: list[RapidRetweet]
    """Rapid retweets backing the surviving edges, in corpus order."""
    unresolved_sources: list[str] = field(default_factory=list)
    self_retweets: int = 0
    inverted_delays: int = 0

    def skip_report(self) -> dict:
        return {
            "unresolved_sources": len(self.unresolved_sources),
            "unresolved_source_ids": list(self.unresolved_sources),
            "self_retweets": self.self_retweets,
            "negative_delays": self.inverted_delays,
        }


def build_rapid_retweet_network(corpus: Corpus, config: RapidRetweetConfig | None = None) -> RapidRetweetNetwork:
    """Build the weighted retweeter -> author network of rapid retweets.

    Quote tweets never count. The source creation time comes from the
    in-corpus source tweet, else from the retweet's embedded source
    timestamp; retweets with neither are skipped and listed in
    ``unresolved_sources``. Retweets that appear to precede their source are
    counted in ``inverted_delays`` and ignored.
    """
    config = config or RapidRetweetConfig()
    window = config.window_seconds
    counts: Counter[tuple[str, str]] = Counter()
    rapid: list[RapidRetweet] = []
    unresolved: set[str] = set()
    self_rt = inverted = 0
    for rec in corpus:
        if rec.kind is not Kind.RETWEET:
            continue
        source = corpus.get(rec.retweeted_tweet_id)
        if source is not None:
            src_time = source.created_at
        elif rec.retweeted_created_at is not None:
            src_time = rec.retweeted_created_at
        else:
            unresolved.add(rec.retweeted_tweet_id)
            continue
        author = rec.retweeted_author_id
        if author == rec.author_id:
            self_rt += 1
            continue
        delay = int((rec.created_at - src_time).total_seconds())
        if delay < 0:
            inverted += 1
            continue
        if delay <= window:
            counts[(rec.author_id, author)] += 1
            rapid.append(RapidRetweet(rec.tweet_id, rec.retweeted_tweet_id, rec.author_id, author, delay))

    kept = {pair for pair, n in counts.items() if n >= config.min_edge_weight}
    graph = WeightedDigraph()
    for pair in sorted(kept):
        graph.set_edge(pair[0], pair[1], counts[pair])
    for node in graph.nodes:
        graph.node_attrs[node]["in_degree"] = graph.in_degree(node)
    events = [e for e in rapid if (e.retweeter, e.author) in kept]
    if unresolved:
        logger.info("%d retweeted sources could not be timed", len(unresolved))
    return RapidRetweetNetwork(graph, config, events, sorted(unresolved), self_rt, inverted)


@dataclass(frozen=True)
class StarHub:
    hub: str
    spokes: int
    purity: float
    in_weight: float


def star_hubs(graph: WeightedDigraph, min_spokes: int = 10) -> list[StarHub]:
    """Nodes retweeted by at least ``min_spokes`` distinct accounts.

    Ranked by in-degree, then received weight, then id. ``purity`` is the
    share of a hub's spokes whose only out-neighbour is that hub.
    """
    hubs = []
    for node in graph.nodes:
        spokes = graph.predecessors(node)
        if len(spokes) < min_spokes or not spokes:
            continue
        pure = sum(1 for s in spokes if graph.out_degree(s) == 1)
        hubs.append(StarHub(node, len(spokes), pure / len(spokes), graph.in_weight(node)))
    hubs.sort(key=lambda h: (-h.spokes, -h.in_weight, str(h.hub)))
    return hubs


def _fractions(counter: Counter, keys=None) -> dict[str, float]:
    total = sum(counter.values())
    keys = list(keys) if keys is not None else sorted(counter)
    return {k: (counter.get(k, 0) / total if total else 0.0) for k in keys}


@dataclass
class AmplificationReport:
    hubs: list[dict]
    label_counts: dict[str, int]
    label_fractions: dict[str, float]
    hashtag_counts: dict[str, int]
    hashtag_fractions: dict[str, float]
    story_counts: dict[str, int]
    story_fractions: dict[str, float]
    n_users: int
    n_edges: int
    n_rapid_retweets: int

    def to_dict(self) -> dict:
        return {
            "users": self.n_users,
            "edges": self.n_edges,
            "rapid_retweets": self.n_rapid_retweets,
            "hubs": self.hubs,
            "user_labels": {"counts": self.label_counts, "fractions": self.label_fractions},
            "hashtags": {"counts": self.hashtag_counts, "fractions": self.hashtag_fractions},
            "stories": {"counts": self.story_counts, "fractions": self.story_fractions},
            "reference_original_corpus": REFERENCE_ORIGINAL_CORPUS,
        }


def amplification_report(network: RapidRetweetNetwork, corpus: Corpus, annotations: AnnotationStore | None = None,
                         vocabulary: HashtagVocabulary | None = None, max_hubs: int = 50) -> AmplificationReport:
    """Characterise who takes part in rapid retweeting and what gets amplified.

    * users: promoter / detractor / unlabeled shares over network nodes;
    * hashtags: vocabulary hashtags of each surviving rapid retweet's source
      tweet, one count per distinct tag per retweet;
    * stories: story label of each surviving rapid retweet (the source
      tweet's label, falling back to the retweet's own), labelled ones only.
    """
    annotations = annotations or AnnotationStore()
    vocabulary = vocabulary or HashtagVocabulary.default()
    graph = network.graph

    labels = Counter(annotations.user_label(n) for n in graph.nodes)
    label_keys = ("promoter", "detractor", UNLABELED)
    tags: Counter[str] = Counter()
    stories: Counter[str] = Counter()
    for ev in network.events:
        source = corpus.get(ev.source_id)
        if source is not None:
            hashtags = source.hashtags
        else:
            rt = corpus.get(ev.retweet_id)
            hashtags = rt.hashtags if rt is not None else ()
        for tag in sorted(set(hashtags)):
            if tag in vocabulary:
                tags[tag] += 1
        story = annotations.story(ev.source_id)
        if story == UNLABELED:
            story = annotations.story(ev.retweet_id)
        if story != UNLABELED:
            stories[story] += 1

    ranked = sorted(graph.nodes, key=lambda n: (-graph.in_degree(n), -graph.in_weight(n), str(n)))
    hubs = [
        {"user": n, "in_degree": graph.in_degree(n), "in_weight": graph.in_weight(n), "label": annotations.user_label(n)}
        for n in ranked[:max_hubs] if graph.in_degree(n) > 0
    ]
    tag_order = [t for t in vocabulary if tags.get(t)]
    return AmplificationReport(
        hubs=hubs,
        label_counts={k: labels.get(k, 0) for k in label_keys},
        label_fractions=_fractions(labels, label_keys),
        hashtag_counts={t: tags[t] for t in tag_order},
        hashtag_fractions=_fractions(tags, tag_order),
        story_counts=dict(sorted(stories.items(), key=lambda kv: (-kv[1], kv[0]))),
        story_fractions=_fractions(stories),
        n_users=graph.number_of_nodes(),
        n_edges=graph.number_of_edges(),
        n_rapid_retweets=len(network.events),
    )


def annotate_labels(network: RapidRetweetNetwork, annotations: AnnotationStore | None) -> None:
    annotations = annotations or AnnotationStore()
    for node, attrs in network.graph.node_attrs.items():
        attrs["label"] = annotations.user_label(node)
