"""Hashtag temporal evolution mapping.

Pipeline, per vocabulary hashtag:

1. tagset: every tweet embedding the hashtag, newest first;
2. hashtag-count vectors over the vocabulary and their pairwise cosine
   similarities;
3. evolution tree: each tweet hangs under its most similar strictly older
   tweet in the tagset, edge oriented older -> newer;

then all trees are merged into a tweet layer, linked to a hashtag layer, and
projected onto a weighted hashtag co-occurrence network.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .graphcore import Dendrogram, WeightedGraph, eigenvector_centrality, hierarchical_cluster, louvain
from .ingest import Corpus, HashtagVocabulary, TweetRecord, format_timestamp

REFERENCE_ORIGINAL_CORPUS = {
    "communities": 2,
    "most_central": ["qanon", "wwg1wga", "stopthesteal", "dominion"],
    "bridges": ["dobbs", "civilwar"],
    "closest_pair": ["stopthesteal", "dominion"],
}


@dataclass
class Tagset:
    hashtag: str
    records: list[TweetRecord]
    """Member tweets, newest first."""
    vectors: np.ndarray
    """One row of vocabulary hashtag counts per member, aligned with ``records``."""

    def __len__(self) -> int:
        return len(self.records)

    def chronological(self) -> tuple[list[TweetRecord], np.ndarray]:
        return self.records[::-1], self.vectors[::-1]


def build_tagset(corpus: Corpus, hashtag: str, vocabulary: HashtagVocabulary) -> Tagset:
    """All tweets embedding ``hashtag``; pure retweets use their source's hashtags."""
    if hashtag not in vocabulary:
        raise KeyError(f"{hashtag!r} is not in the vocabulary")
    members, vectors = [], []
    for rec in corpus:
        tags = corpus.effective_hashtags(rec)
        if hashtag in tags:
            members.append(rec)
            vectors.append(vocabulary.vector(tags))
    members.reverse()
    vectors.reverse()
    arr = np.array(vectors, dtype=np.int64).reshape(len(members), len(vocabulary))
    return Tagset(hashtag, members, arr)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))


def similarity_matrix(tagset: Tagset) -> np.ndarray:
    """Dense cosine matrix of a tagset, in the tagset's own (newest-first) order.

    Meant for inspection of small tagsets; tree construction never builds it.
    """
    x = tagset.vectors.astype(float)
    m = len(x)
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise ValueError("tagset contains a zero vector")
    unit = x / norms[:, None]
    s = np.empty((m, m))
    for i in range(m):
        s[i, i:] = unit[i:] @ unit[i]
    iu = np.triu_indices(m, 1)
    s[(iu[1], iu[0])] = s[iu]
    np.fill_diagonal(s, 1.0)
    return np.clip(s, 0.0, 1.0)


@dataclass
class EvolutionTree:
    hashtag: str
    nodes: list[str]
    """Tweet ids, oldest first."""
    edges: list[tuple[str, str]]
    """(parent, child) with the parent strictly older."""

    def parents(self) -> dict[str, str]:
        return {child: parent for parent, child in self.edges}


def build_evolution_tree(tagset: Tagset) -> EvolutionTree:
    """Attach every tweet to its most similar strictly older tagset tweet.

    Older means earlier in the corpus order (created_at, tweet_id). Ties in
    similarity go to the nearest older tweet in time, then the smaller id.
    Cosines are compared exactly, via squared integer ratios, so ties among
    the sparse count vectors are real ties.

    Tweets with identical vectors are interchangeable as candidate parents
    except for recency, so only the best-ranked older tweet per distinct
    vector is kept; each step scores the new tweet against those.
    """
    recs, vecs = tagset.chronological()
    nodes = [r.tweet_id for r in recs]
    edges: list[tuple[str, str]] = []
    if not recs:
        return EvolutionTree(tagset.hashtag, nodes, edges)
    if np.any(vecs.sum(axis=1) == 0):
        raise ValueError("tagset contains a zero vector")

    distinct: dict[tuple, int] = {}
    rep_vecs: list[np.ndarray] = []
    rep_norm2: list[int] = []
    rep_rec: list[TweetRecord] = []
    mat = np.zeros((0, vecs.shape[1]), dtype=np.int64)

    for rec, vec in zip(recs, vecs):
        key = tuple(int(x) for x in vec)
        n2 = int(vec @ vec)
        if rep_rec:
            dots = mat @ vec
            approx = dots / np.sqrt(np.asarray(rep_norm2, dtype=float))
            top = approx.max()
            cand = np.nonzero(approx >= top - 1e-9 * max(top, 1.0))[0]
            best = None
            for c in cand:
                d = int(dots[c])
                if best is None:
                    best = c
                    continue
                bd = int(dots[best])
                # compare d^2 / n2_c against bd^2 / n2_best exactly
                lhs = d * d * rep_norm2[best]
                rhs = bd * bd * rep_norm2[c]
                if lhs > rhs or (lhs == rhs and _nearer(rep_rec[c], rep_rec[best])):
                    best = c
            edges.append((rep_rec[best].tweet_id, rec.tweet_id))
        slot = distinct.get(key)
        if slot is None:
            distinct[key] = len(rep_rec)
            rep_vecs.append(vec)
            rep_norm2.append(n2)
            rep_rec.append(rec)
            mat = np.vstack([mat, vec[None, :]])
        elif rec.created_at > rep_rec[slot].created_at:
            # same timestamp keeps the earlier (smaller) id
            rep_rec[slot] = rec
    return EvolutionTree(tagset.hashtag, nodes, edges)


def _nearer(a: TweetRecord, b: TweetRecord) -> bool:
    """True when ``a`` beats ``b`` as the parent: later timestamp, then smaller id."""
    if a.created_at != b.created_at:
        return a.created_at > b.created_at
    return a.tweet_id < b.tweet_id


def median_timestamp(records: Tagset | Iterable[TweetRecord]) -> datetime:
    """Lower median of creation times."""
    recs = records.records if isinstance(records, Tagset) else list(records)
    if not recs:
        raise ValueError("median of an empty tagset")
    times = sorted(r.created_at for r in recs)
    return times[(len(times) - 1) // 2]


@dataclass
class BipartiteNetwork:
    hashtags: tuple[str, ...]
    tweets: list[str]
    """Tweet layer, chronological, each tweet once."""
    tweet_edges: list[tuple[str, str]]
    """Union of the evolution-tree edges."""
    incidence: dict[str, dict[str, int]]
    """tweet id -> {hashtag: multiplicity} for vocabulary hashtags."""
    created_at: dict[str, datetime] = field(default_factory=dict)

    def cross_edges(self) -> list[tuple[str, str, int]]:
        return [(t, h, w) for t in self.tweets for h, w in self.incidence[t].items()]


def build_bipartite(trees: Iterable[EvolutionTree], corpus: Corpus, vocabulary: HashtagVocabulary) -> BipartiteNetwork:
    nodes: set[str] = set()
    edges: dict[tuple[str, str], None] = {}
    for tree in trees:
        nodes.update(tree.nodes)
        edges.update(dict.fromkeys(tree.edges))
    recs = sorted((corpus.get(t) for t in nodes), key=lambda r: r.sort_key)
    incidence = {}
    for r in recs:
        counts = Counter(t for t in corpus.effective_hashtags(r) if t in vocabulary)
        incidence[r.tweet_id] = {h: counts[h] for h in vocabulary if counts.get(h)}
    return BipartiteNetwork(
        hashtags=vocabulary.tags,
        tweets=[r.tweet_id for r in recs],
        tweet_edges=sorted(edges),
        incidence=incidence,
        created_at={r.tweet_id: r.created_at for r in recs},
    )


@dataclass
class HtemapNetwork:
    graph: WeightedGraph
    centrality: dict[str, float]
    community: dict[str, int]
    median_date: dict[str, datetime]
    tagset_sizes: dict[str, int]

    @property
    def hashtags(self) -> list[str]:
        return self.graph.nodes

    def bridge_edges(self) -> list[tuple[str, str, float]]:
        return [(u, v, w) for u, v, w in self.graph.edges() if self.community[u] != self.community[v]]

    def communities(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for tag in self.graph.nodes:
            out.setdefault(self.community[tag], []).append(tag)
        return dict(sorted(out.items()))


def project_htemap(bipartite: BipartiteNetwork, seed: int = 0, resolution: float = 1.0) -> HtemapNetwork:
    """Hashtag co-occurrence network of the tweet layer, with node analytics.

    Weight(h1, h2) is the number of tweet-layer tweets embedding both. Nodes
    are the vocabulary hashtags present in the layer, in vocabulary order,
    annotated with eigenvector centrality, Louvain community and the lower
    median creation time of their tagset.
    """
    members: dict[str, list[str]] = {h: [] for h in bipartite.hashtags}
    pair_counts: Counter[tuple[str, str]] = Counter()
    pos = {h: i for i, h in enumerate(bipartite.hashtags)}
    for t in bipartite.tweets:
        tags = sorted(bipartite.incidence[t], key=pos.__getitem__)
        for h in tags:
            members[h].append(t)
        for i in range(len(tags)):
            for j in range(i + 1, len(tags)):
                pair_counts[(tags[i], tags[j])] += 1
    graph = WeightedGraph()
    present = [h for h in bipartite.hashtags if members[h]]
    graph.add_nodes(present)
    for (a, b), w in sorted(pair_counts.items(), key=lambda kv: (pos[kv[0][0]], pos[kv[0][1]])):
        graph.set_edge(a, b, w)
    medians = {}
    for h in present:
        times = sorted(bipartite.created_at[t] for t in members[h])
        medians[h] = times[(len(times) - 1) // 2]
    centrality = eigenvector_centrality(graph) if present else {}
    community = louvain(graph, resolution=resolution, seed=seed)
    for h in present:
        graph.node_attrs[h].update(
            centrality=centrality[h],
            community=community[h],
            median_date=format_timestamp(medians[h]),
            tweets=len(members[h]),
        )
    return HtemapNetwork(graph, centrality, community, medians, {h: len(members[h]) for h in present})


def htemap_dendrogram(network: HtemapNetwork, linkage: str = "average", metric: str = "euclidean") -> Dendrogram:
    """Hierarchical clustering of hashtags over rows of the weighted adjacency matrix."""
    labels = network.graph.nodes
    return hierarchical_cluster(network.graph.adjacency_matrix(labels), labels, linkage=linkage, metric=metric)


@dataclass
class HtemapResult:
    tagsets: dict[str, Tagset]
    trees: dict[str, EvolutionTree]
    bipartite: BipartiteNetwork
    network: HtemapNetwork


def run_htemap(corpus: Corpus, vocabulary: HashtagVocabulary, seed: int = 0, resolution: float = 1.0) -> HtemapResult:
    tagsets = {h: build_tagset(corpus, h, vocabulary) for h in vocabulary}
    trees = {h: build_evolution_tree(ts) for h, ts in tagsets.items()}
    bipartite = build_bipartite(trees.values(), corpus, vocabulary)
    return HtemapResult(tagsets, trees, bipartite, project_htemap(bipartite, seed=seed, resolution=resolution))


def htemap_report(network: HtemapNetwork, vocabulary: HashtagVocabulary,
                  dendrogram: Dendrogram | None = None) -> dict:
    comms = network.communities()
    cross: dict[str, dict[str, int]] = {}
    for cid, tags in comms.items():
        counts = Counter(vocabulary.category(t) or "uncategorised" for t in tags)
        cross[str(cid)] = dict(sorted(counts.items()))
    ranking = sorted(network.graph.nodes, key=lambda h: (-network.centrality[h], h))
    report = {
        "hashtags": len(network.graph.nodes),
        "edges": network.graph.number_of_edges(),
        "communities": {str(k): v for k, v in comms.items()},
        "community_categories": cross,
        "centrality_ranking": [{"hashtag": h, "centrality": network.centrality[h]} for h in ranking],
        "bridge_edges": [{"source": u, "target": v, "weight": w} for u, v, w in network.bridge_edges()],
        "median_dates": {h: format_timestamp(d) for h, d in network.median_date.items()},
        "tagset_sizes": network.tagset_sizes,
        "reference_original_corpus": REFERENCE_ORIGINAL_CORPUS,
    }
    if dendrogram is not None:
        report["dendrogram_merges"] = [
            {"left": sorted(a), "right": sorted(b), "height": h} for a, b, h in dendrogram.merge_order()
        ]
    return report
