import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordscope.graphcore import WeightedDigraph
from coordscope.ingest import AnnotationStore, Corpus, Kind
from coordscope.rapid_retweet import (
    RapidRetweetConfig,
    amplification_report,
    annotate_labels,
    build_rapid_retweet_network,
    star_hubs,
)

from conftest import random_rt_corpus, retweet, tweet


def edge_map(net):
    return {(u, v): w for u, v, w in net.graph.edges()}


def test_two_rapid_retweets_make_weight_two_edge():
    t1 = tweet("1", "u", 0)
    t2 = tweet("2", "u", 100)
    corpus = Corpus([t1, t2, retweet("3", "A", 10, t1), retweet("4", "A", 150, t2)])
    net = build_rapid_retweet_network(corpus)
    assert edge_map(net) == {("A", "u"): 2}
    assert net.graph.node_attrs["u"]["in_degree"] == 1


def test_single_rapid_retweet_is_filtered():
    t1 = tweet("1", "u", 0)
    net = build_rapid_retweet_network(Corpus([t1, retweet("3", "A", 10, t1)]))
    assert net.graph.number_of_edges() == 0
    assert "A" not in net.graph and "u" not in net.graph


def test_window_boundary_is_inclusive():
    t1, t2 = tweet("1", "u", 0), tweet("2", "u", 500)
    at_60 = Corpus([t1, t2, retweet("3", "A", 60, t1), retweet("4", "A", 560, t2)])
    at_61 = Corpus([t1, t2, retweet("3", "A", 61, t1), retweet("4", "A", 560, t2)])
    assert edge_map(build_rapid_retweet_network(at_60)) == {("A", "u"): 2}
    assert edge_map(build_rapid_retweet_network(at_61)) == {}


def test_quotes_never_count():
    t1 = tweet("1", "u", 0)
    quotes = [tweet(str(10 + i), "A", 5 + i, "quote", quoted_tweet_id="1") for i in range(5)]
    assert build_rapid_retweet_network(Corpus([t1, *quotes])).graph.number_of_edges() == 0


def test_unresolved_sources_and_embedded_times():
    ghost = tweet("99", "u", 0)
    untimed = [retweet("3", "A", 10, ghost), retweet("4", "A", 20, ghost)]
    net = build_rapid_retweet_network(Corpus(untimed))
    assert net.unresolved_sources == ["99"] and net.graph.number_of_edges() == 0
    timed = [retweet("3", "A", 10, ghost, embed_time=True), retweet("4", "A", 20, ghost, embed_time=True)]
    net = build_rapid_retweet_network(Corpus(timed))
    assert edge_map(net) == {("A", "u"): 2} and net.unresolved_sources == []


def test_self_and_inverted_retweets_are_skipped():
    t1 = tweet("1", "u", 100)
    recs = [t1, retweet("2", "u", 110, t1), retweet("3", "u", 120, t1), retweet("4", "A", 50, t1), retweet("5", "A", 40, t1)]
    net = build_rapid_retweet_network(Corpus(recs))
    assert net.graph.number_of_edges() == 0
    assert net.skip_report()["self_retweets"] == 2
    assert net.skip_report()["negative_delays"] == 2


def test_config_validation():
    with pytest.raises(ValueError):
        RapidRetweetConfig(window_seconds=0)
    with pytest.raises(ValueError):
        RapidRetweetConfig(min_edge_weight=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_filter_invariants(seed):
    corpus = random_rt_corpus(random.Random(seed))
    wide = build_rapid_retweet_network(corpus, RapidRetweetConfig(60, 2))
    narrow = build_rapid_retweet_network(corpus, RapidRetweetConfig(30, 2))
    a, b = edge_map(wide), edge_map(narrow)
    assert all(w >= 2 for w in a.values())
    assert all(edge in a and w <= a[edge] for edge, w in b.items())
    assert set(wide.graph.nodes) <= corpus.authors()
    quote_ids = {r.tweet_id for r in corpus if r.kind is Kind.QUOTE}
    assert not quote_ids & {e.retweet_id for e in wide.events}
    assert edge_map(build_rapid_retweet_network(corpus)) == a


def test_star_purity_and_ranking():
    g = WeightedDigraph()
    for i in range(12):
        g.add_edge(f"s{i}", "hub", 2)
    g.add_edge("s0", "other", 2)
    for i in range(10):
        g.add_edge(f"x{i}", "small", 3)
    hubs = star_hubs(g, min_spokes=10)
    assert [h.hub for h in hubs] == ["hub", "small"]
    assert hubs[0].spokes == 12 and hubs[0].purity == pytest.approx(11 / 12)
    assert hubs[1].purity == 1.0
    assert star_hubs(WeightedDigraph()) == []


def test_planted_star_ranks_first_among_noise():
    rng = random.Random(5)
    recs = []
    sources = [tweet(f"h{k}", "hub", 1000 * k) for k in range(3)]
    recs += sources
    for s in range(25):
        for k, src in enumerate(sources):
            recs.append(retweet(f"r{s}_{k}", f"spoke{s}", 1000 * k + rng.randint(1, 60), src))
    noise = random_rt_corpus(random.Random(9), n_sources=10, n_users=12)
    net = build_rapid_retweet_network(Corpus(recs + list(noise)))
    hubs = star_hubs(net.graph, min_spokes=10)
    assert hubs[0].hub == "hub" and hubs[0].spokes == 25 and hubs[0].purity == 1.0


def test_amplification_report_fractions(small_vocab):
    src = tweet("1", "hub", 0, text="#stopthesteal #qanon", hashtags=("stopthesteal", "qanon", "qanon"))
    src2 = tweet("2", "hub", 100, text="#stopthesteal", hashtags=("stopthesteal",))
    recs = [src, src2]
    for i, user in enumerate(["p1", "p2", "d1"]):
        recs += [retweet(f"a{i}", user, 5, src), retweet(f"b{i}", user, 105, src2)]
    store = AnnotationStore({"p1": "promoter", "p2": "promoter", "d1": "detractor"}, {"1": "Dominion"})
    corpus = Corpus(recs)
    net = build_rapid_retweet_network(corpus)
    annotate_labels(net, store)
    report = amplification_report(net, corpus, store, small_vocab)
    # participants: p1, p2 promoters; d1 detractor; hub unlabeled
    assert report.label_fractions == {"promoter": 0.5, "detractor": 0.25, "unlabeled": 0.25}
    assert report.hashtag_counts == {"stopthesteal": 6, "qanon": 3}
    assert report.hashtag_fractions == pytest.approx({"stopthesteal": 2 / 3, "qanon": 1 / 3})
    assert report.story_counts == {"Dominion": 3}
    assert report.hubs[0]["user"] == "hub" and report.hubs[0]["in_degree"] == 3
    assert net.graph.node_attrs["p1"]["label"] == "promoter"
    for dist in (report.label_fractions, report.hashtag_fractions, report.story_fractions):
        assert abs(sum(dist.values()) - 1) < 1e-9
    d = report.to_dict()
    assert d["reference_original_corpus"]["promoter_fraction"] == 0.83


def test_all_promoters():
    src, src2 = tweet("1", "hub", 0), tweet("2", "hub", 100)
    recs = [src, src2, retweet("3", "p", 5, src), retweet("4", "p", 105, src2)]
    store = AnnotationStore({"p": "promoter", "hub": "promoter"})
    corpus = Corpus(recs)
    report = amplification_report(build_rapid_retweet_network(corpus), corpus, store)
    assert report.label_fractions["promoter"] == 1.0
