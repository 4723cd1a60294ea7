import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordscope.copypasta import build_copypasta_network, sliding_window_scan
from coordscope.ingest import Corpus, HashtagVocabulary, parse_tweet_record
from coordscope.rapid_retweet import build_rapid_retweet_network, star_hubs
from coordscope.synth import (
    SynthConfig,
    SynthManifest,
    cluster_recovery,
    corpus_jsonl,
    generate,
    hub_recovery,
    precision_recall,
    write_corpus,
)


def to_corpus(records):
    return Corpus(parse_tweet_record(r, i + 1) for i, r in enumerate(records))


def test_single_star_recovered():
    records, manifest = generate(SynthConfig(stars=1, spokes=5, pastas=0, noise=0, authors=50))
    net = build_rapid_retweet_network(to_corpus(records))
    hubs = star_hubs(net.graph, min_spokes=5)
    assert len(hubs) == 1 and hubs[0].spokes == 5
    assert hub_recovery(hubs, manifest)["precision"] == hub_recovery(hubs, manifest)["recall"] == 1.0
    star = manifest.stars[0]
    assert sorted(net.graph.predecessors(hubs[0].hub)) == sorted(star["spokes"])


def test_single_pasta_recovered():
    records, manifest = generate(SynthConfig(stars=0, pastas=1, copies=8, mutation_rate=0.02, noise=100, authors=200))
    edges, _ = sliding_window_scan(to_corpus(records), threshold=0.7)
    _, clusters = build_copypasta_network(edges)
    assert len(clusters) == 1
    assert set(clusters[0].members) == set(manifest.pastas[0]["members"])
    assert cluster_recovery(clusters, manifest) == {"precision": 1.0, "recall": 1.0, "found": 1, "planted": 1}


def test_same_seed_same_bytes(tmp_path):
    cfg = SynthConfig(noise=2000, authors=400)
    a = generate(cfg)
    b = generate(cfg)
    assert corpus_jsonl(a[0]) == corpus_jsonl(b[0])
    assert a[1].to_dict() == b[1].to_dict()
    write_corpus(*a, tmp_path / "a.jsonl", tmp_path / "a.json")
    write_corpus(*b, tmp_path / "b.jsonl", tmp_path / "b.json")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert SynthManifest.load(tmp_path / "a.json").to_dict() == a[1].to_dict()
    other = generate(SynthConfig(noise=2000, authors=400, seed=43))
    assert corpus_jsonl(other[0]) != corpus_jsonl(a[0])


def test_manifest_determines_corpus():
    records, manifest = generate(SynthConfig(noise=500, authors=300, seed=9))
    replay, _ = generate(SynthConfig(**manifest.config))
    assert corpus_jsonl(replay) == corpus_jsonl(records)
    assert json.loads(json.dumps(manifest.to_dict())) == manifest.to_dict()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_records_parse_and_sort(seed):
    records, manifest = generate(SynthConfig(stars=2, spokes=6, pastas=2, copies=5, noise=300, authors=100, seed=seed))
    corpus = to_corpus(records)
    keys = [r.sort_key for r in corpus]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    planted = {m for p in manifest.pastas for m in p["members"]}
    assert planted <= {r.tweet_id for r in corpus}
    for star in manifest.stars:
        for rt in star["retweets"]:
            delay = (corpus.get(rt["id"]).created_at - corpus.get(rt["source"]).created_at).total_seconds()
            assert 1 <= delay <= 60
            assert corpus.get(rt["source"]).author_id == star["hub"]


@pytest.mark.parametrize("kwargs", [
    {"spokes": 30, "authors": 10},
    {"mutation_rate": 1.0},
    {"mutation_rate": -0.1},
    {"stars": -1},
    {"hashtag_mode": "random"},
    {"sources_per_star": 1},
])
def test_infeasible_configs(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs).validate()


def test_blocs_mode_manifest():
    records, manifest = generate(SynthConfig(hashtag_mode="blocs", noise=500, authors=200))
    vocab = HashtagVocabulary.default()
    blocs = manifest.blocs
    assert blocs["bridge"] == "civilwar"
    assert set(blocs["election"]) | set(blocs["qanon"]) | {blocs["bridge"]} == set(vocab)
    assert not set(blocs["election"]) & set(blocs["qanon"])


def test_precision_recall_edge_cases():
    assert precision_recall(set(), set()) == (1.0, 1.0)
    assert precision_recall({1}, set()) == (0.0, 1.0)
    assert precision_recall(set(), {1}) == (0.0, 0.0)
    assert precision_recall({1, 2}, {2, 3}) == (0.5, 0.5)
