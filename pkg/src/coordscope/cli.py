"""``coordscope`` command-line entry point.

Exit codes: 0 success, 1 pipeline failure, 2 configuration error.
Log level comes from ``COORDSCOPE_LOG_LEVEL`` (default WARNING).
"""

from __future__ import annotations

import argparse
import logging
import os
import platform
import sys
import time
import warnings
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from ._io import atomic_write_json, atomic_write_text, sha256_file
from .config import ConfigError, RunConfig, load_field_map
from .copypasta import (
    ThresholdWarning,
    activity_sets,
    build_copypasta_network,
    copypasta_summary,
    histograms_csv,
    population_histograms,
    score_windows,
    select_threshold,
    sharing_activity_proportions,
)
from .graphcore import edge_list_csv, gexf_document, write_newick
from .htemap import htemap_dendrogram, htemap_report, run_htemap
from .ingest import AnnotationStore, HashtagVocabulary, compute_stats, join_annotations, load_corpus
from .rapid_retweet import (
    RapidRetweetConfig,
    amplification_report,
    annotate_labels,
    build_rapid_retweet_network,
    star_hubs,
)
from .synth import SynthConfig, corpus_jsonl, generate

logger = logging.getLogger("coordscope")

SUBCOMMANDS = ("ingest-stats", "rapid-retweets", "copypasta", "htemap", "synth", "all")

ALL_ARTIFACTS = {
    "stats": "ingest_stats.json",
    "rapid_edges": "rapid_edges.csv",
    "rapid_report": "rapid_report.json",
    "rapid_gexf": "rapid.gexf",
    "clusters": "copypasta_clusters.json",
    "copypasta_edges": "copypasta_edges.csv",
    "hist": "copypasta_hist.csv",
    "copypasta_report": "copypasta_report.json",
    "htemap_gexf": "htemap.gexf",
    "dendrogram": "htemap.nwk",
    "htemap_report": "htemap.json",
}


class _Context:
    """Loaded inputs shared by the pipelines of one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.vocabulary = HashtagVocabulary.from_file(cfg.vocab) if cfg.vocab else HashtagVocabulary.default()
        field_map = load_field_map(cfg.fields) if cfg.fields else None
        self.corpus, self.stats = load_corpus(cfg.input, self.vocabulary, fields=field_map,
                                              max_bad_lines=cfg.max_bad_lines)
        if cfg.users or cfg.stories:
            self.annotations, self.coverage = join_annotations(self.corpus, cfg.users, cfg.stories)
        else:
            self.annotations, self.coverage = AnnotationStore(), None
        self.written: dict[str, Path] = {}

    def write(self, key: str, path: Path, text: str) -> None:
        atomic_write_text(path, text)
        self.written[key] = path


def _json_text(obj) -> str:
    from ._io import dump_json

    return dump_json(obj)


def pipeline_ingest_stats(ctx: _Context, out: Path) -> None:
    stats = compute_stats(ctx.corpus, ctx.vocabulary, ctx.annotations if ctx.coverage else None)
    doc = stats.to_dict()
    if ctx.coverage is not None:
        doc["annotation_coverage"] = ctx.coverage.to_dict()
    ctx.write("stats", out, _json_text(doc))


def pipeline_rapid(ctx: _Context, edges: Path, report: Path | None, gexf: Path | None) -> None:
    cfg = ctx.cfg
    net = build_rapid_retweet_network(ctx.corpus, RapidRetweetConfig(cfg.window_seconds, cfg.min_edge_weight))
    annotate_labels(net, ctx.annotations)
    ctx.write("rapid_edges", edges, edge_list_csv(net.graph))
    if report is not None:
        rep = amplification_report(net, ctx.corpus, ctx.annotations, ctx.vocabulary).to_dict()
        rep["star_hubs"] = [
            {"hub": h.hub, "spokes": h.spokes, "purity": h.purity, "in_weight": h.in_weight}
            for h in star_hubs(net.graph, cfg.min_spokes)
        ]
        rep["skipped"] = net.skip_report()
        rep["config"] = {"window_seconds": cfg.window_seconds, "min_edge_weight": cfg.min_edge_weight,
                         "min_spokes": cfg.min_spokes}
        ctx.write("rapid_report", report, _json_text(rep))
    if gexf is not None:
        ctx.write("rapid_gexf", gexf, gexf_document(net.graph, ["in_degree", "label"]))


def pipeline_copypasta(ctx: _Context, clusters_out: Path, edges_out: Path | None, hist_out: Path | None,
                       report_out: Path | None) -> None:
    cfg = ctx.cfg
    pairs = score_windows(ctx.corpus, cfg.copypasta_window, threads=cfg.threads)
    hist = pairs.histogram(cfg.hist_bins)
    if cfg.threshold == "auto":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ThresholdWarning)
            threshold = select_threshold(hist) if hist.total else 0.7
        source = "fallback" if caught or not hist.total else "auto"
    else:
        threshold, source = float(cfg.threshold), "fixed"
    edges = pairs.edges(threshold)
    graph, clusters = build_copypasta_network(edges, ctx.corpus, ctx.annotations, ctx.vocabulary)
    ctx.write("clusters", clusters_out, _json_text([c.to_dict() for c in clusters]))
    if edges_out is not None:
        ctx.write("copypasta_edges", edges_out, edge_list_csv(graph))
    if hist_out is not None:
        hists = {"all": hist}
        hists.update(population_histograms(ctx.corpus, ctx.vocabulary, cfg.copypasta_window, cfg.hist_bins,
                                           seed=cfg.seed, threads=cfg.threads))
        ctx.write("hist", hist_out, histograms_csv(hists))
    if report_out is not None:
        sets = activity_sets(ctx.corpus, ctx.vocabulary, clusters)
        activity = {}
        for name, recs in sets.items():
            activity[name] = sharing_activity_proportions({name: recs})[name] if recs else None
        rep = {
            "threshold": threshold,
            "threshold_source": source,
            "window_size": cfg.copypasta_window,
            "scored_pairs": len(pairs),
            "edges": len(edges),
            "summary": copypasta_summary(clusters, ctx.vocabulary),
            "sharing_activity": activity,
        }
        ctx.write("copypasta_report", report_out, _json_text(rep))


def pipeline_htemap(ctx: _Context, gexf: Path, dendrogram_out: Path | None, report_out: Path | None) -> None:
    cfg = ctx.cfg
    result = run_htemap(ctx.corpus, ctx.vocabulary, seed=cfg.seed, resolution=cfg.louvain_resolution)
    net = result.network
    ctx.write("htemap_gexf", gexf, gexf_document(net.graph, ["centrality", "community", "median_date", "tweets"]))
    dendro = None
    if len(net.graph) >= 2:
        dendro = htemap_dendrogram(net, cfg.linkage, cfg.metric)
    elif dendrogram_out is not None:
        logger.warning("fewer than 2 hashtags present; no dendrogram written")
    if dendrogram_out is not None and dendro is not None:
        write_newick(dendro, dendrogram_out)
        ctx.written["dendrogram"] = Path(dendrogram_out)
    if report_out is not None:
        rep = htemap_report(net, ctx.vocabulary, dendro)
        rep["tree_edges"] = {h: len(t.edges) for h, t in result.trees.items()}
        rep["tweet_layer"] = len(result.bipartite.tweets)
        ctx.write("htemap_report", report_out, _json_text(rep))


def _summary(subcommand: str, cfg: RunConfig | None, inputs: dict[str, Path], artifacts: dict[str, Path],
             started: datetime, wall: float, extra: dict | None = None) -> dict:
    import numba
    import numpy
    import scipy

    doc = {
        "tool": "coordscope",
        "version": __version__,
        "subcommand": subcommand,
        "versions": {"python": platform.python_version(), "numpy": numpy.__version__,
                     "scipy": scipy.__version__, "numba": numba.__version__},
        "inputs": {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in inputs.items()},
        "artifacts": {k: {"path": p.name, "sha256": sha256_file(p)} for k, p in sorted(artifacts.items())},
        "started_at": started.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "wall_seconds": round(wall, 3),
    }
    if cfg is not None:
        doc["config"] = {k: (str(v) if isinstance(v, Path) else v) for k, v in cfg.semantic().items()}
        doc["config_hash"] = cfg.config_hash()
    if extra:
        doc.update(extra)
    return doc


def _inputs(cfg: RunConfig) -> dict[str, Path]:
    return {k: Path(getattr(cfg, k)) for k in ("input", "users", "stories", "vocab", "fields") if getattr(cfg, k)}


def run(subcommand: str, cfg: RunConfig, outputs: dict[str, Path | None] | None = None,
        synth_config: SynthConfig | None = None) -> int:
    """Execute one subcommand; returns the process exit code."""
    outputs = dict(outputs or {})
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        if subcommand == "synth":
            synth_config = synth_config or SynthConfig(seed=cfg.seed)
            try:
                synth_config.validate()
            except ValueError as exc:
                raise ConfigError("synth", str(exc)) from None
        else:
            cfg.validate(required=("input",))
    except ConfigError as exc:
        print(f"coordscope: configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        if subcommand == "synth":
            out = outputs.get("out") or cfg.out_dir / "corpus.jsonl"
            manifest_path = outputs.get("manifest") or out.with_name(out.stem + ".manifest.json")
            records, manifest = generate(synth_config)
            atomic_write_text(out, corpus_jsonl(records))
            atomic_write_json(manifest_path, manifest.to_dict())
            summary_path = outputs.get("summary") or out.with_name("synth.summary.json")
            written = {"corpus": Path(out), "manifest": Path(manifest_path)}
            atomic_write_json(summary_path, _summary(subcommand, None, {}, written, started,
                                                      time.perf_counter() - t0, {"synth_config": manifest.config}))
            return 0

        ctx = _Context(cfg)
        if subcommand == "all":
            d = Path(cfg.out_dir)
            p = {k: d / v for k, v in ALL_ARTIFACTS.items()}
            pipeline_ingest_stats(ctx, p["stats"])
            pipeline_rapid(ctx, p["rapid_edges"], p["rapid_report"], p["rapid_gexf"])
            pipeline_copypasta(ctx, p["clusters"], p["copypasta_edges"], p["hist"], p["copypasta_report"])
            pipeline_htemap(ctx, p["htemap_gexf"], p["dendrogram"], p["htemap_report"])
            summary_path = d / "run_summary.json"
        elif subcommand == "ingest-stats":
            out = outputs.get("out") or cfg.out_dir / ALL_ARTIFACTS["stats"]
            pipeline_ingest_stats(ctx, out)
        elif subcommand == "rapid-retweets":
            out = outputs.get("out") or cfg.out_dir / ALL_ARTIFACTS["rapid_edges"]
            pipeline_rapid(ctx, out, outputs.get("report"), outputs.get("gexf"))
        elif subcommand == "copypasta":
            out = outputs.get("out") or cfg.out_dir / ALL_ARTIFACTS["clusters"]
            pipeline_copypasta(ctx, out, outputs.get("edges"), outputs.get("hist"), outputs.get("report"))
        elif subcommand == "htemap":
            out = outputs.get("out") or cfg.out_dir / ALL_ARTIFACTS["htemap_gexf"]
            pipeline_htemap(ctx, out, outputs.get("dendrogram"), outputs.get("report"))
        else:
            print(f"coordscope: unknown subcommand {subcommand!r}", file=sys.stderr)
            return 2
        if subcommand != "all":
            summary_path = outputs.get("summary") or Path(out).with_name(f"{subcommand}.summary.json")
        atomic_write_json(summary_path, _summary(subcommand, cfg, _inputs(cfg), ctx.written, started,
                                                  time.perf_counter() - t0))
    except ConfigError as exc:
        print(f"coordscope: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        logger.debug("pipeline failure", exc_info=True)
        print(f"coordscope: {subcommand} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--input", type=Path, help="tweet corpus (JSONL, optionally .gz/.bz2/.xz)")
    p.add_argument("--users", type=Path, help="user label CSV (user_id,label)")
    p.add_argument("--stories", type=Path, help="tweet story CSV (tweet_id,story)")
    p.add_argument("--vocab", type=Path, help="hashtag vocabulary, one tag per line")
    p.add_argument("--fields", type=Path, help="field-name mapping (JSON or TOML)")
    p.add_argument("--out-dir", dest="out_dir", type=Path)
    p.add_argument("--max-bad-lines", dest="max_bad_lines", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--summary", type=Path, help="run summary path")


def _rapid_opts(p, window_flag="--window"):
    p.add_argument(window_flag, dest="window_seconds", type=int, help="rapid-retweet window in seconds")
    p.add_argument("--min-weight", dest="min_edge_weight", type=int)
    p.add_argument("--min-spokes", dest="min_spokes", type=int)


def _copypasta_opts(p, window_flag="--window"):
    p.add_argument(window_flag, dest="copypasta_window", type=int, help="sliding window length in tweets")
    p.add_argument("--threshold", help="'auto' or a similarity in [0, 1]")
    p.add_argument("--bins", dest="hist_bins", type=int)


def _htemap_opts(p):
    p.add_argument("--resolution", dest="louvain_resolution", type=float)
    p.add_argument("--linkage")
    p.add_argument("--metric")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coordscope", description="Coordinated-amplification forensics for tweet corpora.")
    parser.add_argument("--version", action="version", version=f"coordscope {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest-stats", help="corpus statistics and annotation coverage")
    _common(p)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("rapid-retweets", help="rapid-retweet network and amplification report")
    _common(p)
    _rapid_opts(p)
    p.add_argument("--out", type=Path, help="edge list CSV")
    p.add_argument("--report", type=Path)
    p.add_argument("--gexf", type=Path)

    p = sub.add_parser("copypasta", help="near-duplicate clusters")
    _common(p)
    _copypasta_opts(p)
    p.add_argument("--out", type=Path, help="clusters JSON")
    p.add_argument("--edges", type=Path)
    p.add_argument("--hist", type=Path)
    p.add_argument("--report", type=Path)

    p = sub.add_parser("htemap", help="hashtag evolution network and dendrogram")
    _common(p)
    _htemap_opts(p)
    p.add_argument("--out", type=Path, help="GEXF network")
    p.add_argument("--dendrogram", type=Path, help="Newick dendrogram")
    p.add_argument("--report", type=Path)

    p = sub.add_parser("synth", help="synthetic corpus with planted coordination")
    p.add_argument("--config", type=Path)
    p.add_argument("--stars", type=int)
    p.add_argument("--spokes", type=int)
    p.add_argument("--sources-per-star", dest="sources_per_star", type=int)
    p.add_argument("--pastas", type=int)
    p.add_argument("--copies", type=int)
    p.add_argument("--mutation", dest="mutation_rate", type=float)
    p.add_argument("--noise", type=int)
    p.add_argument("--authors", type=int)
    p.add_argument("--hashtag-mode", dest="hashtag_mode", choices=("zipf", "blocs"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--manifest", type=Path)
    p.add_argument("--summary", type=Path)

    p = sub.add_parser("all", help="every pipeline, artifacts into --out-dir")
    _common(p)
    _rapid_opts(p, "--rt-window")
    _copypasta_opts(p, "--cp-window")
    _htemap_opts(p)
    return parser


_OUTPUT_KEYS = ("out", "report", "gexf", "edges", "hist", "dendrogram", "manifest", "summary")
_SYNTH_KEYS = ("stars", "spokes", "sources_per_star", "pastas", "copies", "mutation_rate", "noise", "authors",
               "hashtag_mode", "seed")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("COORDSCOPE_LOG_LEVEL", "WARNING").upper(),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    values = vars(build_parser().parse_args(argv))
    sub = values.pop("subcommand")
    outputs = {k: values.pop(k) for k in _OUTPUT_KEYS if k in values}
    cfg = RunConfig()
    try:
        if values.get("config"):
            cfg = RunConfig.from_file(values["config"])
        values.pop("config", None)
        synth_cfg = None
        if sub == "synth":
            overrides = {k: values[k] for k in _SYNTH_KEYS if values.get(k) is not None}
            synth_cfg = SynthConfig(**overrides)
            cfg.update({"seed": values.get("seed")})
        else:
            cfg.update(values)
    except (ConfigError, TypeError) as exc:
        print(f"coordscope: configuration error: {exc}", file=sys.stderr)
        return 2
    return run(sub, cfg, outputs, synth_cfg)


if __name__ == "__main__":
    sys.exit(main())
