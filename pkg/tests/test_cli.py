import json
from pathlib import Path

import pytest

from coordscope import _io
from coordscope.cli import ALL_ARTIFACTS, main
from coordscope.config import ConfigError, RunConfig, load_config_file


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    out = d / "corpus.jsonl"
    rc = main(["synth", "--stars", "2", "--spokes", "12", "--pastas", "2", "--copies", "6", "--noise", "1500",
               "--authors", "300", "--seed", "5", "--out", str(out), "--manifest", str(d / "manifest.json")])
    assert rc == 0
    return out


def test_all_writes_every_artifact(small_corpus, tmp_path):
    out = tmp_path / "out"
    assert main(["all", "--input", str(small_corpus), "--out-dir", str(out)]) == 0
    for name in ALL_ARTIFACTS.values():
        assert (out / name).is_file(), name
    summary = json.loads((out / "run_summary.json").read_text())
    assert set(summary["artifacts"]) == set(ALL_ARTIFACTS)
    assert summary["inputs"]["input"]["sha256"] == _io.sha256_file(small_corpus)
    assert {"python", "numpy", "scipy", "numba"} <= set(summary["versions"])
    assert "wall_seconds" in summary and len(summary["config_hash"]) == 64
    for key, meta in summary["artifacts"].items():
        assert meta["sha256"] == _io.sha256_file(out / meta["path"])
    assert not list(out.glob(".*.tmp"))


def test_rerun_is_byte_identical(small_corpus, tmp_path):
    for name in ("a", "b"):
        assert main(["all", "--input", str(small_corpus), "--out-dir", str(tmp_path / name), "--threads",
                     "1" if name == "a" else "3"]) == 0
    for name in ALL_ARTIFACTS.values():
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    sa = json.loads((tmp_path / "a" / "run_summary.json").read_text())
    sb = json.loads((tmp_path / "b" / "run_summary.json").read_text())
    for volatile in ("started_at", "wall_seconds"):
        sa.pop(volatile), sb.pop(volatile)
    assert sa == sb


def test_single_subcommands(small_corpus, tmp_path):
    assert main(["rapid-retweets", "--input", str(small_corpus), "--window", "60", "--min-weight", "2",
                 "--out", str(tmp_path / "edges.csv"), "--report", str(tmp_path / "report.json"),
                 "--gexf", str(tmp_path / "rt.gexf")]) == 0
    assert (tmp_path / "edges.csv").read_text().startswith("source,target,weight\n")
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["star_hubs"]) == 2
    assert (tmp_path / "rapid-retweets.summary.json").is_file()

    assert main(["copypasta", "--input", str(small_corpus), "--window", "10", "--threshold", "0.7",
                 "--out", str(tmp_path / "clusters.json"), "--edges", str(tmp_path / "cp.csv"),
                 "--hist", str(tmp_path / "hist.csv")]) == 0
    clusters = json.loads((tmp_path / "clusters.json").read_text())
    assert isinstance(clusters, list) and len(clusters) == 2
    assert (tmp_path / "hist.csv").read_text().splitlines()[0] == "bin_left,bin_right,all,fringe,generic"

    assert main(["htemap", "--input", str(small_corpus), "--out", str(tmp_path / "h.gexf"),
                 "--dendrogram", str(tmp_path / "h.nwk"), "--report", str(tmp_path / "h.json")]) == 0
    assert (tmp_path / "h.nwk").read_text().rstrip().endswith(";")
    assert "communities" in json.loads((tmp_path / "h.json").read_text())

    assert main(["ingest-stats", "--input", str(small_corpus), "--out", str(tmp_path / "stats.json")]) == 0
    stats = json.loads((tmp_path / "stats.json").read_text())
    assert abs(sum(stats["kind_fractions"].values()) - 1) < 1e-9


def test_missing_input_names_field(tmp_path, capsys):
    assert main(["all", "--out-dir", str(tmp_path)]) == 2
    assert "input" in capsys.readouterr().err
    assert main(["copypasta", "--input", str(tmp_path / "nope.jsonl")]) == 2
    assert "input" in capsys.readouterr().err


@pytest.mark.parametrize("args,field", [
    (["--threshold", "1.5"], "threshold"),
    (["--threshold", "sometimes"], "threshold"),
    (["--window", "1"], "copypasta_window"),
    (["--threads", "0"], "threads"),
    (["--users", "/no/such/users.csv"], "users"),
])
def test_config_errors_exit_two(small_corpus, args, field, capsys):
    assert main(["copypasta", "--input", str(small_corpus), *args]) == 2
    assert field in capsys.readouterr().err


def test_pipeline_error_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "1", "author": "a", "created_at": 0}\nnot json\n')
    assert main(["ingest-stats", "--input", str(bad), "--out-dir", str(tmp_path)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["ingest-stats", "--input", str(bad), "--out-dir", str(tmp_path), "--max-bad-lines", "1"]) == 0


def test_toml_config_and_overrides(small_corpus, tmp_path):
    cfg_path = tmp_path / "run.toml"
    cfg_path.write_text(f'input = "{small_corpus}"\n[rapid]\nwindow_seconds = 30\n[copypasta]\nthreshold = 0.8\n')
    cfg = RunConfig.from_file(cfg_path)
    assert cfg.window_seconds == 30 and cfg.threshold == 0.8 and cfg.input == Path(small_corpus)
    out = tmp_path / "o"
    assert main(["rapid-retweets", "--config", str(cfg_path), "--window", "45", "--out-dir", str(out),
                 "--report", str(out / "r.json")]) == 0
    assert json.loads((out / "r.json").read_text())["config"]["window_seconds"] == 45
    bad = tmp_path / "bad.toml"
    bad.write_text("windw_seconds = 3\n")
    assert main(["rapid-retweets", "--config", str(bad)]) == 2
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "absent.toml")


def test_config_hash_tracks_semantic_parameters_only():
    base = RunConfig()
    h = base.config_hash()
    for key, value in [("threads", 8), ("out_dir", Path("elsewhere")), ("input", Path("x.jsonl"))]:
        c = RunConfig()
        c.update({key: value})
        assert c.config_hash() == h, key
    for key, value in [("window_seconds", 30), ("min_edge_weight", 3), ("copypasta_window", 12),
                       ("threshold", 0.75), ("louvain_resolution", 0.5), ("linkage", "single"),
                       ("metric", "cityblock"), ("seed", 1), ("hist_bins", 50), ("min_spokes", 3),
                       ("max_bad_lines", 4)]:
        c = RunConfig()
        c.update({key: value})
        assert c.config_hash() != h, key


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "artifact.json"
    target.write_text("old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(_io.os, "replace", boom)
    with pytest.raises(OSError):
        _io.atomic_write_text(target, "new content")
    assert target.read_text() == "old"
    assert list(tmp_path.iterdir()) == [target]


def test_synth_cli_errors(tmp_path, capsys):
    assert main(["synth", "--spokes", "50", "--authors", "10", "--out", str(tmp_path / "c.jsonl")]) == 2
    assert "spokes" in capsys.readouterr().err


def test_log_level_env(small_corpus, tmp_path, monkeypatch, caplog):
    monkeypatch.setenv("COORDSCOPE_LOG_LEVEL", "debug")
    assert main(["ingest-stats", "--input", str(small_corpus), "--out", str(tmp_path / "s.json")]) == 0
