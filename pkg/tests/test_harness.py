import json
import socket

import pytest

from lodestar.cli import main
from lodestar.demo_corpus import write_demo_corpus
from lodestar.graph import load_graph
from lodestar.harness import (
    load_mining_config,
    max_out_degree,
    replay,
    run_mine,
    sequences_from_json,
)
from lodestar.mining import BlockSequence, MiningConfig


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus")
    write_demo_corpus(path, notebooks=20, seed=0)
    return path


def test_mine_produces_graph_with_at_most_k_states(corpus_dir):
    outcome = run_mine(corpus_dir, MiningConfig(k=6, seed=42))
    assert len(outcome.graph.states) <= 6
    assert outcome.report["stats"]["documents"] == 20


def test_in_sample_replay_perfect_at_max_out_degree(corpus_dir):
    outcome = run_mine(corpus_dir, MiningConfig(k=6, seed=42))
    k = max_out_degree(outcome.graph)
    report = replay(outcome.graph, outcome.result.sequences, k=k, in_sample=True)
    assert report["hit_rate"] == 1.0
    assert report["unknown_state_pairs"] == 0


def test_k_zero_gives_zero_hit_rate(corpus_dir):
    outcome = run_mine(corpus_dir, MiningConfig(k=6, seed=42))
    report = replay(outcome.graph, outcome.result.sequences, k=0)
    assert report["hit_rate"] == 0.0
    assert report["random_baseline"] == 0.0


def test_hit_rate_monotone_in_k(corpus_dir):
    outcome = run_mine(corpus_dir, MiningConfig(k=6, seed=42), holdout=0.25)
    rates = [
        replay(outcome.graph, outcome.held_out, k=k)["hit_rate"] for k in range(1, 7)
    ]
    assert all(a <= b for a, b in zip(rates, rates[1:]))


def test_holdout_split_is_disjoint_at_notebook_granularity(corpus_dir):
    outcome = run_mine(corpus_dir, MiningConfig(k=4, seed=42), holdout=0.5)
    assert len(outcome.result.docs) == 10
    assert len(outcome.held_out) >= 1
    trained_sources = {d.source_id for d in outcome.result.docs}
    held_sources = {s.source_id for s in outcome.held_out}
    assert not trained_sources & held_sources


def test_extreme_holdout_keeps_one_training_notebook(tmp_path):
    write_demo_corpus(tmp_path / "tiny", notebooks=2, seed=1)
    outcome = run_mine(tmp_path / "tiny", MiningConfig(k=1, seed=0), holdout=0.9)
    assert len(outcome.result.docs) == 1
    assert len(outcome.held_out) == 1


def test_unknown_states_counted_separately():
    graph_sequences = [BlockSequence("t", ("a", "b", "a"))]
    from lodestar.graph import build_graph

    graph = build_graph(graph_sequences, advisor_id="t")
    report = replay(graph, [BlockSequence("h", ("z", "a", "b"))], k=1)
    assert report["pairs"] == 2
    assert report["unknown_state_pairs"] == 1
    assert report["hits"] == 1  # a -> b is the top recommendation


def test_sequences_from_json_accepts_both_shapes():
    doc = {"sequences": [{"source_id": "x", "steps": ["a", "b"]}, ["c", "d"]]}
    sequences = sequences_from_json(doc)
    assert sequences[0].steps == ("a", "b")
    assert sequences[1].source_id == "seq-1"


def test_config_file_overrides(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"k": 9, "seed": 3, "libraries": ["pandas"]}))
    config = load_mining_config(config_path, k=None, seed=7)
    assert config.k == 9
    assert config.seed == 7  # CLI override wins
    assert config.libraries == frozenset({"pandas"})


# -- CLI ----------------------------------------------------------------------


def test_cli_mine_then_replay(corpus_dir, tmp_path, capsys):
    graph_path = tmp_path / "crowd.recograph.json"
    report_path = tmp_path / "report.json"
    code = main(
        [
            "mine",
            str(corpus_dir),
            "--k",
            "6",
            "--seed",
            "42",
            "--graph-out",
            str(graph_path),
            "--report-out",
            str(report_path),
        ]
    )
    assert code == 0
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert report["stats"]["documents"] == 20
    assert "graph written to" in captured.err
    graph = load_graph(graph_path)
    assert len(graph.states) <= 6

    code = main(
        ["replay", str(graph_path), str(report_path), "--k", "3", "--in-sample"]
    )
    assert code == 0
    replay_report = json.loads(capsys.readouterr().out)
    assert replay_report["pairs"] > 0
    assert 0.0 <= replay_report["hit_rate"] <= 1.0


def test_cli_mine_empty_dir_exit_2(tmp_path, capsys):
    assert main(["mine", str(tmp_path / "void")]) == 2
    assert "mine failed" in capsys.readouterr().err


def test_cli_mine_rerun_byte_identical(corpus_dir, tmp_path, capsys):
    args = ["mine", str(corpus_dir), "--k", "6", "--seed", "42", "--graph-out"]
    main(args + [str(tmp_path / "a.recograph.json")])
    first = capsys.readouterr().out
    main(args + [str(tmp_path / "b.recograph.json")])
    second = capsys.readouterr().out
    assert first == second
    assert (tmp_path / "a.recograph.json").read_bytes() == (
        tmp_path / "b.recograph.json"
    ).read_bytes()


def test_cli_replay_bad_graph_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.recograph.json"
    bad.write_text("{}")
    sequences = tmp_path / "seqs.json"
    sequences.write_text(json.dumps({"sequences": [["a", "b"]]}))
    assert main(["replay", str(bad), str(sequences)]) == 2
    assert "replay failed" in capsys.readouterr().err


def test_cli_replay_missing_graph_exit_2(tmp_path, capsys):
    sequences = tmp_path / "seqs.json"
    sequences.write_text(json.dumps({"sequences": [["a", "b"]]}))
    assert main(["replay", str(tmp_path / "ghost.json"), str(sequences)]) == 2


def test_cli_serve_bad_graph_exit_2(tmp_path, capsys):
    bad_graph = tmp_path / "broken.recograph.json"
    bad_graph.write_text("not json at all")
    config = tmp_path / "serve.json"
    config.write_text(json.dumps({"graphs": [str(bad_graph)]}))
    assert main(["serve", "--config", str(config)]) == 2
    assert "serve failed" in capsys.readouterr().err


def test_cli_serve_port_conflict_exit_2(capsys):
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    try:
        assert main(["serve", "--port", str(port)]) == 2
        assert "already in use" in capsys.readouterr().err
    finally:
        blocker.close()
