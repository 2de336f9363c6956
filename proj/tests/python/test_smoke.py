import csv
import subprocess
import os

import numpy as np
import pytest

import novex

SMALL = """
task = fixed-small
total_steps = 600
hidden_size = 16
hidden_layers = 2
feedback_esn_size = 30
obs_esn_per_dim = 10
train_steps_per_epoch = 3
target_updates_per_epoch = 1
minibatch = 20
"""


def test_version_and_keys():
    assert novex.__version__ == "0.1.0"
    keys = novex.config_keys()
    assert "density_k" in keys
    assert len(keys) == len(set(keys))


def test_config_round_trip_and_errors():
    text = novex.normalize_config(SMALL, {"gamma": "0.5"})
    assert "gamma = 0.5" in text.splitlines()
    assert novex.normalize_config(text) == text
    assert novex.config_hash(text) == novex.config_hash(SMALL, {"gamma": "0.5"})
    with pytest.raises(novex.ConfigError):
        novex.normalize_config("gama = 1\n")
    with pytest.raises(ValueError):
        novex.normalize_config("seed = 1\nseed = 2\n")


def test_knn_matches_numpy():
    rng = np.random.default_rng(0)
    refs = rng.normal(size=(200, 8))
    for _ in range(20):
        x = rng.normal(size=8)
        d = np.sort(((refs - x) ** 2).sum(axis=1))
        for k in (1, 5, 15):
            assert novex.knn_negdensity(x, refs, k) == pytest.approx(d[k - 1], rel=1e-12)
    assert novex.knn_negdensity(np.zeros(2), np.array([[0.0, 0.0], [3.0, 4.0]]), 2) == 25.0
    assert novex.knn_negdensity(np.zeros(2), np.zeros((0, 2)), 1) is None


def test_mazes_are_spanning_trees():
    edges = novex.wilson_maze(5, 7, 3)
    assert len(edges) == 34
    parent = list(range(35))

    def root(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for a, b in edges:
        ra, rb = root(a), root(b)
        assert ra != rb
        parent[ra] = rb
    rows = novex.prim_maze(4, 6, 1).strip().splitlines()
    assert len(rows) == 4 and all(len(r) == 6 for r in rows)


def test_run_is_deterministic(tmp_path):
    a = novex.run(SMALL, {"seed": "3"}, str(tmp_path / "a"))
    b = novex.run(SMALL, {"seed": "3"}, str(tmp_path / "b"))
    assert not a["failed"]
    assert a == b
    assert len(a["episodes"]) == 2
    assert 0.0 < a["score"] <= 1.0
    log = novex.read_episode_log(str(tmp_path / "a" / "episodes.csv"))
    assert log == a["episodes"]
    with open(tmp_path / "a" / "episodes.csv") as f:
        assert next(csv.reader(f))[:3] == ["episode", "total_steps", "coverage"]


def test_sweep_and_summary(tmp_path):
    scores = novex.sweep(SMALL, 0, 2, 1, str(tmp_path / "sw"), {"mode": "random-baseline"})
    assert len(scores) == 3
    table = novex.summarize([str(tmp_path / "sw")])
    header, row = table.strip().splitlines()
    assert header.startswith("condition,runs")
    assert row.startswith("sw,3,")


@pytest.mark.skipif("NOVEX_CLI" not in os.environ, reason="command-line binary not provided")
def test_cli_run(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL)
    out = subprocess.run(
        [os.environ["NOVEX_CLI"], "run", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "r")],
        capture_output=True, text=True, check=True)
    assert (tmp_path / "r" / "episodes.csv").exists()
    assert "score" in out.stdout
