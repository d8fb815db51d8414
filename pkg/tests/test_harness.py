import json

import numpy as np
import pytest

from p2pcbir.harness import (ConfigError, ExperimentConfig, run, validate,
                             write_csv)

SMALL_PERC = {"n_nodes": 2048, "k_min": 2, "k_max": 45, "q": 0.05, "ttl": 12,
              "n_content": 30, "n_queries": 50}
SMALL_SUPER = {"n_nodes": 4096, "s": 1 / 64, "n_queries": 100}
SMALL_PRISM = {"n_items": 300, "n_clusters": 4, "spread": 0.01, "n_refs": 8,
               "ring_peers": 32, "n_queries": 20, "n_pairs": 11, "k": 10}


class TestValidate:
    def test_zero_supernode_fraction(self):
        config = ExperimentConfig(architecture="supernode", params={"s": 0.0})
        assert "supernode fraction must be positive" in validate(config)

    def test_probability_out_of_range(self):
        config = ExperimentConfig(architecture="percolation", params={"q": 1.5})
        assert "probability out of range" in validate(config)

    def test_valid_config_has_no_diagnostics(self):
        config = ExperimentConfig(architecture="percolation",
                                  params=SMALL_PERC, seeds=[1, 2])
        assert validate(config) == []

    def test_unknown_architecture(self):
        config = ExperimentConfig(architecture="pigeon")
        assert any("unknown architecture" in d for d in validate(config))

    def test_unknown_parameter(self):
        config = ExperimentConfig(architecture="supernode",
                                  params={"supersize": 1})
        assert any("unknown parameters" in d for d in validate(config))

    def test_empty_seeds(self):
        config = ExperimentConfig(architecture="costmodel", seeds=[])
        assert "at least one seed is required" in validate(config)

    def test_bad_workload(self):
        config = ExperimentConfig(architecture="costmodel",
                                  workload={"n_peers": -5})
        assert any(d.startswith("workload:") for d in validate(config))


class TestRun:
    def test_invalid_config_raises(self):
        with pytest.raises(ConfigError) as err:
            run(ExperimentConfig(architecture="percolation", params={"q": 2.0}))
        assert "probability out of range" in err.value.diagnostics

    def test_costmodel_rows(self):
        rows, summary = run(ExperimentConfig(architecture="costmodel"))
        assert [r["architecture"] for r in rows] == ["supernode", "percolation",
                                                     "prism"]
        assert summary["generator"].startswith("numpy Philox")

    def test_costmodel_deterministic_csv(self, tmp_path):
        config = ExperimentConfig(architecture="costmodel",
                                  output=str(tmp_path / "cost"))
        run(config)
        first = (tmp_path / "cost.csv").read_bytes()
        run(config)
        assert (tmp_path / "cost.csv").read_bytes() == first

    def test_percolation_run_and_determinism(self, tmp_path):
        config = ExperimentConfig(architecture="percolation", params=SMALL_PERC,
                                  seeds=[3, 1, 2], output=str(tmp_path / "perc"))
        rows, summary = run(config)
        assert [r["seed"] for r in rows] == [3, 1, 2]  # seed order preserved
        assert all(0 <= r["hit_rate"] <= 1 for r in rows)
        first = (tmp_path / "perc.csv").read_bytes()
        run(config)
        assert (tmp_path / "perc.csv").read_bytes() == first
        stats = summary["metrics"]["hit_rate"]
        values = [r["hit_rate"] for r in rows]
        assert stats["mean"] == pytest.approx(np.mean(values))
        assert stats["min"] == min(values) and stats["max"] == max(values)

    def test_supernode_run(self, tmp_path):
        config = ExperimentConfig(architecture="supernode", params=SMALL_SUPER,
                                  seeds=[5], output=str(tmp_path / "sn"))
        rows, _ = run(config)
        assert rows[0]["hit_rate"] == 1.0
        assert (tmp_path / "sn.csv").exists()
        assert (tmp_path / "sn.json").exists()

    def test_prism_run_with_curve(self, tmp_path):
        config = ExperimentConfig(architecture="prism",
                                  params={**SMALL_PRISM, "curve": True},
                                  seeds=[7], output=str(tmp_path / "pr"))
        rows, _ = run(config)
        assert 0.0 <= rows[0]["recall_at_k"] <= 1.0
        curve = (tmp_path / "pr_curve.csv").read_text().splitlines()
        assert curve[0] == "seed,n_pairs,visited_fraction,recall"
        assert len(curve) == 1 + 11

    def test_summary_json_is_written(self, tmp_path):
        config = ExperimentConfig(architecture="percolation", params=SMALL_PERC,
                                  seeds=[1], output=str(tmp_path / "x"))
        run(config)
        summary = json.loads((tmp_path / "x.json").read_text())
        assert summary["seeds"] == [1]
        assert "copies_per_query" in summary["metrics"]
        assert "numpy" in summary["versions"]


def test_write_csv_quotes_fields(tmp_path):
    rows = [{"a": 'needs,"quoting"', "b": 1}]
    path = tmp_path / "q.csv"
    write_csv(rows, path)
    assert path.read_bytes() == b'a,b\r\n"needs,""quoting""",1\r\n'


def test_config_json_roundtrip(tmp_path):
    raw = {"architecture": "percolation", "workload": {"n_peers": 4096},
           "params": SMALL_PERC, "seeds": [4, 5], "output": None}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    config = ExperimentConfig.from_json(path)
    assert config.architecture == "percolation"
    assert config.workload == {"n_peers": 4096}
    assert config.seeds == [4, 5]
