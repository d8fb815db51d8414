"""Experiment front-end: validated configs, seeded runs, CSV/JSON output.

Every experiment is a pure function of its configuration and seed list;
rows are emitted in seed order and all randomness flows through Philox
generators keyed by the per-run seed, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cbir import synth_collection
from .costmodel import DEFAULT_NORM_A, all_costs
from .graph import PowerLawParams, generate_network
from .percolation import PercolationParams, run_experiment as run_percolation
from .prism import (PairScheme, build_index, choose_references, query,
                    recall_curve, traffic_skew)
from .supernode import build_topology, run_experiment as run_supernode
from .workload import WorkloadParams, params_from_dict

ARCHITECTURES = ("supernode", "percolation", "prism", "costmodel")

GENERATOR_NAME = "numpy Philox (philox4x64, counter-based) keyed by the run seed"


class ConfigError(ValueError):
    """Raised by run() when validate() reports diagnostics."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class ExperimentConfig:
    architecture: str
    workload: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=lambda: [0])
    output: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        return cls(
            architecture=raw.get("architecture", ""),
            workload=dict(raw.get("workload", {})),
            params=dict(raw.get("params", {})),
            seeds=list(raw.get("seeds", [0])),
            output=raw.get("output"),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def default_params(architecture: str, workload: WorkloadParams) -> dict:
    n = workload.n_peers
    if architecture == "percolation":
        return {"n_nodes": n, "k_min": 2, "k_max": int(round(math.sqrt(n))),
                "q": 0.01, "ttl": int(math.ceil(math.log2(n))) + 1,
                "n_content": 1000, "n_queries": 1000}
    if architecture == "supernode":
        return {"n_nodes": n, "s": 1.0 / math.sqrt(n), "n_queries": 1000}
    if architecture == "prism":
        return {"n_items": 20000, "n_clusters": 8, "spread": 0.005,
                "n_refs": 32, "ring_peers": 4096, "n_queries": 200,
                "n_pairs": 11, "k": 20, "curve": False}
    if architecture == "costmodel":
        return {"s": 1.0 / math.sqrt(n), "k_max": math.sqrt(n),
                "norm_a": DEFAULT_NORM_A}
    raise ValueError(f"unknown architecture {architecture!r}")


def validate(config: ExperimentConfig) -> list[str]:
    """Every violated constraint, as one human-readable line each."""
    diags: list[str] = []
    if config.architecture not in ARCHITECTURES:
        diags.append(f"unknown architecture {config.architecture!r}")
        return diags
    try:
        w = params_from_dict(config.workload)
    except ValueError as exc:
        diags.append(f"workload: {exc}")
        return diags
    if not config.seeds:
        diags.append("at least one seed is required")
    p = {**default_params(config.architecture, w), **config.params}
    known = set(default_params(config.architecture, w))
    unknown = set(config.params) - known
    if unknown:
        diags.append(f"unknown parameters for {config.architecture}: {sorted(unknown)}")

    if config.architecture == "percolation":
        if not 0.0 <= p["q"] <= 1.0:
            diags.append("probability out of range")
        if p["ttl"] < 1:
            diags.append("ttl must be at least 1")
        if not 1 <= p["k_min"] <= p["k_max"] <= p["n_nodes"] - 1:
            diags.append("need 1 <= k_min <= k_max <= n_nodes - 1")
        if p["n_content"] < 1 or p["n_queries"] < 1:
            diags.append("need at least one content object and one query")
    elif config.architecture == "supernode":
        if p["s"] <= 0:
            diags.append("supernode fraction must be positive")
        elif p["s"] > 1:
            diags.append("supernode fraction must be at most 1")
        elif round(p["s"] * p["n_nodes"]) < 1:
            diags.append("supernode fraction rounds to zero super-nodes")
        if p["n_queries"] < 1:
            diags.append("need at least one query")
    elif config.architecture == "prism":
        if p["n_items"] < 1:
            diags.append("need at least one item")
        if p["n_clusters"] < 1:
            diags.append("need at least one cluster")
        if p["spread"] < 0:
            diags.append("spread must be non-negative")
        if p["n_refs"] < 5:
            diags.append("need at least 5 reference vectors")
        if p["n_refs"] > p["n_items"]:
            diags.append("more references than items")
        if p["ring_peers"] < 1:
            diags.append("need at least one ring peer")
        if not 1 <= p["n_pairs"] <= 11:
            diags.append("n_pairs out of range")
        if p["k"] < 1 or p["n_queries"] < 1:
            diags.append("need k >= 1 and at least one query")
    elif config.architecture == "costmodel":
        if not 0.0 < p["s"] <= 1.0:
            diags.append("supernode fraction must be positive and at most 1")
        if p["k_max"] < 2:
            diags.append("k_max must be at least 2")
        if p["norm_a"] <= 0:
            diags.append("normalization constant must be positive")
    return diags


def _percolation_row(p: dict, w: WorkloadParams, seed: int) -> dict:
    net = generate_network(
        PowerLawParams(n_nodes=p["n_nodes"], k_min=p["k_min"], k_max=p["k_max"]),
        seed)
    metrics = run_percolation(
        net,
        PercolationParams(q=p["q"], walk_len=p["ttl"],
                          n_content=p["n_content"], n_queries=p["n_queries"]),
        seed)
    return {
        "seed": seed, "n_nodes": p["n_nodes"], "q": p["q"], "ttl": p["ttl"],
        "hit_rate": metrics.hit_rate,
        "copies_per_query": metrics.copies_per_query,
        "max_cost_per_object": metrics.max_cost_per_object,
    }


def _supernode_row(p: dict, w: WorkloadParams, seed: int) -> dict:
    topo = build_topology(p["n_nodes"], p["s"], seed)
    metrics = run_supernode(topo, w, p["n_queries"], seed)
    return {
        "seed": seed, "n_nodes": p["n_nodes"], "s": p["s"],
        "hit_rate": metrics.hit_rate,
        "max_bytes_per_s": float(metrics.bytes_per_s.max()),
        "max_stored_bytes": float(metrics.stored_items.max() * w.message_bytes),
        "max_flop_per_s": float(metrics.flop_per_s.max()),
    }


def _prism_row(p: dict, w: WorkloadParams, seed: int,
               curve_rows: list | None = None) -> dict:
    coll = synth_collection(p["n_items"], p["n_clusters"], p["spread"], seed)
    refs = choose_references(coll, p["n_refs"], seed)
    scheme = PairScheme()
    ring = build_index(coll, p["ring_peers"], refs, scheme, seed)
    queries = synth_collection(p["n_queries"], p["n_clusters"], p["spread"],
                               seed + 0x5149).vectors

    from .cbir import knn_full_scan
    recalls = []
    visited = []
    messages = []
    for q in queries:
        oracle = {i for i, _ in knn_full_scan(q, coll, p["k"])}
        neighbors, cost = query(ring, refs, scheme, q, p["n_pairs"], p["k"])
        found = {i for i, _ in neighbors}
        recalls.append(len(found & oracle) / max(len(oracle), 1))
        visited.append(cost.candidates_scanned / len(coll))
        messages.append(cost.messages)

    skew = traffic_skew(ring, refs, scheme, queries)
    stored = ring.stored_counts()
    hottest_share = float(stored.max() / max(stored.sum(), 1))

    if curve_rows is not None:
        for n_pairs, frac, rec in recall_curve(ring, refs, scheme, queries,
                                               coll, k=p["k"]):
            curve_rows.append({"seed": seed, "n_pairs": n_pairs,
                               "visited_fraction": frac, "recall": rec})
    return {
        "seed": seed, "n_items": p["n_items"], "n_refs": p["n_refs"],
        "ring_peers": p["ring_peers"],
        "recall_at_k": float(np.mean(recalls)),
        "visited_fraction": float(np.mean(visited)),
        "top5_share": skew.top_share(5),
        "top15_share": skew.top_share(15),
        "top60_share": skew.top_share(60),
        "hottest_peer_share": hottest_share,
        "mean_messages_per_query": float(np.mean(messages)),
    }


def _costmodel_rows(p: dict, w: WorkloadParams) -> list[dict]:
    reports = all_costs(w, s=p["s"], k_max=p["k_max"], norm_a=p["norm_a"])
    return [
        {"architecture": name, "b_ave": rep.b_ave, "b_max": rep.b_max,
         "d_ave": rep.d_ave, "d_max": rep.d_max,
         "p_ave": rep.p_ave, "p_max": rep.p_max}
        for name, rep in reports.items()
    ]


def run(config: ExperimentConfig,
        output: str | Path | None = None) -> tuple[list[dict], dict]:
    """Execute the configured experiment for every seed.

    Returns (rows, summary); when an output prefix is set the rows go to
    `{prefix}.csv` and the summary to `{prefix}.json` (plus
    `{prefix}_curve.csv` for a prism run with curve=true).
    """
    diagnostics = validate(config)
    if diagnostics:
        raise ConfigError(diagnostics)
    w = params_from_dict(config.workload)
    p = {**default_params(config.architecture, w), **config.params}

    t0 = time.perf_counter()
    curve_rows: list[dict] = []
    if config.architecture == "costmodel":
        rows = _costmodel_rows(p, w)
    else:
        rows = []
        for seed in config.seeds:
            if config.architecture == "percolation":
                rows.append(_percolation_row(p, w, seed))
            elif config.architecture == "supernode":
                rows.append(_supernode_row(p, w, seed))
            else:
                rows.append(_prism_row(p, w, seed,
                                       curve_rows if p.get("curve") else None))
    elapsed = time.perf_counter() - t0

    summary = summarize(config, p, rows, elapsed)
    prefix = output if output is not None else config.output
    if prefix is not None:
        prefix = Path(prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        write_csv(rows, prefix.with_suffix(".csv"))
        prefix.with_suffix(".json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if curve_rows:
            write_csv(curve_rows, prefix.parent / (prefix.name + "_curve.csv"))
    return rows, summary


def summarize(config: ExperimentConfig, resolved_params: dict,
              rows: list[dict], elapsed: float) -> dict:
    metrics: dict[str, dict] = {}
    if rows:
        for col, value in rows[0].items():
            if col == "seed" or isinstance(value, str):
                continue
            vals = np.array([float(r[col]) for r in rows])
            metrics[col] = {"mean": float(vals.mean()),
                            "std": float(vals.std()),
                            "min": float(vals.min()),
                            "max": float(vals.max())}
    return {
        "architecture": config.architecture,
        "workload": config.workload,
        "params": {k: v for k, v in resolved_params.items()},
        "seeds": config.seeds,
        "generator": GENERATOR_NAME,
        "versions": {"p2pcbir": __version__, "numpy": np.__version__},
        "metrics": metrics,
        "wall_time_s": elapsed,
    }


def write_csv(rows: list[dict], path: str | Path) -> None:
    """RFC 4180 output; field order follows the first row."""
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
