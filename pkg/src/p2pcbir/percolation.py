"""Percolation search on a power-law network.

The three-phase protocol: content index replicas are planted along a random
walk; each query is planted along its own walk; then the query spreads as a
cascade where every node that received it forwards once to each neighbor
independently with probability q. A node processes the query only once, but
a forward to an already-active node still counts as one transmission.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Network, random_walk, _rng
from .workload import HISTOGRAM_BYTES, WorkloadParams, derive_rates


@dataclass(frozen=True)
class PercolationParams:
    q: float            # per-edge forwarding probability
    walk_len: int       # implantation walk length (ttl) for content and queries
    n_content: int
    n_queries: int

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("probability out of range")
        if self.walk_len < 1:
            raise ValueError("walk_len must be at least 1")
        if self.n_content < 1 or self.n_queries < 1:
            raise ValueError("need at least one content object and one query")


@dataclass
class PercMetrics:
    hit_rate: float
    copies_per_query: float        # mean cascade transmissions per query (BW)
    max_cost_per_object: float     # mean over queries of max per-node evals / n_content
    replica_counts: np.ndarray     # index replicas stored per node
    message_counts: np.ndarray     # messages received per node (walk + cascade)
    n_content: int
    n_queries: int


@dataclass(frozen=True)
class ScaledResources:
    b_ave_bytes_per_s: float
    d_max_bytes: float
    p_max_flop_per_s: float


def implant_content(net: Network, start: int, walk_len: int, seed) -> np.ndarray:
    """Distinct nodes visited by a walk from start; each stores one replica."""
    path = random_walk(net, start, walk_len, seed)
    return np.unique(path)


def _cascade(net: Network, seeds: np.ndarray, q: float,
             rng: np.random.Generator, active: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
    """Breadth-first probabilistic flood from the seed nodes.

    Returns (visited nodes, transmission count, received-message targets).
    `active` is a caller-owned boolean scratch array; entries touched here
    are left set so the caller can test membership before resetting them.
    """
    offsets, neigh = net.offsets, net.neighbors
    frontier = np.unique(seeds)
    active[frontier] = True
    layers = [frontier]
    all_targets = []
    transmissions = 0
    if q > 0.0:
        while len(frontier):
            starts = offsets[frontier]
            counts = offsets[frontier + 1] - starts
            total = int(counts.sum())
            if total == 0:
                break
            base = np.repeat(starts, counts)
            local = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
            candidates = neigh[base + local]
            fired = rng.random(total) < q
            transmissions += int(fired.sum())
            targets = candidates[fired]
            all_targets.append(targets)
            new = np.unique(targets[~active[targets]])
            active[new] = True
            layers.append(new)
            frontier = new
    visited = np.concatenate(layers)
    received = np.concatenate(all_targets) if all_targets else np.empty(0, dtype=neigh.dtype)
    return visited, transmissions, received


def percolate_query(net: Network, start: int, walk_len: int, q: float,
                    seed) -> tuple[np.ndarray, int]:
    """Plant a query along a walk, then cascade it with probability q.

    Returns the set of nodes that processed the query and the number of
    cascade transmissions (the walk itself is not counted).
    """
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    path = random_walk(net, start, walk_len, rng)
    active = np.zeros(net.n_nodes, dtype=bool)
    visited, transmissions, _ = _cascade(net, path, q, rng, active)
    return np.unique(visited), transmissions


def run_experiment(net: Network, params: PercolationParams, seed: int) -> PercMetrics:
    """Plant n_content objects from uniform origins, then issue n_queries,
    each aimed at a uniformly chosen object from a uniform origin.

    A query hits when its processed-node set intersects the target's
    replica set. The per-query evaluation load of a node is the number of
    replicas it stores (every stored index is scanned); the reported
    max-cost figure is the per-query maximum of that load, averaged over
    queries and normalized by the number of content objects.

    Origins are drawn uniformly among non-isolated nodes. All randomness
    flows from one Philox stream seeded by `seed`.
    """
    rng = _rng(np.random.SeedSequence((seed, 0x70657263)))
    eligible = np.flatnonzero(net.degrees > 0)
    if len(eligible) == 0:
        raise ValueError("network has no edges")

    replica_counts = np.zeros(net.n_nodes, dtype=np.int64)
    message_counts = np.zeros(net.n_nodes, dtype=np.int64)
    replica_sets = []
    for _ in range(params.n_content):
        origin = int(eligible[rng.integers(len(eligible))])
        path = random_walk(net, origin, params.walk_len, rng)
        np.add.at(message_counts, path[1:], 1)
        replicas = np.unique(path)
        replica_counts[replicas] += 1
        replica_sets.append(replicas)

    active = np.zeros(net.n_nodes, dtype=bool)
    hits = 0
    transmissions = np.empty(params.n_queries, dtype=np.int64)
    max_evals = np.empty(params.n_queries, dtype=np.int64)
    for qi in range(params.n_queries):
        target = int(rng.integers(params.n_content))
        origin = int(eligible[rng.integers(len(eligible))])
        path = random_walk(net, origin, params.walk_len, rng)
        np.add.at(message_counts, path[1:], 1)
        visited, trans, received = _cascade(net, path, params.q, rng, active)
        np.add.at(message_counts, received, 1)
        transmissions[qi] = trans
        if active[replica_sets[target]].any():
            hits += 1
        max_evals[qi] = replica_counts[visited].max()
        active[visited] = False

    return PercMetrics(
        hit_rate=hits / params.n_queries,
        copies_per_query=float(transmissions.mean()),
        max_cost_per_object=float(max_evals.mean()) / params.n_content,
        replica_counts=replica_counts,
        message_counts=message_counts,
        n_content=params.n_content,
        n_queries=params.n_queries,
    )


def scale_metrics(m: PercMetrics, w: WorkloadParams) -> ScaledResources:
    """Scale measured per-query figures up to the full workload.

    With Q the network-wide query byte rate: the average bandwidth is the
    per-query copy count spread over all peers times Q; the busiest node's
    storage charges the full item load C at the vector wire size; its
    processing charges f FlOp per stored vector per query.
    """
    rates = derive_rates(w)
    n = w.n_peers
    q_bytes = rates.query_byte_rate
    return ScaledResources(
        b_ave_bytes_per_s=m.copies_per_query / n * q_bytes,
        d_max_bytes=w.items_per_peer * HISTOGRAM_BYTES * n * m.max_cost_per_object,
        p_max_flop_per_s=(w.items_per_peer * n * (q_bytes / w.message_bytes)
                          * w.flop_per_compare * m.max_cost_per_object),
    )
