import numpy as np
import pytest

from p2pcbir.supernode import (build_topology, route_query, run_experiment,
                               stored_items_per_node)
from p2pcbir.workload import WorkloadParams, plickr_default


class TestTopology:
    def test_all_supernodes(self):
        topo = build_topology(16, s=1.0, seed=1)
        assert topo.n_supernodes == 16
        assert topo.is_super.all()
        assert topo.leaves_per_super.sum() == 0

    def test_two_supernodes_one_leaf_each(self):
        topo = build_topology(4, s=0.5, seed=2)
        assert topo.n_supernodes == 2
        assert list(topo.leaves_per_super) == [1, 1]
        assert list(topo.tree_degree) == [1, 1]  # a single tree edge

    def test_headline_shape(self):
        topo = build_topology(2**19, s=2**-9.5, seed=3)
        assert topo.n_supernodes == 724
        assert set(topo.leaves_per_super.tolist()) <= {723, 724}
        assert topo.tree_degree.max() == 3
        assert topo.tree_degree[0] <= 2

    def test_zero_supernodes_rejected(self):
        with pytest.raises(ValueError):
            build_topology(1000, s=1e-9, seed=4)
        with pytest.raises(ValueError):
            build_topology(1000, s=0.0, seed=4)

    def test_balanced_assignment(self):
        topo = build_topology(1000, s=0.01, seed=5)
        assert topo.leaves_per_super.max() - topo.leaves_per_super.min() <= 1


class TestRouteQuery:
    def test_single_node_network(self):
        topo = build_topology(1, s=1.0, seed=1)
        assert route_query(topo, 0).sum() == 0

    def test_single_supernode_leaf_origin(self):
        topo = build_topology(8, s=0.125, seed=2)
        leaf = int(np.flatnonzero(~topo.is_super)[0])
        counts = route_query(topo, leaf)
        assert counts[leaf] == 1
        assert counts[topo.supernodes[0]] == 1
        assert counts.sum() == 2  # one link crossing, seen at both ends

    def test_internal_supernode_handles_three_messages(self):
        topo = build_topology(64, s=0.5, seed=3)
        origin = int(topo.supernodes[0])
        counts = route_query(topo, origin)
        internal = topo.supernodes[topo.tree_degree == 3]
        assert len(internal) > 0
        assert np.all(counts[internal] == 3)
        # every super-node receives the query exactly once: the flood
        # crosses each of the S-1 tree edges once
        tree_messages = counts[topo.supernodes].sum()
        assert tree_messages == topo.tree_degree.sum() == 2 * (topo.n_supernodes - 1)


@pytest.fixture(scope="module")
def setup():
    n = 2**14
    w = WorkloadParams(n_peers=n)
    topo = build_topology(n, s=1 / np.sqrt(n), seed=6)
    metrics = run_experiment(topo, w, n_queries=500, seed=6)
    return n, w, topo, metrics


class TestRunExperiment:
    def test_hit_rate_exactly_one(self, setup):
        _, _, _, metrics = setup
        assert metrics.hit_rate == 1.0

    def test_max_byte_rate_near_three_r_z_n(self, setup):
        n, w, _, metrics = setup
        bound = 3 * w.query_rate * w.message_bytes * n
        assert metrics.bytes_per_s.max() == pytest.approx(bound, rel=0.10)

    def test_max_storage_within_one_leaf_bundle(self, setup):
        n, w, topo, metrics = setup
        bundle = w.items_per_peer * w.message_bytes
        expected = w.items_per_peer * w.message_bytes / topo.supernode_fraction
        measured = metrics.stored_items.max() * w.message_bytes
        assert abs(measured - expected) <= bundle

    def test_max_flop_rate(self, setup):
        n, w, _, metrics = setup
        expected = (w.query_rate * w.items_per_peer * w.flop_per_compare
                    * n / (1 / np.sqrt(n)))
        assert metrics.flop_per_s.max() == pytest.approx(expected, rel=0.05)

    def test_leaves_store_nothing_and_barely_talk(self, setup):
        _, _, topo, metrics = setup
        leaves = ~topo.is_super
        assert metrics.stored_items[leaves].sum() == 0
        # a leaf handles only its own query sends
        assert metrics.messages[leaves].max() <= 500

    def test_headline_storage_and_rates(self):
        # full-size topology, light query load, against the closed forms
        w = plickr_default()
        topo = build_topology(w.n_peers, s=2**-9.5, seed=7)
        metrics = run_experiment(topo, w, n_queries=200, seed=7)
        assert metrics.bytes_per_s.max() == pytest.approx(3 * 48545.185, rel=0.10)
        assert metrics.stored_items.max() * w.message_bytes == pytest.approx(11.59e6, rel=0.01)
        assert metrics.flop_per_s.max() == pytest.approx(3.0e8, rel=0.05)
        assert metrics.hit_rate == 1.0

    def test_storage_balance_across_supernodes(self, setup):
        _, w, topo, metrics = setup
        stored = metrics.stored_items[topo.supernodes]
        assert stored.max() - stored.min() <= w.items_per_peer


def test_stored_items_account_owner_once():
    topo = build_topology(10, s=0.2, seed=8)
    stored = stored_items_per_node(topo, items_per_peer=20)
    # 2 super-nodes, 8 leaves, 4 leaves each: 20 * (4 + 1)
    assert sorted(stored[stored > 0].tolist()) == [100, 100]
    assert stored.sum() == 10 * 20
