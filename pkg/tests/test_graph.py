import math

import numpy as np
import pytest

from p2pcbir.graph import (DegreeStats, Network, PowerLawParams,
                           build_configuration_graph, degree_stats,
                           generate_network, load_edge_list,
                           percolation_threshold, powerlaw_normalization,
                           random_walk, sample_degree_sequence,
                           save_edge_list)


def net_from_degrees(degrees, seed=0):
    return build_configuration_graph(np.array(degrees), seed)


class TestDegreeSampling:
    def test_degenerate_support(self):
        params = PowerLawParams(n_nodes=10, k_min=3, k_max=3)
        degrees = sample_degree_sequence(params, seed=1)
        assert np.all(degrees == 3)

    def test_norm_constant_tends_to_pi_squared_over_six(self):
        assert 1.0 / powerlaw_normalization(1, 10**7) == pytest.approx(
            math.pi**2 / 6, rel=1e-4)

    def test_even_sum(self):
        for seed in range(5):
            params = PowerLawParams(n_nodes=1001, k_min=2, k_max=64)
            assert sample_degree_sequence(params, seed).sum() % 2 == 0

    def test_empirical_fractions_within_three_sigma(self):
        # multinomial bound per degree class against the sampled law; one
        # seed is pinned because a 3-sigma band over 49 bins leaves a
        # non-trivial chance of a single benign excursion
        n = 2**19
        params = PowerLawParams(n_nodes=n, k_min=2, k_max=724)
        degrees = sample_degree_sequence(params, seed=2)
        a = powerlaw_normalization(2, 724)
        counts = np.bincount(degrees, minlength=725)
        for k in range(2, 51):
            p = a / k**2
            sigma = math.sqrt(p * (1 - p) / n)
            assert abs(counts[k] / n - p) <= 3 * sigma, f"degree {k}"

    def test_bounds_respected(self):
        params = PowerLawParams(n_nodes=4096, k_min=2, k_max=64)
        degrees = sample_degree_sequence(params, seed=3)
        assert degrees.min() >= 2 and degrees.max() <= 64


class TestConfigurationGraph:
    def test_single_edge(self):
        net = net_from_degrees([1, 1])
        assert net.n_edges == 1
        assert list(net.neighbors_of(0)) == [1]
        assert list(net.neighbors_of(1)) == [0]

    def test_triangle_is_only_simple_realization(self):
        net = net_from_degrees([2, 2, 2], seed=5)
        assert net.n_edges == 3
        assert sorted(map(tuple, net.edge_array().tolist())) == [(0, 1), (0, 2), (1, 2)]

    def test_odd_degree_sum_rejected(self):
        with pytest.raises(ValueError, match="even"):
            net_from_degrees([1, 1, 1])

    def test_handshake_and_simplicity(self):
        params = PowerLawParams(n_nodes=2**14, k_min=2, k_max=128)
        degrees = sample_degree_sequence(params, seed=6)
        net = build_configuration_graph(degrees, seed=6)
        assert net.degrees.sum() == 2 * net.n_edges
        net.validate_simple()
        # swap repair preserves almost every sampled degree
        preserved = np.mean(net.degrees == degrees)
        assert preserved >= 0.999
        assert net.degrees.max() <= 128

    def test_deterministic(self):
        params = PowerLawParams(n_nodes=2048, k_min=2, k_max=45)
        a = generate_network(params, seed=7)
        b = generate_network(params, seed=7)
        assert np.array_equal(a.offsets, b.offsets)
        assert np.array_equal(a.neighbors, b.neighbors)


class TestDegreeStats:
    def test_triangle(self):
        stats = degree_stats(net_from_degrees([2, 2, 2], seed=1))
        assert stats.mean_k == 2.0
        assert stats.mean_k2 == 4.0
        assert stats.observed_k_max == 2

    def test_star(self):
        stats = degree_stats(net_from_degrees([3, 1, 1, 1], seed=2))
        assert stats.mean_k == 1.5
        assert stats.mean_k2 == 3.0

    def test_unit_minimum_degree_matches_log_model(self):
        # analytic A*ln(k_max) with A = 0.625 for support starting at 1
        params = PowerLawParams(n_nodes=2**17, k_min=1, k_max=724)
        net = generate_network(params, seed=8)
        stats = degree_stats(net)
        assert stats.mean_k == pytest.approx(0.625 * math.log(724), rel=0.10)

    def test_second_moment_grows_with_cap(self):
        # <k^2> is proportional to k_max for this exponent
        n = 2**16
        ratios = []
        for k_max in (64, 128, 256):
            params = PowerLawParams(n_nodes=n, k_min=2, k_max=k_max)
            stats = degree_stats(generate_network(params, seed=9))
            ratios.append(stats.mean_k2 / k_max)
        spread = max(ratios) / min(ratios)
        assert spread < 1.2


class TestThreshold:
    def test_formula(self):
        stats = DegreeStats(mean_k=4.1, mean_k2=452.5, observed_k_max=724,
                            norm_A=0.625)
        assert percolation_threshold(stats) == pytest.approx(0.00915, rel=5e-3)

    def test_triangle_threshold_is_one(self):
        stats = degree_stats(net_from_degrees([2, 2, 2], seed=1))
        assert percolation_threshold(stats) == 1.0

    def test_degenerate_rejected(self):
        stats = DegreeStats(mean_k=2.0, mean_k2=2.0, observed_k_max=2, norm_A=1.0)
        with pytest.raises(ValueError, match="subcritical"):
            percolation_threshold(stats)


class TestRandomWalk:
    def test_zero_length(self):
        net = net_from_degrees([1, 1])
        assert list(random_walk(net, 0, 0, seed=1)) == [0]

    def test_two_cycle_alternates(self):
        net = net_from_degrees([1, 1])
        path = random_walk(net, 0, 6, seed=2)
        assert list(path) == [0, 1, 0, 1, 0, 1, 0]

    def test_isolated_start_rejected(self):
        net = Network(n_nodes=3, offsets=np.array([0, 0, 1, 2]),
                      neighbors=np.array([2, 1], dtype=np.int32))
        with pytest.raises(ValueError, match="isolated"):
            random_walk(net, 0, 1, seed=3)

    def test_length_plus_one_nodes(self):
        params = PowerLawParams(n_nodes=512, k_min=2, k_max=22)
        net = generate_network(params, seed=4)
        assert len(random_walk(net, 5, 20, seed=4)) == 21

    def test_stationary_visit_frequency_tracks_degree(self):
        # long-run class-level visit rate of high-degree nodes ~ deg / 2E
        params = PowerLawParams(n_nodes=2**15, k_min=2, k_max=181)
        net = generate_network(params, seed=10)
        deg = net.degrees
        steps = 300_000
        path = random_walk(net, int(np.argmax(deg)), steps, seed=11)
        heavy = deg >= 50
        expected = deg[heavy].sum() / deg.sum()
        observed = heavy[path[1:]].mean()
        assert observed == pytest.approx(expected, rel=0.05)


class TestEdgeListIO:
    def test_roundtrip(self, tmp_path):
        params = PowerLawParams(n_nodes=1024, k_min=2, k_max=32)
        net = generate_network(params, seed=12)
        path = tmp_path / "net.bin"
        save_edge_list(net, path)
        loaded = load_edge_list(path, n_nodes=net.n_nodes)
        assert np.array_equal(loaded.offsets, net.offsets)
        assert np.array_equal(loaded.neighbors, net.neighbors)
        assert path.stat().st_size == net.n_edges * 8

    def test_corrupt_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x00" * 10)  # not a multiple of 8
        with pytest.raises(ValueError):
            load_edge_list(path)
