"""Simulators and analytical cost models for three peer-to-peer
content-based image search architectures: super-node broadcast,
percolation search on power-law overlays, and reference-pair DHT indexing.
"""

__version__ = "0.1.0"

from .workload import WorkloadParams, DerivedRates, plickr_default, derive_rates
from .cbir import (Collection, extract_histogram, histogram_intersection,
                   euclidean_distance, knn_full_scan, synth_collection)
from .graph import (PowerLawParams, Network, DegreeStats,
                    sample_degree_sequence, build_configuration_graph,
                    generate_network, degree_stats, percolation_threshold,
                    random_walk)
from .percolation import (PercolationParams, PercMetrics, implant_content,
                          percolate_query, scale_metrics)
from .supernode import SupernodeTopology, build_topology, route_query
from .prism import (RefSet, PairScheme, Ring, rank_references,
                    pairs_for_vector, pair_key)
from .costmodel import (CostReport, supernode_costs, percolation_costs,
                        prism_costs, percolation_threshold_model, all_costs)
from .harness import ExperimentConfig, validate, run
