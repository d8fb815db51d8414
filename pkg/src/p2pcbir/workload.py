"""Scenario constants and derived load rates shared by all architecture models.

The default scenario is a photo-sharing network of ~half a million peers,
each contributing 20 images and issuing 10 similarity queries per day over
166-bin color histograms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

SECONDS_PER_DAY = 86_400

# Wire size of one feature vector: 166 float32 bins.
HISTOGRAM_BYTES = 166 * 4


@dataclass(frozen=True)
class WorkloadParams:
    """Load scenario: peer count N, per-peer query rate R (1/s), items per
    peer C, FlOp per vector comparison f, and message size z in bytes."""

    n_peers: int = 2**19
    query_rate: float = 10 / SECONDS_PER_DAY
    items_per_peer: int = 20
    flop_per_compare: int = 332
    message_bytes: int = 800

    def __post_init__(self):
        for name in ("n_peers", "query_rate", "items_per_peer",
                     "flop_per_compare", "message_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class DerivedRates:
    total_query_rate: float   # N*R queries/s network-wide
    query_byte_rate: float    # Q = z*N*R bytes/s network-wide
    total_items: int          # N*C


def plickr_default() -> WorkloadParams:
    """Default scenario constants: N=2^19, R=10/86400 1/s, C=20, f=332, z=800.

    The query rate is kept as the exact double of 10/86400, not the rounded
    1.2e-4 figure sometimes quoted for it; the derived byte rate Q is only
    consistent with the unrounded value.
    """
    return WorkloadParams()


def derive_rates(params: WorkloadParams) -> DerivedRates:
    """Direct products of the scenario constants; linear in every factor."""
    return DerivedRates(
        total_query_rate=params.n_peers * params.query_rate,
        query_byte_rate=params.message_bytes * params.n_peers * params.query_rate,
        total_items=params.n_peers * params.items_per_peer,
    )


def params_from_dict(raw: dict) -> WorkloadParams:
    """Build parameters from config keys, overriding the defaults.

    Recognized keys: n_peers, queries_per_peer_per_day, items_per_peer,
    flop_per_compare, message_bytes.
    """
    known = {"n_peers", "queries_per_peer_per_day", "items_per_peer",
             "flop_per_compare", "message_bytes"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown workload keys: {sorted(unknown)}")
    defaults = WorkloadParams()
    return WorkloadParams(
        n_peers=int(raw.get("n_peers", defaults.n_peers)),
        query_rate=float(raw["queries_per_peer_per_day"]) / SECONDS_PER_DAY
        if "queries_per_peer_per_day" in raw else defaults.query_rate,
        items_per_peer=int(raw.get("items_per_peer", defaults.items_per_peer)),
        flop_per_compare=int(raw.get("flop_per_compare", defaults.flop_per_compare)),
        message_bytes=int(raw.get("message_bytes", defaults.message_bytes)),
    )


def load_params(path: str | Path) -> WorkloadParams:
    """Read workload parameters from a JSON configuration file."""
    with open(path) as fh:
        return params_from_dict(json.load(fh))
