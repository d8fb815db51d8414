"""Power-law random networks, degree statistics, and random walks.

Degree sequences follow p_k proportional to k^-2 on [k_min, k_max] and are
realized with the configuration model. Self-loops and parallel edges are
repaired by random edge swaps (which preserve the degree sequence); the few
edges that cannot be repaired within the retry budget are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

TAU = 2  # only exponent supported

_SWAP_ROUNDS = 60


def _rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Philox 4x64 counter-based generator; the single RNG used everywhere."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class PowerLawParams:
    n_nodes: int
    k_min: int = 2
    k_max: int | None = None  # defaults to round(sqrt(n_nodes))
    tau: int = TAU

    def __post_init__(self):
        if self.k_max is None:
            object.__setattr__(self, "k_max", int(round(self.n_nodes ** 0.5)))
        if self.tau != TAU:
            raise ValueError("only tau=2 is supported")
        if not (1 <= self.k_min <= self.k_max <= self.n_nodes - 1):
            raise ValueError("need 1 <= k_min <= k_max <= n_nodes - 1")


@dataclass(frozen=True)
class DegreeStats:
    mean_k: float
    mean_k2: float
    observed_k_max: int
    norm_A: float


@dataclass
class Network:
    """Simple undirected graph over nodes 0..n-1 in CSR adjacency form.

    `offsets` has n+1 entries; the neighbors of v are
    `neighbors[offsets[v]:offsets[v+1]]`, sorted ascending.
    """

    n_nodes: int
    offsets: np.ndarray    # int64, len n_nodes + 1
    neighbors: np.ndarray  # int32, len 2 * n_edges

    @property
    def n_edges(self) -> int:
        return len(self.neighbors) // 2

    @property
    def degrees(self) -> np.ndarray:
        return (self.offsets[1:] - self.offsets[:-1]).astype(np.int64)

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def edge_array(self) -> np.ndarray:
        """All edges once as an (m, 2) array with u < v."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.degrees)
        dst = self.neighbors.astype(np.int64)
        keep = src < dst
        return np.stack([src[keep], dst[keep]], axis=1)

    def validate_simple(self) -> None:
        """Assert no self-loops, no duplicate edges, symmetric adjacency."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.degrees)
        dst = self.neighbors.astype(np.int64)
        if np.any(src == dst):
            raise AssertionError("self-loop present")
        keys = np.minimum(src, dst) * self.n_nodes + np.maximum(src, dst)
        uniq, counts = np.unique(keys, return_counts=True)
        if np.any(counts != 2):
            raise AssertionError("adjacency not symmetric or has duplicate edges")


def powerlaw_normalization(k_min: int, k_max: int) -> float:
    """Normalization constant A with sum of A*k^-2 over [k_min, k_max] = 1."""
    ks = np.arange(k_min, k_max + 1, dtype=np.float64)
    return float(1.0 / (ks ** -2.0).sum())


def sample_degree_sequence(params: PowerLawParams, seed: int) -> np.ndarray:
    """Draw n i.i.d. degrees from p_k = A*k^-2 via inverse CDF.

    If the total is odd, one uniformly chosen node (with headroom under
    k_max) gets its degree incremented so stub matching is possible.
    """
    rng = _rng(seed)
    ks = np.arange(params.k_min, params.k_max + 1, dtype=np.float64)
    pk = ks ** -2.0
    cdf = np.cumsum(pk / pk.sum())
    cdf[-1] = 1.0
    draws = rng.random(params.n_nodes)
    degrees = params.k_min + np.searchsorted(cdf, draws, side="right")
    degrees = degrees.astype(np.int64)
    if degrees.sum() % 2 == 1:
        if params.k_min == params.k_max:
            # no headroom anywhere: drop one stub instead
            i = int(rng.integers(params.n_nodes))
            degrees[i] -= 1
        else:
            i = int(rng.integers(params.n_nodes))
            while degrees[i] >= params.k_max:
                i = int(rng.integers(params.n_nodes))
            degrees[i] += 1
    return degrees


def build_configuration_graph(degrees: np.ndarray, seed: int) -> Network:
    """Realize a degree sequence as a simple graph via stub matching.

    After the uniform matching, offending edges (self-loops and parallel
    edges) are rewired by random swaps against randomly chosen good edges;
    a swap is applied only if it introduces no new offence, so degrees are
    preserved exactly. Edges still offending after the retry budget are
    deleted.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    n = len(degrees)
    if degrees.sum() % 2 == 1:
        raise ValueError("degree sum must be even")
    rng = _rng(np.random.SeedSequence((seed, 0x636F6E66)))

    stubs = np.repeat(np.arange(n, dtype=np.int64), degrees)
    rng.shuffle(stubs)
    edges = stubs.reshape(-1, 2)
    u = np.minimum(edges[:, 0], edges[:, 1]).copy()
    v = np.maximum(edges[:, 0], edges[:, 1]).copy()
    m = len(u)
    if m == 0:
        return _csr_from_edges(n, u, v)

    keys = u * n + v
    present: dict[int, int] = {}
    bad: list[int] = []
    for i in range(m):
        if u[i] == v[i]:
            bad.append(i)
            continue
        k = int(keys[i])
        if k in present:
            present[k] += 1
            bad.append(i)
        else:
            present[k] = 1

    def key_exists(a: int, b: int) -> bool:
        return a == b or present.get(min(a, b) * n + max(a, b), 0) > 0

    def still_offending(i: int) -> bool:
        a, b = int(u[i]), int(v[i])
        return a == b or present.get(min(a, b) * n + max(a, b), 0) > 1

    for _ in range(_SWAP_ROUNDS):
        if not bad:
            break
        still_bad: list[int] = []
        for i in bad:
            if not still_offending(i):
                continue  # fixed earlier as a swap partner
            j = int(rng.integers(m))
            if j == i:
                still_bad.append(i)
                continue
            # propose (u[i], v[j]) and (u[j], v[i])
            a1, b1 = int(u[i]), int(v[j])
            a2, b2 = int(u[j]), int(v[i])
            if (key_exists(a1, b1) or key_exists(a2, b2)
                    or (min(a1, b1), max(a1, b1)) == (min(a2, b2), max(a2, b2))):
                still_bad.append(i)
                continue
            for a, b in ((int(u[i]), int(v[i])), (int(u[j]), int(v[j]))):
                if a != b:
                    k = min(a, b) * n + max(a, b)
                    present[k] -= 1
                    if present[k] == 0:
                        del present[k]
            u[i], v[i] = min(a1, b1), max(a1, b1)
            u[j], v[j] = min(a2, b2), max(a2, b2)
            for a, b in ((a1, b1), (a2, b2)):
                k = min(a, b) * n + max(a, b)
                present[k] = present.get(k, 0) + 1
        bad = still_bad

    bad = [i for i in bad if still_offending(i)]
    if bad:
        keep = np.ones(m, dtype=bool)
        keep[bad] = False
        u, v = u[keep], v[keep]
    return _csr_from_edges(n, u, v)


def _csr_from_edges(n: int, u: np.ndarray, v: np.ndarray) -> Network:
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return Network(n_nodes=n, offsets=offsets, neighbors=dst.astype(np.int32))


def generate_network(params: PowerLawParams, seed: int) -> Network:
    """Sample a degree sequence and realize it; deterministic per seed."""
    return build_configuration_graph(sample_degree_sequence(params, seed), seed)


def degree_stats(net: Network) -> DegreeStats:
    """Empirical first and second degree moments plus the power-law
    normalization constant over the observed degree support."""
    deg = net.degrees
    k_max = int(deg.max()) if len(deg) else 0
    positive = deg[deg > 0]
    k_min = int(positive.min()) if len(positive) else 0
    norm = powerlaw_normalization(k_min, k_max) if 0 < k_min <= k_max else float("nan")
    return DegreeStats(
        mean_k=float(deg.mean()),
        mean_k2=float((deg.astype(np.float64) ** 2).mean()),
        observed_k_max=k_max,
        norm_A=norm,
    )


def percolation_threshold(stats: DegreeStats) -> float:
    """Critical per-edge transmission probability <k> / (<k^2> - <k>)."""
    if stats.mean_k2 <= stats.mean_k:
        raise ValueError("subcritical graph")
    return stats.mean_k / (stats.mean_k2 - stats.mean_k)


def random_walk(net: Network, start: int, length: int,
                seed: int | np.random.SeedSequence | np.random.Generator) -> np.ndarray:
    """Uniform-neighbor random walk; returns length+1 nodes including start."""
    if not 0 <= start < net.n_nodes:
        raise ValueError("start node out of range")
    if length < 0:
        raise ValueError("length must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    path = np.empty(length + 1, dtype=np.int64)
    path[0] = start
    cur = start
    offsets, neigh = net.offsets, net.neighbors
    for i in range(length):
        lo, hi = offsets[cur], offsets[cur + 1]
        if hi == lo:
            raise ValueError("walk reached an isolated node")
        cur = int(neigh[lo + rng.integers(hi - lo)])
        path[i + 1] = cur
    return path


def save_edge_list(net: Network, path: str | Path) -> None:
    """Dump edges once each as pairs of little-endian uint32."""
    edges = net.edge_array().astype("<u4")
    edges.tofile(str(path))


def load_edge_list(path: str | Path, n_nodes: int | None = None) -> Network:
    if Path(path).stat().st_size % 8 != 0:
        raise ValueError("edge list file corrupt")
    raw = np.fromfile(str(path), dtype="<u4")
    edges = raw.reshape(-1, 2).astype(np.int64)
    if n_nodes is None:
        n_nodes = int(edges.max()) + 1 if len(edges) else 0
    return _csr_from_edges(n_nodes, edges[:, 0], edges[:, 1])
