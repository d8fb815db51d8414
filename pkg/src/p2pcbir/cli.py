"""Command-line front-end.

Subcommands: cost, gen-graph, sim-percolation, sim-supernode, sim-prism,
extract, knn. Simulation commands accept a JSON config file; any flag given
explicitly overrides the corresponding config entry.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .cbir import (METRICS, Collection, extract_histogram, knn_full_scan,
                   load_histogram, read_ppm, save_histogram)
from .costmodel import all_costs
from .graph import (PowerLawParams, degree_stats, generate_network,
                    save_edge_list)
from .harness import ConfigError, ExperimentConfig, run, validate
from .workload import params_from_dict

COST_ROWS = ("b_ave", "b_max", "d_ave", "d_max", "p_ave", "p_max")
COST_LABELS = {
    "b_ave": "B_ave (bytes/s)", "b_max": "B_max (bytes/s)",
    "d_ave": "D_ave (bytes)", "d_max": "D_max (bytes)",
    "p_ave": "P_ave (FlOp/s)", "p_max": "P_max (FlOp/s)",
}

WORKLOAD_FLAGS = {
    "n_peers": "n_peers",
    "queries_per_day": "queries_per_peer_per_day",
    "items_per_peer": "items_per_peer",
    "flop_per_compare": "flop_per_compare",
    "message_bytes": "message_bytes",
}


def _add_workload_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-peers", type=int, default=None)
    parser.add_argument("--queries-per-day", type=float, default=None)
    parser.add_argument("--items-per-peer", type=int, default=None)
    parser.add_argument("--flop-per-compare", type=int, default=None)
    parser.add_argument("--message-bytes", type=int, default=None)


def _workload_overrides(args: argparse.Namespace) -> dict:
    out = {}
    for attr, key in WORKLOAD_FLAGS.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    return out


def _sim_config(args: argparse.Namespace, architecture: str,
                param_flags: dict[str, str]) -> ExperimentConfig:
    """Config file (if any) merged with explicitly supplied flags."""
    if args.config:
        config = ExperimentConfig.from_json(args.config)
        if config.architecture and config.architecture != architecture:
            raise ConfigError(
                [f"config is for {config.architecture!r}, not {architecture!r}"])
        config.architecture = architecture
    else:
        config = ExperimentConfig(architecture=architecture)
    config.workload.update(_workload_overrides(args))
    for attr, key in param_flags.items():
        value = getattr(args, attr, None)
        if value is not None:
            config.params[key] = value
    if args.seeds is not None:
        config.seeds = [int(s) for s in args.seeds.split(",") if s != ""]
    if args.out is not None:
        config.output = args.out
    return config


def _run_and_report(config: ExperimentConfig) -> int:
    rows, summary = run(config)
    if config.output is None:
        writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    else:
        print(f"wrote {config.output}.csv and {config.output}.json")
    return 0


def cmd_cost(args: argparse.Namespace) -> int:
    workload = _workload_overrides(args)
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        workload = {**raw.get("workload", {}), **workload}
    w = params_from_dict(workload)
    kwargs = {}
    if args.s is not None:
        kwargs["s"] = args.s
    if args.k_max is not None:
        kwargs["k_max"] = args.k_max
    if args.norm_a is not None:
        kwargs["norm_a"] = args.norm_a
    reports = all_costs(w, **kwargs)

    names = list(reports)
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["resource"] + names)
        for row in COST_ROWS:
            writer.writerow([row] + [repr(getattr(reports[n], row)) for n in names])
    else:
        width = 18
        header = f"{'resource':<18}" + "".join(f"{n:>{width}}" for n in names)
        print(header)
        print("-" * len(header))
        for row in COST_ROWS:
            cells = "".join(f"{getattr(reports[n], row):>{width}.4g}" for n in names)
            print(f"{COST_LABELS[row]:<18}" + cells)
    if args.out:
        config = ExperimentConfig(architecture="costmodel", workload=workload,
                                  params=kwargs, output=args.out)
        run(config)
        print(f"wrote {args.out}.csv and {args.out}.json", file=sys.stderr)
    return 0


def cmd_gen_graph(args: argparse.Namespace) -> int:
    params = PowerLawParams(n_nodes=args.n, k_min=args.k_min, k_max=args.k_max)
    net = generate_network(params, args.seed)
    save_edge_list(net, args.out)
    stats = degree_stats(net)
    print(f"nodes={net.n_nodes} edges={net.n_edges} "
          f"mean_k={stats.mean_k:.4f} mean_k2={stats.mean_k2:.2f} "
          f"k_max={stats.observed_k_max} -> {args.out}")
    return 0


def cmd_sim_percolation(args: argparse.Namespace) -> int:
    flags = {"n_nodes": "n_nodes", "k_min": "k_min", "k_max": "k_max",
             "q": "q", "ttl": "ttl", "contents": "n_content",
             "queries": "n_queries"}
    return _run_and_report(_sim_config(args, "percolation", flags))


def cmd_sim_supernode(args: argparse.Namespace) -> int:
    flags = {"n_nodes": "n_nodes", "s": "s", "queries": "n_queries"}
    return _run_and_report(_sim_config(args, "supernode", flags))


def cmd_sim_prism(args: argparse.Namespace) -> int:
    flags = {"items": "n_items", "clusters": "n_clusters", "spread": "spread",
             "refs": "n_refs", "peers": "ring_peers", "queries": "n_queries",
             "pairs": "n_pairs", "k": "k", "curve": "curve"}
    return _run_and_report(_sim_config(args, "prism", flags))


def cmd_extract(args: argparse.Namespace) -> int:
    hist = extract_histogram(read_ppm(args.image))
    if args.out:
        save_histogram(hist, args.out)
        print(f"wrote {args.out}")
    else:
        json.dump([float(x) for x in hist], sys.stdout)
        print()
    return 0


def cmd_knn(args: argparse.Namespace) -> int:
    raw = json.loads(Path(args.collection).read_text())
    items = raw["items"] if isinstance(raw, dict) else raw
    coll = Collection(ids=[it["id"] for it in items],
                      vectors=[it["bins"] for it in items])
    q = load_histogram(args.query)
    neighbors = knn_full_scan(q, coll, args.k, metric=args.metric)
    writer = csv.writer(sys.stdout)
    writer.writerow(["rank", "item_id", "distance"])
    for rank, (item_id, dist) in enumerate(neighbors, start=1):
        writer.writerow([rank, item_id, repr(dist)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="p2pcbir",
        description="Cost models and simulators for peer-to-peer image search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cost", help="print the three architecture cost tables")
    p.add_argument("--config", default=None, help="JSON config with workload overrides")
    _add_workload_flags(p)
    p.add_argument("--s", type=float, default=None, help="super-node fraction")
    p.add_argument("--k-max", type=float, default=None)
    p.add_argument("--norm-a", type=float, default=None)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--out", default=None, help="also write CSV/JSON under this prefix")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("gen-graph", help="generate a power-law graph edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_graph)

    for name, fn, extra in (
        ("sim-percolation", cmd_sim_percolation,
         (("--n-nodes", int), ("--k-min", int), ("--k-max", int),
          ("--q", float), ("--ttl", int), ("--contents", int),
          ("--queries", int))),
        ("sim-supernode", cmd_sim_supernode,
         (("--n-nodes", int), ("--s", float), ("--queries", int))),
        ("sim-prism", cmd_sim_prism,
         (("--items", int), ("--clusters", int), ("--spread", float),
          ("--refs", int), ("--peers", int), ("--queries", int),
          ("--pairs", int), ("--k", int))),
    ):
        p = sub.add_parser(name, help=f"run the {name.split('-', 1)[1]} experiment")
        p.add_argument("--config", default=None, help="JSON experiment config")
        _add_workload_flags(p)
        for flag, typ in extra:
            p.add_argument(flag, type=typ, default=None)
        if name == "sim-prism":
            p.add_argument("--curve", action="store_const", const=True,
                           default=None, help="also emit the recall curve CSV")
        p.add_argument("--seeds", default=None, help="comma-separated seed list")
        p.add_argument("--out", default=None, help="output path prefix")
        p.set_defaults(func=fn)

    p = sub.add_parser("extract", help="extract a histogram from a binary PPM")
    p.add_argument("--image", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("knn", help="exact k-NN over a JSON collection")
    p.add_argument("--collection", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("-k", type=int, default=20)
    p.add_argument("--metric", choices=METRICS, default="euclidean")
    p.set_defaults(func=cmd_knn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"error: {line}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
