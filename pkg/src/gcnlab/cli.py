"""Command-line entry point.

    gcnlab generate --spec spec.json --out data/ [--kind partition|neighbor-dist]
    gcnlab train    --data data/ --out run/ [--epochs 300 --lr 0.01 ...]
    gcnlab sweep    --config sweep.json --out sweep/ [--parallel K]
    gcnlab analyze  --data data/
    gcnlab plot     --results sweep/ --out figures/

Exit status: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GcnLabError
from .experiment import (SweepConfig, heterophily_claim_check, render_sweep_figures,
                         run_heterophily_case, run_sweep)
from .graph import load_dataset, save_dataset
from .kernels import normalize_adjacency
from .metrics import distribution_distinguishability, neighbor_label_distribution, node_homophily
from .model import TrainConfig, train
from .plots import render_confusion_svg, render_train_val_svg
from .synthgen import SplitCounts, generate, random_split, spec_from_dict

log = logging.getLogger("gcnlab")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise UsageError(f"{p}: expected a JSON object at top level")
    return data


def _require_dir(path, flag):
    if not Path(path).is_dir():
        raise UsageError(f"{flag} {path}: directory not found")


def _positive(kind):
    def parse(s):
        v = kind(s)
        if v < 0:
            raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gcnlab", description="Synthetic homophily experiments with a from-scratch GCN.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a synthetic dataset")
    g.add_argument("--spec", required=True, help="generator spec JSON (PartitionSpec or NeighborDistributionSpec fields)")
    g.add_argument("--out", required=True)
    g.add_argument("--kind", choices=["partition", "neighbor-dist"])
    g.add_argument("--seed", type=int, help="overrides the spec's seed")

    t = sub.add_parser("train", help="train a GCN on a dataset directory")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--config", help="JSON with TrainConfig fields; flags take precedence")
    t.add_argument("--epochs", type=_positive(int))
    t.add_argument("--hidden", type=_positive(int))
    t.add_argument("--lr", type=_positive(float))
    t.add_argument("--dropout", type=_positive(float), dest="dropout_rate")
    t.add_argument("--weight-decay", type=_positive(float), dest="weight_decay")
    t.add_argument("--seed", type=int)

    s = sub.add_parser("sweep", help="run the homophily sweep")
    s.add_argument("--config", help="sweep config JSON (defaults: h = 0.1..0.9, one seed)")
    s.add_argument("--out", required=True)
    s.add_argument("--parallel", type=_positive(int))
    s.add_argument("--heterophily", action="store_true",
                   help="also run the cyclic-shift neighbor-distribution case and a claim check against h=0.1")

    a = sub.add_parser("analyze", help="print structural statistics of a dataset")
    a.add_argument("--data", required=True)
    a.add_argument("--out", help="also write the statistics as JSON to this file")

    pl = sub.add_parser("plot", help="render SVG figures from a sweep or training output directory")
    pl.add_argument("--results", required=True)
    pl.add_argument("--out", required=True)
    return p


def cmd_generate(args) -> None:
    raw = _read_json(args.spec)
    split = raw.pop("split", None)
    try:
        spec = spec_from_dict(raw, kind=args.kind)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        counts = SplitCounts(**split) if split else SplitCounts()
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{args.spec}: {exc}") from None
    graph = generate(spec)
    masks = random_split(graph.num_nodes, counts, [int(spec.seed), 2])
    meta = {"generator": spec.to_dict(), "split": asdict(counts)}
    save_dataset(graph, masks, meta, args.out)
    log.info("wrote %d nodes, %d edges, homophily %.4f to %s",
             graph.num_nodes, graph.num_edges, node_homophily(graph), args.out)


def cmd_train(args) -> None:
    _require_dir(args.data, "--data")
    base = _read_json(args.config) if args.config else {}
    known = {f.name for f in fields(TrainConfig)}
    unknown = set(base) - known
    if unknown:
        raise UsageError(f"{args.config}: unknown train field(s): {', '.join(sorted(unknown))}")
    overrides = {k: getattr(args, k) for k in ("epochs", "hidden", "lr", "dropout_rate", "weight_decay", "seed")
                 if getattr(args, k) is not None}
    config = TrainConfig(**{**base, **overrides})
    if not 0 <= config.dropout_rate < 1:
        raise UsageError(f"--dropout must be in [0, 1), got {config.dropout_rate}")

    graph, masks, _ = load_dataset(args.data)
    params, trace = train(graph, masks, config, a_hat=normalize_adjacency(graph.adjacency))
    out = Path(args.out)
    trace.save(out)
    np.savez(out / "params.npz", **params.as_dict())
    (out / "train_config.json").write_text(json.dumps(asdict(config), indent=2) + "\n")
    if trace.epochs:
        render_train_val_svg(trace.epochs, out / "figures" / "accuracy.svg")
    if trace.confusion is not None:
        render_confusion_svg(trace.confusion, out / "figures" / "confusion.svg")
    log.info("test accuracy %.4f", trace.test_acc)


def cmd_sweep(args) -> None:
    raw = _read_json(args.config) if args.config else {}
    raw.pop("output_dir", None)
    try:
        config = SweepConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    config.output_dir = args.out
    if args.parallel:
        config.parallel = args.parallel
    results = run_sweep(config)
    log.info("sweep finished: %d cells, %d failed", len(results.records), len(results.errors))
    if args.heterophily:
        from .synthgen import NeighborDistributionSpec, cyclic_shift_mixing
        base = config.base_spec
        spec = NeighborDistributionSpec(
            mixing=cyclic_shift_mixing(base.num_classes), nodes_per_class=base.nodes_per_class,
            avg_degree=base.avg_degree, feature_dim=base.feature_dim, center_scale=base.center_scale,
            noise_sigma=base.noise_sigma, seed=int(config.seeds[0]))
        case = run_heterophily_case(spec, replace(config.train, seed=int(config.seeds[0])), config.split,
                                    Path(args.out) / "heterophily", config.render_figures)
        baseline = [r["test_acc"] for r in results.records if abs(r["h"] - 0.1) < 1e-9]
        if baseline:
            report = heterophily_claim_check(case, float(np.nanmean(baseline)))
            (Path(args.out) / "heterophily_report.json").write_text(json.dumps(report, indent=2) + "\n")
    if results.errors:
        raise GcnLabError(f"{len(results.errors)} sweep cell(s) failed; see {args.out}/errors.json")


def cmd_analyze(args) -> None:
    _require_dir(args.data, "--data")
    graph, masks, meta = load_dataset(args.data)
    deg = graph.degrees()
    nbr = neighbor_label_distribution(graph)
    tv = distribution_distinguishability(nbr)
    stats = {
        "num_nodes": graph.num_nodes,
        "num_edges": graph.num_edges,
        "num_classes": graph.num_classes,
        "node_homophily": node_homophily(graph),
        "degree": {"mean": float(deg.mean()), "min": int(deg.min()), "max": int(deg.max()),
                   "std": float(deg.std()), "isolated": int((deg == 0).sum())},
        "neighbor_label_distribution": nbr.tolist(),
        "pairwise_tv": tv.tolist(),
        "split_sizes": {k: len(v) for k, v in masks.as_dict().items()},
    }
    lines = [
        f"nodes {stats['num_nodes']}  edges {stats['num_edges']}  classes {stats['num_classes']}",
        f"node homophily {stats['node_homophily']:.3f}",
        "degree mean {mean:.3f}  std {std:.3f}  min {min}  max {max}  isolated {isolated}".format(**stats["degree"]),
        "neighbor-distribution total-variation matrix:",
    ]
    lines += ["  " + " ".join(f"{v:.3f}" for v in row) for row in tv]
    print("\n".join(lines))
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(stats, indent=2) + "\n")


def cmd_plot(args) -> None:
    _require_dir(args.results, "--results")
    results = Path(args.results)
    if (results / "sweep_results.csv").exists():
        written = render_sweep_figures(results, args.out)
    elif (results / "train_log.csv").exists():
        from .metrics import ConfusionMatrix
        from .model import read_log_csv
        recs = read_log_csv(results / "train_log.csv")
        out = Path(args.out)
        render_train_val_svg(recs, out / "accuracy.svg")
        written = [out / "accuracy.svg"]
        if (results / "confusion.csv").exists():
            render_confusion_svg(ConfusionMatrix.load_csv(results / "confusion.csv"), out / "confusion.svg")
            written.append(out / "confusion.svg")
    else:
        raise UsageError(f"--results {results}: neither sweep_results.csv nor train_log.csv found")
    log.info("wrote %d figures to %s", len(written), args.out)


COMMANDS = {"generate": cmd_generate, "train": cmd_train, "sweep": cmd_sweep,
            "analyze": cmd_analyze, "plot": cmd_plot}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GcnLabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
