"""Command-line entry point: ``ihgnn <command> [options]``.

Commands
--------
stats       dataset statistics and homophily (CSV row on stdout)
homophily   node homophily histogram (CSV + SVG)
train       10-fold cross-validation of one configuration
ablate      cross-validation of every model variant on shared folds
sweep       cross-validation for several layer counts (CSV + SVG)
wl-test     1-WL test on two graphs of a dataset
gradcheck   finite-difference check of the model gradients

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric-check failure.
The default dataset root is taken from ``$IHGNN_DATA_DIR`` (else ``./data``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import shlex
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import (
    ConfigurationError,
    DatasetFormatError,
    DatasetLoadError,
    InputError,
    NumericCheckError,
)
from .fixtures import WL_PAIR_NAME, bundled_data_dir, random_graph
from .graph import dataset_homophily, dataset_stats, homophily_histogram
from .harness import (
    ablation_suite,
    cross_validate,
    format_table,
    layer_sweep,
    make_folds,
    summary_row,
    write_cv_results,
    write_manifest,
    write_summary,
)
from .model import VARIANTS, GraphBatch, IHGNNConfig, IHGNNModel, check_model_gradients
from .preprocessing import NodeLabelEncoder
from .svg import bar_chart, line_chart, write_svg
from .tud import load_dataset
from .wl import wl_test

DATA_ENV = "IHGNN_DATA_DIR"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

STATS_HEADER = ["dataset", "size", "num_classes", "avg_nodes", "avg_edges", "num_node_labels",
                "beta_graph_mean", "beta_graph_std", "beta_node_mean", "beta_node_std"]
HISTOGRAM_HEADER = ["bin_low", "bin_high", "count"]
SWEEP_HEADER = ["num_layers", "mean", "std", "selected_epoch"]
WL_HEADER = ["round", "graph", "colors"]

logger = logging.getLogger("ihgnn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def default_data_dir():
    return os.environ.get(DATA_ENV, "data")


def _add_dataset(p, required=True, default=None):
    p.add_argument("--dataset-dir", default=None,
                   help=f"dataset root (default: ${DATA_ENV} or ./data)")
    p.add_argument("--dataset", required=required, default=default, help="dataset name, e.g. MUTAG")


def _add_training(p):
    p.add_argument("--layers", type=int, default=5, help="number of layers K (default 5)")
    p.add_argument("--batch", type=int, default=32, help="batch size (default 32)")
    p.add_argument("--epochs", type=int, default=350)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--lr", type=float, default=0.01, help="initial Adam learning rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stratified", action=argparse.BooleanOptionalAction, default=True,
                   help="stratify folds by class (default on)")
    p.add_argument("--jobs", type=int, default=1, help="folds trained in parallel")
    p.add_argument("--out", default="results", help="output directory")


def build_parser():
    parser = _Parser(prog="ihgnn", description="Graph classification toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="dataset statistics and homophily")
    _add_dataset(p)
    p.add_argument("--out", default=None, help="also write the CSV to this file")

    p = sub.add_parser("homophily", help="node homophily histogram")
    _add_dataset(p)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out", default="results", help="output directory")

    p = sub.add_parser("train", help="10-fold cross-validation")
    _add_dataset(p)
    _add_training(p)
    p.add_argument("--variant", choices=VARIANTS, default="full")

    p = sub.add_parser("ablate", help="cross-validate every variant")
    _add_dataset(p)
    _add_training(p)
    p.add_argument("--variant", choices=VARIANTS, nargs="+", default=list(VARIANTS),
                   help="variants to run (default: all)")

    p = sub.add_parser("sweep", help="cross-validate several layer counts")
    _add_dataset(p)
    _add_training(p)
    p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--layer-values", default="2,3,4,5", help="comma-separated K values")

    p = sub.add_parser("wl-test", help="1-WL test on two graphs")
    _add_dataset(p, required=False, default=WL_PAIR_NAME)
    p.add_argument("--graphs", type=int, nargs=2, default=[1, 2], metavar=("G1", "G2"),
                   help="1-based graph indices (default 1 2)")
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--out", default=None, help="also write the multiset CSV to this file")

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--nodes", type=int, default=5)
    p.add_argument("--graphs", type=int, default=2, help="graphs in the checked batch")
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--samples", type=int, default=30, help="entries checked per parameter array")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-4)
    return parser


def _load(args):
    if args.dataset == WL_PAIR_NAME and args.dataset_dir is None:
        root = bundled_data_dir()
    else:
        root = args.dataset_dir or default_data_dir()
    if not Path(root).is_dir():
        raise DatasetLoadError(f"dataset directory {root} does not exist")
    return load_dataset(root, args.dataset)


def _out_dir(path):
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetLoadError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _emit_csv(header, rows, stream):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _config(args, variant=None):
    if args.layers < 1:
        raise ConfigurationError(f"--layers must be >= 1, got {args.layers}")
    return IHGNNConfig(
        num_layers=args.layers, batch_size=args.batch, epochs=args.epochs, dropout=args.dropout,
        learning_rate=args.lr, seed=args.seed, variant=variant or args.variant,
    )


def _manifest(out, args, config, d, started, **extra):
    extra = {"stratified": args.stratified, "started": started,
             "finished": datetime.now(timezone.utc).isoformat(timespec="seconds"), **extra}
    write_manifest(out / "manifest.txt", "ihgnn " + shlex.join(sys.argv[1:] or [args.command]),
                   config.replace(pad_size=d.max_nodes, num_classes=max(d.num_classes, 2)),
                   d.name, extra)


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def cmd_stats(args):
    d = _load(args)
    s = dataset_stats(d)
    bg = dataset_homophily(d, "graph")
    bn = dataset_homophily(d, "node")
    row = [s.name, s.size, s.num_classes, repr(s.avg_nodes), repr(s.avg_edges),
           s.num_node_labels, repr(bg.mean), repr(bg.std), repr(bn.mean), repr(bn.std)]
    _emit_csv(STATS_HEADER, [row], sys.stdout)
    if args.out:
        _write_csv(args.out, STATS_HEADER, [row])
    return EXIT_OK


def cmd_homophily(args):
    if args.bins < 1:
        raise InputError(f"--bins must be >= 1, got {args.bins}")
    d = _load(args)
    bins = homophily_histogram(d, args.bins)
    out = _out_dir(args.out)
    rows = [[repr(b.low), repr(b.high), b.count] for b in bins]
    try:
        _write_csv(out / "histogram.csv", HISTOGRAM_HEADER, rows)
        write_svg(bar_chart([(b.low, b.high, b.count) for b in bins],
                            title=f"{d.name} node homophily"), out / "histogram.svg")
    except OSError as exc:
        raise DatasetLoadError(f"cannot write to {out}: {exc}") from exc
    _emit_csv(HISTOGRAM_HEADER, rows, sys.stdout)
    return EXIT_OK


def cmd_train(args):
    started = _now()
    d = _load(args)
    config = _config(args)
    out = _out_dir(args.out)
    plan = make_folds(d, seed=config.seed, stratified=args.stratified)
    result = cross_validate(d, config, plan, n_jobs=args.jobs)
    rows = [summary_row(d.name, result)]
    write_cv_results(result, out / "cv_results.csv")
    write_summary(rows, out / "summary.csv")
    _manifest(out, args, config, d, started, wall_time=repr(result.wall_time))
    print(format_table(rows))
    return EXIT_OK


def cmd_ablate(args):
    started = _now()
    d = _load(args)
    config = _config(args, variant="full")
    out = _out_dir(args.out)
    start = time.perf_counter()
    results = ablation_suite(d, config, variants=args.variant, n_jobs=args.jobs)
    rows = []
    for variant, res in results.items():
        write_cv_results(res, out / f"cv_results_{variant}.csv")
        rows.append(summary_row(d.name, res))
    write_summary(rows, out / "summary.csv")
    # one row per dataset, one mean/std column pair per variant
    header = ["dataset"] + [f"{v}_{stat}" for v in results for stat in ("mean", "std")]
    wide = [d.name] + [repr(getattr(r, a)) for r in results.values()
                       for a in ("mean_accuracy", "std_accuracy")]
    _write_csv(out / "ablation.csv", header, [wide])
    _manifest(out, args, config, d, started, variants=",".join(args.variant),
              wall_time=repr(time.perf_counter() - start))
    print(format_table(rows))
    return EXIT_OK


def cmd_sweep(args):
    started = _now()
    try:
        values = [int(v) for v in args.layer_values.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--layer-values must be comma-separated integers, got {args.layer_values!r}")
    if not values or min(values) < 1:
        raise ConfigurationError(f"--layer-values must be non-empty and >= 1, got {values}")
    d = _load(args)
    config = _config(args)
    out = _out_dir(args.out)
    start = time.perf_counter()
    results = layer_sweep(d, config, values, n_jobs=args.jobs)
    rows = []
    for k, res in results.items():
        write_cv_results(res, out / f"cv_results_K{k}.csv")
        rows.append(summary_row(d.name, res))
    write_summary(rows, out / "summary.csv")
    _write_csv(out / "sweep.csv", SWEEP_HEADER,
               [[k, repr(r.mean_accuracy), repr(r.std_accuracy), r.selected_epoch + 1]
                for k, r in results.items()])
    write_svg(line_chart(list(results), [r.mean_accuracy for r in results.values()],
                         [r.std_accuracy for r in results.values()],
                         title=f"{d.name} accuracy by layer count"), out / "sweep.svg")
    _manifest(out, args, config, d, started, layer_values=args.layer_values,
              wall_time=repr(time.perf_counter() - start))
    print(format_table(rows))
    return EXIT_OK


def cmd_wl_test(args):
    if args.max_rounds < 0:
        raise InputError(f"--max-rounds must be >= 0, got {args.max_rounds}")
    d = _load(args)
    i, j = args.graphs
    for k in (i, j):
        if not 1 <= k <= len(d):
            raise InputError(f"graph index {k} outside 1..{len(d)}")
    result = wl_test(d.graphs[i - 1], d.graphs[j - 1], args.max_rounds)
    rows = []
    for r, (ms1, ms2) in enumerate(result.history):
        rows.append([r, i, " ".join(str(c) for c in ms1)])
        rows.append([r, j, " ".join(str(c) for c in ms2)])
    print(result)
    _emit_csv(WL_HEADER, rows, sys.stdout)
    if args.out:
        _write_csv(args.out, WL_HEADER, rows)
    return EXIT_OK


def cmd_gradcheck(args):
    if args.nodes < 1 or args.graphs < 1:
        raise InputError("--nodes and --graphs must be >= 1")
    rng = np.random.default_rng(args.seed)
    graphs = [random_graph(rng, args.nodes) for _ in range(args.graphs)]
    encoder = NodeLabelEncoder(alphabet=[1, 2, 3]).fit(graphs)
    config = IHGNNConfig(num_layers=args.layers, variant=args.variant, pad_size=args.nodes,
                         seed=args.seed)
    model = IHGNNModel.init(config, encoder.n_features_out_, rng)
    batch = GraphBatch.from_graphs(graphs, encoder.transform(graphs))
    labels = rng.integers(0, config.num_classes, size=len(graphs))
    res = check_model_gradients(model, batch, labels, num_samples=args.samples, rng=rng)
    print(f"max_rel_error={res.max_rel_error!r} checked={res.num_checked} worst={res.worst}")
    if not res.max_rel_error <= args.tol:
        raise NumericCheckError(f"max relative error {res.max_rel_error:.3e} exceeds {args.tol:g}")
    return EXIT_OK


COMMANDS = {
    "stats": cmd_stats,
    "homophily": cmd_homophily,
    "train": cmd_train,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "wl-test": cmd_wl_test,
    "gradcheck": cmd_gradcheck,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, InputError) as exc:
        print(f"ihgnn {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetLoadError, DatasetFormatError, OSError) as exc:
        print(f"ihgnn {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericCheckError as exc:
        print(f"ihgnn {args.command}: numeric check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
