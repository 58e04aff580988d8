"""Full 10-fold runs on the larger benchmarks (hours on a single CPU).

Usage::

    python scripts/benchmark_runs.py --dataset-dir /path/to/tu --datasets DD NCI1 --out runs

For every dataset the layer count K in {3, 5} and batch size in {32, 128}
are cross-validated; each cell gets its own result directory and a shared
``grid.csv`` lists every cell. No cell is picked automatically.
"""

import argparse
import csv
from pathlib import Path

from ihgnn.harness import cross_validate, make_folds, summary_row, write_cv_results
from ihgnn.model import IHGNNConfig
from ihgnn.tud import load_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dataset-dir", required=True)
    p.add_argument("--datasets", nargs="+", default=["DD", "NCI1"])
    p.add_argument("--layers", type=int, nargs="+", default=[3, 5])
    p.add_argument("--batches", type=int, nargs="+", default=[32, 128])
    p.add_argument("--epochs", type=int, default=350)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="runs")
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in args.datasets:
        d = load_dataset(args.dataset_dir, name)
        plan = make_folds(d, seed=args.seed)
        for k in args.layers:
            for b in args.batches:
                cfg = IHGNNConfig(num_layers=k, batch_size=b, epochs=args.epochs, seed=args.seed)
                res = cross_validate(d, cfg, plan, n_jobs=args.jobs)
                write_cv_results(res, out / f"{name}_K{k}_B{b}_cv_results.csv")
                rows.append(summary_row(name, res) + [repr(res.wall_time)])
                print(f"{name} K={k} batch={b}: {100 * res.mean_accuracy:.1f}"
                      f"±{100 * res.std_accuracy:.1f} ({res.wall_time:.0f}s)", flush=True)
    with open(out / "grid.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "variant", "num_layers", "batch_size", "mean", "std",
                    "selected_epoch", "seed", "wall_time"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
