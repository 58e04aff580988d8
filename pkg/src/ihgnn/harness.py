"""Ten-fold cross-validation, ablation grid and layer-count sweeps.

Epoch selection follows the GIN protocol: every fold records its test
accuracy after each epoch and the reported epoch is the one with the best
accuracy averaged over the folds. This choice looks at test folds and is
therefore optimistic; it is kept because the published numbers use it.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import KFold, StratifiedKFold

from .estimator import IHGNNClassifier
from .exceptions import InputError
from .graph import Dataset
from .model import VARIANTS, IHGNNConfig

NUM_FOLDS = 10


@dataclass(frozen=True)
class FoldPlan:
    """``folds[i]`` is the test fold (0..9) of graph ``i``."""

    folds: np.ndarray
    seed: int
    stratified: bool

    @property
    def num_folds(self):
        return int(self.folds.max()) + 1

    def split(self, fold):
        if not 0 <= fold < self.num_folds:
            raise InputError(f"fold {fold} out of range 0..{self.num_folds - 1}")
        test = np.nonzero(self.folds == fold)[0]
        train = np.nonzero(self.folds != fold)[0]
        return train, test


@dataclass
class CVResult:
    """Per-epoch, per-fold test accuracies and the selected summary.

    ``accuracy[e, f]`` is the accuracy on fold ``f`` after epoch ``e``
    (0-based).
    """

    accuracy: np.ndarray
    selected_epoch: int
    mean_accuracy: float
    std_accuracy: float
    wall_time: float
    config: IHGNNConfig = None
    fold_gradient_leaks: list = field(default_factory=list)

    @classmethod
    def from_grid(cls, accuracy, wall_time=0.0, config=None, leaks=None):
        accuracy = np.asarray(accuracy, dtype=float)
        if accuracy.ndim != 2 or accuracy.shape[0] == 0:
            raise InputError(f"accuracy grid must be (epochs, folds), got {accuracy.shape}")
        means = accuracy.mean(axis=1)
        best = int(np.argmax(means))
        return cls(accuracy, best, float(means[best]), float(accuracy[best].std()),
                   wall_time, config, list(leaks or []))


def make_folds(d: Dataset, seed=0, stratified=True, num_folds=NUM_FOLDS) -> FoldPlan:
    """Seeded assignment of graphs to ``num_folds`` folds."""
    n = len(d)
    if n < num_folds:
        raise InputError(f"{n} graphs cannot be split into {num_folds} folds")
    y = d.y
    counts = np.bincount(y) if y.size else np.zeros(0)
    folds = np.empty(n, dtype=np.int64)
    if stratified and counts[counts > 0].min() >= num_folds:
        splitter = StratifiedKFold(num_folds, shuffle=True, random_state=seed)
    else:
        splitter = KFold(num_folds, shuffle=True, random_state=seed)
    for f, (_, test) in enumerate(splitter.split(np.zeros(n), y)):
        folds[test] = f
    return FoldPlan(folds, seed, stratified)


def _estimator(d: Dataset, config: IHGNNConfig, **overrides):
    pad = config.pad_size or d.max_nodes
    source = "label" if d.has_node_labels else "degree"
    if d.has_node_labels:
        alphabet = d.label_alphabet
    else:
        alphabet = sorted({int(x) for g in d.graphs for x in g.degrees})
    return IHGNNClassifier.from_config(
        config.replace(pad_size=pad), label_alphabet=alphabet, feature_source=source, **overrides
    )


def _fit_fold(d, plan, fold, config, overrides):
    train, test = plan.split(fold)
    est = _estimator(d, config, **overrides)
    est.fit(
        [d.graphs[i] for i in train], d.y[train],
        eval_set=([d.graphs[i] for i in test], d.y[test]),
    )
    touched = set(train[est.gradient_counts_ > 0].tolist())
    leaks = sorted(touched.intersection(test.tolist()))
    return np.asarray(est.eval_curve_), leaks


def train_fold(d: Dataset, plan: FoldPlan, fold: int, config: IHGNNConfig, **overrides):
    """Train on the other folds; return test accuracy after every epoch."""
    curve, _ = _fit_fold(d, plan, fold, config, overrides)
    return curve


def cross_validate(d: Dataset, config: IHGNNConfig, plan: FoldPlan = None, n_jobs=1,
                   **overrides) -> CVResult:
    """Run every fold and select the epoch with the best mean accuracy.

    ``overrides`` are passed on to :class:`IHGNNClassifier`
    (e.g. ``weight_init="zeros"``).
    """
    plan = plan or make_folds(d, seed=config.seed)
    start = time.perf_counter()
    jobs = (delayed(_fit_fold)(d, plan, f, config, overrides) for f in range(plan.num_folds))
    results = Parallel(n_jobs=n_jobs)(jobs)
    wall = time.perf_counter() - start
    grid = np.column_stack([curve for curve, _ in results])
    leaks = [leak for _, leak in results]
    return CVResult.from_grid(grid, wall, config, leaks)


def ablation_suite(d: Dataset, base_config: IHGNNConfig, variants=VARIANTS, n_jobs=1,
                   **overrides) -> dict:
    """Cross-validate each variant on shared folds and seeds."""
    plan = make_folds(d, seed=base_config.seed)
    return {
        v: cross_validate(d, base_config.replace(variant=v), plan, n_jobs, **overrides)
        for v in variants
    }


def layer_sweep(d: Dataset, config: IHGNNConfig, layer_values, n_jobs=1, **overrides) -> dict:
    """Cross-validate once per layer count ``K``; returns ``{K: CVResult}``."""
    layer_values = list(layer_values)
    if not layer_values:
        raise InputError("layer_values is empty")
    plan = make_folds(d, seed=config.seed)
    return {
        k: cross_validate(d, config.replace(num_layers=int(k)), plan, n_jobs, **overrides)
        for k in layer_values
    }


# CSV writers. Headers are part of the output contract.

CV_RESULTS_HEADER = ["epoch"] + [f"fold_{f}" for f in range(NUM_FOLDS)] + ["mean"]
SUMMARY_HEADER = ["dataset", "variant", "num_layers", "batch_size", "mean", "std",
                  "selected_epoch", "seed"]


def write_cv_results(result: CVResult, path):
    """Epoch x fold accuracy grid; epochs are 1-based in the file."""
    folds = result.accuracy.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch"] + [f"fold_{f}" for f in range(folds)] + ["mean"])
        for e, row in enumerate(result.accuracy):
            w.writerow([e + 1] + [repr(float(x)) for x in row] + [repr(float(row.mean()))])


def summary_row(dataset_name, result: CVResult):
    cfg = result.config
    return [dataset_name, cfg.variant, cfg.num_layers, cfg.batch_size,
            repr(result.mean_accuracy), repr(result.std_accuracy),
            result.selected_epoch + 1, cfg.seed]


def write_summary(rows, path):
    """Summary rows (see :data:`SUMMARY_HEADER`); wall time is kept out for byte-stable output."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        w.writerows(rows)


def format_table(rows):
    """Pretty table with accuracies as percentages rounded to one decimal."""
    out = [f"{'dataset':<12} {'variant':<16} {'K':>2} {'batch':>5}  {'accuracy':>12}  epoch"]
    for name, variant, k, b, mean, std, epoch, _seed in rows:
        acc = f"{100 * float(mean):.1f}±{100 * float(std):.1f}"
        out.append(f"{name:<12} {variant:<16} {k:>2} {b:>5}  {acc:>12}  {epoch}")
    return "\n".join(out)


def write_manifest(path, command, config: IHGNNConfig, dataset_name, extra=None):
    """Record everything needed to rerun: command, resolved config, seed, versions."""
    from . import __version__

    lines = [f"command={command}", f"dataset={dataset_name}", f"seed={config.seed}",
             f"tool_version={__version__}", f"numpy_version={np.__version__}"]
    for k, v in (extra or {}).items():
        lines.append(f"{k}={v}")
    lines.append("[config]")
    lines.append(config.to_text().rstrip("\n"))
    Path(path).write_text("\n".join(lines) + "\n")
