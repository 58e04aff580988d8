import csv

import numpy as np
import pytest

from ihgnn.exceptions import InputError
from ihgnn.fixtures import random_graph
from ihgnn.graph import Dataset, Graph
from ihgnn.harness import (
    SUMMARY_HEADER,
    CVResult,
    ablation_suite,
    cross_validate,
    format_table,
    layer_sweep,
    make_folds,
    summary_row,
    train_fold,
    write_cv_results,
    write_manifest,
    write_summary,
)
from ihgnn.model import VARIANTS, IHGNNConfig

FAST = dict(embed_dim=8, classifier_hidden=16, batch_size=8)


def label_dataset(n0, n1, seed=0, name="SYN"):
    """Class 0 graphs are labeled 1 throughout, class 1 graphs 2 throughout."""
    rng = np.random.default_rng(seed)
    graphs, y = [], []
    for cls, count in ((0, n0), (1, n1)):
        for _ in range(count):
            g = random_graph(rng, rng.integers(2, 7))
            graphs.append(Graph(g.num_nodes, g.edges, [cls + 1] * g.num_nodes))
            y.append(cls)
    return Dataset.from_graphs(name, graphs, y)


# folds


def test_balanced_folds():
    d = label_dataset(50, 50)
    plan = make_folds(d, seed=0)
    for f in range(10):
        _, test = plan.split(f)
        assert np.bincount(d.y[test]).tolist() == [5, 5]


def test_folds_partition_and_seeded():
    d = label_dataset(23, 14)
    a, b = make_folds(d, seed=4), make_folds(d, seed=4)
    assert np.array_equal(a.folds, b.folds)
    assert not np.array_equal(a.folds, make_folds(d, seed=5).folds)
    seen = np.concatenate([a.split(f)[1] for f in range(10)])
    assert sorted(seen.tolist()) == list(range(len(d)))


def test_mutag_fold_sizes(mutag):
    plan = make_folds(mutag, seed=0)
    assert set(np.bincount(plan.folds).tolist()) <= {18, 19}


def test_stratified_class_sizes_differ_by_at_most_one(mutag):
    plan = make_folds(mutag, seed=1)
    for c in range(2):
        per_fold = np.bincount(plan.folds[mutag.y == c], minlength=10)
        assert per_fold.max() - per_fold.min() <= 1


def test_too_few_graphs():
    with pytest.raises(InputError):
        make_folds(label_dataset(4, 5), seed=0)


def test_invalid_fold_index():
    with pytest.raises(InputError):
        make_folds(label_dataset(10, 10), seed=0).split(10)


# epoch selection


def test_selected_epoch_argmax():
    grid = np.full((12, 10), 0.5)
    grid[7] = 0.9
    res = CVResult.from_grid(grid)
    assert res.selected_epoch == 7
    assert res.mean_accuracy == pytest.approx(0.9)


def test_identical_grid_zero_std():
    res = CVResult.from_grid(np.full((5, 10), 0.75))
    assert res.std_accuracy == 0.0


def test_selected_epoch_maximises_mean():
    grid = np.random.default_rng(0).random((40, 10))
    res = CVResult.from_grid(grid)
    assert res.mean_accuracy == grid.mean(axis=1).max()
    assert 0 <= res.selected_epoch < 40
    assert res.std_accuracy == grid[res.selected_epoch].std()


# training


def test_separable_reaches_perfect_accuracy():
    d = label_dataset(10, 10)
    plan = make_folds(d, seed=0)
    curve = train_fold(d, plan, 0, IHGNNConfig(num_layers=2, epochs=350, **FAST))
    assert curve.shape == (350,)
    assert curve.max() == 1.0


def test_degenerate_init_majority_share():
    d = label_dataset(30, 10)
    plan = make_folds(d, seed=0)
    cfg = IHGNNConfig(num_layers=2, epochs=3, learning_rate=0.0, **FAST)
    for fold in (0, 3):
        _, test = plan.split(fold)
        share = np.mean(d.y[test] == 0)
        curve = train_fold(d, plan, fold, cfg, weight_init="zeros")
        assert np.all(curve == share)


def test_same_seed_identical_curve():
    d = label_dataset(10, 10)
    plan = make_folds(d, seed=0)
    cfg = IHGNNConfig(num_layers=2, epochs=5, **FAST)
    assert np.array_equal(train_fold(d, plan, 2, cfg), train_fold(d, plan, 2, cfg))


def test_cross_validate_reproducible_and_isolated():
    d = label_dataset(12, 12)
    cfg = IHGNNConfig(num_layers=2, epochs=4, seed=3, **FAST)
    a = cross_validate(d, cfg)
    b = cross_validate(d, cfg)
    assert a.accuracy.shape == (4, 10)
    assert np.array_equal(a.accuracy, b.accuracy)
    assert a.selected_epoch == b.selected_epoch
    assert a.fold_gradient_leaks == [[]] * 10
    assert np.all((a.accuracy >= 0) & (a.accuracy <= 1))


def test_parallel_folds_match_serial():
    d = label_dataset(10, 10)
    cfg = IHGNNConfig(num_layers=2, epochs=2, **FAST)
    assert np.array_equal(cross_validate(d, cfg, n_jobs=2).accuracy,
                          cross_validate(d, cfg, n_jobs=1).accuracy)


def test_ablation_sum_readout_on_par_when_multiset_decides():
    d = label_dataset(20, 20)
    cfg = IHGNNConfig(num_layers=2, epochs=20, **FAST)
    res = ablation_suite(d, cfg, variants=("full", "sum_readout"))
    assert abs(res["full"].mean_accuracy - res["sum_readout"].mean_accuracy) <= 0.05


def test_ablation_runs_every_variant():
    d = label_dataset(10, 10)
    res = ablation_suite(d, IHGNNConfig(num_layers=2, epochs=1, **FAST))
    assert list(res) == list(VARIANTS)
    assert all(r.config.variant == v for v, r in res.items())


def test_layer_sweep_rows():
    d = label_dataset(10, 10)
    res = layer_sweep(d, IHGNNConfig(epochs=2, **FAST), range(2, 7))
    assert list(res) == [2, 3, 4, 5, 6]
    rows = [summary_row(d.name, r) for r in res.values()]
    assert [r[2] for r in rows] == [2, 3, 4, 5, 6]


def test_layer_sweep_single_layer_runs():
    d = label_dataset(10, 10)
    res = layer_sweep(d, IHGNNConfig(epochs=2, **FAST), [1])
    assert res[1].accuracy.shape == (2, 10)


def test_layer_sweep_empty():
    with pytest.raises(InputError):
        layer_sweep(label_dataset(10, 10), IHGNNConfig(), [])


# outputs


def test_csv_outputs(tmp_path):
    grid = np.tile(np.linspace(0.5, 0.9, 3)[:, None], (1, 10))
    res = CVResult.from_grid(grid, wall_time=1.5, config=IHGNNConfig(seed=9))
    write_cv_results(res, tmp_path / "cv.csv")
    rows = list(csv.reader(open(tmp_path / "cv.csv")))
    assert rows[0][0] == "epoch" and rows[0][-1] == "mean" and len(rows) == 4
    assert float(rows[3][1]) == 0.9
    write_summary([summary_row("X", res)], tmp_path / "summary.csv")
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0] == ",".join(SUMMARY_HEADER)
    assert lines[1] == "X,full,5,32,0.9,0.0,3,9"
    assert "90.0±0.0" in format_table([summary_row("X", res)])


def test_summary_byte_identical_across_runs(tmp_path):
    d = label_dataset(10, 10)
    cfg = IHGNNConfig(num_layers=2, epochs=3, seed=1, **FAST)
    for name in ("a.csv", "b.csv"):
        write_summary([summary_row(d.name, cross_validate(d, cfg))], tmp_path / name)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_manifest_reproduces_config(tmp_path):
    cfg = IHGNNConfig(num_layers=3, seed=11, pad_size=28)
    write_manifest(tmp_path / "m.txt", "ihgnn train", cfg, "MUTAG", {"stratified": True})
    text = (tmp_path / "m.txt").read_text()
    assert "seed=11" in text and "dataset=MUTAG" in text
    body = text.split("[config]\n", 1)[1]
    assert IHGNNConfig.from_text(body) == cfg
