"""Acceptance criteria, one test per criterion.

Benchmark datasets are looked up under ``$IHGNN_DATA_DIR`` and then under
``tests/data``. A criterion that needs a dataset which is not present
fails with a message naming it; it is not skipped.
"""

import time
from collections import Counter

import numpy as np

from ihgnn.cli import main
from ihgnn.fixtures import random_graph, wl_pair
from ihgnn.graph import dataset_homophily, dataset_stats
from ihgnn.harness import ablation_suite, cross_validate, layer_sweep
from ihgnn.model import (
    GraphBatch,
    IHGNNConfig,
    IHGNNModel,
    check_model_gradients,
    graph_embedding,
    predict_logits,
)
from ihgnn.preprocessing import NodeLabelEncoder
from ihgnn.tud import load_dataset
from ihgnn.wl import Verdict, wl_refine, wl_test

from .conftest import data_roots, find_dataset

# published reference values: (mean, std) of the homophily ratio
BETA = {
    "MUTAG": (0.62, 0.14),
    "KKI": (0.0, 0.0),
    "PROTEINS": (0.83, 0.12),
    "DD": (0.06, 0.02),
    "DHFR": (0.57, 0.12),
}
BETA_TOL = 0.01

# size, classes, avg nodes, avg edges, node labels
STATS = {
    "MUTAG": (188, 2, 17.93, 19.79, 7),
    "PROTEINS": (1113, 2, 39.06, 72.82, 3),
    "DHFR": (467, 2, 42.43, 44.54, 9),
    "KKI": (83, 2, 26.96, 48.42, 190),
}
NCI1_SIZE_CLASSES = (4110, 2)

ALPHABET = [1, 2, 3]


def _load(name, problems):
    path = find_dataset(name)
    if path is None:
        roots = ", ".join(str(r) for r in data_roots())
        problems.append(f"{name}: dataset not found (searched {roots}; set IHGNN_DATA_DIR)")
        return None
    return load_dataset(path, name)


def _fail_if(problems):
    assert not problems, "\n".join(problems)


def _model(graphs, seed, **cfg):
    cfg.setdefault("pad_size", max(g.num_nodes for g in graphs))
    enc = NodeLabelEncoder(alphabet=ALPHABET).fit([])
    model = IHGNNModel.init(IHGNNConfig(**cfg), len(ALPHABET), np.random.default_rng(seed))
    return model, enc


def test_criterion_01_homophily_reproduction():
    problems = []
    start = time.perf_counter()
    for name, (mean, std) in BETA.items():
        d = _load(name, problems)
        if d is None:
            continue
        s = dataset_homophily(d, population="graph")
        if abs(s.mean - mean) > BETA_TOL or abs(s.std - std) > BETA_TOL:
            problems.append(f"{name}: beta {s.mean:.4f}±{s.std:.4f}, expected {mean}±{std} (±{BETA_TOL})")
    elapsed = time.perf_counter() - start
    if elapsed >= 60:
        problems.append(f"homophily took {elapsed:.1f}s, limit 60s")
    _fail_if(problems)


def test_criterion_02_dataset_statistics():
    problems = []
    for name, expected in STATS.items():
        d = _load(name, problems)
        if d is None:
            continue
        s = dataset_stats(d)
        got = (s.size, s.num_classes, round(s.avg_nodes, 2), round(s.avg_edges, 2), s.num_node_labels)
        if got != expected:
            problems.append(f"{name}: statistics {got}, expected {expected}")
    d = _load("NCI1", problems)
    if d is not None and (len(d), d.num_classes) != NCI1_SIZE_CLASSES:
        problems.append(f"NCI1: size/classes {(len(d), d.num_classes)}, expected {NCI1_SIZE_CLASSES}")
    _fail_if(problems)


def test_criterion_03_wl_golden_pair():
    g1, g2 = wl_pair()
    result = wl_test(g1, g2, max_rounds=10)
    assert result.verdict is Verdict.NON_ISOMORPHIC and result.round == 1
    c = wl_refine([g1, g2], 1)
    ms1, ms2 = Counter(c.colors[0]), Counter(c.colors[1])
    duplicated = [col for col, k in ms1.items() if k > 1]
    assert duplicated == [7] and ms1[7] == 2
    assert set(ms1) & set(ms2) == {12}


def test_criterion_04_gradient_correctness():
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for K in (3, 5):
        for seed in range(10):
            rng = np.random.default_rng(1000 * K + seed)
            g = random_graph(rng, rng.integers(4, 9))
            model, enc = _model([g], seed, num_layers=K)
            batch = GraphBatch.from_graphs([g], enc.transform([g]))
            res = check_model_gradients(model, batch, [seed % 2], num_samples=20, rng=rng, step=1e-5)
            worst = max(worst, res.max_rel_error)
            count += 1
    elapsed = time.perf_counter() - start
    assert count >= 10
    assert worst <= 1e-4, f"max relative error {worst:.3e}"
    assert elapsed < 120, f"gradient checks took {elapsed:.1f}s"


def test_criterion_05_permutation_invariance():
    rng = np.random.default_rng(2024)
    for trial in range(100):
        g = random_graph(rng, rng.integers(2, 13))
        h = g.permute(rng.permutation(g.num_nodes))
        seed = int(rng.integers(2**31))
        for deterministic in (False, True):
            model, enc = _model([g], seed, deterministic=deterministic)
            a = predict_logits(model, g, enc.transform([g])[0])
            b = predict_logits(model, h, enc.transform([h])[0])
            if deterministic:
                assert np.array_equal(a, b), f"trial {trial}: {a} vs {b}"
            else:
                assert np.allclose(a, b, rtol=1e-6, atol=0), f"trial {trial}: {a} vs {b}"


def test_criterion_06_expressiveness_smoke():
    g1, g2 = wl_pair()
    enc = NodeLabelEncoder(alphabet=[1, 2, 3, 4]).fit([])
    for seed in range(20):
        model = IHGNNModel.init(IHGNNConfig(pad_size=6), 4, np.random.default_rng(seed))
        e1 = graph_embedding(model, g1, enc.transform([g1])[0]).vector
        e2 = graph_embedding(model, g2, enc.transform([g2])[0]).vector
        assert np.abs(e1 - e2).max() > 1e-6, f"seed {seed}"


def test_criterion_07_accuracy_mutag_dhfr():
    problems = []
    for name, floor in (("MUTAG", 0.85), ("DHFR", 0.80)):
        d = _load(name, problems)
        if d is None:
            continue
        cpu = time.process_time()
        res = cross_validate(d, IHGNNConfig(seed=0))
        minutes = (time.process_time() - cpu) / 60
        print(f"{name}: {100 * res.mean_accuracy:.1f}±{100 * res.std_accuracy:.1f} "
              f"at epoch {res.selected_epoch + 1}, {minutes:.1f} CPU-min")
        if res.mean_accuracy < floor:
            problems.append(f"{name}: mean accuracy {res.mean_accuracy:.4f} < {floor}")
        if minutes > 30:
            problems.append(f"{name}: {minutes:.1f} CPU-minutes > 30")
    _fail_if(problems)


def test_criterion_08_ablation_direction_proteins():
    problems = []
    d = _load("PROTEINS", problems)
    if d is not None:
        res = ablation_suite(d, IHGNNConfig(seed=0), variants=("full", "sum_readout"))
        gap = res["full"].mean_accuracy - res["sum_readout"].mean_accuracy
        if gap < 0.05:
            problems.append(f"PROTEINS: full - sum_readout = {100 * gap:.1f} points < 5")
    _fail_if(problems)


def test_criterion_09_reproducible_summary(tmp_path):
    args = ["train", "--dataset-dir", str(find_dataset("MUTAG")), "--dataset", "MUTAG",
            "--layers", "5", "--batch", "32", "--epochs", "3", "--seed", "1"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "summary.csv").read_bytes()
    b = (tmp_path / "b" / "summary.csv").read_bytes()
    assert a == b
    assert len(a.decode().splitlines()) == 2


def test_criterion_10_layer_sensitivity_ptc_fr():
    problems = []
    d = _load("PTC_FR", problems)
    if d is not None:
        res = layer_sweep(d, IHGNNConfig(seed=0), [2, 3, 4, 5])
        means = [r.mean_accuracy for r in res.values()]
        spread = max(means) - min(means)
        if spread > 0.08:
            problems.append(f"PTC_FR: accuracy spread {100 * spread:.1f} points > 8")
    _fail_if(problems)
