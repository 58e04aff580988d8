"""Small built-in graphs and random graph generators used by the CLI and tests."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .graph import Dataset, Graph

#: Name of the bundled two-graph dataset used by ``wl-test``.
WL_PAIR_NAME = "FIG2"


def wl_pair():
    """The labeled six-node pair that one round of 1-WL tells apart.

    Nodes are numbered left to right, top to bottom. After one joint
    refinement round the first graph is colored ``7,7,12,11,13,9`` and the
    second ``6,5,10,8,14,12``.
    """
    g1 = Graph(6, [(3, 5), (4, 0), (1, 4), (2, 3), (4, 2), (5, 2)], [1, 1, 3, 3, 4, 2])
    g2 = Graph(6, [(5, 3), (4, 0), (1, 0), (4, 5), (0, 2), (5, 2)], [1, 1, 3, 2, 4, 3])
    return g1, g2


def wl_pair_dataset() -> Dataset:
    g1, g2 = wl_pair()
    return Dataset.from_graphs(WL_PAIR_NAME, (g1, g2), [0, 1])


def bundled_data_dir() -> Path:
    """Directory holding the datasets shipped inside the package."""
    return Path(resources.files("ihgnn")) / "data"


def triangle(labels=(1, 1, 2)) -> Graph:
    return Graph(3, [(0, 1), (1, 2), (0, 2)], list(labels))


def random_graph(rng, num_nodes, num_labels=3, edge_prob=0.4, connected=True) -> Graph:
    """Erdos-Renyi graph with uniform random labels in ``1..num_labels``.

    With ``connected=True`` a random spanning path is added first so that
    no node is isolated.
    """
    n = int(num_nodes)
    edges = set()
    if connected and n > 1:
        path = rng.permutation(n)
        edges.update((int(min(a, b)), int(max(a, b))) for a, b in zip(path[:-1], path[1:]))
    iu, ju = np.triu_indices(n, k=1)
    pick = rng.random(iu.size) < edge_prob
    edges.update(zip(iu[pick].tolist(), ju[pick].tolist()))
    labels = rng.integers(1, num_labels + 1, size=n).tolist()
    return Graph(n, sorted(edges), labels)


def random_dataset(rng, num_graphs, min_nodes=4, max_nodes=8, num_labels=3, num_classes=2,
                   name="RANDOM") -> Dataset:
    graphs = tuple(
        random_graph(rng, rng.integers(min_nodes, max_nodes + 1), num_labels)
        for _ in range(num_graphs)
    )
    labels = (np.arange(num_graphs) % num_classes).tolist()
    return Dataset.from_graphs(name, graphs, labels)
