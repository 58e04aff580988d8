"""Labeled graphs, datasets, homophily ratios and dataset statistics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InputError

logger = logging.getLogger(__name__)

POPULATIONS = ("graph", "node")


@dataclass(frozen=True)
class Graph:
    """Undirected graph with integer node labels.

    Edges are stored once per unordered pair as ``(i, j)`` with ``i < j``,
    sorted. Self-loops are rejected: the adjacency matrix has a zero
    diagonal.

    Parameters
    ----------
    num_nodes : int
        Number of nodes, indexed ``0 .. num_nodes - 1``.
    edges : iterable of (int, int)
        Unordered node pairs. Either orientation is accepted and duplicates
        collapse.
    node_labels : sequence of int, optional
        One label per node. Defaults to all zeros.
    """

    num_nodes: int
    edges: tuple = ()
    node_labels: tuple = None
    dropped_self_loops: int = field(default=0, compare=False)

    def __post_init__(self):
        n = int(self.num_nodes)
        if n < 0:
            raise InputError(f"num_nodes must be >= 0, got {n}")
        pairs = set()
        for e in self.edges:
            i, j = (int(x) for x in e)
            if not (0 <= i < n and 0 <= j < n):
                raise InputError(f"edge ({i}, {j}) out of range for {n} nodes")
            if i == j:
                raise InputError(f"self-loop on node {i}")
            pairs.add((i, j) if i < j else (j, i))
        labels = (0,) * n if self.node_labels is None else tuple(int(x) for x in self.node_labels)
        if len(labels) != n:
            raise InputError(f"expected {n} node labels, got {len(labels)}")
        object.__setattr__(self, "num_nodes", n)
        object.__setattr__(self, "edges", tuple(sorted(pairs)))
        object.__setattr__(self, "node_labels", labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(num_edges, 2)`` integer array of the canonical edge list."""
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr.reshape(-1, 2)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.asarray(self.node_labels, dtype=np.int64)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix."""
        A = np.zeros((self.num_nodes, self.num_nodes))
        e = self.edge_array
        A[e[:, 0], e[:, 1]] = 1.0
        A[e[:, 1], e[:, 0]] = 1.0
        return A

    @cached_property
    def neighbors(self) -> tuple:
        nbrs = [[] for _ in range(self.num_nodes)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def degrees(self) -> np.ndarray:
        e = self.edge_array
        return np.bincount(e.ravel(), minlength=self.num_nodes).astype(np.int64)

    def permute(self, perm: Sequence[int]) -> "Graph":
        """Return the isomorphic copy in which old node ``v`` becomes ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.num_nodes)):
            raise InputError("perm is not a permutation of the node indices")
        labels = np.empty(self.num_nodes, dtype=np.int64)
        labels[perm] = self.labels
        edges = [(int(perm[i]), int(perm[j])) for i, j in self.edges]
        return Graph(self.num_nodes, edges, labels.tolist())

    def relabel(self, mapping) -> "Graph":
        """Return a copy with node labels passed through ``mapping``."""
        return Graph(self.num_nodes, self.edges, [mapping[x] for x in self.node_labels])


@dataclass(frozen=True)
class Dataset:
    """Named collection of labeled graphs for graph classification.

    ``graph_labels`` hold contiguous class indices in ``[0, num_classes)``;
    ``class_values`` keeps the raw class identifiers in index order.
    ``label_alphabet`` lists the distinct raw node labels in ascending
    order, or is ``None`` when the dataset ships no node labels.
    """

    name: str
    graphs: tuple
    graph_labels: tuple
    class_values: tuple = None
    label_alphabet: tuple = None

    def __post_init__(self):
        graphs = tuple(self.graphs)
        y = tuple(int(c) for c in self.graph_labels)
        if len(graphs) != len(y):
            raise InputError(f"{len(graphs)} graphs but {len(y)} graph labels")
        classes = self.class_values
        if classes is None:
            classes = tuple(range(max(y) + 1)) if y else ()
        classes = tuple(classes)
        if any(not 0 <= c < len(classes) for c in y):
            raise InputError("graph labels must lie in [0, num_classes)")
        alphabet = self.label_alphabet
        if alphabet is not None:
            alphabet = tuple(int(a) for a in alphabet)
            allowed = set(alphabet)
            for k, g in enumerate(graphs):
                if not allowed.issuperset(g.node_labels):
                    raise InputError(f"graph {k} has node labels outside the alphabet")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "graph_labels", y)
        object.__setattr__(self, "class_values", classes)
        object.__setattr__(self, "label_alphabet", alphabet)

    @classmethod
    def from_graphs(cls, name, graphs, graph_labels, has_node_labels=True):
        """Build a dataset, inferring the class map and label alphabet."""
        graphs = tuple(graphs)
        raw = list(graph_labels)
        classes = tuple(sorted(set(raw)))
        index = {c: k for k, c in enumerate(classes)}
        alphabet = None
        if has_node_labels:
            alphabet = tuple(sorted({x for g in graphs for x in g.node_labels}))
        return cls(name, graphs, tuple(index[c] for c in raw), classes, alphabet)

    def __len__(self):
        return len(self.graphs)

    @property
    def num_classes(self) -> int:
        return len(self.class_values)

    @property
    def max_nodes(self) -> int:
        return max((g.num_nodes for g in self.graphs), default=0)

    @property
    def has_node_labels(self) -> bool:
        return self.label_alphabet is not None

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.graph_labels, dtype=np.int64)

    def subset(self, indices: Iterable[int], name=None) -> "Dataset":
        idx = list(indices)
        return Dataset(
            name or self.name,
            tuple(self.graphs[i] for i in idx),
            tuple(self.graph_labels[i] for i in idx),
            self.class_values,
            self.label_alphabet,
        )


@dataclass(frozen=True)
class HomophilyStats:
    """Homophily ratios of a dataset and their summary over one population.

    ``population`` is ``"node"`` (all nodes pooled) or ``"graph"`` (one
    ratio per graph). ``std`` is the population standard deviation.
    """

    per_node_alphas: np.ndarray
    per_graph_betas: np.ndarray
    mean: float
    std: float
    population: str


@dataclass(frozen=True)
class DatasetStats:
    name: str
    size: int
    num_classes: int
    avg_nodes: float
    avg_edges: float
    num_node_labels: int


@dataclass(frozen=True)
class HistogramBin:
    low: float
    high: float
    count: int


def _check_node(g: Graph, v) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        raise InputError(f"node index must be an integer, got {v!r}")
    if not 0 <= v < g.num_nodes:
        raise InputError(f"node index {v} out of range for {g.num_nodes} nodes")
    return int(v)


def node_homophily(g: Graph, v: int) -> float:
    """Fraction of the neighbors of ``v`` that carry the label of ``v``.

    Isolated nodes have no neighbors; they get 0.0 and a warning.
    """
    v = _check_node(g, v)
    nbrs = g.neighbors[v]
    if not nbrs:
        logger.warning("node %d is isolated; homophily ratio set to 0", v)
        return 0.0
    own = g.node_labels[v]
    return sum(g.node_labels[u] == own for u in nbrs) / len(nbrs)


def node_homophilies(g: Graph) -> np.ndarray:
    """Vectorized :func:`node_homophily` over every node of ``g``."""
    n = g.num_nodes
    e = g.edge_array
    lab = g.labels
    same = (lab[e[:, 0]] == lab[e[:, 1]]).astype(np.int64)
    same_count = np.bincount(e[:, 0], weights=same, minlength=n) + np.bincount(
        e[:, 1], weights=same, minlength=n
    )
    deg = g.degrees
    isolated = deg == 0
    if isolated.any():
        logger.warning(
            "%d isolated node(s); their homophily ratio is set to 0", int(isolated.sum())
        )
    return np.divide(same_count, deg, out=np.zeros(n), where=~isolated)


def graph_homophily(g: Graph) -> float:
    """Mean node homophily ratio of ``g``."""
    if g.num_nodes == 0:
        raise InputError("homophily of an empty graph is undefined")
    return float(node_homophilies(g).mean())


def dataset_homophily(d: Dataset, population: str = "graph") -> HomophilyStats:
    """Mean and standard deviation of homophily over ``d``.

    ``population="graph"`` summarizes the per-graph ratios, while
    ``population="node"`` pools every node of every graph.
    """
    if population not in POPULATIONS:
        raise InputError(f"population must be one of {POPULATIONS}, got {population!r}")
    if len(d) == 0:
        raise InputError("dataset is empty")
    per_graph_alphas = [node_homophilies(g) for g in d.graphs]
    betas = np.array([a.mean() if a.size else np.nan for a in per_graph_alphas])
    alphas = np.concatenate(per_graph_alphas) if per_graph_alphas else np.zeros(0)
    values = betas[~np.isnan(betas)] if population == "graph" else alphas
    return HomophilyStats(
        per_node_alphas=alphas,
        per_graph_betas=betas,
        mean=float(values.mean()),
        std=float(values.std()),
        population=population,
    )


def homophily_histogram(d, num_bins: int) -> list:
    """Histogram of node homophily ratios over ``[0, 1]``.

    Bins are left-closed and right-open except the last, which is closed so
    that a ratio of exactly 1.0 is counted. ``d`` may be a :class:`Dataset`,
    a :class:`Graph`, or an array of precomputed ratios.
    """
    if isinstance(num_bins, bool) or int(num_bins) != num_bins or num_bins < 1:
        raise InputError(f"num_bins must be a positive integer, got {num_bins!r}")
    if isinstance(d, Dataset):
        alphas = np.concatenate([node_homophilies(g) for g in d.graphs] or [np.zeros(0)])
    elif isinstance(d, Graph):
        alphas = node_homophilies(d)
    else:
        alphas = np.asarray(d, dtype=float)
    counts, edges = np.histogram(alphas, bins=int(num_bins), range=(0.0, 1.0))
    return [
        HistogramBin(float(edges[k]), float(edges[k + 1]), int(counts[k]))
        for k in range(int(num_bins))
    ]


def dataset_stats(d: Dataset) -> DatasetStats:
    if len(d) == 0:
        raise InputError("dataset is empty")
    nodes = np.array([g.num_nodes for g in d.graphs], dtype=float)
    edges = np.array([g.num_edges for g in d.graphs], dtype=float)
    if d.has_node_labels:
        num_labels = len(d.label_alphabet)
    else:
        num_labels = 0
    return DatasetStats(
        name=d.name,
        size=len(d),
        num_classes=d.num_classes,
        avg_nodes=float(nodes.mean()),
        avg_edges=float(edges.mean()),
        num_node_labels=num_labels,
    )
