"""Input validation helpers for graph collections and targets."""

from __future__ import annotations

import numpy as np

from .exceptions import InputError


def check_graphs(X, allow_empty_graphs=True):
    """Validate a collection of :class:`~ihgnn.graph.Graph` and return it as a list.

    A :class:`~ihgnn.graph.Dataset` is accepted and unpacked to its graphs.
    """
    from .graph import Dataset, Graph

    if isinstance(X, Dataset):
        X = X.graphs
    if isinstance(X, Graph):
        raise InputError("expected a collection of graphs, got a single Graph")
    try:
        graphs = list(X)
    except TypeError:
        raise InputError(f"expected an iterable of Graph, got {type(X).__name__}") from None
    for k, g in enumerate(graphs):
        if not isinstance(g, Graph):
            raise InputError(f"item {k} is {type(g).__name__}, not Graph")
        if not allow_empty_graphs and g.num_nodes == 0:
            raise InputError(f"graph {k} has no nodes")
    return graphs


def check_targets(y, n_samples):
    y = np.asarray(y)
    if y.ndim != 1:
        raise InputError(f"y must be 1-D, got shape {y.shape}")
    if y.shape[0] != n_samples:
        raise InputError(f"{n_samples} graphs but {y.shape[0]} targets")
    return y


def check_features(features, graphs, n_features):
    """Check per-graph feature matrices against their graphs."""
    if len(features) != len(graphs):
        raise InputError(f"{len(graphs)} graphs but {len(features)} feature matrices")
    out = []
    for k, (F, g) in enumerate(zip(features, graphs)):
        F = np.asarray(F, dtype=np.float64)
        if F.ndim != 2 or F.shape != (g.num_nodes, n_features):
            raise InputError(
                f"features of graph {k} have shape {F.shape}, "
                f"expected ({g.num_nodes}, {n_features})"
            )
        if not np.isfinite(F).all():
            raise InputError(f"features of graph {k} contain non-finite values")
        out.append(F)
    return out
