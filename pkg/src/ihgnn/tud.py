"""Reader and writer for the TUDataset text layout.

A dataset ``DS`` consists of comma-separated integer files::

    DS_A.txt                one "i, j" line per directed edge, 1-based global node ids
    DS_graph_indicator.txt  one graph id (1-based) per node
    DS_graph_labels.txt     one class label per graph
    DS_node_labels.txt      one node label per node (optional)

Edge label and attribute files are ignored.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DatasetFormatError, DatasetLoadError
from .graph import Dataset, Graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidationWarning:
    kind: str  # "isolated_node" | "self_loop" | "empty_graph"
    graph: int
    detail: str

    def __str__(self):
        return f"graph {self.graph}: {self.kind}: {self.detail}"


def _resolve(directory, name) -> Path:
    directory = Path(directory)
    nested = directory / name
    if (nested / f"{name}_A.txt").exists():
        return nested
    return directory


def _read_ints(path: Path, ncols: int) -> np.ndarray:
    """Parse the first ``ncols`` comma-separated integers of every non-blank line."""
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise DatasetLoadError(f"missing file {path}") from None
    except OSError as exc:
        raise DatasetLoadError(f"cannot read {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        parts = s.split(",")
        if len(parts) < ncols:
            raise DatasetFormatError(f"expected {ncols} values, got {len(parts)}", path, lineno)
        try:
            rows.append([int(p) for p in parts[:ncols]])
        except ValueError:
            raise DatasetFormatError(f"non-integer value in {s!r}", path, lineno) from None
    return np.asarray(rows, dtype=np.int64).reshape(-1, ncols)


def load_dataset(directory, name: str) -> Dataset:
    """Load TUDataset ``name`` from ``directory`` (or ``directory/name``).

    Edges are symmetrized and deduplicated, self-loop lines are dropped,
    graph labels are remapped to ``0 .. C-1`` in ascending raw order and the
    node-label alphabet is the ascending list of distinct raw labels.
    """
    root = _resolve(directory, name)
    if not root.is_dir():
        raise DatasetLoadError(f"dataset directory {root} does not exist")
    a_path = root / f"{name}_A.txt"
    ind_path = root / f"{name}_graph_indicator.txt"
    gl_path = root / f"{name}_graph_labels.txt"
    nl_path = root / f"{name}_node_labels.txt"

    indicator = _read_ints(ind_path, 1)[:, 0]
    raw_graph_labels = _read_ints(gl_path, 1)[:, 0]
    edges = _read_ints(a_path, 2)
    node_labels = None
    if nl_path.exists():
        node_labels = _read_ints(nl_path, 1)[:, 0]
        if node_labels.size != indicator.size:
            raise DatasetFormatError(
                f"{node_labels.size} node labels for {indicator.size} nodes", nl_path
            )

    n_nodes = indicator.size
    n_graphs = raw_graph_labels.size
    bad = np.nonzero((indicator < 1) | (indicator > n_graphs))[0]
    if bad.size:
        raise DatasetFormatError(
            f"graph id {indicator[bad[0]]} outside 1..{n_graphs}", ind_path, int(bad[0]) + 1
        )
    bad = np.nonzero((edges < 1) | (edges > n_nodes))[0]
    if bad.size:
        row = int(bad[0])
        raise DatasetFormatError(
            f"node id out of range 1..{n_nodes} in edge {tuple(edges[row])}", a_path, row + 1
        )

    gid = indicator - 1
    order = np.argsort(gid, kind="stable")
    sizes = np.bincount(gid, minlength=n_graphs)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    local = np.empty(n_nodes, dtype=np.int64)
    local[order] = np.arange(n_nodes) - np.repeat(starts, sizes)

    e = edges - 1
    eg = gid[e[:, 0]]
    crossing = np.nonzero(eg != gid[e[:, 1]])[0]
    if crossing.size:
        row = int(crossing[0])
        raise DatasetFormatError(
            f"edge {tuple(edges[row])} joins nodes of different graphs", a_path, row + 1
        )

    loops = e[:, 0] == e[:, 1]
    loops_per_graph = np.bincount(eg[loops], minlength=n_graphs)
    if loops.any():
        logger.warning("%s: dropped %d self-loop line(s)", name, int(loops.sum()))
    directed = {(int(i), int(j)) for i, j in e[~loops]}
    asymmetric = sum((j, i) not in directed for i, j in directed)
    if asymmetric:
        logger.warning("%s: %d edge(s) listed in one direction only; symmetrized", name, asymmetric)

    per_graph_edges = defaultdict(list)
    keep = e[~loops]
    for (i, j), g in zip(keep.tolist(), eg[~loops].tolist()):
        per_graph_edges[g].append((int(local[i]), int(local[j])))

    labels_by_graph = [[] for _ in range(n_graphs)]
    src = node_labels if node_labels is not None else np.zeros(n_nodes, dtype=np.int64)
    for v in order.tolist():
        labels_by_graph[gid[v]].append(int(src[v]))

    graphs = tuple(
        Graph(int(sizes[k]), per_graph_edges.get(k, ()), labels_by_graph[k],
              dropped_self_loops=int(loops_per_graph[k]))
        for k in range(n_graphs)
    )
    return Dataset.from_graphs(
        name, graphs, raw_graph_labels.tolist(), has_node_labels=node_labels is not None
    )


def validate(d: Dataset) -> list:
    """Structural warnings for ``d``: isolated nodes, dropped self-loops, empty graphs."""
    out = []
    for k, g in enumerate(d.graphs):
        if g.num_nodes == 0:
            out.append(ValidationWarning("empty_graph", k, "graph has no nodes"))
            continue
        if g.dropped_self_loops:
            out.append(ValidationWarning(
                "self_loop", k, f"{g.dropped_self_loops} self-loop line(s) dropped"))
        for v in np.nonzero(g.degrees == 0)[0].tolist():
            out.append(ValidationWarning("isolated_node", k, f"node {v} has no neighbors"))
    return out


def write_fixture(d: Dataset, directory) -> Path:
    """Write ``d`` in TUDataset layout into ``directory``; return the directory.

    Every undirected edge is written in both directions, as in the
    published datasets.
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        a_lines, ind_lines, nl_lines = [], [], []
        offset = 0
        for k, g in enumerate(d.graphs):
            for i, j in g.edges:
                a_lines.append(f"{i + 1 + offset}, {j + 1 + offset}")
                a_lines.append(f"{j + 1 + offset}, {i + 1 + offset}")
            ind_lines.extend([str(k + 1)] * g.num_nodes)
            nl_lines.extend(str(x) for x in g.node_labels)
            offset += g.num_nodes
        files = {
            f"{d.name}_A.txt": a_lines,
            f"{d.name}_graph_indicator.txt": ind_lines,
            f"{d.name}_graph_labels.txt": [str(d.class_values[c]) for c in d.graph_labels],
        }
        if d.has_node_labels:
            files[f"{d.name}_node_labels.txt"] = nl_lines
        for fname, lines in files.items():
            (directory / fname).write_text("".join(line + "\n" for line in lines))
    except OSError as exc:
        raise DatasetLoadError(f"cannot write dataset to {directory}: {exc}") from exc
    return directory
