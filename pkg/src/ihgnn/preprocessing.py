"""One-hot node features from node labels (or degrees, for unlabeled data)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InputError
from .graph import Dataset
from .validation import check_graphs


class NodeLabelEncoder(TransformerMixin, BaseEstimator):
    """Encode each node of each graph as a one-hot row over an alphabet.

    Parameters
    ----------
    source : {"label", "degree"}, default="label"
        What to encode. ``"degree"`` treats node degree as the label, the
        usual proxy for datasets without node labels.
    alphabet : sequence of int, optional
        Fixed alphabet. When omitted, ``fit`` collects the sorted distinct
        values seen in the training graphs.
    handle_unknown : {"error", "ignore"}, default="error"
        ``"ignore"`` encodes values outside the alphabet as an all-zero row.

    Attributes
    ----------
    alphabet_ : ndarray of int
        Sorted alphabet; column ``k`` of the output encodes ``alphabet_[k]``.
    n_features_out_ : int
    """

    def __init__(self, source="label", alphabet=None, handle_unknown="error"):
        self.source = source
        self.alphabet = alphabet
        self.handle_unknown = handle_unknown

    def _values(self, g):
        if self.source == "label":
            return g.labels
        if self.source == "degree":
            return g.degrees
        raise InputError(f"unknown source {self.source!r}")

    def fit(self, X, y=None):
        graphs = check_graphs(X)
        if self.alphabet is not None:
            alphabet = np.unique(np.asarray(self.alphabet, dtype=np.int64))
        else:
            vals = [self._values(g) for g in graphs]
            alphabet = np.unique(np.concatenate(vals)) if vals else np.zeros(0, np.int64)
        if alphabet.size == 0:
            raise InputError("empty alphabet: no nodes to encode")
        self.alphabet_ = alphabet
        self.n_features_out_ = int(alphabet.size)
        return self

    def transform(self, X):
        """Return a list with one ``(num_nodes, n_features_out_)`` matrix per graph."""
        check_is_fitted(self, "alphabet_")
        graphs = check_graphs(X)
        out = []
        for g in graphs:
            vals = self._values(g)
            idx = np.searchsorted(self.alphabet_, vals)
            idx_clipped = np.minimum(idx, self.alphabet_.size - 1)
            known = self.alphabet_[idx_clipped] == vals
            if not known.all() and self.handle_unknown == "error":
                bad = sorted(set(vals[~known].tolist()))
                raise InputError(f"values {bad} not in the fitted alphabet")
            F = np.zeros((g.num_nodes, self.alphabet_.size))
            rows = np.nonzero(known)[0]
            F[rows, idx_clipped[rows]] = 1.0
            out.append(F)
        return out


def encoder_for(d: Dataset) -> NodeLabelEncoder:
    """Encoder fitted on the whole dataset's alphabet (labels or degrees)."""
    if d.has_node_labels:
        return NodeLabelEncoder("label", alphabet=d.label_alphabet).fit(d.graphs)
    return NodeLabelEncoder("degree").fit(d.graphs)


def one_hot_features(d: Dataset) -> list:
    """Per-graph one-hot feature matrices for a dataset.

    Falls back to the dataset-wide degree alphabet when ``d`` has no node
    labels.
    """
    return encoder_for(d).transform(d.graphs)
