"""Graph classification with ego/neighbor integration and a sorted readout.

The package bundles graph and dataset types with homophily metrics, a
TUDataset reader, exact 1-WL refinement, a numpy neural-network kernel with
hand-derived gradients, the model itself and a cross-validation harness.
"""

from .estimator import IHGNNClassifier
from .exceptions import (
    ConfigurationError,
    DatasetFormatError,
    DatasetLoadError,
    IHGNNError,
    InputError,
    NumericCheckError,
)
from .graph import (
    Dataset,
    Graph,
    dataset_homophily,
    dataset_stats,
    graph_homophily,
    homophily_histogram,
    node_homophily,
)
from .harness import CVResult, ablation_suite, cross_validate, layer_sweep, make_folds
from .model import VARIANTS, IHGNNConfig, IHGNNModel
from .preprocessing import NodeLabelEncoder, one_hot_features
from .tud import load_dataset, validate, write_fixture
from .wl import Coloring, Verdict, wl_node_order, wl_refine, wl_refine_step, wl_signature, wl_test

__version__ = "0.1.0"

__all__ = [
    "CVResult",
    "Coloring",
    "ConfigurationError",
    "Dataset",
    "DatasetFormatError",
    "DatasetLoadError",
    "Graph",
    "IHGNNClassifier",
    "IHGNNConfig",
    "IHGNNError",
    "IHGNNModel",
    "InputError",
    "NodeLabelEncoder",
    "NumericCheckError",
    "VARIANTS",
    "ablation_suite",
    "cross_validate",
    "Verdict",
    "dataset_homophily",
    "dataset_stats",
    "graph_homophily",
    "homophily_histogram",
    "layer_sweep",
    "load_dataset",
    "make_folds",
    "node_homophily",
    "one_hot_features",
    "validate",
    "wl_node_order",
    "wl_refine",
    "wl_refine_step",
    "wl_signature",
    "wl_test",
    "write_fixture",
]
