"""Scikit-learn compatible graph classifier."""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigurationError, NumericCheckError
from .model import (
    GraphBatch,
    IHGNNConfig,
    IHGNNModel,
    forward,
    loss_and_gradients,
    node_embeddings,
)
from .nn import AdamState, adam_step, load_checkpoint, save_checkpoint, softmax, step_decay
from .preprocessing import NodeLabelEncoder
from .validation import check_graphs, check_targets

logger = logging.getLogger(__name__)

_CONFIG_PARAMS = (
    "num_layers", "embed_dim", "classifier_hidden", "dropout", "batch_size", "epochs",
    "pad_size", "variant", "learning_rate", "lr_decay_step", "lr_decay_rate",
    "combine_dropout", "deterministic",
)


class IHGNNClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Graph classifier built from ego/neighbor integration and a sorted readout.

    ``X`` is always a sequence of :class:`~ihgnn.graph.Graph` (or a
    :class:`~ihgnn.graph.Dataset`). Node labels are one-hot encoded by an
    internal :class:`~ihgnn.preprocessing.NodeLabelEncoder`.

    Parameters
    ----------
    num_layers : int, default=5
        Number of embedding layers ``K``, the first being the label MLP.
    embed_dim : int, default=32
        Hidden and output width of every node-level MLP.
    classifier_hidden : int, default=128
    dropout : float, default=0.5
        Dropout rate on the classifier's hidden layer (and on the node
        MLPs' hidden layers when ``combine_dropout`` is set).
    batch_size : int, default=32
    epochs : int, default=350
    pad_size : int, optional
        Common node count of the readout. Defaults to the largest training
        graph; pass the dataset-wide maximum when evaluating on other graphs.
    variant : str, default="full"
        One of ``full``, ``no_integration``, ``no_separation``,
        ``no_intermediate``, ``sum_readout``.
    learning_rate, lr_decay_step, lr_decay_rate : float, int, float
        Adam step size, halved (by default) every 50 epochs.
    label_alphabet : sequence of int, optional
        Node-label alphabet; defaults to the labels seen in ``fit``.
    feature_source : {"label", "degree"}, default="label"
    combine_dropout : bool, default=False
    deterministic : bool, default=False
        Use permutation-exact reductions (slow; for verification).
    weight_init : {"glorot", "zeros"}, default="glorot"
    random_state : int, default=0
        Seeds initialization, batch shuffling and dropout.

    Attributes
    ----------
    model_ : IHGNNModel
    classes_ : ndarray
    encoder_ : NodeLabelEncoder
    loss_curve_ : list of float
        Mean training loss per epoch.
    eval_curve_ : list of float
        Accuracy on ``eval_set`` after each epoch (empty without one).
    gradient_counts_ : ndarray of int
        How many gradient computations each training graph took part in.
    """

    def __init__(
        self,
        num_layers=5,
        embed_dim=32,
        classifier_hidden=128,
        dropout=0.5,
        batch_size=32,
        epochs=350,
        pad_size=None,
        variant="full",
        learning_rate=0.01,
        lr_decay_step=50,
        lr_decay_rate=0.5,
        label_alphabet=None,
        feature_source="label",
        combine_dropout=False,
        deterministic=False,
        weight_init="glorot",
        random_state=0,
    ):
        self.num_layers = num_layers
        self.embed_dim = embed_dim
        self.classifier_hidden = classifier_hidden
        self.dropout = dropout
        self.batch_size = batch_size
        self.epochs = epochs
        self.pad_size = pad_size
        self.variant = variant
        self.learning_rate = learning_rate
        self.lr_decay_step = lr_decay_step
        self.lr_decay_rate = lr_decay_rate
        self.label_alphabet = label_alphabet
        self.feature_source = feature_source
        self.combine_dropout = combine_dropout
        self.deterministic = deterministic
        self.weight_init = weight_init
        self.random_state = random_state

    @classmethod
    def from_config(cls, config: IHGNNConfig, **kwargs):
        params = {k: getattr(config, k) for k in _CONFIG_PARAMS}
        params["random_state"] = config.seed
        params.update(kwargs)
        return cls(**params)

    def _make_config(self, num_classes, pad_size):
        return IHGNNConfig(
            **{k: getattr(self, k) for k in _CONFIG_PARAMS if k != "pad_size"},
            pad_size=pad_size,
            num_classes=num_classes,
            seed=self.random_state,
        )

    def _features(self, graphs):
        return self.encoder_.transform(graphs)

    def fit(self, X, y, eval_set=None, callback=None):
        """Train on graphs ``X`` with targets ``y``.

        Parameters
        ----------
        eval_set : (graphs, targets), optional
            Scored after every epoch (dropout off); results land in
            ``eval_curve_``. Never used for gradients.
        callback : callable, optional
            ``callback(epoch, estimator)`` after every epoch.
        """
        graphs = check_graphs(X, allow_empty_graphs=False)
        y = check_targets(y, len(graphs))
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        if self.num_layers < 1:
            raise ConfigurationError(f"num_layers must be >= 1, got {self.num_layers}")

        self.encoder_ = NodeLabelEncoder(self.feature_source, self.label_alphabet).fit(graphs)
        feats = self._features(graphs)
        largest = max(g.num_nodes for g in graphs)
        pad = largest if self.pad_size is None else int(self.pad_size)
        if pad < largest:
            raise ConfigurationError(f"pad_size {pad} is smaller than a training graph ({largest})")
        # at least two outputs so that a one-class fit still has a softmax
        config = self._make_config(max(len(self.classes_), 2), pad)

        init_ss, shuffle_ss, drop_ss = np.random.SeedSequence(self.random_state).spawn(3)
        model = IHGNNModel.init(config, self.encoder_.n_features_out_, np.random.default_rng(init_ss))
        if self.weight_init == "zeros":
            for p in model.parameters().values():
                p[...] = 0.0
        elif self.weight_init != "glorot":
            raise ConfigurationError(f"unknown weight_init {self.weight_init!r}")
        self.model_ = model
        self.n_features_in_ = self.encoder_.n_features_out_

        shuffle_rng = np.random.default_rng(shuffle_ss)
        drop_rng = np.random.default_rng(drop_ss)
        params = model.parameters()
        state = AdamState.for_params(params, lr=self.learning_rate)

        eval_batch = eval_y = None
        if eval_set is not None:
            eval_graphs = check_graphs(eval_set[0])
            eval_batch = GraphBatch.from_graphs(eval_graphs, self._features(eval_graphs))
            eval_y = check_targets(eval_set[1], len(eval_graphs))

        self.loss_curve_ = []
        self.eval_curve_ = []
        self.gradient_counts_ = np.zeros(len(graphs), dtype=np.int64)
        n = len(graphs)
        bs = int(self.batch_size)
        for epoch in range(int(self.epochs)):
            lr = step_decay(self.learning_rate, epoch, self.lr_decay_step, self.lr_decay_rate)
            perm = shuffle_rng.permutation(n)
            losses = []
            for start in range(0, n, bs):
                idx = perm[start:start + bs]
                batch = GraphBatch.from_graphs([graphs[i] for i in idx], [feats[i] for i in idx])
                loss, grads, _ = loss_and_gradients(model, batch, y_enc[idx], True, drop_rng)
                if not np.isfinite(loss):
                    raise NumericCheckError(f"non-finite loss {loss} at epoch {epoch}")
                adam_step(state, params, grads, lr)
                self.gradient_counts_[idx] += 1
                losses.append(loss * idx.size)
            self.loss_curve_.append(float(np.sum(losses) / n))
            if eval_batch is not None:
                self.eval_curve_.append(self._batch_accuracy(eval_batch, eval_y))
            if callback is not None:
                callback(epoch, self)
        return self

    def _batch_accuracy(self, batch, y):
        if batch.num_graphs == 0:
            return float("nan")
        logits, _ = forward(self.model_, batch)
        pred = self.classes_[_argmax(logits, len(self.classes_))]
        return float(np.mean(pred == y))

    def _batch(self, X):
        check_is_fitted(self, "model_")
        graphs = check_graphs(X)
        return GraphBatch.from_graphs(graphs, self._features(graphs))

    def decision_function(self, X):
        """Raw classifier logits, one row per graph."""
        batch = self._batch(X)
        logits, _ = forward(self.model_, batch)
        return logits[:, : len(self.classes_)]

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        logits = self.decision_function(X)
        return self.classes_[_argmax(logits, len(self.classes_))]

    def transform(self, X):
        """Graph-level readout vectors (the classifier input), dropout off."""
        batch = self._batch(X)
        logits, cache = forward(self.model_, batch)
        return cache.classifier_cache.x.copy()

    def node_embeddings(self, X):
        """Per-layer node embeddings of the stacked graphs."""
        batch = self._batch(X)
        layers, _ = node_embeddings(self.model_, batch)
        return layers

    def save(self, path):
        check_is_fitted(self, "model_")
        cfg = self.model_.config
        meta = {"classes": ",".join(str(c) for c in self.classes_.tolist()),
                "alphabet": ",".join(str(a) for a in self.encoder_.alphabet_.tolist()),
                "feature_source": self.feature_source}
        meta.update({f"config.{k}": v for k, v in vars(cfg).items()})
        save_checkpoint(path, self.model_.parameters(), meta)

    @classmethod
    def load(cls, path):
        params, meta = load_checkpoint(path)
        text = "".join(f"{k[7:]}={v}\n" for k, v in meta.items() if k.startswith("config."))
        config = IHGNNConfig.from_text(text)
        alphabet = [int(a) for a in meta["alphabet"].split(",") if a]
        est = cls.from_config(config, label_alphabet=alphabet,
                              feature_source=meta.get("feature_source", "label"))
        est.encoder_ = NodeLabelEncoder(est.feature_source, alphabet)
        est.encoder_.alphabet_ = np.asarray(sorted(alphabet), dtype=np.int64)
        est.encoder_.n_features_out_ = len(alphabet)
        est.classes_ = np.asarray([_parse_scalar(c) for c in meta["classes"].split(",")])
        model = IHGNNModel.init(config, len(alphabet), np.random.default_rng(0))
        model.load_parameters(params)
        est.model_ = model
        est.n_features_in_ = len(alphabet)
        return est


def _parse_scalar(s):
    try:
        return int(s)
    except ValueError:
        return s


def _argmax(logits, num_classes):
    return np.argmax(logits[:, :num_classes], axis=1)
