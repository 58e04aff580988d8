"""IHGNN forward and backward passes.

Layer 1 embeds one-hot node features with an MLP. Every further layer sums
neighbor embeddings and feeds ``[self, neighbors, self + neighbors]`` to
its own MLP. The per-layer embeddings are concatenated, the nodes are
sorted by their last-layer embedding, padded with zero rows to a common
size ``m`` and flattened into one graph vector for the classifier MLP.

Ablation variants:

``no_integration``  combine input is ``[self, neighbors]``
``no_separation``   combine input is ``self + neighbors``
``no_intermediate`` readout uses the last layer only
``sum_readout``     graph vector is the sum of node embeddings (no sort, no pad)
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np
import scipy.sparse as sp

from .exceptions import ConfigurationError, InputError
from .nn import MLP, grad_check, mlp_backward, mlp_forward, softmax_cross_entropy

VARIANTS = ("full", "no_integration", "no_separation", "no_intermediate", "sum_readout")


@dataclass
class IHGNNConfig:
    """Hyperparameters of the model and its training run.

    ``pad_size`` is the common node count ``m`` of the sorted readout; it
    must be at least the size of every graph the model sees. When it is
    ``None`` the estimator uses the largest training graph.
    """

    num_layers: int = 5
    embed_dim: int = 32
    classifier_hidden: int = 128
    dropout: float = 0.5
    batch_size: int = 32
    epochs: int = 350
    pad_size: int = None
    num_classes: int = 2
    variant: str = "full"
    seed: int = 0
    learning_rate: float = 0.01
    lr_decay_step: int = 50
    lr_decay_rate: float = 0.5
    combine_dropout: bool = False
    deterministic: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        for name in ("num_layers", "embed_dim", "classifier_hidden", "batch_size", "num_classes"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.pad_size is not None and self.pad_size < 1:
            raise ConfigurationError(f"pad_size must be >= 1, got {self.pad_size}")
        return self

    def replace(self, **changes) -> "IHGNNConfig":
        return replace(self, **changes)

    def to_text(self) -> str:
        """Flat ``key=value`` lines, one per field."""
        return "".join(f"{k}={'' if v is None else v}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "IHGNNConfig":
        types = {f.name: f.type for f in fields(cls)}
        defaults = asdict(cls())
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"line {lineno}: expected key=value, got {line!r}")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
            values[key] = _parse_value(raw, defaults[key], key)
        return cls(**values)


def _parse_value(raw, default, key):
    if raw == "" or raw == "None":
        return None
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, str):
        return raw
    try:
        if isinstance(default, float):
            return float(raw)
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {raw!r}") from None


def combine_width(variant: str, dim: int) -> int:
    if variant == "no_integration":
        return 2 * dim
    if variant == "no_separation":
        return dim
    if variant in VARIANTS:
        return 3 * dim
    raise ConfigurationError(f"unknown variant {variant!r}")


def _ordered_row_sum(rows, width):
    rows = rows[np.lexsort(rows.T[::-1])]
    acc = np.zeros(width)
    for r in rows:
        acc = acc + r
    return acc


def aggregate_neighbors(H, A, deterministic=False, include_self=False):
    """Row ``v`` of the result is the sum of ``H[u]`` over the neighbors ``u`` of ``v``.

    ``A`` is a dense or sparse symmetric adjacency matrix. In deterministic
    mode each neighbor multiset is summed in lexicographic row order, so the
    result does not depend on node numbering. ``include_self`` adds ``H[v]``
    to the multiset of row ``v``.
    """
    H = np.asarray(H, dtype=np.float64)
    if A.shape != (H.shape[0], H.shape[0]):
        raise InputError(f"adjacency shape {A.shape} does not match {H.shape[0]} nodes")
    if not deterministic:
        out = np.asarray(A @ H)
        return out + H if include_self else out
    A = sp.csr_matrix(A)
    out = np.zeros_like(H)
    for v in range(H.shape[0]):
        nbrs = A.indices[A.indptr[v]:A.indptr[v + 1]]
        if include_self:
            nbrs = np.append(nbrs, v)
        if nbrs.size:
            out[v] = _ordered_row_sum(H[nbrs], H.shape[1])
    return out


def combine(h_self, h_neigh, variant="full", h_sum=None):
    """Input of the layer MLP built from ego and neighbor embeddings.

    ``h_sum`` overrides ``h_self + h_neigh`` (deterministic mode passes a
    multiset sum that is independent of node numbering).
    """
    h_self = np.asarray(h_self, dtype=np.float64)
    h_neigh = np.asarray(h_neigh, dtype=np.float64)
    if h_self.shape != h_neigh.shape:
        raise InputError(f"shape mismatch: {h_self.shape} vs {h_neigh.shape}")
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown variant {variant!r}")
    if variant == "no_integration":
        return np.hstack([h_self, h_neigh])
    total = h_self + h_neigh if h_sum is None else h_sum
    if variant == "no_separation":
        return total
    return np.hstack([h_self, h_neigh, total])


def combine_backward(dZ, variant, dim):
    """Split ``dL/dZ`` into ``(dL/dh_self, dL/dh_neigh)``."""
    if variant == "no_integration":
        return dZ[:, :dim], dZ[:, dim:]
    if variant == "no_separation":
        return dZ, dZ
    ds, dn, dsum = dZ[:, :dim], dZ[:, dim:2 * dim], dZ[:, 2 * dim:]
    return ds + dsum, dn + dsum


def _sort_keys(H, last_block, exact):
    H = np.asarray(H, dtype=np.float64)
    width = H.shape[1] if last_block is None else int(last_block)
    keys = np.hstack([H[:, H.shape[1] - width:], H])
    # Summation order leaves ulp-level noise on rows that are equal in exact
    # arithmetic; comparing at single precision lets such rows tie so the
    # earlier-layer blocks decide their order.
    return keys if exact else keys.astype(np.float32)


def sort_nodes_by_color(H, last_block=None, exact=False):
    """Ascending node order by the last-layer embedding, ties broken by the full row.

    ``last_block`` is the width of the last layer's block at the right end
    of ``H`` (defaults to the whole row). Values are compared at single
    precision unless ``exact`` is set. Rows that tie in full keep their
    index order. Returns an index array.
    """
    keys = _sort_keys(H, last_block, exact)
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(keys.T[::-1])


def batch_sort_order(H, last_block, graph_index, exact=False):
    """:func:`sort_nodes_by_color` applied within each graph of a stacked batch."""
    keys = _sort_keys(H, last_block, exact)
    return np.lexsort(tuple(keys.T[::-1]) + (graph_index,))


def pad_and_flatten(H_sorted, m):
    """Flatten sorted node rows and append zero rows up to ``m`` rows."""
    H_sorted = np.asarray(H_sorted, dtype=np.float64)
    n, d = H_sorted.shape
    if n > m:
        raise ConfigurationError(f"graph has {n} nodes but pad size is {m}")
    out = np.zeros(m * d)
    out[: n * d] = H_sorted.reshape(-1)
    return out


@dataclass
class GraphBatch:
    """Graphs stacked into one node matrix with a block-diagonal adjacency."""

    X: np.ndarray
    adjacency: sp.csr_matrix
    graph_index: np.ndarray
    offsets: np.ndarray

    @property
    def num_graphs(self):
        return self.offsets.size - 1

    @property
    def sizes(self):
        return np.diff(self.offsets)

    @classmethod
    def from_graphs(cls, graphs, features):
        graphs = list(graphs)
        sizes = np.array([g.num_nodes for g in graphs], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        total = int(offsets[-1])
        if graphs:
            X = np.vstack([np.asarray(F, dtype=np.float64) for F in features])
            e = np.vstack([g.edge_array + o for g, o in zip(graphs, offsets[:-1])])
        else:
            X = np.zeros((0, 0))
            e = np.zeros((0, 2), dtype=np.int64)
        if X.shape[0] != total:
            raise InputError(f"features have {X.shape[0]} rows for {total} nodes")
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        A = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(total, total))
        graph_index = np.repeat(np.arange(len(graphs)), sizes)
        return cls(X, A, graph_index, offsets)


@dataclass
class IHGNNModel:
    """Learned parameters: embedding MLP, one MLP per further layer, classifier."""

    config: IHGNNConfig
    embed: MLP
    combines: list
    classifier: MLP

    @classmethod
    def init(cls, config: IHGNNConfig, in_dim: int, rng) -> "IHGNNModel":
        config.validate()
        if config.pad_size is None and config.variant != "sum_readout":
            raise ConfigurationError("pad_size must be set before building the model")
        r = config.embed_dim
        embed = MLP.init(in_dim, r, r, rng)
        width = combine_width(config.variant, r)
        combines = [MLP.init(width, r, r, rng) for _ in range(config.num_layers - 1)]
        classifier = MLP.init(readout_dim(config), config.classifier_hidden, config.num_classes, rng)
        return cls(config, embed, combines, classifier)

    @property
    def in_dim(self):
        return self.embed.in_dim

    def parameters(self) -> dict:
        """Name -> array; the arrays are the live parameters (updated in place)."""
        out = {}
        for prefix, mlp in self.named_mlps():
            for k, p in mlp.params().items():
                out[f"{prefix}.{k}"] = p
        return out

    def named_mlps(self):
        yield "embed", self.embed
        for k, mlp in enumerate(self.combines, start=2):
            yield f"combine{k}", mlp
        yield "classifier", self.classifier

    def load_parameters(self, params: dict):
        for prefix, mlp in self.named_mlps():
            for k in ("W1", "b1", "W2", "b2"):
                src = np.asarray(params[f"{prefix}.{k}"], dtype=np.float64)
                dst = getattr(mlp, k)
                if src.shape != dst.shape:
                    raise ConfigurationError(
                        f"{prefix}.{k}: checkpoint shape {src.shape}, model {dst.shape}"
                    )
                dst[...] = src


def node_dim(config: IHGNNConfig) -> int:
    """Width of the per-node vector that enters the readout."""
    if config.variant == "no_intermediate":
        return config.embed_dim
    return config.num_layers * config.embed_dim


def readout_dim(config: IHGNNConfig) -> int:
    if config.variant == "sum_readout":
        return node_dim(config)
    return config.pad_size * node_dim(config)


@dataclass
class ForwardCache:
    batch: GraphBatch
    layer_caches: list
    classifier_cache: object
    order: np.ndarray = None
    positions: np.ndarray = None


def _segment_sum(H, graph_index, num_graphs, deterministic):
    out = np.zeros((num_graphs, H.shape[1]))
    if not deterministic:
        np.add.at(out, graph_index, H)
        return out
    for k in range(num_graphs):
        out[k] = _ordered_row_sum(H[graph_index == k], H.shape[1])
    return out


def node_embeddings(model: IHGNNModel, batch: GraphBatch, training=False, rng=None):
    """Per-layer node embeddings ``[H1, ..., HK]`` and their MLP caches."""
    cfg = model.config
    det = cfg.deterministic
    inner_p = cfg.dropout if cfg.combine_dropout else 0.0
    if batch.X.shape[1] != model.in_dim:
        raise InputError(f"features have {batch.X.shape[1]} columns, model expects {model.in_dim}")
    H, cache = mlp_forward(model.embed, batch.X, inner_p, training, rng, det)
    layers, caches = [H], [cache]
    for mlp in model.combines:
        N = aggregate_neighbors(H, batch.adjacency, det)
        S = aggregate_neighbors(H, batch.adjacency, True, include_self=True) if det else None
        H, cache = mlp_forward(mlp, combine(H, N, cfg.variant, S), inner_p, training, rng, det)
        layers.append(H)
        caches.append(cache)
    return layers, caches


def forward(model: IHGNNModel, batch: GraphBatch, training=False, rng=None):
    """Logits ``(num_graphs, num_classes)`` and the cache for :func:`backward`."""
    cfg = model.config
    layers, caches = node_embeddings(model, batch, training, rng)
    H = layers[-1] if cfg.variant == "no_intermediate" else np.hstack(layers)
    b = batch.num_graphs
    order = positions = None
    if cfg.variant == "sum_readout":
        hG = _segment_sum(H, batch.graph_index, b, cfg.deterministic)
    else:
        m = cfg.pad_size
        if b and batch.sizes.max() > m:
            raise ConfigurationError(f"graph with {batch.sizes.max()} nodes exceeds pad size {m}")
        order = batch_sort_order(H, cfg.embed_dim, batch.graph_index, cfg.deterministic)
        gid = batch.graph_index[order]
        positions = np.arange(order.size) - batch.offsets[gid]
        P = np.zeros((b, m, H.shape[1]))
        P[gid, positions] = H[order]
        hG = P.reshape(b, -1)
    logits, ccache = mlp_forward(model.classifier, hG, cfg.dropout, training, rng, cfg.deterministic)
    return logits, ForwardCache(batch, caches, ccache, order, positions)


def backward(model: IHGNNModel, cache: ForwardCache, dlogits) -> dict:
    """Gradients of every parameter given ``dL/dlogits``.

    The sort permutation is held fixed; padded rows receive no gradient.
    """
    cfg = model.config
    r = cfg.embed_dim
    K = cfg.num_layers
    batch = cache.batch
    grads = {}
    g, dhG = mlp_backward(model.classifier, cache.classifier_cache, dlogits)
    grads.update({f"classifier.{k}": v for k, v in g.items()})

    D = node_dim(cfg)
    if cfg.variant == "sum_readout":
        dH = dhG[batch.graph_index]
    else:
        dP = dhG.reshape(batch.num_graphs, cfg.pad_size, D)
        dH = np.zeros((batch.X.shape[0], D))
        dH[cache.order] = dP[batch.graph_index[cache.order], cache.positions]

    if cfg.variant == "no_intermediate":
        d_layers = [None] * (K - 1) + [dH]
    else:
        d_layers = [dH[:, k * r:(k + 1) * r] for k in range(K)]

    d_cur = d_layers[K - 1]
    for k in range(K - 1, 0, -1):
        g, dZ = mlp_backward(model.combines[k - 1], cache.layer_caches[k], d_cur)
        grads.update({f"combine{k + 1}.{n}": v for n, v in g.items()})
        d_self, d_neigh = combine_backward(dZ, cfg.variant, r)
        d_prev = d_self + np.asarray(batch.adjacency.T @ d_neigh)
        if d_layers[k - 1] is not None:
            d_prev = d_prev + d_layers[k - 1]
        d_cur = d_prev
    g, _ = mlp_backward(model.embed, cache.layer_caches[0], d_cur)
    grads.update({f"embed.{k}": v for k, v in g.items()})
    return grads


def loss_and_gradients(model: IHGNNModel, batch: GraphBatch, labels, training=False, rng=None):
    """Mean softmax cross-entropy over the batch and gradients of all parameters.

    Returns ``(loss, grads, logits)``.
    """
    if batch.num_graphs == 0:
        raise InputError("batch is empty")
    logits, cache = forward(model, batch, training, rng)
    loss, dlogits = softmax_cross_entropy(logits, labels)
    return loss, backward(model, cache, dlogits), logits


@dataclass(frozen=True)
class GraphEmbedding:
    vector: np.ndarray
    node_order: np.ndarray
    num_real_nodes: int


def graph_embedding(model: IHGNNModel, graph, features) -> GraphEmbedding:
    """Readout vector of one graph with dropout disabled."""
    cfg = model.config
    batch = GraphBatch.from_graphs([graph], [features])
    layers, _ = node_embeddings(model, batch)
    H = layers[-1] if cfg.variant == "no_intermediate" else np.hstack(layers)
    if cfg.variant == "sum_readout":
        vec = _segment_sum(H, batch.graph_index, 1, cfg.deterministic)[0]
        return GraphEmbedding(vec, np.arange(graph.num_nodes), graph.num_nodes)
    order = sort_nodes_by_color(H, cfg.embed_dim, cfg.deterministic)
    return GraphEmbedding(pad_and_flatten(H[order], cfg.pad_size), order, graph.num_nodes)


def predict_logits(model: IHGNNModel, graph, features) -> np.ndarray:
    """Logit vector of one graph with dropout disabled."""
    logits, _ = forward(model, GraphBatch.from_graphs([graph], [features]))
    return logits[0]


def check_model_gradients(model: IHGNNModel, batch: GraphBatch, labels, num_samples=None,
                          rng=None, step=1e-5):
    """Central-difference check of :func:`loss_and_gradients` with dropout off.

    Returns a :class:`~ihgnn.nn.GradCheckResult` over all parameter arrays
    (``num_samples`` entries per array when given).
    """
    labels = np.asarray(labels)

    def fn():
        loss, grads, _ = loss_and_gradients(model, batch, labels)
        return loss, grads

    return grad_check(fn, model.parameters(), num_samples=num_samples, rng=rng, step=step)
