"""Dense numerical kernel: one-hidden-layer MLPs, softmax cross-entropy, Adam.

Everything is float64 numpy. Gradients are derived by hand for exactly the
operations the model needs; :func:`grad_check` verifies them with central
differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DatasetLoadError, InputError

CHECKPOINT_MAGIC = "IHGNN-CHECKPOINT"
CHECKPOINT_VERSION = 1


def _as_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def matmul(a, b, deterministic=False):
    """Matrix product with shape checking.

    With ``deterministic=True`` every output row is reduced by the same
    elementwise sequence whatever its position in ``a``, so rows with equal
    content give bit-identical results under any row permutation.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise InputError(f"shape mismatch: {a.shape} @ {b.shape}")
    if deterministic:
        return (a[:, :, None] * b[None, :, :]).sum(axis=1)
    return a @ b


def glorot_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class MLP:
    """``y = relu(x @ W1 + b1) @ W2 + b2``, applied row-wise."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @classmethod
    def init(cls, in_dim, hidden, out_dim, rng):
        """Glorot-uniform weights, zero biases."""
        return cls(
            glorot_uniform(rng, in_dim, hidden),
            np.zeros(hidden),
            glorot_uniform(rng, hidden, out_dim),
            np.zeros(out_dim),
        )

    @property
    def in_dim(self):
        return self.W1.shape[0]

    @property
    def hidden_dim(self):
        return self.W1.shape[1]

    @property
    def out_dim(self):
        return self.W2.shape[1]

    def params(self):
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}


@dataclass
class MLPCache:
    x: np.ndarray
    z1: np.ndarray
    h1: np.ndarray  # post-dropout hidden activation fed to W2
    mask: np.ndarray = None  # inverted-dropout scale, or None
    deterministic: bool = False


def relu(x):
    return np.maximum(x, 0.0)


def mlp_forward(m: MLP, x, dropout_p=0.0, training=False, rng=None, deterministic=False):
    """Forward pass; dropout (inverted) acts on the hidden activation only.

    Returns ``(y, cache)``.
    """
    x = _as_matrix(x, "x")
    if x.shape[1] != m.in_dim:
        raise InputError(f"input has {x.shape[1]} columns, MLP expects {m.in_dim}")
    z1 = matmul(x, m.W1, deterministic) + m.b1
    h1 = relu(z1)
    mask = None
    if training and dropout_p > 0.0:
        if rng is None:
            raise InputError("training with dropout requires an rng")
        keep = 1.0 - dropout_p
        mask = (rng.random(h1.shape) < keep) / keep
        h1 = h1 * mask
    y = matmul(h1, m.W2, deterministic) + m.b2
    return y, MLPCache(x, z1, h1, mask, deterministic)


def mlp_backward(m: MLP, cache: MLPCache, upstream):
    """Gradients of a scalar loss given ``upstream = dL/dy``.

    Returns ``(grads, dx)`` where ``grads`` maps ``W1, b1, W2, b2`` to arrays
    shaped like the parameters.
    """
    dy = _as_matrix(upstream, "upstream")
    grads = {"W2": cache.h1.T @ dy, "b2": dy.sum(axis=0)}
    dh1 = dy @ m.W2.T
    if cache.mask is not None:
        dh1 = dh1 * cache.mask
    dz1 = dh1 * (cache.z1 > 0.0)
    grads["W1"] = cache.x.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    dx = dz1 @ m.W1.T
    return grads, dx


def softmax(logits):
    z = _as_matrix(logits, "logits")
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over rows and its gradient w.r.t. ``logits``."""
    z = _as_matrix(logits, "logits")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    n, c = z.shape
    if labels.shape[0] != n:
        raise InputError(f"{n} rows of logits but {labels.shape[0]} labels")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise InputError(f"labels must lie in [0, {c})")
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    loss = float(np.mean(log_norm - shifted[rows, labels]))
    grad = np.exp(shifted - log_norm[:, None])
    grad[rows, labels] -= 1.0
    return loss, grad / n


@dataclass
class AdamState:
    """Adam moment estimates for a dict of parameter arrays."""

    m: dict
    v: dict
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, lr=0.01, **kwargs):
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            lr=lr,
            **kwargs,
        )


def adam_step(state: AdamState, params: dict, grads: dict, lr=None):
    """One bias-corrected Adam update, applied to ``params`` in place.

    Parameters missing from ``grads`` are treated as having zero gradient.
    Returns ``params``.
    """
    lr = state.lr if lr is None else lr
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for k, p in params.items():
        g = grads.get(k)
        if g is None:
            g = np.zeros_like(p)
        elif g.shape != p.shape:
            raise InputError(f"gradient for {k} has shape {g.shape}, parameter {p.shape}")
        m = state.m[k]
        v = state.v[k]
        tmp = np.multiply(g, 1.0 - b1)
        m *= b1
        m += tmp
        np.multiply(g, g, out=tmp)
        tmp *= 1.0 - b2
        v *= b2
        v += tmp
        # p -= lr * (m / c1) / (sqrt(v / c2) + eps)
        np.divide(v, c2, out=tmp)
        np.sqrt(tmp, out=tmp)
        tmp += state.eps
        np.divide(m, tmp, out=tmp)
        tmp *= lr / c1
        p -= tmp
    return params


def step_decay(base_lr, epoch, step=50, rate=0.5):
    """Learning rate for a 0-based ``epoch``: multiplied by ``rate`` every ``step`` epochs."""
    if step is None or step <= 0:
        return base_lr
    return base_lr * rate ** (epoch // step)


@dataclass
class GradCheckResult:
    max_rel_error: float
    num_checked: int
    worst: tuple = field(default=None)  # (param name, flat index, analytic, numeric)

    def __float__(self):
        return self.max_rel_error


def relative_error(analytic, numeric, floor=1e-6):
    """``|a - n| / max(|a|, |n|, floor)``; the floor keeps near-zero entries from dominating."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def grad_check(fn, params, num_samples=None, rng=None, step=1e-5, floor=1e-6):
    """Compare analytic gradients with central differences.

    Parameters
    ----------
    fn : callable
        ``fn() -> (loss, grads)`` evaluated at the current contents of
        ``params``. Must be deterministic (disable dropout).
    params : dict of ndarray
        Perturbed in place and restored afterwards.
    num_samples : int, optional
        Entries checked per parameter array, sampled without replacement.
        All entries when omitted.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    _, grads = fn()
    grads = {k: np.array(g, copy=True) for k, g in grads.items()}
    worst = None
    max_err = 0.0
    count = 0
    for name, p in params.items():
        flat = p.reshape(-1)
        g = grads.get(name)
        g = np.zeros_like(p).reshape(-1) if g is None else g.reshape(-1)
        idx = np.arange(flat.size)
        if num_samples is not None and num_samples < flat.size:
            idx = rng.choice(flat.size, size=num_samples, replace=False)
        for i in idx:
            old = flat[i]
            flat[i] = old + step
            plus = fn()[0]
            flat[i] = old - step
            minus = fn()[0]
            flat[i] = old
            numeric = (plus - minus) / (2.0 * step)
            err = float(relative_error(g[i], numeric, floor))
            count += 1
            if err > max_err or worst is None:
                max_err = max(err, max_err)
                worst = (name, int(i), float(g[i]), float(numeric))
    return GradCheckResult(max_err, count, worst)


def save_checkpoint(path, params: dict, meta=None):
    """Write parameters as text: a header, ``meta`` lines, then each array.

    Layout (version 1)::

        IHGNN-CHECKPOINT 1
        meta <key> <value>
        param <name> <d0>[,<d1>...]
        <row-major values, one row per line, space separated>
    """
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}"]
    for k, v in (meta or {}).items():
        lines.append(f"meta {k} {v}")
    for name, p in params.items():
        p = np.asarray(p, dtype=np.float64)
        lines.append(f"param {name} {','.join(str(d) for d in p.shape)}")
        rows = p.reshape(p.shape[0], -1) if p.ndim > 1 else p.reshape(1, -1)
        for row in rows:
            lines.append(" ".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(params, meta)``."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DatasetLoadError(f"cannot read checkpoint {path}: {exc}") from exc
    head = lines[0].split() if lines else []
    if len(head) != 2 or head[0] != CHECKPOINT_MAGIC or int(head[1]) != CHECKPOINT_VERSION:
        raise InputError(f"{path} is not a version-{CHECKPOINT_VERSION} checkpoint")
    params, meta = {}, {}
    k = 1
    while k < len(lines):
        parts = lines[k].split(" ", 2)
        if parts[0] == "meta":
            meta[parts[1]] = parts[2] if len(parts) > 2 else ""
            k += 1
        elif parts[0] == "param":
            shape = tuple(int(d) for d in parts[2].split(",") if d)
            nrows = shape[0] if len(shape) > 1 else 1
            values = [float(x) for line in lines[k + 1:k + 1 + nrows] for x in line.split()]
            params[parts[1]] = np.asarray(values, dtype=np.float64).reshape(shape)
            k += 1 + nrows
        else:
            raise InputError(f"{path}:{k + 1}: unexpected line {lines[k]!r}")
    return params, meta
