"""Numeric building blocks for the GCN: normalized adjacency, sparse-dense
products, activations, loss, dropout and Adam."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, EmptyMask
from .graph import CsrAdjacency, csr_from_directed


def normalize_adjacency(adjacency: CsrAdjacency) -> CsrAdjacency:
    """Symmetric normalization with self-loops, D^-1/2 (A + I) D^-1/2.

    Degrees are taken in A + I, so isolated nodes end up with a single
    diagonal entry equal to 1.
    """
    n = adjacency.num_nodes
    rows = np.concatenate([adjacency.row_ids(), np.arange(n)])
    cols = np.concatenate([adjacency.col_indices, np.arange(n)])
    deg = adjacency.degrees().astype(np.float64) + 1.0
    inv_sqrt = 1.0 / np.sqrt(deg)
    values = inv_sqrt[rows] * inv_sqrt[cols]
    return csr_from_directed(rows, cols, n, values)


def to_scipy(adjacency: CsrAdjacency) -> sp.csr_matrix:
    n = adjacency.num_nodes
    vals = adjacency.edge_values
    if vals is None:
        vals = np.ones(adjacency.nnz)
    return sp.csr_matrix((vals, adjacency.col_indices, adjacency.row_offsets), shape=(n, n))


def spmm(a_hat, x: np.ndarray) -> np.ndarray:
    """Sparse (CSR) times dense. Accepts a CsrAdjacency or a scipy CSR matrix."""
    mat = to_scipy(a_hat) if isinstance(a_hat, CsrAdjacency) else a_hat
    x = np.asarray(x, dtype=np.float64)
    if mat.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"cannot multiply {mat.shape} by {x.shape}")
    return np.asarray(mat @ x)


def elu(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def softmax_rows(logits):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def masked_cross_entropy(logits, labels, mask):
    """Mean negative log-likelihood over the rows listed in ``mask``.

    ``mask`` is an index array (repeats count once per occurrence) or a
    boolean array over rows. Returns ``(loss, grad_logits)``.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    mask = np.asarray(mask)
    idx = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
    if idx.size == 0:
        raise EmptyMask("cross-entropy over an empty mask")

    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    log_p = z[idx, labels[idx]] - log_norm[idx]
    loss = -log_p.mean()

    probs = np.exp(z - log_norm[:, None])
    g = probs[idx]
    g[np.arange(idx.size), labels[idx]] -= 1.0
    grad = np.zeros_like(logits)
    np.add.at(grad, idx, g / idx.size)
    return float(loss), grad


def dropout(x, rate: float, seed, training: bool = True):
    """Inverted dropout. Returns ``(output, kept_mask)``; identity in eval mode."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    x = np.asarray(x, dtype=np.float64)
    if not training or rate == 0.0:
        return x.copy(), np.ones(x.shape, dtype=bool)
    rng = np.random.default_rng(seed)
    kept = rng.random(x.shape) >= rate
    return np.where(kept, x / (1.0 - rate), 0.0), kept


@dataclass
class AdamState:
    """Moment estimates for a dict of named parameter arrays."""
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 5e-4
    step_count: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState) -> dict:
    """One Adam update with L2 weight decay folded into the gradients.

    Returns new parameter arrays; ``state`` is updated in place.
    """
    if params.keys() != grads.keys():
        raise DimensionMismatch(f"parameter names {sorted(params)} != gradient names {sorted(grads)}")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    out = {}
    for name, p in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != np.shape(p):
            raise DimensionMismatch(f"{name}: grad shape {g.shape} != param shape {np.shape(p)}")
        if state.weight_decay:
            g = g + state.weight_decay * p
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(g)
            v = np.zeros_like(g)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        state.first_moment[name] = m
        state.second_moment[name] = v
        out[name] = p - state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return out
