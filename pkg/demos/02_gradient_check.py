"""
Checking hand-written backpropagation
=====================================

The GCN's gradients are derived by hand. Compare them with central finite
differences on a tiny random graph.
"""

import numpy as np

from gcnlab import kernels as K
from gcnlab.graph import build_graph
from gcnlab.model import GcnParams, backward, forward, init_params

rng = np.random.default_rng(0)
n, f, hidden, c = 20, 8, 5, 3
iu, ju = np.triu_indices(n, k=1)
keep = rng.random(len(iu)) < 0.2
graph = build_graph(np.stack([iu[keep], ju[keep]], 1), rng.integers(0, c, n), rng.standard_normal((n, f)))
a_hat = K.normalize_adjacency(graph.adjacency)
params = init_params(f, hidden, c, seed=0)
mask = rng.choice(n, 8, replace=False)

_, analytic = backward(forward(graph, a_hat, params), graph.labels, mask)


def loss(p):
    return K.masked_cross_entropy(forward(graph, a_hat, GcnParams(**p))["logits"], graph.labels, mask)[0]


eps = 1e-5
for name, value in params.as_dict().items():
    numeric = np.zeros_like(value)
    for idx in np.ndindex(value.shape):
        plus = {k: v.copy() for k, v in params.as_dict().items()}
        minus = {k: v.copy() for k, v in params.as_dict().items()}
        plus[name][idx] += eps
        minus[name][idx] -= eps
        numeric[idx] = (loss(plus) - loss(minus)) / (2 * eps)
    err = np.abs(analytic[name] - numeric).max() / max(np.abs(numeric).max(), 1e-12)
    print(f"{name}: max relative error {err:.2e}")
