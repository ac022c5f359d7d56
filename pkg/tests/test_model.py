import math

import numpy as np
import pytest

from gcnlab import kernels as K
from gcnlab.errors import CacheMissing, DimensionMismatch
from gcnlab.graph import SplitMasks, build_graph
from gcnlab.model import (GcnParams, TrainConfig, backward, extract_embeddings, forward, init_params,
                          read_log_csv, train)
from gcnlab.synthgen import PartitionSpec, SplitCounts, random_split, sample_partition_graph

from conftest import random_graph
from gradcheck import max_relative_error, numeric_grads


def small_problem(seed, n=20, f=8, hidden=5, c=3):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.2, num_classes=c, feature_dim=f)
    a_hat = K.normalize_adjacency(g.adjacency)
    params = init_params(f, hidden, c, seed)
    params.b1 = rng.standard_normal(hidden) * 0.1
    params.b2 = rng.standard_normal(c) * 0.1
    mask = rng.choice(n, size=8, replace=False)
    return g, a_hat, params, mask


def test_init_deterministic():
    a, b = init_params(30, 6, 4, 7), init_params(30, 6, 4, 7)
    for k in a.as_dict():
        np.testing.assert_array_equal(a.as_dict()[k], b.as_dict()[k])


def test_init_glorot_bound_and_zero_bias():
    p = init_params(1433, 128, 7, 0)
    bound = math.sqrt(6 / (1433 + 128))
    assert bound == pytest.approx(0.0620, abs=1e-4)
    assert np.abs(p.W1).max() <= bound
    assert np.abs(p.W1).max() > 0.99 * bound
    assert np.abs(p.W2).max() <= math.sqrt(6 / 135)
    assert not p.b1.any() and not p.b2.any()
    assert p.W1.shape == (1433, 128) and p.W2.shape == (128, 7)


def test_forward_zero_features_uniform():
    g = build_graph([(0, 1), (1, 2)], [0, 1, 2], np.zeros((3, 4)))
    out = forward(g, K.normalize_adjacency(g.adjacency), init_params(4, 3, 3, 0))
    assert not out["logits"].any()
    np.testing.assert_allclose(out["probs"], 1 / 3)


def test_isolated_node_is_an_mlp(rng):
    x = rng.standard_normal((1, 5))
    g = build_graph([], [0], x, num_classes=2)
    p = init_params(5, 4, 2, 1)
    p.b1 = rng.standard_normal(4)
    out = forward(g, K.normalize_adjacency(g.adjacency), p)
    h = K.elu(x @ p.W1 + p.b1)
    np.testing.assert_allclose(out["logits"], h @ p.W2 + p.b2, rtol=1e-14)


def test_eval_forward_deterministic():
    g, a_hat, p, _ = small_problem(0)
    a = forward(g, a_hat, p, dropout_rate=0.5, training=False, seed=1)
    b = forward(g, a_hat, p, dropout_rate=0.5, training=False, seed=2)
    np.testing.assert_array_equal(a["logits"], b["logits"])
    np.testing.assert_array_equal(a["H1"], a["H1_dropped"])


def test_forward_dimension_mismatch():
    g, a_hat, p, _ = small_problem(0)
    with pytest.raises(DimensionMismatch):
        forward(g, a_hat, init_params(9, 5, 3, 0))


@pytest.mark.parametrize("seed", range(10))
def test_gradient_check(seed):
    g, a_hat, p, mask = small_problem(seed)
    cache = forward(g, a_hat, p, training=False)
    _, analytic = backward(cache, g.labels, mask)
    numeric = numeric_grads(g, a_hat, p, g.labels, mask)
    assert max_relative_error(analytic, numeric) < 1e-4


def test_gradient_check_with_fixed_dropout_mask():
    g, a_hat, p, mask = small_problem(3)
    cache = forward(g, a_hat, p, dropout_rate=0.4, training=True, seed=[5, 5])
    _, analytic = backward(cache, g.labels, mask)
    numeric = numeric_grads(g, a_hat, p, g.labels, mask, dropout_rate=0.4, seed=[5, 5])
    assert max_relative_error(analytic, numeric) < 1e-4


def test_backward_needs_cache():
    with pytest.raises(CacheMissing):
        backward(None, [0], [0])
    with pytest.raises(CacheMissing):
        backward({"logits": np.zeros((1, 2))}, [0], [0])


def test_saturated_gradients_vanish():
    g, a_hat, p, mask = small_problem(1)
    cache = forward(g, a_hat, p)
    cache["logits"] = np.where(np.eye(3)[g.labels] > 0, 1000.0, 0.0)
    _, grads = backward(cache, g.labels, mask)
    for v in grads.values():
        assert np.abs(v).max() < 1e-12


def test_duplicated_mask_same_gradients():
    g, a_hat, p, mask = small_problem(2)
    cache = forward(g, a_hat, p)
    l1, g1 = backward(cache, g.labels, mask)
    l2, g2 = backward(cache, g.labels, np.concatenate([mask, mask]))
    assert l1 == pytest.approx(l2, rel=1e-14)
    for k in g1:
        np.testing.assert_allclose(g1[k], g2[k], rtol=1e-12, atol=1e-15)


def test_extract_embeddings_matches_eval_forward():
    g, a_hat, p, _ = small_problem(4)
    emb = extract_embeddings(g, a_hat, p)
    np.testing.assert_array_equal(emb, forward(g, a_hat, p, dropout_rate=0.5, training=False)["H1"])


def test_embeddings_zero_input_zero_output():
    g = build_graph([(0, 1)], [0, 1], np.zeros((2, 3)))
    assert not extract_embeddings(g, K.normalize_adjacency(g.adjacency), init_params(3, 4, 2, 0)).any()


# --- training on small synthetic data ----------------------------------

@pytest.fixture(scope="module")
def small_dataset():
    spec = PartitionSpec(num_classes=4, nodes_per_class=60, avg_degree=6, homophily_target=0.8,
                         feature_dim=40, seed=0)
    g = sample_partition_graph(spec)
    return g, random_split(g.num_nodes, SplitCounts(40, 60, 100), 1)


def test_zero_epoch_training(small_dataset):
    g, masks = small_dataset
    params, log = train(g, masks, TrainConfig(epochs=0, hidden=16, seed=3))
    init = init_params(g.feature_dim, 16, g.num_classes, [3, 0])
    np.testing.assert_array_equal(params.W1, init.W1)
    assert log.epochs == []
    assert 0 <= log.test_acc <= 1
    assert log.confusion.counts.sum() == 100


def test_training_learns(small_dataset):
    g, masks = small_dataset
    _, log = train(g, masks, TrainConfig(epochs=100, hidden=16, seed=0))
    assert len(log.epochs) == 100
    assert log.epochs[0]["train_loss"] == pytest.approx(math.log(4), abs=0.2)
    assert log.epochs[-1]["train_loss"] < log.epochs[0]["train_loss"]
    assert log.test_acc > 0.7
    assert log.similarity_report.gap > 0
    for r in log.epochs:
        assert 0 <= r["train_acc"] <= 1 and 0 <= r["val_acc"] <= 1


def test_training_deterministic(small_dataset):
    g, masks = small_dataset
    cfg = TrainConfig(epochs=20, hidden=8, seed=5)
    p1, l1 = train(g, masks, cfg)
    p2, l2 = train(g, masks, cfg)
    np.testing.assert_array_equal(p1.W1, p2.W1)
    assert l1.epochs == l2.epochs


def test_bias_toggle(small_dataset):
    g, masks = small_dataset
    p, _ = train(g, masks, TrainConfig(epochs=5, hidden=8, use_bias=False))
    assert not p.b1.any() and not p.b2.any()


def test_train_log_files(small_dataset, tmp_path):
    g, masks = small_dataset
    _, log = train(g, masks, TrainConfig(epochs=7, hidden=8))
    log.save(tmp_path)
    header = (tmp_path / "train_log.csv").read_text().splitlines()[0]
    assert header == "epoch,train_loss,train_acc,val_acc"
    assert read_log_csv(tmp_path / "train_log.csv") == log.epochs
    for name in ("summary.json", "confusion.csv", "similarity.json"):
        assert (tmp_path / name).exists()
