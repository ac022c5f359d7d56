import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcnlab.errors import EmptyMask, TooFewNodes
from gcnlab.graph import build_graph
from gcnlab.metrics import (ConfusionMatrix, accuracy, class_similarity_report, confusion,
                            cosine_similarity, distribution_distinguishability,
                            neighbor_label_distribution, node_homophily)
from gcnlab.synthgen import PartitionSpec, sample_partition_graph

from conftest import random_graph


def brute_force_homophily(edges, labels):
    """Direct transcription of the per-node formula over Python adjacency sets."""
    nbrs = {v: set() for v in range(len(labels))}
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    total = 0.0
    for v, ns in nbrs.items():
        if ns:
            total += sum(labels[w] == labels[v] for w in ns) / len(ns)
    return total / len(labels)


def g_of(edges, labels, num_classes=None):
    return build_graph(edges, labels, np.zeros((len(labels), 1)), num_classes=num_classes)


def test_homophily_triangle_same_label(triangle):
    assert node_homophily(triangle) == 1.0


def test_homophily_single_edge_different():
    assert node_homophily(g_of([(0, 1)], [0, 1])) == 0.0


def test_homophily_star():
    # center a with leaves a, a, b: (2/3 + 1 + 1 + 0) / 4
    g = g_of([(0, 1), (0, 2), (0, 3)], [0, 0, 0, 1])
    assert node_homophily(g) == pytest.approx((2 / 3 + 2) / 4)
    assert node_homophily(g) == pytest.approx(0.6667, abs=1e-4)


def test_isolated_nodes_count_as_zero():
    g = g_of([(0, 1)], [0, 0, 0])
    assert node_homophily(g) == pytest.approx(2 / 3)


def test_homophily_matches_brute_force_on_100_graphs():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 51))
        g = random_graph(rng, n, float(rng.uniform(0, 0.4)), num_classes=int(rng.integers(1, 5)))
        edges = g.edge_array().tolist()
        assert node_homophily(g) == pytest.approx(brute_force_homophily(edges, g.labels.tolist()),
                                                  rel=1e-12, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 30), p=st.floats(0.05, 1), k=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_homophily_bounds_and_one_iff_pure(n, p, k, seed):
    g = random_graph(np.random.default_rng(seed), n, p, num_classes=k)
    h = node_homophily(g)
    assert 0.0 <= h <= 1.0
    if (g.degrees() > 0).all():
        e = g.edge_array()
        pure = bool((g.labels[e[:, 0]] == g.labels[e[:, 1]]).all())
        assert (h == pytest.approx(1.0)) == pure


def test_neighbor_distribution_single_edge():
    m = neighbor_label_distribution(g_of([(0, 1)], [0, 1]))
    np.testing.assert_array_equal(m, [[0, 1], [1, 0]])


def test_neighbor_distribution_pure_homophily_identity():
    g = sample_partition_graph(PartitionSpec(homophily_target=1.0, nodes_per_class=50, num_classes=4,
                                             avg_degree=5, feature_dim=4, seed=1))
    np.testing.assert_allclose(neighbor_label_distribution(g), np.eye(4))


def test_neighbor_distribution_empty_class_warns():
    with pytest.warns(RuntimeWarning):
        m = neighbor_label_distribution(g_of([(0, 1)], [0, 0, 1], num_classes=2))
    np.testing.assert_array_equal(m[1], [0, 0])


def test_neighbor_distribution_row_stochastic(rng):
    g = random_graph(rng, 40, 0.2, num_classes=3)
    m = neighbor_label_distribution(g)
    np.testing.assert_allclose(m.sum(axis=1), 1.0)


def test_tv_examples():
    assert distribution_distinguishability([[0.3, 0.7], [0.3, 0.7]])[0, 1] == 0
    assert distribution_distinguishability([[1, 0], [0, 1]])[0, 1] == 1
    assert distribution_distinguishability([[0.5, 0.5], [0.9, 0.1]])[0, 1] == pytest.approx(0.4)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 6), c=st.integers(2, 8))
def test_tv_is_a_metric(seed, k, c):
    rng = np.random.default_rng(seed)
    m = rng.dirichlet(np.ones(c), size=k)
    d = distribution_distinguishability(m)
    np.testing.assert_array_equal(d, d.T)
    assert (np.diag(d) == 0).all()
    assert ((d >= 0) & (d <= 1 + 1e-12)).all()
    for a, b, e in itertools.permutations(range(k), 3):
        assert d[a, b] <= d[a, e] + d[e, b] + 1e-12


def test_cosine_examples():
    u = np.array([1.0, 2.0, -3.0])
    assert cosine_similarity(u, u) == pytest.approx(1.0)
    assert cosine_similarity([1, 0], [0, 5]) == 0.0
    assert cosine_similarity(u, -u) == pytest.approx(-1.0)
    assert cosine_similarity([0, 0], [1, 1]) == 0.0


def exhaustive_report(x, labels):
    """Plain double loop over all pairs, using cosine_similarity."""
    inc, acr = [], []
    for i, j in itertools.combinations(range(len(labels)), 2):
        (inc if labels[i] == labels[j] else acr).append(cosine_similarity(x[i], x[j]))
    return np.mean(inc), np.mean(acr), len(inc) + len(acr)


def test_similarity_identical_embeddings():
    r = class_similarity_report(np.ones((6, 3)), [0, 0, 1, 1, 2, 2])
    assert r.in_class_mean == pytest.approx(1) and r.across_class_mean == pytest.approx(1)
    assert r.gap == pytest.approx(0, abs=1e-12)


def test_similarity_one_hot():
    labels = np.array([0, 1, 2, 0, 1, 2, 2])
    r = class_similarity_report(np.eye(3)[labels], labels)
    assert (r.in_class_mean, r.across_class_mean, r.gap) == (1.0, 0.0, 1.0)
    np.testing.assert_allclose(r.per_class_pair, np.eye(3))


def test_similarity_matches_enumeration_and_sampling_identical(rng):
    x = rng.standard_normal((20, 5))
    labels = np.array([0] * 10 + [1] * 10)
    inc, acr, total = exhaustive_report(x, labels)
    assert total == 190
    exact = class_similarity_report(x, labels, max_pairs_per_bucket=190, seed=1)
    other = class_similarity_report(x, labels, max_pairs_per_bucket=10_000, seed=99)
    assert exact.in_class_mean == pytest.approx(inc, rel=1e-12)
    assert exact.across_class_mean == pytest.approx(acr, rel=1e-12)
    assert exact.pairs_sampled == 190
    assert exact.to_dict() == other.to_dict()


def test_per_class_pair_matches_enumeration(rng):
    x = rng.standard_normal((15, 4))
    x[3] = 0.0  # zero-norm row counts as cosine 0
    labels = rng.integers(0, 3, size=15)
    r = class_similarity_report(x, labels, num_classes=3)
    for a in range(3):
        for b in range(3):
            sims = [cosine_similarity(x[i], x[j]) for i in range(15) for j in range(15)
                    if i != j and labels[i] == a and labels[j] == b]
            assert r.per_class_pair[a, b] == pytest.approx(np.mean(sims), abs=1e-12)
    np.testing.assert_array_equal(r.per_class_pair, r.per_class_pair.T)


def test_similarity_sampled_bucket_size(rng):
    x = rng.standard_normal((60, 4))
    labels = np.repeat([0, 1, 2], 20)
    r = class_similarity_report(x, labels, max_pairs_per_bucket=100, seed=0)
    assert r.pairs_sampled == 200
    full = class_similarity_report(x, labels)
    assert abs(r.in_class_mean - full.in_class_mean) < 0.2
    assert r.gap == r.in_class_mean - r.across_class_mean


def test_similarity_permutation_invariant(rng):
    x = rng.standard_normal((25, 6))
    labels = rng.integers(0, 3, size=25)
    perm = rng.permutation(25)
    a = class_similarity_report(x, labels)
    b = class_similarity_report(x[perm], labels[perm])
    assert a.in_class_mean == b.in_class_mean
    assert a.across_class_mean == b.across_class_mean


def test_similarity_too_few_nodes():
    with pytest.raises(TooFewNodes):
        class_similarity_report(np.ones((3, 2)), [0, 1, 2])


def test_accuracy_and_confusion_perfect():
    labels = np.array([0, 1, 2, 2, 1])
    assert accuracy(labels, labels, np.arange(5)) == 1.0
    cm = confusion(labels, labels, np.arange(5), 3)
    np.testing.assert_array_equal(cm.counts, np.diag([1, 2, 2]))


def test_accuracy_and_confusion_shifted():
    labels = np.array([0, 1, 2, 0])
    pred = (labels + 1) % 3
    assert accuracy(pred, labels, np.ones(4, bool)) == 0.0
    cm = confusion(pred, labels, np.arange(4), 3)
    assert np.trace(cm.counts) == 0
    assert cm.counts[0, 1] == 2 and cm.counts[1, 2] == 1 and cm.counts[2, 0] == 1


def test_hand_tallied_confusion():
    labels = np.array([0, 0, 0, 1, 1, 1, 2, 2, 2, 2])
    pred = np.array([0, 0, 1, 1, 1, 2, 2, 2, 2, 0])
    assert accuracy(pred, labels, np.arange(10)) == pytest.approx(0.7)
    cm = confusion(pred, labels, np.arange(10), 3)
    np.testing.assert_array_equal(cm.counts, [[2, 1, 0], [0, 2, 1], [1, 0, 3]])
    np.testing.assert_allclose(cm.row_normalized, [[2 / 3, 1 / 3, 0], [0, 2 / 3, 1 / 3], [0.25, 0, 0.75]])
    assert cm.counts.sum() == 10
    assert cm.diagonal_fraction() == pytest.approx(0.7)


def test_confusion_absent_class_zero_row():
    cm = confusion([0, 0], [0, 0], [0, 1], 3)
    np.testing.assert_array_equal(cm.row_normalized[1:], 0)


def test_confusion_subset_mask():
    cm = confusion([0, 1, 1], [0, 0, 1], [1, 2], 2)
    np.testing.assert_array_equal(cm.counts, [[0, 1], [0, 1]])


def test_empty_mask_errors():
    with pytest.raises(EmptyMask):
        accuracy([0], [0], np.zeros(1, bool))
    with pytest.raises(EmptyMask):
        confusion([0], [0], [], 1)


def test_confusion_csv_roundtrip(tmp_path):
    cm = ConfusionMatrix(np.array([[3, 1], [0, 4]]))
    cm.save_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0].split(",")[1:] == ["0", "1"]
    np.testing.assert_array_equal(ConfusionMatrix.load_csv(tmp_path / "c.csv").counts, cm.counts)


def test_similarity_json_roundtrip(tmp_path, rng):
    import json
    from gcnlab.metrics import SimilarityReport
    r = class_similarity_report(rng.standard_normal((10, 3)), np.arange(10) % 2)
    r.save_json(tmp_path / "s.json")
    back = SimilarityReport.from_dict(json.loads((tmp_path / "s.json").read_text()))
    assert back.gap == r.gap
    np.testing.assert_array_equal(back.per_class_pair, r.per_class_pair)
