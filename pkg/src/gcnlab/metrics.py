"""Structural and model-quality diagnostics."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyMask, TooFewNodes
from .graph import Graph

NORM_EPS = 1e-12
DEFAULT_MAX_PAIRS = 100_000


def node_homophily(graph: Graph) -> float:
    """Average over nodes of the fraction of neighbors sharing the node's label.

    Isolated nodes contribute 0 but still count toward the average.
    """
    n = graph.num_nodes
    if n == 0:
        return 0.0
    adj = graph.adjacency
    rows = adj.row_ids()
    same = (graph.labels[rows] == graph.labels[adj.col_indices]).astype(np.float64)
    same_count = np.bincount(rows, weights=same, minlength=n)
    deg = adj.degrees()
    frac = np.divide(same_count, deg, out=np.zeros(n), where=deg > 0)
    return float(frac.sum() / n)


def neighbor_label_distribution(graph: Graph) -> np.ndarray:
    """Row c: mean neighbor-label histogram (normalized) over class-c nodes
    that have at least one neighbor."""
    n, k = graph.num_nodes, graph.num_classes
    adj = graph.adjacency
    rows = adj.row_ids()
    counts = np.zeros((n, k))
    np.add.at(counts, (rows, graph.labels[adj.col_indices]), 1.0)
    deg = adj.degrees()
    has_nbr = deg > 0
    freq = counts[has_nbr] / deg[has_nbr, None]
    labels = graph.labels[has_nbr]
    out = np.zeros((k, k))
    np.add.at(out, labels, freq)
    class_sizes = np.bincount(labels, minlength=k)
    empty = class_sizes == 0
    if empty.any():
        warnings.warn(f"classes {np.flatnonzero(empty).tolist()} have no node with neighbors; "
                      "their rows are all zero", RuntimeWarning, stacklevel=2)
    out[~empty] /= class_sizes[~empty, None]
    return out


def distribution_distinguishability(m_hat) -> np.ndarray:
    """Pairwise total-variation distance between rows."""
    m = np.asarray(m_hat, dtype=np.float64)
    return 0.5 * np.abs(m[:, None, :] - m[None, :, :]).sum(axis=2)


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < NORM_EPS or nv < NORM_EPS:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, norms, out=np.zeros_like(x), where=norms >= NORM_EPS)


@dataclass
class SimilarityReport:
    in_class_mean: float
    across_class_mean: float
    gap: float
    per_class_pair: np.ndarray
    pairs_sampled: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_class_pair"] = np.asarray(self.per_class_pair).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimilarityReport":
        return cls(d["in_class_mean"], d["across_class_mean"], d["gap"],
                   np.asarray(d["per_class_pair"]), d["pairs_sampled"])

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _class_pair_means(unit: np.ndarray, labels: np.ndarray, num_classes: int) -> np.ndarray:
    # mean over all (u in c, v in c', u != v) of <u_hat, v_hat>, via class sums
    sums = np.zeros((num_classes, unit.shape[1]))
    np.add.at(sums, labels, unit)
    sizes = np.bincount(labels, minlength=num_classes).astype(np.float64)
    self_dots = np.bincount(labels, weights=(unit * unit).sum(axis=1), minlength=num_classes)
    gram = sums @ sums.T
    denom = np.outer(sizes, sizes)
    np.fill_diagonal(gram, np.diag(gram) - self_dots)
    np.fill_diagonal(denom, sizes * (sizes - 1))
    out = np.divide(gram, denom, out=np.full_like(gram, np.nan), where=denom > 0)
    out = np.clip((out + out.T) / 2.0, -1.0, 1.0)
    return out


def _bucket_mean(unit, i, j, budget, rng) -> tuple[float, int]:
    if len(i) > budget:
        pick = np.sort(rng.choice(len(i), size=budget, replace=False))
        i, j = i[pick], j[pick]
    sims = np.einsum("ij,ij->i", unit[i], unit[j])
    # canonical summation order keeps the exhaustive mean order-independent
    return float(np.clip(np.sort(sims).sum() / len(sims), -1.0, 1.0)), len(sims)


def class_similarity_report(embeddings, labels, max_pairs_per_bucket: int = DEFAULT_MAX_PAIRS,
                            seed=0, num_classes: int | None = None) -> SimilarityReport:
    """Mean cosine similarity of same-label and different-label node pairs.

    Each bucket is enumerated exactly when it holds at most
    ``max_pairs_per_bucket`` pairs and sampled uniformly without replacement
    otherwise. ``per_class_pair`` is always exact.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if x.shape[0] != len(labels):
        raise ValueError(f"{x.shape[0]} embeddings but {len(labels)} labels")
    if num_classes is None:
        num_classes = int(labels.max()) + 1
    unit = _unit_rows(x)

    i, j = np.triu_indices(len(labels), k=1)
    same = labels[i] == labels[j]
    if not same.any() or same.all():
        raise TooFewNodes("need at least one same-label pair and one different-label pair")
    rng = np.random.default_rng(seed)
    in_mean, n_in = _bucket_mean(unit, i[same], j[same], max_pairs_per_bucket, rng)
    across_mean, n_across = _bucket_mean(unit, i[~same], j[~same], max_pairs_per_bucket, rng)
    return SimilarityReport(
        in_class_mean=in_mean,
        across_class_mean=across_mean,
        gap=in_mean - across_mean,
        per_class_pair=_class_pair_means(unit, labels, num_classes),
        pairs_sampled=n_in + n_across,
    )


def accuracy(predictions, labels, mask) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    idx = _mask_index(mask)
    return float(np.mean(predictions[idx] == labels[idx]))


def _mask_index(mask) -> np.ndarray:
    mask = np.asarray(mask)
    idx = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
    if idx.size == 0:
        raise EmptyMask("evaluation mask is empty")
    return idx


@dataclass
class ConfusionMatrix:
    counts: np.ndarray

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def row_normalized(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        return np.divide(self.counts, totals, out=np.zeros(self.counts.shape), where=totals > 0)

    def diagonal_fraction(self) -> float:
        """Share of evaluated nodes on the diagonal, i.e. accuracy."""
        total = self.counts.sum()
        return float(np.trace(self.counts) / total) if total else 0.0

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["true\\pred", *range(self.num_classes)])
            for c, row in enumerate(self.counts):
                w.writerow([c, *row.tolist()])

    @classmethod
    def load_csv(cls, path) -> "ConfusionMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        return cls(np.array([[int(v) for v in r[1:]] for r in rows], dtype=np.int64))


def confusion(predictions, labels, mask, num_classes: int | None = None) -> ConfusionMatrix:
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    idx = _mask_index(mask)
    if num_classes is None:
        num_classes = int(max(labels.max(), predictions.max())) + 1
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (labels[idx], predictions[idx]), 1)
    return ConfusionMatrix(counts)
