"""Synthetic graph generators.

Two structural models are provided. ``sample_partition_graph`` is a planted
partition graph tuned by a single homophily target; ``sample_neighbor_distribution_graph``
takes a full class-to-class mixing matrix so that the neighbor-label
distribution of every class can be set independently. Node features are
isotropic Gaussians around hypercube vertices.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import CountsExceedNodes, DimensionTooSmall, ProbabilityOutOfRange
from .graph import Graph, SplitMasks, build_graph

# stream tags mixed into the user seed so structure, features and splits
# draw from independent generators
_EDGE_STREAM = 0
_FEATURE_STREAM = 1


@dataclass
class PartitionSpec:
    num_classes: int = 7
    nodes_per_class: int = 400
    avg_degree: float = 10.0
    homophily_target: float = 0.5
    feature_dim: int = 1433
    center_scale: float = 1.0
    noise_sigma: float = 1.0
    seed: int = 0

    kind = "partition"

    def __post_init__(self):
        if not 0.0 <= self.homophily_target <= 1.0:
            raise ValueError(f"homophily_target must be in [0, 1], got {self.homophily_target}")
        if min(self.num_classes, self.nodes_per_class, self.feature_dim) < 1:
            raise ValueError("num_classes, nodes_per_class and feature_dim must be >= 1")
        if not self.avg_degree < self.num_nodes - 1:
            raise ValueError(f"avg_degree {self.avg_degree} must be < num_nodes - 1 = {self.num_nodes - 1}")

    @property
    def num_nodes(self) -> int:
        return self.num_classes * self.nodes_per_class

    def to_dict(self) -> dict:
        return {"kind": self.kind, **asdict(self)}


@dataclass
class NeighborDistributionSpec:
    """Generator driven by a row-stochastic mixing matrix.

    Row ``c`` of ``mixing`` is the neighbor-label distribution a class-``c``
    node should see. An undirected graph can only realize matrices with
    ``n_c * M[c, c'] == n_c' * M[c', c]``; other matrices are realized in
    their symmetrized form.
    """
    mixing: np.ndarray
    nodes_per_class: int = 400
    avg_degree: float = 10.0
    feature_dim: int = 1433
    center_scale: float = 1.0
    noise_sigma: float = 1.0
    seed: int = 0

    kind = "neighbor-dist"

    def __post_init__(self):
        m = np.asarray(self.mixing, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"mixing matrix must be square, got shape {m.shape}")
        if (m < 0).any():
            raise ValueError("mixing matrix entries must be non-negative")
        if np.abs(m.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValueError("mixing matrix rows must sum to 1")
        self.mixing = m
        if not self.avg_degree < self.num_nodes - 1:
            raise ValueError(f"avg_degree {self.avg_degree} must be < num_nodes - 1 = {self.num_nodes - 1}")

    @property
    def num_classes(self) -> int:
        return self.mixing.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.num_classes * self.nodes_per_class

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mixing"] = self.mixing.tolist()
        return {"kind": self.kind, **d}


@dataclass
class SplitCounts:
    train: int = 160
    val: int = 500
    test: int = 1000


def spec_from_dict(d: dict, kind: str | None = None):
    """Build a generator spec from a JSON-style dict (unknown keys rejected)."""
    d = dict(d)
    kind = kind or d.pop("kind", None) or ("neighbor-dist" if "mixing" in d else "partition")
    d.pop("kind", None)
    cls = {"partition": PartitionSpec, "neighbor-dist": NeighborDistributionSpec}.get(kind)
    if cls is None:
        raise ValueError(f"unknown generator kind {kind!r} (expected 'partition' or 'neighbor-dist')")
    allowed = {f.name for f in fields(cls)}
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown {kind} spec field(s): {', '.join(sorted(unknown))}")
    return cls(**d)


# ---------------------------------------------------------------------------
# mixing matrices


def partition_mixing(homophily: float, num_classes: int) -> np.ndarray:
    """Mixing matrix of a planted partition: ``h`` on the diagonal, rest spread evenly."""
    off = (1.0 - homophily) / (num_classes - 1)
    m = np.full((num_classes, num_classes), off)
    np.fill_diagonal(m, homophily)
    return m


def cyclic_shift_mixing(num_classes: int, shift: int = 1) -> np.ndarray:
    """Class ``c`` links only to class ``c + shift (mod C)``."""
    return np.roll(np.eye(num_classes), shift, axis=1)


# ---------------------------------------------------------------------------
# structure


def partition_probabilities(spec: PartitionSpec) -> tuple[float, float]:
    """Intra- and inter-class edge probabilities hitting the target homophily
    and expected degree."""
    h, d, n = spec.homophily_target, spec.avg_degree, spec.nodes_per_class
    total = spec.num_nodes
    p_in = h * d / (n - 1) if n > 1 else 0.0
    if total > n:
        p_out = (1.0 - h) * d / (total - n)
    elif h < 1.0:
        raise ProbabilityOutOfRange("a single class cannot carry inter-class edges (need homophily_target = 1)")
    else:
        p_out = 0.0
    if n == 1 and h > 0:
        raise ProbabilityOutOfRange("a class of one node cannot have same-class neighbors")
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ProbabilityOutOfRange(
                f"{name} = {p:.4g} is not a probability; avg_degree {d} is too large for "
                f"{n} nodes per class at homophily {h}")
    return p_in, p_out


def block_probabilities(spec: NeighborDistributionSpec) -> np.ndarray:
    """Pairwise edge probability for every (class, class) block."""
    m = spec.mixing
    n = float(spec.nodes_per_class)
    p = spec.avg_degree * (m / n + m.T / n) / 2.0
    if (p > 1.0).any():
        c, c2 = np.unravel_index(np.argmax(p), p.shape)
        raise ProbabilityOutOfRange(
            f"edge probability {p[c, c2]:.4g} between classes {c} and {c2} exceeds 1; "
            f"lower avg_degree or raise nodes_per_class")
    return p


def _block_labels(num_classes: int, nodes_per_class: int) -> np.ndarray:
    return np.repeat(np.arange(num_classes), nodes_per_class)


def _sample_edges(labels: np.ndarray, probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli draw for every unordered pair i < j."""
    n = len(labels)
    chunks = []
    for i in range(n - 1):
        js = np.arange(i + 1, n)
        hit = rng.random(n - i - 1) < probs[labels[i], labels[js]]
        if hit.any():
            sel = js[hit]
            chunks.append(np.stack([np.full(len(sel), i), sel], axis=1))
    if not chunks:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(chunks)


def sample_partition_graph(spec: PartitionSpec) -> Graph:
    p_in, p_out = partition_probabilities(spec)
    probs = np.full((spec.num_classes, spec.num_classes), p_out)
    np.fill_diagonal(probs, p_in)
    return _sample_block_graph(spec, probs)


def sample_neighbor_distribution_graph(spec: NeighborDistributionSpec) -> Graph:
    return _sample_block_graph(spec, block_probabilities(spec))


def _sample_block_graph(spec, probs: np.ndarray) -> Graph:
    labels = _block_labels(spec.num_classes, spec.nodes_per_class)
    edges = _sample_edges(labels, probs, np.random.default_rng([spec.seed, _EDGE_STREAM]))
    centers = hypercube_centers(spec.num_classes, spec.feature_dim, spec.center_scale)
    features = sample_features(labels, centers, spec.noise_sigma, [spec.seed, _FEATURE_STREAM])
    return build_graph(edges, labels, features, num_classes=spec.num_classes)


def generate(spec) -> Graph:
    """Dispatch on the spec type."""
    if isinstance(spec, NeighborDistributionSpec):
        return sample_neighbor_distribution_graph(spec)
    return sample_partition_graph(spec)


# ---------------------------------------------------------------------------
# features and splits


def hypercube_centers(num_classes: int, feature_dim: int, center_scale: float = 1.0) -> np.ndarray:
    # indicator vertices: pairwise distance center_scale * sqrt(2)
    if feature_dim < num_classes:
        raise DimensionTooSmall(f"feature_dim {feature_dim} < num_classes {num_classes}")
    centers = np.zeros((num_classes, feature_dim))
    centers[np.arange(num_classes), np.arange(num_classes)] = center_scale
    return centers


def sample_features(labels, centers, noise_sigma: float, seed) -> np.ndarray:
    """Row v ~ N(centers[labels[v]], noise_sigma^2 I), returned as float32."""
    labels = np.asarray(labels, dtype=np.int64)
    centers = np.asarray(centers, dtype=np.float64)
    if len(labels) and labels.max() >= centers.shape[0]:
        raise DimensionTooSmall(f"label {labels.max()} has no center (only {centers.shape[0]} rows)")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((len(labels), centers.shape[1]))
    return (centers[labels] + noise_sigma * noise).astype(np.float32)


def random_split(num_nodes: int, counts: SplitCounts, seed) -> SplitMasks:
    total = counts.train + counts.val + counts.test
    if total > num_nodes:
        raise CountsExceedNodes(f"split sizes sum to {total} but only {num_nodes} nodes exist")
    perm = np.random.default_rng(seed).permutation(num_nodes)
    a, b = counts.train, counts.train + counts.val
    return SplitMasks(train=perm[:a], val=perm[a:b], test=perm[b:total])
