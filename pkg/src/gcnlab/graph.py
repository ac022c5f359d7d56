"""Graph storage: CSR adjacency, labels, features, split masks and the
on-disk dataset directory format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ChecksumMismatch,
    DimensionMismatch,
    DuplicateEdge,
    IndexOutOfRange,
    MalformedFile,
    SelfLoop,
)

FORMAT_VERSION = 1
SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class CsrAdjacency:
    row_offsets: np.ndarray
    col_indices: np.ndarray
    edge_values: np.ndarray | None = None

    @property
    def num_nodes(self) -> int:
        return len(self.row_offsets) - 1

    @property
    def nnz(self) -> int:
        return len(self.col_indices)

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def row_ids(self) -> np.ndarray:
        """Source node of every stored entry (COO row array)."""
        return np.repeat(np.arange(self.num_nodes), self.degrees())

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v]:self.row_offsets[v + 1]]

    def to_dense(self) -> np.ndarray:
        n = self.num_nodes
        out = np.zeros((n, n))
        vals = self.edge_values if self.edge_values is not None else 1.0
        out[self.row_ids(), self.col_indices] = vals
        return out


@dataclass(frozen=True)
class Graph:
    num_nodes: int
    num_classes: int
    adjacency: CsrAdjacency
    labels: np.ndarray
    features: np.ndarray

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        return self.adjacency.nnz // 2

    def degrees(self) -> np.ndarray:
        return self.adjacency.degrees()

    def edge_array(self) -> np.ndarray:
        """Undirected edges as an (E, 2) array with u < v, sorted."""
        rows = self.adjacency.row_ids()
        cols = self.adjacency.col_indices
        keep = rows < cols
        return np.stack([rows[keep], cols[keep]], axis=1)


@dataclass(frozen=True)
class SplitMasks:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in SPLIT_NAMES:
            object.__setattr__(self, name, np.sort(np.asarray(getattr(self, name), dtype=np.int64)))
        seen = np.concatenate([self.train, self.val, self.test])
        if len(np.unique(seen)) != len(seen):
            raise ValueError("split index sets must be pairwise disjoint")

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in SPLIT_NAMES}


def csr_from_directed(rows, cols, num_nodes, values=None) -> CsrAdjacency:
    """Sort (row, col) entries into CSR with ascending columns per row."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    order = np.lexsort((cols, rows))
    counts = np.bincount(rows, minlength=num_nodes)
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    vals = None if values is None else np.asarray(values, dtype=np.float64)[order]
    return CsrAdjacency(offsets, cols[order], vals)


def build_graph(edge_list, labels, features, num_classes: int | None = None) -> Graph:
    """Build an undirected simple graph.

    Each edge is given once in either orientation; both directions are
    stored. Self-loops, repeated edges (in any orientation) and node ids
    outside ``[0, len(labels))`` are rejected.
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    n = len(labels)
    features = np.asarray(features)
    if features.ndim != 2 or features.shape[0] != n:
        raise DimensionMismatch(
            f"features must have shape ({n}, feature_dim), got {features.shape}")
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if n else 0
    if n and (labels.min() < 0 or labels.max() >= num_classes):
        raise IndexOutOfRange(f"labels must lie in [0, {num_classes})")

    edges = np.asarray(edge_list, dtype=np.int64).reshape(-1, 2)
    if len(edges):
        if edges.min() < 0 or edges.max() >= n:
            bad = edges[(edges < 0).any(axis=1) | (edges >= n).any(axis=1)][0]
            raise IndexOutOfRange(f"edge {tuple(bad)} references a node outside [0, {n})")
        loops = edges[:, 0] == edges[:, 1]
        if loops.any():
            raise SelfLoop(f"self-loop at node {edges[loops][0, 0]}")
        lo = edges.min(axis=1)
        hi = edges.max(axis=1)
        keys = lo * n + hi
        uniq, counts = np.unique(keys, return_counts=True)
        if (counts > 1).any():
            k = uniq[counts > 1][0]
            raise DuplicateEdge(f"edge ({k // n}, {k % n}) given more than once")
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
    adjacency = csr_from_directed(rows, cols, n)
    return Graph(n, int(num_classes), adjacency, labels, features)


# ---------------------------------------------------------------------------
# dataset directory


def save_dataset(graph: Graph, masks: SplitMasks, meta: dict | None, dir_path) -> None:
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    full_meta = dict(meta or {})
    full_meta.update(
        num_nodes=graph.num_nodes,
        num_classes=graph.num_classes,
        feature_dim=graph.feature_dim,
        format_version=FORMAT_VERSION,
    )
    full_meta.setdefault("generator", {})
    (d / "meta.json").write_text(json.dumps(full_meta, indent=2, sort_keys=True) + "\n")

    edges = graph.edge_array()
    with open(d / "edges.tsv", "w") as fh:
        fh.writelines(f"{u}\t{v}\n" for u, v in edges)
    with open(d / "labels.csv", "w") as fh:
        fh.writelines(f"{y}\n" for y in graph.labels)
    graph.features.astype("<f4").tofile(d / "features.bin")

    split = np.full(graph.num_nodes, "none", dtype=object)
    for name, idx in masks.as_dict().items():
        split[idx] = name
    with open(d / "masks.csv", "w") as fh:
        fh.writelines(f"{i},{s}\n" for i, s in enumerate(split))


def _read_lines(path: Path) -> list[str]:
    if not path.exists():
        raise MalformedFile(f"{path}: file is missing")
    return path.read_text().splitlines()


def _parse_int(path: Path, lineno: int, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MalformedFile(f"{path}:{lineno}: expected an integer, got {token!r}") from None


def load_dataset(dir_path) -> tuple[Graph, SplitMasks, dict]:
    d = Path(dir_path)
    meta_path = d / "meta.json"
    try:
        meta = json.loads(meta_path.read_text())
    except FileNotFoundError:
        raise MalformedFile(f"{meta_path}: file is missing") from None
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{meta_path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    try:
        n = int(meta["num_nodes"])
        num_classes = int(meta["num_classes"])
        feature_dim = int(meta["feature_dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(f"{meta_path}: missing or invalid field {exc}") from None
    if meta.get("format_version") != FORMAT_VERSION:
        raise MalformedFile(f"{meta_path}: unsupported format_version {meta.get('format_version')!r}")

    labels_path = d / "labels.csv"
    label_lines = _read_lines(labels_path)
    if len(label_lines) != n:
        raise MalformedFile(
            f"{labels_path}:{len(label_lines)}: expected {n} lines (meta num_nodes), found {len(label_lines)}")
    labels = np.array([_parse_int(labels_path, i + 1, s.strip()) for i, s in enumerate(label_lines)],
                      dtype=np.int64)

    edges_path = d / "edges.tsv"
    edges = []
    for i, line in enumerate(_read_lines(edges_path), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedFile(f"{edges_path}:{i}: expected 'u<TAB>v', got {line!r}")
        u, v = (_parse_int(edges_path, i, p) for p in parts)
        if not u < v:
            raise MalformedFile(f"{edges_path}:{i}: edge endpoints must satisfy u < v")
        edges.append((u, v))

    feat_path = d / "features.bin"
    if not feat_path.exists():
        raise MalformedFile(f"{feat_path}: file is missing")
    raw = np.fromfile(feat_path, dtype="<f4")
    if raw.size != n * feature_dim:
        raise ChecksumMismatch(
            f"{feat_path}: byte offset {raw.size * 4}: expected {n}x{feature_dim} float32 values, "
            f"found {raw.size}")
    features = raw.reshape(n, feature_dim).astype(np.float32)

    masks_path = d / "masks.csv"
    buckets = {name: [] for name in SPLIT_NAMES}
    mask_lines = _read_lines(masks_path)
    for i, line in enumerate(mask_lines, start=1):
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedFile(f"{masks_path}:{i}: expected 'node_id,split', got {line!r}")
        node = _parse_int(masks_path, i, parts[0])
        if not 0 <= node < n:
            raise MalformedFile(f"{masks_path}:{i}: node id {node} outside [0, {n})")
        split = parts[1].strip()
        if split in buckets:
            buckets[split].append(node)
        elif split != "none":
            raise MalformedFile(f"{masks_path}:{i}: unknown split {split!r}")

    try:
        graph = build_graph(edges, labels, features, num_classes=num_classes)
        masks = SplitMasks(**buckets)
    except (IndexOutOfRange, SelfLoop, DuplicateEdge, DimensionMismatch, ValueError) as exc:
        raise MalformedFile(f"{d}: {exc}") from exc
    return graph, masks, meta
