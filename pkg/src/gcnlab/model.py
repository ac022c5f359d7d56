"""Two-layer GCN, softmax(Â · dropout(ELU(Â X W1 + b1)) W2 + b2), trained
full-batch with hand-written backpropagation."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels as K
from .errors import CacheMissing, DimensionMismatch
from .graph import CsrAdjacency, Graph, SplitMasks
from .metrics import (ConfusionMatrix, SimilarityReport, accuracy, class_similarity_report,
                      confusion)

log = logging.getLogger(__name__)

PARAM_NAMES = ("W1", "b1", "W2", "b2")


@dataclass
class GcnParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in PARAM_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "GcnParams":
        return cls(**{k: np.asarray(d[k], dtype=np.float64) for k in PARAM_NAMES})

    def copy(self) -> "GcnParams":
        return GcnParams(**{k: v.copy() for k, v in self.as_dict().items()})


@dataclass
class TrainConfig:
    epochs: int = 300
    hidden: int = 128
    lr: float = 0.01
    weight_decay: float = 5e-4
    dropout_rate: float = 0.5
    use_bias: bool = True
    seed: int = 0
    eval_every: int = 1
    max_pairs_per_bucket: int = 100_000


@dataclass
class TrainLog:
    epochs: list = field(default_factory=list)  # dicts: epoch, train_loss, train_acc, val_acc
    test_acc: float = float("nan")
    confusion: ConfusionMatrix | None = None
    similarity_report: SimilarityReport | None = None

    def series(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.epochs], dtype=np.float64)

    def save(self, out_dir) -> None:
        """Write train_log.csv, summary.json, confusion.csv and similarity.json."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_log_csv(self.epochs, out / "train_log.csv")
        final = self.epochs[-1] if self.epochs else {}
        summary = {
            "epochs": len(self.epochs),
            "final_train_loss": final.get("train_loss"),
            "final_train_acc": final.get("train_acc"),
            "final_val_acc": final.get("val_acc"),
            "test_acc": self.test_acc,
        }
        if self.similarity_report is not None:
            summary["similarity"] = self.similarity_report.to_dict()
            self.similarity_report.save_json(out / "similarity.json")
        if self.confusion is not None:
            summary["confusion"] = self.confusion.counts.tolist()
            self.confusion.save_csv(out / "confusion.csv")
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


def write_log_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "train_acc", "val_acc"])
        for r in records:
            w.writerow([r["epoch"], repr(r["train_loss"]), repr(r["train_acc"]), repr(r["val_acc"])])


def read_log_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{"epoch": int(r["epoch"]), "train_loss": float(r["train_loss"]),
                 "train_acc": float(r["train_acc"]), "val_acc": float(r["val_acc"])}
                for r in csv.DictReader(fh)]


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_params(feature_dim: int, hidden: int, num_classes: int, seed) -> GcnParams:
    if min(feature_dim, hidden, num_classes) < 1:
        raise ValueError("all dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    return GcnParams(
        W1=glorot_uniform(feature_dim, hidden, rng),
        b1=np.zeros(hidden),
        W2=glorot_uniform(hidden, num_classes, rng),
        b2=np.zeros(num_classes),
    )


def forward(graph: Graph, a_hat: CsrAdjacency, params: GcnParams, dropout_rate: float = 0.0,
            training: bool = False, seed=0, ax: np.ndarray | None = None,
            h1_pre: np.ndarray | None = None) -> dict:
    """Run the network; the returned dict doubles as the backward cache.

    ``ax`` may carry a precomputed Â·X (it depends only on the graph) and
    ``h1_pre`` a precomputed Â·X·W1 + b1 for these exact params.
    """
    if params.W1.shape[0] != graph.feature_dim:
        raise DimensionMismatch(f"W1 expects {params.W1.shape[0]} features, graph has {graph.feature_dim}")
    if params.W2.shape[0] != params.W1.shape[1]:
        raise DimensionMismatch(f"W2 rows {params.W2.shape[0]} != hidden size {params.W1.shape[1]}")
    if ax is None:
        ax = K.spmm(a_hat, graph.features)
    if h1_pre is None:
        h1_pre = ax @ params.W1 + params.b1
    h1 = K.elu(h1_pre)
    h1_drop, kept = K.dropout(h1, dropout_rate, seed, training)
    ah = K.spmm(a_hat, h1_drop)
    logits = ah @ params.W2 + params.b2
    return {
        "AX": ax, "H1_pre": h1_pre, "H1": h1, "H1_dropped": h1_drop, "kept": kept,
        "AH": ah, "logits": logits, "probs": K.softmax_rows(logits),
        "a_hat": a_hat, "dropout_rate": dropout_rate if training else 0.0, "params": params,
    }


def backward(cache: dict | None, labels, train_mask) -> tuple[float, dict]:
    """Gradients of the masked mean cross-entropy w.r.t. W1, b1, W2, b2.

    Relies on Â being symmetric, so Âᵀ·G is computed as Â·G.
    """
    needed = ("AX", "H1_pre", "kept", "AH", "logits", "a_hat", "params")
    if not cache or any(k not in cache for k in needed):
        raise CacheMissing("backward needs the cache returned by forward()")
    params = cache["params"]
    loss, d_logits = K.masked_cross_entropy(cache["logits"], labels, train_mask)

    d_W2 = cache["AH"].T @ d_logits
    d_b2 = d_logits.sum(axis=0)
    d_h1_drop = K.spmm(cache["a_hat"], d_logits @ params.W2.T)
    rate = cache["dropout_rate"]
    d_h1 = d_h1_drop * cache["kept"] / (1.0 - rate) if rate else d_h1_drop
    d_pre = d_h1 * K.elu_grad(cache["H1_pre"])
    d_W1 = cache["AX"].T @ d_pre
    d_b1 = d_pre.sum(axis=0)
    return loss, {"W1": d_W1, "b1": d_b1, "W2": d_W2, "b2": d_b2}


def loss_fn(graph, a_hat, params, labels, mask, ax=None) -> float:
    """Eval-mode masked cross-entropy; the scalar the gradient check perturbs."""
    out = forward(graph, a_hat, params, training=False, ax=ax)
    return K.masked_cross_entropy(out["logits"], labels, mask)[0]


def extract_embeddings(graph: Graph, a_hat: CsrAdjacency, params: GcnParams, ax=None) -> np.ndarray:
    """First-layer node embeddings, ELU(Â X W1 + b1), without dropout."""
    if ax is None:
        ax = K.spmm(a_hat, graph.features)
    return K.elu(ax @ params.W1 + params.b1)


def predict(graph, a_hat, params, ax=None) -> np.ndarray:
    return forward(graph, a_hat, params, training=False, ax=ax)["logits"].argmax(axis=1)


def train(graph: Graph, masks: SplitMasks, config: TrainConfig | None = None,
          a_hat: CsrAdjacency | None = None) -> tuple[GcnParams, TrainLog]:
    """Full-batch Adam training on ``masks.train``; one step per epoch.

    Each epoch logs the training-mode loss (the one being optimized) and
    eval-mode accuracies on the train and validation sets after the step.
    """
    config = config or TrainConfig()
    if a_hat is None:
        a_hat = K.normalize_adjacency(graph.adjacency)
    ax = K.spmm(a_hat, graph.features)
    labels = graph.labels
    params = init_params(graph.feature_dim, config.hidden, graph.num_classes, [config.seed, 0])
    state = K.AdamState(lr=config.lr, weight_decay=config.weight_decay)
    names = PARAM_NAMES if config.use_bias else ("W1", "W2")

    trace = TrainLog()
    h1_pre = None
    for epoch in range(1, config.epochs + 1):
        cache = forward(graph, a_hat, params, config.dropout_rate, training=True,
                        seed=[config.seed, 1, epoch], ax=ax, h1_pre=h1_pre)
        loss, grads = backward(cache, labels, masks.train)
        updated = K.adam_step({k: getattr(params, k) for k in names},
                              {k: grads[k] for k in names}, state)
        params = GcnParams(**{**params.as_dict(), **updated})
        # first layer is dropout-free, so eval and the next training pass share it
        h1_pre = ax @ params.W1 + params.b1
        if epoch % config.eval_every == 0 or epoch == config.epochs:
            pred = forward(graph, a_hat, params, ax=ax, h1_pre=h1_pre)["logits"].argmax(axis=1)
            rec = {"epoch": epoch, "train_loss": loss,
                   "train_acc": accuracy(pred, labels, masks.train),
                   "val_acc": accuracy(pred, labels, masks.val) if len(masks.val) else float("nan")}
        else:
            rec = {"epoch": epoch, "train_loss": loss, "train_acc": float("nan"), "val_acc": float("nan")}
        trace.epochs.append(rec)
        if not math.isfinite(loss):
            raise FloatingPointError(f"training diverged at epoch {epoch} (loss={loss})")
        if epoch % 50 == 0:
            log.debug("epoch %d loss %.4f train %.3f val %.3f", epoch, loss, rec["train_acc"], rec["val_acc"])

    pred = predict(graph, a_hat, params, ax=ax)
    if len(masks.test):
        trace.test_acc = accuracy(pred, labels, masks.test)
        trace.confusion = confusion(pred, labels, masks.test, graph.num_classes)
    emb = extract_embeddings(graph, a_hat, params, ax=ax)
    trace.similarity_report = class_similarity_report(
        emb, labels, config.max_pairs_per_bucket, seed=[config.seed, 2], num_classes=graph.num_classes)
    return params, trace
