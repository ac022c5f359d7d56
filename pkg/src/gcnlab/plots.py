"""Standalone SVG figures: accuracy curves, similarity-vs-homophily, confusion heat grids."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path

import numpy as np

from .errors import EmptyInput, IoError

SVG_NS = "http://www.w3.org/2000/svg"
PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=60, right=150, top=40, bottom=50)


def _svg_root(width=WIDTH, height=HEIGHT, title=None) -> ET.Element:
    root = ET.Element("svg", {
        "xmlns": SVG_NS, "version": "1.1",
        "width": str(width), "height": str(height),
        "viewBox": f"0 0 {width} {height}",
        "font-family": "sans-serif", "font-size": "12",
    })
    ET.SubElement(root, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    if title:
        t = ET.SubElement(root, "text", x=str(width / 2), y="22", attrib={"text-anchor": "middle", "font-size": "15"})
        t.text = title
    return root


def _write(root: ET.Element, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Axes:
    """Maps data coordinates into the plot rectangle and draws frame and ticks."""

    def __init__(self, root, xlim, ylim, xlabel, ylabel):
        self.root = root
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
        self.xlim = xlim if xlim[1] > xlim[0] else (xlim[0] - 0.5, xlim[0] + 0.5)
        self.ylim = ylim if ylim[1] > ylim[0] else (ylim[0] - 0.5, ylim[0] + 0.5)
        g = ET.SubElement(root, "g", {"class": "axes", "stroke": "black", "fill": "none"})
        ET.SubElement(g, "rect", x=_fmt(self.x0), y=_fmt(self.y1),
                      width=_fmt(self.x1 - self.x0), height=_fmt(self.y0 - self.y1))
        labels = ET.SubElement(root, "g", {"class": "ticks"})
        for v in np.linspace(*self.xlim, 6):
            t = ET.SubElement(labels, "text", x=_fmt(self.px(v)), y=_fmt(self.y0 + 16),
                              attrib={"text-anchor": "middle"})
            t.text = f"{v:g}" if abs(v) >= 1 or v == 0 else f"{v:.2f}"
        for v in np.linspace(*self.ylim, 6):
            t = ET.SubElement(labels, "text", x=_fmt(self.x0 - 6), y=_fmt(self.py(v) + 4),
                              attrib={"text-anchor": "end"})
            t.text = f"{v:.2f}"
        t = ET.SubElement(root, "text", x=_fmt((self.x0 + self.x1) / 2), y=str(HEIGHT - 12),
                          attrib={"text-anchor": "middle"})
        t.text = xlabel
        cy = (self.y0 + self.y1) / 2
        t = ET.SubElement(root, "text", x="16", y=_fmt(cy),
                          attrib={"text-anchor": "middle", "transform": f"rotate(-90 16 {cy:.2f})"})
        t.text = ylabel

    def px(self, x):
        return self.x0 + (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * (self.x1 - self.x0)

    def py(self, y):
        return self.y0 - (y - self.ylim[0]) / (self.ylim[1] - self.ylim[0]) * (self.y0 - self.y1)

    def line(self, xs, ys, color, label):
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys) if np.isfinite(y))
        ET.SubElement(self.root, "polyline", points=pts, fill="none", stroke=color,
                      attrib={"stroke-width": "1.5", "data-label": label})

    def legend(self, entries):
        g = ET.SubElement(self.root, "g", {"class": "legend"})
        x = self.x1 + 12
        for k, (label, color) in enumerate(entries):
            y = self.y1 + 8 + 18 * k
            ET.SubElement(g, "line", x1=_fmt(x), y1=_fmt(y), x2=_fmt(x + 20), y2=_fmt(y),
                          stroke=color, attrib={"stroke-width": "2"})
            t = ET.SubElement(g, "text", x=_fmt(x + 26), y=_fmt(y + 4))
            t.text = label


def _records(log):
    return log.epochs if hasattr(log, "epochs") else list(log)


def render_accuracy_svg(logs: dict, path, key: str = "val_acc", title: str | None = None) -> None:
    """One polyline per entry of ``logs`` (label -> TrainLog or list of epoch records)."""
    if not logs:
        raise EmptyInput("no training logs to plot")
    series = {}
    for label, log in logs.items():
        recs = _records(log)
        if not recs:
            raise EmptyInput(f"training log {label!r} has no epochs")
        series[label] = (np.array([r["epoch"] for r in recs], float), np.array([r[key] for r in recs], float))
    max_epoch = max(xs.max() for xs, _ in series.values())
    root = _svg_root(title=title or f"Per-epoch {key.replace('_', ' ')}")
    ax = _Axes(root, (0.0, float(max_epoch)), (0.0, 1.0), "epoch", key.replace("_", " "))
    entries = []
    for k, (label, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        ax.line(xs, ys, color, str(label))
        entries.append((str(label), color))
    ax.legend(entries)
    _write(root, path)


def _rows(results):
    return results.records if hasattr(results, "records") else list(results)


def render_similarity_svg(results, path, title: str | None = None) -> None:
    """In-class and across-class mean C1NE against homophily, averaged over seeds."""
    rows = [r for r in _rows(results) if np.isfinite(r.get("inclass_mean", np.nan))]
    if not rows:
        raise EmptyInput("no similarity results to plot")
    by_h = defaultdict(list)
    for r in rows:
        by_h[float(r["h"])].append(r)
    hs = sorted(by_h)
    inc = [np.mean([r["inclass_mean"] for r in by_h[h]]) for h in hs]
    acr = [np.mean([r["across_mean"] for r in by_h[h]]) for h in hs]
    lo = min(0.0, min(inc), min(acr))
    root = _svg_root(title=title or "First-layer embedding cosine similarity")
    ax = _Axes(root, (min(hs), max(hs)), (lo, 1.0), "node homophily", "mean cosine similarity")
    ax.line(hs, inc, PALETTE[0], "in-class")
    ax.line(hs, acr, PALETTE[1], "across-class")
    for h, a, b in zip(hs, inc, acr):
        ET.SubElement(root, "circle", cx=_fmt(ax.px(h)), cy=_fmt(ax.py(a)), r="3", fill=PALETTE[0])
        ET.SubElement(root, "circle", cx=_fmt(ax.px(h)), cy=_fmt(ax.py(b)), r="3", fill=PALETTE[1])
    ax.legend([("in-class", PALETTE[0]), ("across-class", PALETTE[1])])
    _write(root, path)


def _heat(v: float) -> str:
    # white -> dark blue
    r = int(round(255 - 222 * v))
    g = int(round(255 - 153 * v))
    b = int(round(255 - 75 * v))
    return f"#{r:02x}{g:02x}{b:02x}"


def render_confusion_svg(confusion, path, title: str | None = None) -> None:
    """Heat grid (colored by row-normalized share) annotated with raw counts."""
    counts = np.asarray(getattr(confusion, "counts", confusion))
    if counts.size == 0:
        raise EmptyInput("empty confusion matrix")
    totals = counts.sum(axis=1, keepdims=True)
    share = np.divide(counts, totals, out=np.zeros(counts.shape), where=totals > 0)
    c = counts.shape[0]
    cell = 44
    left, top = 70, 60
    width, height = left + c * cell + 20, top + c * cell + 50
    root = _svg_root(width, height, title=title or "Confusion matrix")
    grid = ET.SubElement(root, "g", {"class": "cells"})
    for i in range(c):
        for j in range(c):
            x, y = left + j * cell, top + i * cell
            ET.SubElement(grid, "rect", x=str(x), y=str(y), width=str(cell), height=str(cell),
                          fill=_heat(share[i, j]), stroke="#999999")
            t = ET.SubElement(grid, "text", x=str(x + cell / 2), y=str(y + cell / 2 + 4),
                              fill="white" if share[i, j] > 0.5 else "black",
                              attrib={"text-anchor": "middle"})
            t.text = str(int(counts[i, j]))
    labels = ET.SubElement(root, "g", {"class": "labels"})
    for k in range(c):
        t = ET.SubElement(labels, "text", x=str(left + k * cell + cell / 2), y=str(top - 8),
                          attrib={"text-anchor": "middle"})
        t.text = str(k)
        t = ET.SubElement(labels, "text", x=str(left - 8), y=str(top + k * cell + cell / 2 + 4),
                          attrib={"text-anchor": "end"})
        t.text = str(k)
    t = ET.SubElement(root, "text", x=str(left + c * cell / 2), y=str(top + c * cell + 30),
                      attrib={"text-anchor": "middle"})
    t.text = "predicted class"
    cy = top + c * cell / 2
    t = ET.SubElement(root, "text", x="20", y=str(cy),
                      attrib={"text-anchor": "middle", "transform": f"rotate(-90 20 {cy})"})
    t.text = "true class"
    _write(root, path)


def render_train_val_svg(records, path, title: str | None = None) -> None:
    """Train and validation accuracy of a single run."""
    recs = _records(records)
    render_accuracy_svg({"train": [dict(r, acc=r["train_acc"]) for r in recs],
                         "val": [dict(r, acc=r["val_acc"]) for r in recs]},
                        path, key="acc", title=title or "Accuracy per epoch")
