"""File formats: edge-list CSV graphs, signal CSV matrices, label CSVs."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .graph import Graph

__all__ = [
    "read_graph_csv",
    "write_graph_csv",
    "read_signals_csv",
    "write_signals_csv",
    "read_labels_csv",
    "write_labels_csv",
]


def read_graph_csv(path: str | Path, n_nodes: int | None = None) -> Graph:
    """Read an edge-list CSV with header ``src,dst,weight`` (weight optional).

    Node ids are 0-based integers. Duplicate undirected edges are rejected.
    If n_nodes is not given, it is inferred as max id + 1.
    """
    edges: list[tuple[int, int, float]] = []
    max_id = -1
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip().lower() != "src":
            raise ValueError(f"{path}: expected header starting with 'src'")
        for row in reader:
            if not row:
                continue
            src, dst = int(row[0]), int(row[1])
            weight = float(row[2]) if len(row) > 2 and row[2] != "" else 1.0
            if src == dst:
                raise ValueError(f"{path}: self loop at node {src}")
            edges.append((src, dst, weight))
            max_id = max(max_id, src, dst)
    n = n_nodes if n_nodes is not None else max_id + 1
    adjacency = np.zeros((n, n))
    for src, dst, weight in edges:
        if adjacency[src, dst] != 0:
            raise ValueError(f"{path}: duplicate undirected edge ({src}, {dst})")
        adjacency[src, dst] = weight
        adjacency[dst, src] = weight
    return Graph(adjacency)


def write_graph_csv(path: str | Path, g: Graph) -> None:
    rows, cols = np.nonzero(np.triu(g.adjacency))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight"])
        for i, j in zip(rows, cols):
            writer.writerow([int(i), int(j), repr(float(g.adjacency[i, j]))])


def read_signals_csv(path: str | Path, headered: bool = False) -> np.ndarray:
    """Read an N x P signal matrix.

    Plain format: no header, one node per row. Headered format: first row is
    a header and column 0 holds node ids; rows may appear in any order.
    """
    if not headered:
        return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ids = raw[:, 0].astype(int)
    values = np.empty((raw.shape[0], raw.shape[1] - 1))
    values[ids] = raw[:, 1:]
    return values


def write_signals_csv(path: str | Path, signals: np.ndarray) -> None:
    signals = np.asarray(signals)
    if signals.ndim == 1:
        # 1-D signal means one value per node, i.e. a single column
        signals = signals[:, None]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in signals:
            writer.writerow([repr(float(v)) for v in row])


def read_labels_csv(path: str | Path) -> np.ndarray:
    """Read a ``node,is_hub`` CSV into a boolean vector."""
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    labels = np.zeros(raw.shape[0], dtype=bool)
    labels[raw[:, 0].astype(int)] = raw[:, 1].astype(bool)
    return labels


def write_labels_csv(path: str | Path, labels: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "is_hub"])
        for i, flag in enumerate(np.asarray(labels)):
            writer.writerow([i, int(bool(flag))])
