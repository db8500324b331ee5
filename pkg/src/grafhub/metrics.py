"""Validation metrics: rank-based AUC-ROC, spectral energy distribution,
global efficiency with node knockout, and normalized entropy."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .baselines import shortest_path_matrix
from .graph import Graph, SpectralDecomposition

__all__ = [
    "auc_roc",
    "SedProfile",
    "sed_profile",
    "global_efficiency",
    "knockout_delta_ge",
    "normalized_entropy",
]


def auc_roc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mann-Whitney AUC: probability a positive outranks a negative, ties 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes must be present")
    ranks = scipy.stats.rankdata(scores)
    rank_sum = ranks[labels].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class SedProfile:
    eigenvalues: np.ndarray
    sed: np.ndarray
    sed_ratio: float


def sed_profile(decomp: SpectralDecomposition, signals: np.ndarray) -> SedProfile:
    """Per-eigenvalue spectral energy distribution.

    Each column's squared GFT coefficients are normalized to sum to 1, then
    averaged over columns; sed_ratio is energy at eigenvalues >= 1 over energy
    at eigenvalues < 1. Zero columns are skipped with a warning.
    """
    signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    coeffs = decomp.eigenvectors.T @ signals
    energy = coeffs * coeffs
    col_sums = energy.sum(axis=0)
    keep = col_sums > 0
    if not np.all(keep):
        warnings.warn(f"skipping {np.sum(~keep)} zero signal column(s)")
    if not np.any(keep):
        raise ValueError("all signal columns are zero")
    sed = (energy[:, keep] / col_sums[keep]).mean(axis=1)
    high = sed[decomp.eigenvalues >= 1.0].sum()
    low = sed[decomp.eigenvalues < 1.0].sum()
    ratio = float(high / low) if low > 0 else float("inf")
    return SedProfile(eigenvalues=decomp.eigenvalues, sed=sed, sed_ratio=ratio)


def _efficiency_from_distances(dist: np.ndarray) -> float:
    n = dist.shape[0]
    inv = np.zeros_like(dist)
    off = ~np.eye(n, dtype=bool)
    finite = off & np.isfinite(dist) & (dist > 0)
    inv[finite] = 1.0 / dist[finite]
    return float(inv[off].sum() / (n * (n - 1)))


def global_efficiency(g: Graph) -> float:
    """Mean inverse shortest-path length over ordered pairs; unreachable
    pairs contribute 0. Lengths are 1/weight."""
    if g.n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    return _efficiency_from_distances(shortest_path_matrix(g))


def knockout_delta_ge(g: Graph, node_set: np.ndarray) -> np.ndarray:
    """For each listed node: GE(g) - GE(g with that node and its edges removed)."""
    if g.n_nodes < 3:
        raise ValueError("need at least 3 nodes")
    node_set = np.asarray(node_set, dtype=int)
    base = global_efficiency(g)
    deltas = np.empty(node_set.size)
    keep_template = np.arange(g.n_nodes)
    for pos, node in enumerate(node_set):
        keep = keep_template[keep_template != node]
        sub = Graph(g.adjacency[np.ix_(keep, keep)])
        deltas[pos] = base - global_efficiency(sub)
    return deltas


def normalized_entropy(counts: np.ndarray) -> float:
    """Shannon entropy of the count distribution, normalized by log2(M)."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.size < 2:
        raise ValueError("need at least 2 bins")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    total = counts.sum()
    if total == 0:
        raise ValueError("counts are all zero")
    p = counts / total
    nz = p > 0
    return float(-(p[nz] * np.log2(p[nz])).sum() / np.log2(counts.size))
