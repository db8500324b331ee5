"""Hub scoring and selection: reconstruction-error and smoothness metrics,
z-threshold / top-K / elbow selection, Louvain communities and the
participation coefficient used to flag connector hubs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph

__all__ = [
    "HubReport",
    "score_reconstruction",
    "score_smoothness",
    "select_zthreshold",
    "select_topk",
    "select_k_elbow",
    "louvain_communities",
    "participation_coefficient",
    "connector_filter",
    "build_report",
]

CONNECTOR_LO = 0.35
CONNECTOR_HI = 0.72


@dataclass(frozen=True)
class HubReport:
    scores: np.ndarray
    metric: str
    selection: str
    hub_set: np.ndarray
    communities: np.ndarray
    participation: np.ndarray
    connector_set: np.ndarray
    selection_params: dict = field(default_factory=dict)


def score_reconstruction(signals: np.ndarray, filtered: np.ndarray) -> np.ndarray:
    """scores(i) = squared 2-norm of row i of F - F_tilde."""
    signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    filtered = np.atleast_2d(np.asarray(filtered, dtype=np.float64))
    if signals.shape != filtered.shape:
        raise ValueError(
            f"shape mismatch: {signals.shape} vs {filtered.shape}"
        )
    diff = signals - filtered
    return np.sum(diff * diff, axis=1)


def _node_gradients(g: Graph, signals: np.ndarray) -> np.ndarray:
    """E(i) = sum_j A_ij * ||row_i - row_j||^2, vectorized via the expansion
    ||x - y||^2 = ||x||^2 + ||y||^2 - 2 <x, y>."""
    sq = np.sum(signals * signals, axis=1)
    cross = signals @ signals.T
    pair = sq[:, None] + sq[None, :] - 2.0 * cross
    return np.sum(g.adjacency * pair, axis=1)


def score_smoothness(g: Graph, signals: np.ndarray, filtered: np.ndarray) -> np.ndarray:
    """scores(i) = E(i) - E_tilde(i): drop in local gradient after filtering."""
    signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    filtered = np.atleast_2d(np.asarray(filtered, dtype=np.float64))
    if signals.shape != filtered.shape or signals.shape[0] != g.n_nodes:
        raise ValueError("signal shapes must agree and match the graph")
    return _node_gradients(g, signals) - _node_gradients(g, filtered)


def select_zthreshold(scores: np.ndarray, z_cut: float = 3.0) -> np.ndarray:
    """Nodes whose population z-score exceeds z_cut."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size < 2:
        raise ValueError("need at least 2 scores")
    std = scores.std()
    if std == 0:
        warnings.warn("all scores equal; z-threshold selects nothing")
        return np.array([], dtype=int)
    z = (scores - scores.mean()) / std
    return np.flatnonzero(z > z_cut)


def select_topk(scores: np.ndarray, k: int) -> np.ndarray:
    """K highest-scoring nodes, ties broken by lowest node id."""
    scores = np.asarray(scores, dtype=np.float64)
    if not 1 <= k <= scores.size:
        raise ValueError(f"k must be in [1, {scores.size}], got {k}")
    order = np.lexsort((np.arange(scores.size), -scores))
    return np.sort(order[:k])


def select_k_elbow(sorted_scores: np.ndarray, head_fraction: float = 0.2) -> int:
    """Pick K at the largest drop of a descending score curve.

    The search is restricted to the head of the curve (at least the first 3
    positions, at most ceil(head_fraction * N)) so a stray gap deep in the
    tail cannot win. Ties go to the earliest position.
    """
    sorted_scores = np.asarray(sorted_scores, dtype=np.float64)
    n = sorted_scores.size
    if n < 3:
        raise ValueError("need at least 3 scores")
    window = min(n - 1, max(3, int(np.ceil(head_fraction * n))))
    drops = sorted_scores[:window] - sorted_scores[1 : window + 1]
    return int(np.argmax(drops)) + 1


def _modularity(adjacency: np.ndarray, labels: np.ndarray) -> float:
    total = adjacency.sum()
    if total == 0:
        return 0.0
    degrees = adjacency.sum(axis=1)
    q = 0.0
    for c in np.unique(labels):
        mask = labels == c
        q += adjacency[np.ix_(mask, mask)].sum() / total
        q -= (degrees[mask].sum() / total) ** 2
    return q


def _louvain_pass(adjacency: np.ndarray, order: np.ndarray) -> np.ndarray:
    """One local-move + aggregation level; returns community labels."""
    n = adjacency.shape[0]
    labels = np.arange(n)
    degrees = adjacency.sum(axis=1)
    two_m = adjacency.sum()
    if two_m == 0:
        return labels
    comm_tot = degrees.copy()  # total degree per community

    improved = True
    while improved:
        improved = False
        for i in order:
            ci = labels[i]
            # edge weight from i into each community; self loops excluded
            weights = np.zeros(n)
            np.add.at(weights, labels, adjacency[i])
            weights[ci] -= adjacency[i, i]
            comm_tot[ci] -= degrees[i]
            # candidates sorted ascending, so equal gains keep the lowest id
            candidates = np.unique(labels[adjacency[i] > 0])
            best_c = ci
            best_gain = weights[ci] - comm_tot[ci] * degrees[i] / two_m
            for c in candidates:
                if c == ci:
                    continue
                gain = weights[c] - comm_tot[c] * degrees[i] / two_m
                if gain > best_gain + 1e-12:
                    best_gain, best_c = gain, c
            labels[i] = best_c
            comm_tot[best_c] += degrees[i]
            if best_c != ci:
                improved = True
    return labels


def _relabel(labels: np.ndarray) -> np.ndarray:
    _, compact = np.unique(labels, return_inverse=True)
    return compact


def louvain_communities(g: Graph, seed: int = 0, n_restarts: int = 1) -> np.ndarray:
    """Two-phase Louvain modularity optimization (resolution 1.0).

    The first restart sweeps nodes in ascending id order; further restarts use
    seeded random sweep orders and the highest-modularity partition wins.
    """
    if g.n_nodes == 0:
        raise ValueError("graph is empty")
    rng = np.random.default_rng(seed)
    best_labels, best_q = None, -np.inf
    for restart in range(max(1, n_restarts)):
        labels = _louvain_once(g.adjacency, rng, shuffle=restart > 0)
        q = _modularity(g.adjacency, labels)
        if q > best_q:
            best_q, best_labels = q, labels
    return best_labels


def _louvain_once(
    adjacency: np.ndarray, rng: np.random.Generator, shuffle: bool
) -> np.ndarray:
    n = adjacency.shape[0]
    node_to_final = np.arange(n)
    current = adjacency.copy()
    while True:
        order = np.arange(current.shape[0])
        if shuffle:
            order = rng.permutation(order)
        labels = _relabel(_louvain_pass(current, order))
        n_comms = labels.max() + 1
        if n_comms == current.shape[0]:
            break
        node_to_final = labels[node_to_final]
        # aggregate: community graph with self loops holding internal weight
        agg = np.zeros((n_comms, n_comms))
        for c in range(n_comms):
            mask = labels == c
            agg[c] = current[mask].sum(axis=0) @ _one_hot(labels, n_comms)
        current = agg
    return _relabel(node_to_final)


def _one_hot(labels: np.ndarray, n_comms: int) -> np.ndarray:
    eye = np.zeros((labels.size, n_comms))
    eye[np.arange(labels.size), labels] = 1.0
    return eye


def participation_coefficient(g: Graph, labels: np.ndarray) -> np.ndarray:
    """P_i = 1 - sum_s (k_is / k_i)^2 over communities s; 0 for isolated nodes."""
    labels = np.asarray(labels)
    if labels.size != g.n_nodes:
        raise ValueError("labels length must equal node count")
    n_comms = int(labels.max()) + 1 if labels.size else 0
    per_comm = g.adjacency @ _one_hot(labels, n_comms)  # k_is, shape (N, S)
    k = g.degrees
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(k[:, None] > 0, per_comm / k[:, None], 0.0)
    p = 1.0 - np.sum(ratios * ratios, axis=1)
    p[k == 0] = 0.0
    return p


def connector_filter(hub_set: np.ndarray, participation: np.ndarray) -> np.ndarray:
    """Hubs whose participation coefficient lies strictly inside
    (CONNECTOR_LO, CONNECTOR_HI)."""
    hub_set = np.asarray(hub_set, dtype=int)
    if hub_set.size == 0:
        return hub_set
    p = np.asarray(participation)[hub_set]
    return hub_set[(p > CONNECTOR_LO) & (p < CONNECTOR_HI)]


def build_report(
    g: Graph,
    scores: np.ndarray,
    metric: str,
    selection: str = "zthresh",
    k: int | None = None,
    z_cut: float = 3.0,
    seed: int = 0,
    n_restarts: int = 1,
) -> HubReport:
    """Assemble the full hub report: selection, communities, connector flags."""
    scores = np.asarray(scores, dtype=np.float64)
    params: dict = {}
    if selection == "zthresh":
        hub_set = select_zthreshold(scores, z_cut)
        params["z_cut"] = z_cut
    elif selection == "topk":
        if k is None:
            raise ValueError("top-K selection needs k")
        hub_set = select_topk(scores, k)
        params["k"] = k
    elif selection == "elbow":
        k_auto = select_k_elbow(np.sort(scores)[::-1])
        hub_set = select_topk(scores, k_auto)
        params["k"] = k_auto
    else:
        raise ValueError(f"unknown selection rule {selection!r}")

    communities = louvain_communities(g, seed=seed, n_restarts=n_restarts)
    participation = participation_coefficient(g, communities)
    return HubReport(
        scores=scores,
        metric=metric,
        selection=selection,
        hub_set=hub_set,
        communities=communities,
        participation=participation,
        connector_set=connector_filter(hub_set, participation),
        selection_params=params,
    )
