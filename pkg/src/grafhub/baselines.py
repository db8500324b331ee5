"""Comparison detectors: graph-only centralities, fixed high-pass graph
filtering, direct smooth-signal recovery, and signal-only outlier detectors
(LOF, Isolation Forest). Every method returns a length-N score vector where
higher means more hub-like.

Path-based centralities interpret edge weights as capacities and use lengths
1 / weight for shortest paths.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .graph import (
    Graph,
    SpectralDecomposition,
    normalized_laplacian,
    spectral_decompose,
)
from .solver import soft_threshold

__all__ = [
    "BASELINE_KINDS",
    "degree_centrality",
    "eigenvector_centrality",
    "closeness_centrality",
    "betweenness_centrality",
    "ghf_filter",
    "DirectRecoveryResult",
    "direct_f_recovery",
    "lof_scores",
    "isolation_forest_scores",
]

# kind -> (needs_graph, needs_signals)
BASELINE_KINDS = {
    "degree": (True, False),
    "eigenvector": (True, False),
    "closeness": (True, False),
    "betweenness": (True, False),
    "ghf_re": (True, True),
    "ghf_sm": (True, True),
    "direct_re": (True, True),
    "direct_sm": (True, True),
    "lof": (False, True),
    "iforest": (False, True),
}


def _length_matrix(g: Graph) -> scipy.sparse.csr_matrix:
    """Sparse matrix of edge lengths 1/weight."""
    with np.errstate(divide="ignore"):
        lengths = np.where(g.adjacency > 0, 1.0 / g.adjacency, 0.0)
    return scipy.sparse.csr_matrix(lengths)


def shortest_path_matrix(g: Graph) -> np.ndarray:
    """All-pairs shortest path distances on 1/weight lengths (inf if unreachable)."""
    return scipy.sparse.csgraph.dijkstra(_length_matrix(g), directed=False)


def degree_centrality(g: Graph) -> np.ndarray:
    """Weighted degree (strength) per node."""
    return g.degrees.copy()


def eigenvector_centrality(
    g: Graph, tol: float = 1e-10, max_iter: int = 100_000
) -> np.ndarray:
    """Principal eigenvector of A via power iteration; nonnegative, unit norm."""
    n = g.n_nodes
    x = np.full(n, 1.0 / math.sqrt(n))
    a = g.adjacency
    if not np.any(a):
        return x
    # diagonal shift keeps the principal eigenvector but breaks the +/- lambda
    # oscillation of bipartite graphs
    a = a + np.eye(n)
    for _ in range(max_iter):
        y = a @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            raise RuntimeError("power iteration collapsed to zero vector")
        y /= norm
        if np.linalg.norm(y - x) < tol:
            return np.abs(y)
        x = y
    raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")


def closeness_centrality(g: Graph) -> np.ndarray:
    """Harmonically scaled closeness: (reachable/(N-1)) * reachable / sum(d_ij),
    the standard correction for disconnected graphs."""
    n = g.n_nodes
    dist = shortest_path_matrix(g)
    scores = np.zeros(n)
    for i in range(n):
        finite = np.isfinite(dist[i]) & (np.arange(n) != i)
        reachable = int(finite.sum())
        total = dist[i, finite].sum()
        if reachable > 0 and total > 0:
            scores[i] = (reachable / (n - 1)) * (reachable / total)
    return scores


def _betweenness_uniform(adjacency: np.ndarray) -> np.ndarray:
    """Brandes' betweenness when all edges have equal weight: shortest paths
    are BFS paths, so each source is handled with level-synchronous sweeps."""
    n = adjacency.shape[0]
    connected = adjacency > 0
    centrality = np.zeros(n)

    for source in range(n):
        dist = np.full(n, -1)
        sigma = np.zeros(n)
        dist[source] = 0
        sigma[source] = 1.0
        levels = [np.array([source])]
        while True:
            frontier = levels[-1]
            reached = connected[frontier].any(axis=0) & (dist < 0)
            nxt = np.flatnonzero(reached)
            if nxt.size == 0:
                break
            dist[nxt] = len(levels)
            sigma[nxt] = connected[np.ix_(frontier, nxt)].T @ sigma[frontier]
            levels.append(nxt)

        delta = np.zeros(n)
        for depth in range(len(levels) - 1, 0, -1):
            w = levels[depth]
            prev = levels[depth - 1]
            coeff = (1.0 + delta[w]) / sigma[w]
            delta[prev] += sigma[prev] * (connected[np.ix_(prev, w)] @ coeff)
            centrality[w] += delta[w]
    # undirected: each pair was counted from both endpoints
    return centrality / 2.0


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Brandes' betweenness on 1/weight lengths; unnormalized pair counts,
    endpoints excluded. Each unordered pair contributes once."""
    n = g.n_nodes
    adjacency = g.adjacency
    weights = adjacency[adjacency > 0]
    if weights.size == 0 or np.all(weights == weights.flat[0]):
        return _betweenness_uniform(adjacency)
    neighbors = [np.flatnonzero(adjacency[i]) for i in range(n)]
    lengths = [1.0 / adjacency[i, neighbors[i]] for i in range(n)]
    centrality = np.zeros(n)

    for source in range(n):
        dist = np.full(n, np.inf)
        sigma = np.zeros(n)
        dist[source] = 0.0
        sigma[source] = 1.0
        preds: list[list[int]] = [[] for _ in range(n)]
        stack: list[int] = []
        done = np.zeros(n, dtype=bool)
        heap = [(0.0, source)]
        while heap:
            d, v = heapq.heappop(heap)
            if done[v]:
                continue
            done[v] = True
            stack.append(v)
            for w, length in zip(neighbors[v], lengths[v]):
                alt = d + length
                if alt < dist[w] - 1e-12:
                    dist[w] = alt
                    sigma[w] = sigma[v]
                    preds[w] = [v]
                    heapq.heappush(heap, (alt, w))
                elif abs(alt - dist[w]) <= 1e-12 and not done[w]:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        for v in reversed(stack):
            for u in preds[v]:
                delta[u] += sigma[u] / sigma[v] * (1.0 + delta[v])
            if v != source:
                centrality[v] += delta[v]
    # undirected: each pair was counted from both endpoints
    return centrality / 2.0


def ghf_filter(
    g: Graph,
    signals: np.ndarray,
    beta: float = 1.0,
    xi: float = 1.0,
    decomp: SpectralDecomposition | None = None,
) -> np.ndarray:
    """Fixed graph high-pass split: recover the smooth part by solving

        (2 (I + beta L_n) + xi L_n) F_tilde = 2 (I + beta L_n) F

    spectrally, with per-eigenvalue gain 2(1+beta*lam) / (2(1+beta*lam)+xi*lam).
    """
    if beta < 0 or xi < 0:
        raise ValueError("beta and xi must be >= 0")
    signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    if decomp is None:
        decomp = spectral_decompose(normalized_laplacian(g))
    lam = decomp.eigenvalues
    gains = 2.0 * (1.0 + beta * lam) / (2.0 * (1.0 + beta * lam) + xi * lam)
    return decomp.eigenvectors @ (
        gains[:, None] * (decomp.eigenvectors.T @ signals)
    )


@dataclass(frozen=True)
class DirectRecoveryResult:
    filtered: np.ndarray
    iterations: int
    converged: bool


def direct_f_recovery(
    g: Graph,
    signals: np.ndarray,
    alpha: float,
    rho: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 5000,
    decomp: SpectralDecomposition | None = None,
    strict: bool = True,
) -> DirectRecoveryResult:
    """Minimize alpha * ||F - F_tilde||_1 + tr(F_tilde^T L_n F_tilde) over
    F_tilde directly (no filter parametrization), by ADMM with the splitting
    Z = F - F_tilde. The F_tilde step solves (2 L_n + rho I) F_tilde = rhs,
    diagonal in the spectral domain.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    if decomp is None:
        decomp = spectral_decompose(normalized_laplacian(g))
    u = decomp.eigenvectors
    inv_gains = rho / (2.0 * decomp.eigenvalues + rho)

    f_tilde = signals.copy()
    z = np.zeros_like(signals)
    dual = np.zeros_like(signals)
    scale = max(np.linalg.norm(signals), 1e-12)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        z = soft_threshold(signals - f_tilde - dual, alpha / rho)
        rhs = rho * (signals - z - dual)
        f_new = u @ (inv_gains[:, None] * (u.T @ rhs))
        dual = dual + (z - signals + f_new)
        delta = np.linalg.norm(f_new - f_tilde) / scale
        f_tilde = f_new
        if delta < tol:
            converged = True
            break
    if strict and not converged:
        raise RuntimeError(
            f"direct recovery did not converge in {max_iter} iterations"
        )
    return DirectRecoveryResult(
        filtered=f_tilde, iterations=iterations, converged=converged
    )


def lof_scores(signals: np.ndarray, k: int = 20) -> np.ndarray:
    """Local Outlier Factor on node rows (Euclidean metric).

    Uses the standard k-distance neighborhoods with ties included. Points in
    clusters of exact duplicates larger than k get LOF 1 by convention.
    """
    x = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    n = x.shape[0]
    if k >= n:
        raise ValueError(f"need k < number of rows, got k={k}, n={n}")

    sq = np.sum(x * x, axis=1)
    dist2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (x @ x.T), 0.0)
    dist = np.sqrt(dist2)
    np.fill_diagonal(dist, np.inf)

    kdist = np.partition(dist, k - 1, axis=1)[:, k - 1]
    neighborhoods = [np.flatnonzero(dist[i] <= kdist[i]) for i in range(n)]

    lrd = np.empty(n)
    for i in range(n):
        nbrs = neighborhoods[i]
        reach = np.maximum(kdist[nbrs], dist[i, nbrs])
        mean_reach = reach.mean()
        lrd[i] = np.inf if mean_reach == 0 else 1.0 / mean_reach

    lof = np.empty(n)
    for i in range(n):
        nbrs = neighborhoods[i]
        if np.isinf(lrd[i]):
            # duplicate cluster: density ratio is 1 by convention
            lof[i] = 1.0
            continue
        nbr_lrd = lrd[nbrs]
        if np.any(np.isinf(nbr_lrd)):
            lof[i] = np.inf
        else:
            lof[i] = nbr_lrd.mean() / lrd[i]
    return lof


def _harmonic(n: int) -> float:
    return math.log(n) + 0.5772156649015329


def _avg_path_length(n: int) -> float:
    """Expected unsuccessful-search path length c(n) in a BST of n points."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * _harmonic(n - 1) - 2.0 * (n - 1) / n


def _grow_tree(
    x: np.ndarray, idx: np.ndarray, depth: int, limit: int, rng: np.random.Generator
):
    """Node: ('leaf', size) or ('split', feature, threshold, left, right)."""
    if depth >= limit or idx.size <= 1:
        return ("leaf", idx.size)
    values = x[idx]
    lo, hi = values.min(axis=0), values.max(axis=0)
    usable = np.flatnonzero(hi > lo)
    if usable.size == 0:
        return ("leaf", idx.size)
    feature = int(rng.choice(usable))
    threshold = rng.uniform(lo[feature], hi[feature])
    mask = values[:, feature] < threshold
    left = _grow_tree(x, idx[mask], depth + 1, limit, rng)
    right = _grow_tree(x, idx[~mask], depth + 1, limit, rng)
    return ("split", feature, threshold, left, right)


def _path_length(node, row: np.ndarray, depth: int = 0) -> float:
    while node[0] == "split":
        _, feature, threshold, left, right = node
        node = left if row[feature] < threshold else right
        depth += 1
    return depth + _avg_path_length(node[1])


def isolation_forest_scores(
    signals: np.ndarray, n_trees: int = 100, seed: int = 0
) -> np.ndarray:
    """Isolation Forest anomaly scores 2^(-E[h(x)] / c(n)) on node rows."""
    x = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 rows")
    subsample = min(256, n)
    depth_limit = int(math.ceil(math.log2(subsample)))
    seeds = np.random.SeedSequence(seed).spawn(n_trees)

    depths = np.zeros(n)
    for tree_seed in seeds:
        rng = np.random.default_rng(tree_seed)
        idx = rng.choice(n, size=subsample, replace=False)
        tree = _grow_tree(x, idx, 0, depth_limit, rng)
        depths += [_path_length(tree, x[i]) for i in range(n)]
    mean_depth = depths / n_trees
    return 2.0 ** (-mean_depth / _avg_path_length(subsample))
