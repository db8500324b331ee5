"""Synthetic benchmark instances: random graphs, smooth signals, injected hubs.

Every random step draws from its own deterministic stream derived from the
config seed, so graph generation, signal generation, hub selection and noise
injection are independently reproducible:

    stream(seed, kind) = default_rng(SeedSequence((seed, _STREAMS[kind])))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, normalized_laplacian, spectral_decompose

__all__ = [
    "SynthConfig",
    "SynthInstance",
    "generate_er",
    "generate_ba",
    "generate_smooth_signals",
    "inject_hubs",
    "generate_instance",
]

MODELS = ("ER", "BAdegree", "BAMixed")

_STREAMS = {"graph": 0, "signals": 1, "hub_select": 2, "noise": 3}


def _stream(seed: int, kind: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, _STREAMS[kind])))


@dataclass(frozen=True)
class SynthConfig:
    model: str = "ER"
    n_nodes: int = 1000
    er_p: float = 0.1
    ba_m: int = 3
    n_signals: int = 100
    gamma: float = 30.0
    hub_fraction: float = 0.1
    hub_strength: float = 2.0
    seed: int = 0
    # "row_norms": sigma = std of per-node signal row 2-norms (default).
    # "column_norms": sigma = std of per-observation column 2-norms.
    sigma_mode: str = "row_norms"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if not 0 < self.er_p <= 1:
            raise ValueError(f"er_p must be in (0, 1], got {self.er_p}")
        if self.ba_m < 1:
            raise ValueError(f"ba_m must be >= 1, got {self.ba_m}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.hub_strength < 0:
            raise ValueError(f"hub_strength must be >= 0, got {self.hub_strength}")
        if not 0 < self.hub_fraction < 1:
            raise ValueError(
                f"hub_fraction must be in (0, 1), got {self.hub_fraction}"
            )
        if round(self.hub_fraction * self.n_nodes) < 1:
            raise ValueError("hub_fraction * n_nodes must be at least 1")
        if self.sigma_mode not in ("row_norms", "column_norms"):
            raise ValueError(f"unknown sigma_mode {self.sigma_mode!r}")


@dataclass(frozen=True)
class SynthInstance:
    graph: Graph
    signals: np.ndarray
    hub_labels: np.ndarray
    clean_signals: np.ndarray = field(repr=False, default=None)


def generate_er(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi graph: each unordered pair gets a unit edge w.p. p."""
    if not 0 < p <= 1:
        raise ValueError(f"p must be in (0, 1], got {p}")
    rng = _stream(seed, "graph")
    upper = np.triu(rng.random((n, n)) < p, k=1)
    adjacency = (upper | upper.T).astype(np.float64)
    return Graph(adjacency)


def generate_ba(n: int, m: int, seed: int) -> Graph:
    """Barabasi-Albert graph: seed clique of m+1 nodes, then each new node
    attaches to m existing nodes chosen without replacement with probability
    proportional to current degree."""
    if n <= m:
        raise ValueError(f"need n > m, got n={n}, m={m}")
    rng = _stream(seed, "graph")
    adjacency = np.zeros((n, n))
    clique = m + 1
    adjacency[:clique, :clique] = 1.0 - np.eye(clique)
    degrees = adjacency.sum(axis=1)
    for new in range(clique, n):
        probs = degrees[:new] / degrees[:new].sum()
        targets = rng.choice(new, size=m, replace=False, p=probs)
        adjacency[new, targets] = 1.0
        adjacency[targets, new] = 1.0
        degrees[targets] += 1.0
        degrees[new] = m
    return Graph(adjacency)


def generate_smooth_signals(
    g: Graph, n_signals: int, gamma: float, seed: int
) -> np.ndarray:
    """Tikhonov-smoothed signals: each column is (gamma L_n + I)^{-1} x_0 with
    x_0 standard normal, applied spectrally."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    rng = _stream(seed, "signals")
    x0 = rng.standard_normal((g.n_nodes, n_signals))
    if gamma == 0:
        return x0
    decomp = spectral_decompose(normalized_laplacian(g))
    gains = 1.0 / (gamma * decomp.eigenvalues + 1.0)
    return decomp.eigenvectors @ (gains[:, None] * (decomp.eigenvectors.T @ x0))


def _select_hubs(
    g: Graph, model: str, n_hubs: int, rng: np.random.Generator
) -> np.ndarray:
    n = g.n_nodes
    if model == "ER":
        return np.sort(rng.choice(n, size=n_hubs, replace=False))
    # degree ranking with ties broken by lowest node id
    by_degree = np.lexsort((np.arange(n), -g.degrees))
    if model == "BAdegree":
        return np.sort(by_degree[:n_hubs])
    # BAMixed: top-degree half, plus a random half drawn outside it
    n_top = n_hubs - n_hubs // 2
    top = by_degree[:n_top]
    rest = np.setdiff1d(np.arange(n), top)
    random_half = rng.choice(rest, size=n_hubs - n_top, replace=False)
    return np.sort(np.concatenate([top, random_half]))


def inject_hubs(
    g: Graph,
    signals: np.ndarray,
    model: str,
    hub_fraction: float,
    hub_strength: float,
    seed: int,
    sigma_mode: str = "row_norms",
) -> SynthInstance:
    """Perturb a hub subset of nodes with i.i.d. uniform(-u*sigma, u*sigma)
    noise, where sigma is the spread of signal-vector norms (see sigma_mode)."""
    if not 0 < hub_fraction < 1:
        raise ValueError(f"hub_fraction must be in (0, 1), got {hub_fraction}")
    signals = np.asarray(signals, dtype=np.float64)
    n = g.n_nodes
    n_hubs = int(round(hub_fraction * n))
    if n_hubs < 1 or n_hubs >= n:
        raise ValueError(f"hub count {n_hubs} must be in [1, {n - 1}]")

    hubs = _select_hubs(g, model, n_hubs, _stream(seed, "hub_select"))
    if sigma_mode == "row_norms":
        sigma = float(np.std(np.linalg.norm(signals, axis=1)))
    elif sigma_mode == "column_norms":
        sigma = float(np.std(np.linalg.norm(signals, axis=0)))
    else:
        raise ValueError(f"unknown sigma_mode {sigma_mode!r}")

    noise_rng = _stream(seed, "noise")
    bound = hub_strength * sigma
    noise = noise_rng.uniform(-bound, bound, size=(n_hubs, signals.shape[1]))
    perturbed = signals.copy()
    perturbed[hubs] += noise

    labels = np.zeros(n, dtype=bool)
    labels[hubs] = True
    return SynthInstance(
        graph=g, signals=perturbed, hub_labels=labels, clean_signals=signals
    )


def generate_instance(cfg: SynthConfig) -> SynthInstance:
    """Full pipeline: graph, smooth signals, hub injection."""
    if cfg.model == "ER":
        g = generate_er(cfg.n_nodes, cfg.er_p, cfg.seed)
    else:
        g = generate_ba(cfg.n_nodes, cfg.ba_m, cfg.seed)
    clean = generate_smooth_signals(g, cfg.n_signals, cfg.gamma, cfg.seed)
    return inject_hubs(
        g,
        clean,
        cfg.model,
        cfg.hub_fraction,
        cfg.hub_strength,
        cfg.seed,
        sigma_mode=cfg.sigma_mode,
    )
