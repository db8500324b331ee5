"""Graph representation, normalized Laplacian, spectral decomposition and
graph-signal algebra.

The graph shift operator used everywhere is the symmetric normalized
Laplacian L_n = I - D^{-1/2} A D^{-1/2}; its eigenvectors define the graph
Fourier transform (GFT) and its eigenvalues live in [0, 2].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "Graph",
    "SpectralDecomposition",
    "normalized_laplacian",
    "spectral_decompose",
    "gft",
    "igft",
    "total_variation",
    "compute_shifted_signals",
    "apply_filter",
    "filter_response",
]


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph given by its dense adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if not np.allclose(a, a.T, atol=1e-12):
            raise ValueError("adjacency must be symmetric")
        if np.any(a < 0):
            raise ValueError("edge weights must be nonnegative")
        if np.any(np.diag(a) != 0):
            raise ValueError("self loops are not allowed (nonzero diagonal)")
        object.__setattr__(self, "adjacency", a)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        """Weighted degree (strength) vector d = A 1."""
        return self.adjacency.sum(axis=1)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition L_n = U diag(eigenvalues) U^T, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.eigenvalues.shape[0]


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Return L_n = I - D^{-1/2} A D^{-1/2}.

    Isolated nodes (zero degree) use the convention D^{-1/2}_ii = 0, which
    leaves an identity row/column for that node (eigenvalue 1, localized
    eigenvector).
    """
    a = g.adjacency
    d = g.degrees
    dinv_sqrt = np.where(d > 0, d, 1.0) ** -0.5
    dinv_sqrt[d <= 0] = 0.0
    ln = np.eye(g.n_nodes) - dinv_sqrt[:, None] * a * dinv_sqrt[None, :]
    # enforce exact symmetry against floating-point drift
    return (ln + ln.T) / 2.0


def spectral_decompose(laplacian: np.ndarray) -> SpectralDecomposition:
    """Dense symmetric eigendecomposition of the normalized Laplacian."""
    laplacian = np.asarray(laplacian, dtype=np.float64)
    if not np.allclose(laplacian, laplacian.T, atol=1e-10):
        raise ValueError("laplacian must be symmetric")
    eigenvalues, eigenvectors = scipy.linalg.eigh(laplacian)
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def _check_signal(decomp_or_n, signals: np.ndarray) -> np.ndarray:
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim == 1:
        signals = signals[:, None]
    n = decomp_or_n if isinstance(decomp_or_n, int) else decomp_or_n.n_nodes
    if signals.shape[0] != n:
        raise ValueError(
            f"signal has {signals.shape[0]} rows but graph has {n} nodes"
        )
    return signals


def gft(decomp: SpectralDecomposition, signals: np.ndarray) -> np.ndarray:
    """Graph Fourier transform: U^T F."""
    signals = _check_signal(decomp, signals)
    return decomp.eigenvectors.T @ signals


def igft(decomp: SpectralDecomposition, coeffs: np.ndarray) -> np.ndarray:
    """Inverse graph Fourier transform: U F_hat."""
    coeffs = _check_signal(decomp, coeffs)
    return decomp.eigenvectors @ coeffs


def total_variation(laplacian: np.ndarray, signals: np.ndarray) -> float:
    """Quadratic form tr(F^T L F); small values mean F is smooth on the graph."""
    laplacian = np.asarray(laplacian, dtype=np.float64)
    signals = _check_signal(laplacian.shape[0], signals)
    return float(np.sum(signals * (laplacian @ signals)))


def compute_shifted_signals(
    decomp: SpectralDecomposition, signals: np.ndarray, order: int
) -> np.ndarray:
    """Stack of repeatedly shifted signals S^(t) = U diag(lambda^t) U^T F.

    Returns an array of shape (order, N, P); entry 0 is F itself.
    """
    if order < 1:
        raise ValueError(f"filter order must be >= 1, got {order}")
    signals = _check_signal(decomp, signals)
    coeffs = decomp.eigenvectors.T @ signals
    powers = decomp.eigenvalues[None, :] ** np.arange(order)[:, None]  # (T, N)
    # S^(t) = U (lambda^t * F_hat), batched over t
    return np.matmul(decomp.eigenvectors, powers[:, :, None] * coeffs[None, :, :])


def apply_filter(
    decomp: SpectralDecomposition, coefficients: np.ndarray, signals: np.ndarray
) -> np.ndarray:
    """Apply the polynomial filter sum_t h_t L_n^t spectrally: U H(Lambda) U^T F."""
    coefficients = np.asarray(coefficients, dtype=np.float64).ravel()
    signals = _check_signal(decomp, signals)
    gains = filter_response(coefficients, decomp.eigenvalues)
    return decomp.eigenvectors @ (gains[:, None] * (decomp.eigenvectors.T @ signals))


def filter_response(coefficients: np.ndarray, eigenvalues: np.ndarray) -> np.ndarray:
    """Evaluate H(lambda) = sum_t h_t lambda^t at each eigenvalue."""
    coefficients = np.asarray(coefficients, dtype=np.float64).ravel()
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64).ravel()
    # ascending-power polynomial evaluation
    return np.polyval(coefficients[::-1], eigenvalues)
