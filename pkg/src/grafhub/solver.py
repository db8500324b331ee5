"""ADMM solver for unit-norm polynomial graph-filter learning.

Splits F = F_tilde + residual with F_tilde = sum_t h_t L_n^t F, minimizing

    alpha * ||F - F_tilde||_1 + tr(F_tilde^T L_n F_tilde)   s.t. ||h||_2 = 1

via three alternating steps: an elementwise soft-threshold on the auxiliary
sparse variable Z, a T x T linear solve for h followed by projection onto the
unit sphere, and a scaled dual ascent on V.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .graph import (
    Graph,
    SpectralDecomposition,
    apply_filter,
    compute_shifted_signals,
    normalized_laplacian,
    spectral_decompose,
)

__all__ = [
    "GrafhubConfig",
    "GrafhubResult",
    "SolverError",
    "soft_threshold",
    "z_update",
    "h_update",
    "v_update",
    "objective",
    "fit",
]


class SolverError(RuntimeError):
    """Numerical failure inside the ADMM loop (singular system, blow-up)."""


@dataclass(frozen=True)
class GrafhubConfig:
    alpha: float = 1.0
    rho: float = 1.0
    filter_order: int = 4
    max_iter: int = 500
    tol: float = 1e-3  # threshold on ||h_new - h_old||^2
    seed: int = 0
    # If True, scale the dual step by rho (the unscaled-looking update);
    # default keeps the consistent scaled-ADMM convention V <- V + residual.
    dual_step_rho: bool = False

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.filter_order < 2:
            raise ValueError(f"filter_order must be >= 2, got {self.filter_order}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")


@dataclass(frozen=True)
class GrafhubResult:
    coefficients: np.ndarray
    filtered: np.ndarray
    residual: np.ndarray
    iterations: int
    converged: bool
    objective_trace: np.ndarray = field(repr=False, default=None)


def soft_threshold(x: np.ndarray, kappa: float) -> np.ndarray:
    """Elementwise prox of kappa * ||.||_1: sign(x) * max(|x| - kappa, 0)."""
    return np.sign(x) * np.maximum(np.abs(x) - kappa, 0.0)


def _filtered(shifted: np.ndarray, h: np.ndarray) -> np.ndarray:
    """sum_t h_t S^(t) for a (T, N, P) stack of shifted signals."""
    return np.tensordot(h, shifted, axes=1)


def z_update(
    signals: np.ndarray,
    shifted: np.ndarray,
    h: np.ndarray,
    dual: np.ndarray,
    alpha: float,
    rho: float,
) -> np.ndarray:
    """Sparse-residual step: soft-threshold F - sum_t h_t S^(t) - V at alpha/rho."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    return soft_threshold(signals - _filtered(shifted, h) - dual, alpha / rho)


def assemble_system(
    shifted: np.ndarray, laplacian: np.ndarray, rho: float
) -> np.ndarray:
    """T x T normal matrix of the h step:

    Y = sum_p (2 * G_p^T L G_p + rho * G_p^T G_p),  G_p = shifted[:, :, p]^T.
    """
    l_shifted = np.matmul(laplacian, shifted)
    smooth = np.tensordot(shifted, l_shifted, axes=([1, 2], [1, 2]))
    gram = np.tensordot(shifted, shifted, axes=([1, 2], [1, 2]))
    return 2.0 * smooth + rho * gram


def h_update(
    signals: np.ndarray,
    shifted: np.ndarray,
    z: np.ndarray,
    dual: np.ndarray,
    laplacian: np.ndarray,
    rho: float,
    system: np.ndarray | None = None,
    factor=None,
) -> np.ndarray:
    """Filter step: solve Y h = -b, then project onto the unit sphere.

    ``system``/``factor`` allow reusing the iteration-invariant Y and its
    Cholesky factorization across iterations.
    """
    if system is None:
        system = assemble_system(shifted, laplacian, rho)
    b = rho * np.tensordot(shifted, z - signals + dual, axes=([1, 2], [0, 1]))
    if factor is not None:
        h = scipy.linalg.cho_solve(factor, -b)
    else:
        h = _solve_spd(system, -b)
    norm = np.linalg.norm(h)
    if norm == 0 or not np.isfinite(norm):
        raise SolverError("h update produced a degenerate solution")
    return h / norm


def _solve_spd(system: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > 1e12:
        raise SolverError(
            f"h-step system is ill-conditioned (cond ~ {cond:.2e}); "
            "shifted signals are nearly collinear, try a smaller filter order"
        )
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(system), rhs)
    except scipy.linalg.LinAlgError:
        return scipy.linalg.solve(system, rhs, assume_a="sym")


def v_update(
    dual: np.ndarray,
    z: np.ndarray,
    signals: np.ndarray,
    shifted: np.ndarray,
    h: np.ndarray,
    rho: float,
    dual_step_rho: bool = False,
) -> np.ndarray:
    """Dual ascent on the primal residual Z - F + sum_t h_t S^(t)."""
    residual = z - signals + _filtered(shifted, h)
    step = rho if dual_step_rho else 1.0
    return dual + step * residual


def objective(
    signals: np.ndarray, filtered: np.ndarray, laplacian: np.ndarray, alpha: float
) -> float:
    """alpha * ||F - F_tilde||_1 + tr(F_tilde^T L_n F_tilde)."""
    sparsity = np.abs(signals - filtered).sum()
    smoothness = np.sum(filtered * (laplacian @ filtered))
    return float(alpha * sparsity + smoothness)


def fit(
    g: Graph,
    signals: np.ndarray,
    cfg: GrafhubConfig,
    decomp: SpectralDecomposition | None = None,
) -> GrafhubResult:
    """Run the full ADMM loop and return the learned filter and split signal.

    A precomputed spectral decomposition of the normalized Laplacian may be
    passed to amortize the eigendecomposition across fits on the same graph.
    """
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim == 1:
        signals = signals[:, None]
    if signals.shape[0] != g.n_nodes:
        raise ValueError(
            f"signals have {signals.shape[0]} rows for a {g.n_nodes}-node graph"
        )
    laplacian = normalized_laplacian(g)
    if decomp is None:
        decomp = spectral_decompose(laplacian)

    order = cfg.filter_order
    if not np.any(signals):
        # zero input: every unit-norm filter is optimal, objective is 0
        rng = np.random.default_rng(cfg.seed)
        h = rng.uniform(0.0, 1.0, size=order)
        h /= np.linalg.norm(h)
        zero = np.zeros_like(signals)
        return GrafhubResult(
            coefficients=h,
            filtered=zero,
            residual=zero.copy(),
            iterations=0,
            converged=True,
            objective_trace=np.zeros(0),
        )
    shifted = compute_shifted_signals(decomp, signals, order)
    system = assemble_system(shifted, laplacian, cfg.rho)
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > 1e12:
        raise SolverError(
            f"h-step system is ill-conditioned (cond ~ {cond:.2e}); "
            "shifted signals are nearly collinear, try a smaller filter order"
        )
    try:
        factor = scipy.linalg.cho_factor(system)
    except scipy.linalg.LinAlgError as exc:
        raise SolverError(f"h-step system is not positive definite: {exc}") from exc

    rng = np.random.default_rng(cfg.seed)
    h = rng.uniform(0.0, 1.0, size=order)
    h /= np.linalg.norm(h)
    dual = rng.uniform(0.0, 1.0, size=signals.shape)

    # T x T matrix with h^T smooth h = tr(F_tilde^T L F_tilde); lets the
    # objective trace be computed without an N x N matmul per iteration
    smooth = np.tensordot(shifted, np.matmul(laplacian, shifted), axes=([1, 2], [1, 2]))
    dual_step = cfg.rho if cfg.dual_step_rho else 1.0
    filt = _filtered(shifted, h)

    trace = []
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        z = soft_threshold(signals - filt - dual, cfg.alpha / cfg.rho)
        h_new = h_update(
            signals, shifted, z, dual, laplacian, cfg.rho, system=system, factor=factor
        )
        filt = _filtered(shifted, h_new)
        dual = dual + dual_step * (z - signals + filt)
        obj = float(
            cfg.alpha * np.abs(signals - filt).sum() + h_new @ smooth @ h_new
        )
        if not np.isfinite(obj):
            raise SolverError(f"objective became non-finite at iteration {iterations}")
        trace.append(obj)
        delta = float(np.sum((h_new - h) ** 2))
        h = h_new
        if delta <= cfg.tol:
            converged = True
            break

    filtered = apply_filter(decomp, h, signals)
    return GrafhubResult(
        coefficients=h,
        filtered=filtered,
        residual=signals - filtered,
        iterations=iterations,
        converged=converged,
        objective_trace=np.asarray(trace),
    )
