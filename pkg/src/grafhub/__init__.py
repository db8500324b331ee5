"""Hub node detection on attributed graphs via learned polynomial graph filters."""

from .graph import (
    Graph,
    SpectralDecomposition,
    apply_filter,
    compute_shifted_signals,
    filter_response,
    gft,
    igft,
    normalized_laplacian,
    spectral_decompose,
    total_variation,
)
from .solver import GrafhubConfig, GrafhubResult, SolverError, fit, objective
from .synth import SynthConfig, SynthInstance, generate_instance

__version__ = "0.1.0"

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
    "GrafhubConfig",
    "GrafhubResult",
    "SolverError",
    "fit",
    "objective",
    "SynthConfig",
    "SynthInstance",
    "generate_instance",
    "__version__",
]
